#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hintscope/browser_emulator.hpp"
#include "hintscope/category_provider.hpp"
#include "hintscope/crawl_engine.hpp"
#include "hintscope/dataset_store.hpp"
#include "hintscope/filter_list.hpp"
#include "hintscope/log.hpp"
#include "hintscope/login_discovery.hpp"
#include "hintscope/record_io.hpp"
#include "hintscope/report.hpp"
#include "hintscope/text.hpp"

namespace hintscope::cli {

namespace {

namespace fs = std::filesystem;

struct Global {
  std::uint64_t seed = 0;
  std::string format = "table";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DiscoverArgs {
  std::string input;
  std::string output;
  std::string profile = "chrome-116-desktop";
  std::string indicators;
  std::size_t max_anchors = 0;
  bool no_probe = false;
  double timeout = 30;
  int loopback_port = 0;
};

struct ScanArgs {
  std::string input;
  std::string output;
  std::string manifest;
  std::string profile = "chrome-116-desktop";
  unsigned concurrency = 6;
  double rate_limit_mbit = 5.0;
  bool no_third_parties = false;
  std::string vantage_region = "unspecified";
  std::string vantage_isp = "unspecified";
  double timeout = 30;
  int retries = 0;
  bool permission = false;
  int loopback_port = 0;
};

struct IngestArgs {
  std::string input;
  std::string output;
  FieldMap map;
};

struct AnalyzeArgs {
  std::vector<std::string> records;
  std::string out_dir;
  std::string ranks;
  std::string rba;
  std::string categories;
  std::string filter_list;
  std::string groups;
  std::string registry;
  std::string suffix_list;
  double alpha = 0.05;
  std::vector<long> buckets = kDefaultRankBuckets;
  bool deprecated_invalid = false;
};

struct EmulateArgs {
  std::string profile;
  std::string accept_ch;
  std::string origin = "https://example.com";
};

struct ReportArgs {
  std::string dir;
  std::string table = "hint_frequency";
};

/// Writes to a temporary sibling and renames on success so a failing run
/// never leaves a partial file behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path) : path_(std::move(path)), tmp_(path_ + ".partial") {
    if (auto parent = fs::path(path_).parent_path(); !parent.empty()) fs::create_directories(parent);
    out_.open(tmp_, std::ios::trunc | std::ios::binary);
    if (!out_) throw std::runtime_error("cannot write " + path_);
  }
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  std::ostream& stream() { return out_; }
  void commit() {
    out_.close();
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

const BrowserProfile& require_profile(const std::string& name) {
  const auto* p = ProfileCatalog::builtin().find(name);
  if (!p) {
    std::string names;
    for (const auto& n : ProfileCatalog::builtin().names()) names += "\n  " + n;
    throw UsageError("unknown profile '" + name + "'; available profiles:" + names);
  }
  return *p;
}

HttpTransportOptions transport_options(double timeout_s, int loopback_port) {
  HttpTransportOptions opt;
  opt.timeout = std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
  if (loopback_port > 0) opt.loopback_port = static_cast<std::uint16_t>(loopback_port);
  return opt;
}

int cmd_discover(const DiscoverArgs& a, std::ostream& out, std::ostream& err) {
  const auto& profile = require_profile(a.profile);
  auto indicators = a.indicators.empty() ? IndicatorSet::builtin() : IndicatorSet::from_text(read_file(a.indicators));
  std::vector<std::pair<std::optional<long>, std::string>> domains;
  long position = 0;
  const auto text = read_file(a.input);
  for (auto line : data_lines(text)) {
    ++position;
    auto f = split_csv(line);
    if (f.size() >= 2) {
      try {
        domains.emplace_back(std::stol(f[0]), to_lower(trim(f[1])));
      } catch (const std::exception&) {
        throw UsageError("bad input line (want rank,domain): " + std::string(line));
      }
    } else {
      domains.emplace_back(position, to_lower(trim(f[0])));
    }
  }
  HttpTransport transport(transport_options(a.timeout, a.loopback_port));
  RequestHeaders headers = request_headers(profile, GrantCache{}, "");
  if (!profile.user_agent.empty()) headers["User-Agent"] = profile.user_agent;
  TransportPageFetcher fetcher(transport, headers);
  NullSearchProvider search;
  DiscoveryOptions opt;
  if (a.max_anchors) opt.max_anchors = a.max_anchors;
  opt.probe_login_path = !a.no_probe;

  std::string lines;
  std::size_t found = 0, failed = 0;
  for (const auto& [rank, domain] : domains) {
    auto r = discover_login(rank, domain, fetcher, &search, indicators, opt);
    found += r.login.has_value();
    failed += r.error.has_value();
    lines += format_discovery_line(r) + "\n";
  }
  if (a.output.empty()) {
    out << lines;
  } else {
    AtomicFile f(a.output);
    f.stream() << lines;
    f.commit();
  }
  err << "discover: " << domains.size() << " domains, " << found << " login pages, " << failed << " errors\n";
  return 0;
}

int cmd_scan(const ScanArgs& a, const Global& g, std::ostream& out, std::ostream& err) {
  const auto& profile = require_profile(a.profile);
  if (!a.permission) {
    if (a.rate_limit_mbit > 5.0) throw UsageError("--rate-limit above 5 Mbit/s requires --i-have-permission");
    if (a.retries > 0) throw UsageError("--retries requires --i-have-permission");
  }
  auto targets = parse_targets(read_file(a.input));
  CrawlConfig cc;
  cc.concurrency = a.concurrency;
  cc.throughput_cap = a.rate_limit_mbit * 1e6 / 8.0;
  cc.order_seed = g.seed;
  cc.ethics_mode = !a.permission;
  cc.fetch_third_parties = !a.no_third_parties;
  cc.user_agent_profile = profile.name;
  cc.timeout = std::chrono::milliseconds(static_cast<long>(a.timeout * 1000));
  cc.retries = a.retries;
  cc.vantage = {a.vantage_region, a.vantage_isp};
  validate(cc);

  HttpTransport transport(transport_options(a.timeout, a.loopback_port));
  Crawler crawler(cc, transport, profile);
  std::unique_ptr<AtomicFile> file;
  std::ostream* sink_stream = &out;
  if (!a.output.empty()) {
    file = std::make_unique<AtomicFile>(a.output);
    sink_stream = &file->stream();
  }
  RecordWriter writer(*sink_stream);
  auto manifest = crawler.crawl_batch(targets, [&writer](const CrawlRecord& r) { writer.write(r); });
  if (file) file->commit();
  std::string manifest_path = a.manifest;
  if (manifest_path.empty() && !a.output.empty()) manifest_path = a.output + ".manifest.json";
  if (!manifest_path.empty()) write_file(manifest_path, manifest.to_json() + "\n");
  err << "scan: " << manifest.records << " records, " << manifest.errors << " errors, run " << manifest.run_id
      << "\n";
  return 0;
}

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.input);
  if (!in) throw UsageError("cannot open " + a.input);
  std::unique_ptr<AtomicFile> file;
  std::ostream* os = &out;
  if (!a.output.empty()) {
    file = std::make_unique<AtomicFile>(a.output);
    os = &file->stream();
  }
  RecordWriter writer(*os);
  auto rep = ingest_archive(in, a.map, [&writer](CrawlRecord r) { writer.write(r); });
  if (file) file->commit();
  err << "ingest: " << rep.rows << " rows, " << rep.emitted << " records, " << rep.skipped << " skipped\n";
  for (const auto& why : rep.skip_reasons) err << "  skipped " << why << "\n";
  return 0;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  std::optional<HintRegistry> custom_registry;
  if (!a.registry.empty()) custom_registry = HintRegistry::from_csv(read_file(a.registry));
  const HintRegistry& registry = custom_registry ? *custom_registry : HintRegistry::builtin();
  std::optional<PublicSuffixList> custom_psl;
  if (!a.suffix_list.empty()) custom_psl = PublicSuffixList::parse(read_file(a.suffix_list));
  const PublicSuffixList& psl = custom_psl ? *custom_psl : PublicSuffixList::builtin();

  std::vector<CrawlRecord> records;
  for (const auto& path : a.records) {
    auto part = read_records_file(path, registry);
    records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  AnalysisOptions opt;
  opt.alpha = a.alpha;
  opt.buckets = a.buckets;
  std::sort(opt.buckets.begin(), opt.buckets.end());
  opt.rules.deprecated_counts_as_valid = !a.deprecated_invalid;
  std::optional<FilterSet> trackers;
  if (!a.filter_list.empty()) {
    auto parsed = load_filter_list(read_file(a.filter_list));
    if (!parsed.skipped.empty()) err << "filter list: skipped " << parsed.skipped.size() << " lines\n";
    trackers.emplace(std::move(parsed.rules), psl);
    opt.trackers = &*trackers;
  }
  std::map<std::string, long> ranks;
  if (!a.ranks.empty()) {
    ranks = parse_rank_list(read_file(a.ranks));
    opt.labels.ranks = &ranks;
  }
  std::map<std::string, RbaStatus> rba;
  if (!a.rba.empty()) {
    rba = parse_rba_labels(read_file(a.rba));
    opt.labels.rba = &rba;
  }
  std::optional<OfflineCategoryMap> cats;
  std::optional<CachingCategoryProvider> cached;
  if (!a.categories.empty()) {
    cats = OfflineCategoryMap::from_file(a.categories);
    cached.emplace(*cats);
    opt.labels.categories = &*cached;
  }
  if (!a.groups.empty()) {
    std::map<std::string, std::string> groups;
    const auto text = read_file(a.groups);
    for (auto line : data_lines(text)) {
      auto f = split_csv(line);
      if (f.size() < 2) throw UsageError("bad group line (want domain,group): " + std::string(line));
      groups[to_lower(trim(f[0]))] = std::string(trim(f[1]));
    }
    opt.groups = std::move(groups);
  }
  auto report = analyze(records, opt, registry, psl);
  write_report(report, a.out_dir, registry);
  out << "analyze: " << records.size() << " records, " << report.build.profiles.size() << " sites -> "
      << a.out_dir << "\n";
  return 0;
}

void print_rows(const std::vector<std::vector<std::string>>& rows, const std::string& format, std::ostream& out) {
  if (rows.empty()) return;
  const auto& header = rows.front();
  if (format == "csv") {
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_escape(r[i]);
      out << "\n";
    }
  } else if (format == "jsonl") {
    for (std::size_t k = 1; k < rows.size(); ++k) {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < header.size() && i < rows[k].size(); ++i) j[header[i]] = rows[k][i];
      out << j.dump() << "\n";
    }
  } else {
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    for (const auto& r : rows) {
      std::string line;
      for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
        line += r[i];
        if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
      }
      out << line << "\n";
    }
  }
}

int cmd_emulate(const EmulateArgs& a, const Global& g, std::ostream& out) {
  const auto& profile = require_profile(a.profile);
  const auto& registry = HintRegistry::builtin();
  auto url = Url::parse(a.origin);
  if (!url) throw UsageError("bad --origin " + a.origin);
  auto origin = url->origin();
  auto cache = receive_accept_ch(profile, GrantCache{}, origin, registry.parse_accept_ch(a.accept_ch));
  auto headers = request_headers(profile, cache, origin, registry);
  if (g.format == "jsonl") {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : headers) j[k] = v;
    out << j.dump() << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows{{"header", "value"}};
  for (const auto& [k, v] : headers) rows.push_back({k, v});
  print_rows(rows, g.format, out);
  return 0;
}

int cmd_report(const ReportArgs& a, const Global& g, std::ostream& out) {
  auto path = fs::path(a.dir) / (a.table + ".csv");
  if (!fs::exists(path)) {
    std::string names;
    for (const auto& e : fs::directory_iterator(a.dir)) {
      if (e.path().extension() == ".csv") names += " " + e.path().stem().string();
    }
    throw UsageError("no table '" + a.table + "' in " + a.dir + "; available:" + names);
  }
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(path.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(split_csv(line));
  }
  print_rows(rows, g.format, out);
  return 0;
}

std::string env_name(const std::string& sub, const std::string& opt) {
  std::string name = "HINTSCOPE_";
  if (!sub.empty()) name += sub + "_";
  name += opt;
  for (auto& c : name) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

/// Gives every long option of `app` an environment override.
void add_env_overrides(CLI::App& app, const std::string& sub) {
  for (auto* opt : app.get_options()) {
    if (opt->get_lnames().empty() || opt->get_name() == "--help" || opt->get_name() == "--config") continue;
    opt->envname(env_name(sub, opt->get_lnames().front()));
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Client hints measurement toolkit", "hintscope"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; [subcommand] sections set subcommand options");
  Global g;
  app.add_option("--seed", g.seed, "Seed for crawl ordering");
  app.add_option("--format", g.format, "Output format for printed tables")
      ->check(CLI::IsMember({"table", "csv", "jsonl"}));

  DiscoverArgs da;
  auto* discover = app.add_subcommand("discover", "Find login pages for a rank,domain list");
  discover->add_option("input", da.input, "rank,domain lines")->required()->check(CLI::ExistingFile);
  discover->add_option("-o,--output", da.output, "Output file (default stdout)");
  discover->add_option("--profile", da.profile, "Browser profile for request headers");
  discover->add_option("--indicators", da.indicators, "Indicator word file")->check(CLI::ExistingFile);
  discover->add_option("--max-anchors", da.max_anchors, "Consider at most N anchors per page");
  discover->add_flag("--no-probe", da.no_probe, "Do not probe /login");
  discover->add_option("--timeout", da.timeout, "Per-request timeout in seconds")->check(CLI::PositiveNumber);
  discover->add_option("--test-loopback-port", da.loopback_port)->group("");

  ScanArgs sa;
  auto* scan = app.add_subcommand("scan", "Crawl start/login pages and record Accept-CH");
  scan->add_option("input", sa.input, "Discovery output or rank,domain,url,page_kind lines")
      ->required()
      ->check(CLI::ExistingFile);
  scan->add_option("-o,--output", sa.output, "Record file (JSONL, default stdout)");
  scan->add_option("--manifest", sa.manifest, "Run manifest path (default <output>.manifest.json)");
  scan->add_option("--profile", sa.profile, "Browser profile presented to servers");
  scan->add_option("--concurrency", sa.concurrency, "Targets in flight")->check(CLI::PositiveNumber);
  scan->add_option("--rate-limit", sa.rate_limit_mbit, "Throughput cap in Mbit/s")->check(CLI::PositiveNumber);
  scan->add_flag("--no-third-parties", sa.no_third_parties, "Skip third-party resource fetches");
  scan->add_option("--vantage-region", sa.vantage_region, "Region label stored in records");
  scan->add_option("--vantage-isp", sa.vantage_isp, "ISP label stored in records");
  scan->add_option("--timeout", sa.timeout, "Per-request timeout in seconds")->check(CLI::PositiveNumber);
  scan->add_option("--retries", sa.retries, "Retries after transport errors (needs --i-have-permission)")
      ->check(CLI::NonNegativeNumber);
  scan->add_flag("--i-have-permission", sa.permission, "Lift the ethics limits (single request, 5 Mbit/s)");
  scan->add_option("--test-loopback-port", sa.loopback_port)->group("");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Convert an external header dump into crawl records");
  ingest->add_option("input", ia.input, "JSONL rows")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--output", ia.output, "Record file (default stdout)");
  ingest->add_option("--url-field", ia.map.url);
  ingest->add_option("--timestamp-field", ia.map.timestamp);
  ingest->add_option("--headers-field", ia.map.headers);
  ingest->add_option("--accept-ch-header", ia.map.accept_ch_header);
  ingest->add_option("--status-field", ia.map.status);
  ingest->add_option("--rank-field", ia.map.rank);
  ingest->add_option("--run-id", ia.map.run_id);
  ingest->add_option("--vantage-region", ia.map.vantage.region);
  ingest->add_option("--vantage-isp", ia.map.vantage.isp);

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "Build report tables from crawl records");
  analyze_cmd->add_option("records", aa.records, "Record files")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("-o,--out", aa.out_dir, "Report directory")->required();
  analyze_cmd->add_option("--ranks", aa.ranks, "rank,domain list")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--rba", aa.rba, "domain,status labels")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--categories", aa.categories, "domain,category;... map")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--filter-list", aa.filter_list, "Adblock-syntax tracker list")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--groups", aa.groups, "domain,group labels for chi-squared tests")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--registry", aa.registry, "Hint registry CSV")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--suffix-list", aa.suffix_list, "Public suffix list")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--alpha", aa.alpha, "Significance level");
  analyze_cmd->add_option("--buckets", aa.buckets, "Rank bucket thresholds")->delimiter(',');
  analyze_cmd->add_flag("--deprecated-invalid", aa.deprecated_invalid, "Do not count deprecated hints");

  EmulateArgs ea;
  auto* emulate = app.add_subcommand("emulate", "Show the hint headers a browser profile would send");
  emulate->add_option("profile", ea.profile, "Profile name, e.g. chrome-116-desktop")->required();
  emulate->add_option("accept_ch", ea.accept_ch, "Accept-CH value received from the origin");
  emulate->add_option("--origin", ea.origin, "Origin that sent Accept-CH");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Print a table from a report directory");
  report->add_option("dir", ra.dir, "Report directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--table", ra.table, "Table name (file stem)");

  add_env_overrides(app, "");
  for (auto* sub : app.get_subcommands({})) {
    sub->fallthrough();
    add_env_overrides(*sub, sub->get_name());
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*discover) return cmd_discover(da, out, err);
    if (*scan) return cmd_scan(sa, g, out, err);
    if (*ingest) return cmd_ingest(ia, out, err);
    if (*analyze_cmd) return cmd_analyze(aa, out, err);
    if (*emulate) return cmd_emulate(ea, g, out);
    if (*report) return cmd_report(ra, g, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hintscope::cli
