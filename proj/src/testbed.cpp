#include "hintscope/testbed.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <httplib.h>

#include "hintscope/browser_emulator.hpp"
#include "hintscope/crawl_engine.hpp"
#include "hintscope/filter_list.hpp"
#include "hintscope/html_scan.hpp"
#include "hintscope/record_io.hpp"
#include "hintscope/text.hpp"
#include "hintscope/url.hpp"

namespace hintscope::testbed {

using nlohmann::json;

namespace {

Page page_from_json(const json& j) {
  Page p;
  p.status = j.value("status", 200);
  p.title = j.value("title", "");
  for (const auto& l : j.value("links", json::array())) {
    p.links.push_back({l.at("href").get<std::string>(), l.value("text", "")});
  }
  p.resources = j.value("resources", std::vector<std::string>{});
  if (auto it = j.find("accept_ch"); it != j.end() && !it->is_null()) p.accept_ch = it->get<std::string>();
  if (auto it = j.find("redirect"); it != j.end() && !it->is_null()) p.redirect = it->get<std::string>();
  return p;
}

}  // namespace

Scenario Scenario::from_json(const json& j) {
  Scenario s;
  try {
    s.name = j.at("name").get<std::string>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.latency = std::chrono::milliseconds(j.value("latency_ms", 0));
    for (const auto& sj : j.value("sites", json::array())) {
      Site site;
      site.domain = to_lower(sj.at("domain").get<std::string>());
      if (auto it = sj.find("rank"); it != sj.end() && !it->is_null()) site.rank = it->get<long>();
      site.target = sj.value("target", false);
      const auto pages = sj.value("pages", json::object());
      for (const auto& [path, pj] : pages.items()) site.pages[path] = page_from_json(pj);
      s.sites.push_back(std::move(site));
    }
    s.filter_list = j.value("filter_list", std::vector<std::string>{});
    s.rba = j.value("rba", std::map<std::string, std::string>{});
    if (auto it = j.find("vantages"); it != j.end()) {
      s.vantages.clear();
      for (const auto& v : *it) s.vantages.push_back({v.at("region").get<std::string>(), v.at("isp").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("bad scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario Scenario::from_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ScenarioError(e.what());
  }
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

const Site* Scenario::find_site(std::string_view host) const {
  for (const auto& s : sites) {
    if (iequals(s.domain, host)) return &s;
  }
  return nullptr;
}

void Scenario::validate() const {
  std::set<std::string> hosts;
  for (const auto& s : sites) {
    if (!is_valid_hostname(s.domain)) throw ScenarioError("invalid site domain: " + s.domain);
    if (s.domain == kControlHost) throw ScenarioError("reserved host: " + s.domain);
    if (!hosts.insert(s.domain).second) throw ScenarioError("duplicate site: " + s.domain);
    for (const auto& [path, page] : s.pages) {
      if (path.empty() || path.front() != '/') throw ScenarioError("page path must start with '/': " + path);
      if (page.status < 100 || page.status > 599) throw ScenarioError("bad status on " + s.domain + path);
    }
  }
  if (vantages.empty()) throw ScenarioError("at least one vantage is required");
  for (const auto& s : sites) {
    for (const auto& [path, page] : s.pages) {
      auto base = Url::parse("https://" + s.domain + path);
      for (const auto& res : page.resources) {
        auto u = base ? resolve_url(*base, res) : std::nullopt;
        if (!u) throw ScenarioError("unparseable resource " + res + " on " + s.domain + path);
        const auto* target = find_site(u->host);
        if (!target || !target->pages.contains(u->path)) {
          throw ScenarioError("resource " + res + " on " + s.domain + path + " has no scenario entry");
        }
      }
    }
  }
  for (const auto& rule : filter_list) {
    if (trim(rule).empty()) throw ScenarioError("empty filter rule");
  }
}

std::string render_page(const Page& page) {
  auto esc = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  };
  std::string html = "<!doctype html>\n<html><head><title>" + esc(page.title) + "</title>\n";
  for (const auto& r : page.resources) {
    if (r.ends_with(".css")) html += "<link rel=\"stylesheet\" href=\"" + esc(r) + "\">\n";
  }
  html += "</head><body>\n";
  for (const auto& l : page.links) html += "<a href=\"" + esc(l.href) + "\">" + esc(l.text) + "</a>\n";
  for (const auto& r : page.resources) {
    if (r.ends_with(".css")) continue;
    if (r.ends_with(".js")) {
      html += "<script src=\"" + esc(r) + "\"></script>\n";
    } else if (r.ends_with(".html")) {
      html += "<iframe src=\"" + esc(r) + "\"></iframe>\n";
    } else {
      html += "<img src=\"" + esc(r) + "\" alt=\"\">\n";
    }
  }
  html += "</body></html>\n";
  return html;
}

MockServer::MockServer(Scenario scenario, int port)
    : scenario_(std::move(scenario)), server_(std::make_unique<httplib::Server>()) {
  scenario_.validate();
  server_->set_keep_alive_max_count(1);
  server_->Get(R"(.*)", [this](const httplib::Request& req, httplib::Response& res) {
    std::string host = req.get_header_value("Host");
    if (auto colon = host.rfind(':'); colon != std::string::npos) host.resize(colon);
    host = to_lower(host);
    std::map<std::string, std::string> headers;
    for (const auto& [k, v] : req.headers) headers[to_lower(k)] = v;
    int status = 404;
    std::vector<std::pair<std::string, std::string>> out_headers;
    std::string body, content_type = "text/html; charset=utf-8";
    handle(host, req.path, headers, status, out_headers, body, content_type);
    res.status = status;
    for (auto& [k, v] : out_headers) res.set_header(k, v);
    res.set_content(body, content_type);
  });
  if (port == 0) {
    port_ = server_->bind_to_any_port("127.0.0.1");
  } else {
    port_ = server_->bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ <= 0) throw ScenarioError("cannot bind mock server port " + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockServer::~MockServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void MockServer::handle(const std::string& host, const std::string& path,
                        const std::map<std::string, std::string>& headers, int& status,
                        std::vector<std::pair<std::string, std::string>>& out_headers, std::string& body,
                        std::string& content_type) {
  if (host == kControlHost) {
    if (path == "/__counters") {
      status = 200;
      content_type = "application/json";
      body = counters_json().dump();
    }
    return;
  }
  int now = ++in_flight_;
  int prev = max_in_flight_.load();
  while (now > prev && !max_in_flight_.compare_exchange_weak(prev, now)) {
  }
  {
    std::lock_guard lock(mutex_);
    ++counts_[{host, path}];
    log_.push_back({host, path, headers, ++seq_});
  }
  if (scenario_.latency.count() > 0) std::this_thread::sleep_for(scenario_.latency);
  const Site* site = scenario_.find_site(host);
  const Page* page = nullptr;
  if (site) {
    auto it = site->pages.find(path);
    if (it != site->pages.end()) page = &it->second;
  }
  if (page) {
    status = page->status;
    if (page->accept_ch) out_headers.emplace_back("Accept-CH", *page->accept_ch);
    if (page->redirect) out_headers.emplace_back("Location", *page->redirect);
    if (path.ends_with(".js")) {
      content_type = "application/javascript";
      body = "/* */\n";
    } else if (path.ends_with(".css")) {
      content_type = "text/css";
      body = "\n";
    } else if (path.ends_with(".png") || path.ends_with(".gif")) {
      content_type = "image/gif";
      body = std::string("GIF89a", 6);
    } else {
      body = render_page(*page);
    }
  } else {
    status = 404;
    body = "not found\n";
    content_type = "text/plain";
  }
  --in_flight_;
}

std::size_t MockServer::count(std::string_view host, std::string_view path) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find({to_lower(host), std::string(path)});
  return it == counts_.end() ? 0 : it->second;
}

std::size_t MockServer::total_requests() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

std::vector<LoggedRequest> MockServer::log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

json MockServer::counters_json() const {
  std::lock_guard lock(mutex_);
  json paths = json::object();
  for (const auto& [key, n] : counts_) paths[key.first + key.second] = n;
  return {{"total", log_.size()}, {"max_in_flight", max_in_flight_.load()}, {"paths", paths}};
}

void MockServer::reset_counters() {
  std::lock_guard lock(mutex_);
  counts_.clear();
  log_.clear();
  max_in_flight_ = 0;
}

namespace {

bool record_less(const CrawlRecord& a, const CrawlRecord& b) {
  return std::tie(a.vantage, a.target_domain, a.page_kind, a.url) <
         std::tie(b.vantage, b.target_domain, b.page_kind, b.url);
}

std::chrono::sys_seconds fixed_instant() {
  using namespace std::chrono;
  return sys_days{year{2023} / September / 1};
}

}  // namespace

EndToEndResult run_end_to_end(MockServer& server, const PipelineConfig& config) {
  EndToEndResult result;
  const Scenario& scenario = server.scenario();
  HttpTransportOptions topt;
  topt.loopback_port = static_cast<std::uint16_t>(server.port());
  topt.timeout = std::chrono::milliseconds(10000);
  HttpTransport transport(topt);

  const auto* profile = ProfileCatalog::builtin().find(config.profile);
  if (!profile) {
    result.error = StageError{"discover", "unknown profile " + config.profile};
    return result;
  }

  std::vector<const Site*> targets;
  for (const auto& s : scenario.sites) {
    if (s.target) targets.push_back(&s);
  }
  std::sort(targets.begin(), targets.end(), [](const Site* a, const Site* b) {
    return std::tie(a->rank, a->domain) < std::tie(b->rank, b->domain);
  });

  std::vector<CrawlTarget> crawl_targets;
  try {
    RequestHeaders headers = request_headers(*profile, GrantCache{}, "");
    if (!profile->user_agent.empty()) headers["User-Agent"] = profile->user_agent;
    TransportPageFetcher fetcher(transport, headers);
    NullSearchProvider search;
    for (const auto* s : targets) {
      auto d = discover_login(s->rank, s->domain, fetcher, &search, IndicatorSet::builtin());
      crawl_targets.push_back({s->rank, s->domain, "https://" + s->domain + "/", PageKind::start});
      if (d.login) crawl_targets.push_back({s->rank, s->domain, d.login->url, PageKind::login});
      result.discovery.push_back(std::move(d));
    }
  } catch (const std::exception& e) {
    result.error = StageError{"discover", e.what()};
    return result;
  }

  try {
    for (const auto& vantage : scenario.vantages) {
      CrawlConfig cc;
      cc.concurrency = config.concurrency;
      cc.order_seed = config.seed;
      cc.fetch_third_parties = config.fetch_third_parties;
      cc.user_agent_profile = config.profile;
      cc.vantage = vantage;
      cc.run_id = "testbed-" + scenario.name + "-" + std::to_string(config.seed);
      cc.fixed_time = fixed_instant();
      cc.throughput_cap = 50e6;
      cc.timeout = std::chrono::milliseconds(10000);
      Crawler crawler(cc, transport, *profile);
      std::mutex m;
      crawler.crawl_batch(crawl_targets, [&](const CrawlRecord& r) {
        std::lock_guard lock(m);
        result.records.push_back(r);
      });
    }
  } catch (const std::exception& e) {
    result.error = StageError{"crawl", e.what()};
    return result;
  }
  std::sort(result.records.begin(), result.records.end(), record_less);
  for (const auto& r : result.records) result.crawl_errors += r.error.has_value();

  try {
    std::string rules;
    for (const auto& r : scenario.filter_list) rules += r + "\n";
    FilterSet trackers = FilterSet::from_text(rules);
    std::map<std::string, long> ranks;
    for (const auto& s : scenario.sites) {
      if (s.rank) ranks[s.domain] = *s.rank;
    }
    std::map<std::string, RbaStatus> rba;
    for (const auto& [d, st] : scenario.rba) {
      auto parsed = parse_rba_status(st);
      if (!parsed) throw ScenarioError("bad rba status " + st);
      rba[d] = *parsed;
    }
    AnalysisOptions opt;
    opt.trackers = &trackers;
    opt.labels.ranks = &ranks;
    opt.labels.rba = &rba;
    result.report = analyze(result.records, opt);
    result.files = render_report(result.report);
  } catch (const std::exception& e) {
    result.error = StageError{"analyze", e.what()};
    return result;
  }

  if (config.workdir) {
    try {
      std::filesystem::create_directories(*config.workdir);
      std::string lines;
      for (const auto& d : result.discovery) lines += format_discovery_line(d) + "\n";
      write_file(*config.workdir + "/discovery.csv", lines);
      write_records_file(*config.workdir + "/records.jsonl", result.records);
      write_report(result.report, *config.workdir + "/report");
    } catch (const std::exception& e) {
      result.error = StageError{"analyze", std::string("writing outputs: ") + e.what()};
    }
  }
  return result;
}

namespace {

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::vector<std::string> check_expectations(const EndToEndResult& result, const json& expected) {
  std::vector<std::string> bad;
  auto expect_eq = [&bad](const std::string& what, const json& want, const json& got) {
    if (want != got) bad.push_back(what + ": expected " + want.dump() + ", got " + got.dump());
  };
  if (result.error) bad.push_back("stage " + result.error->stage + " failed: " + result.error->message);

  if (auto it = expected.find("crawl_errors"); it != expected.end()) {
    expect_eq("crawl_errors", *it, result.crawl_errors);
  }
  if (auto it = expected.find("records"); it != expected.end()) expect_eq("records", *it, result.records.size());
  if (auto it = expected.find("discovery"); it != expected.end()) {
    for (const auto& [domain, want] : it->items()) {
      auto d = std::find_if(result.discovery.begin(), result.discovery.end(),
                            [&](const DiscoveryResult& r) { return r.domain == domain; });
      if (d == result.discovery.end()) {
        bad.push_back("discovery: no result for " + domain);
        continue;
      }
      json got = d->login ? json(d->login->url) : json(nullptr);
      expect_eq("discovery " + domain, want, got);
    }
  }
  if (auto it = expected.find("page_kind_diff"); it != expected.end()) {
    const auto& d = result.report.diff;
    json got = {{"compared", d.compared},   {"excluded", d.excluded}, {"both_silent", d.both_silent},
                {"identical", d.identical}, {"different", d.different}, {"login_silent", d.login_silent}};
    for (const auto& [k, v] : it->items()) {
      if (!got.contains(k)) {
        bad.push_back("page_kind_diff: unknown key " + k);
      } else {
        expect_eq("page_kind_diff." + k, v, got[k]);
      }
    }
  }
  if (auto it = expected.find("sites"); it != expected.end()) {
    const auto& registry = HintRegistry::builtin();
    for (const auto& [domain, want] : it->items()) {
      auto p = std::find_if(result.report.build.profiles.begin(), result.report.build.profiles.end(),
                            [&](const SiteProfile& sp) { return sp.domain == domain; });
      if (p == result.report.build.profiles.end()) {
        bad.push_back("sites: no profile for " + domain);
        continue;
      }
      auto hints = [&](PageKind k) {
        auto h = p->hints_by_page_kind.find(k);
        return h == p->hints_by_page_kind.end() ? std::vector<std::string>{} : sorted(registry.names(h->second));
      };
      std::vector<std::string> tps;
      for (const auto& [tp, _] : p->requesting_third_parties()) tps.push_back(tp);
      json got = {{"max_level", p->max_level ? json(std::string(to_string(*p->max_level))) : json(nullptr)},
                  {"start_hints", hints(PageKind::start)},
                  {"login_hints", hints(PageKind::login)},
                  {"tracker_linked_third_parties", p->tracker_linked_third_parties},
                  {"requesting_third_parties", tps},
                  {"rank", p->rank ? json(*p->rank) : json(nullptr)}};
      for (const auto& [k, v] : want.items()) {
        if (!got.contains(k)) {
          bad.push_back("sites." + domain + ": unknown key " + k);
        } else if (v.is_array() && k.ends_with("hints")) {
          expect_eq("sites." + domain + "." + k, sorted(v.get<std::vector<std::string>>()), got[k]);
        } else {
          expect_eq("sites." + domain + "." + k, v, got[k]);
        }
      }
    }
  }
  if (auto it = expected.find("hint_frequency"); it != expected.end()) {
    json got = json::array();
    for (const auto& r : result.report.frequency) got.push_back({r.hint, r.count});
    expect_eq("hint_frequency", *it, got);
  }
  if (auto it = expected.find("graph_edges"); it != expected.end()) {
    json got = json::array();
    for (const auto& [s, t] : result.report.graph.edges) got.push_back({s, t});
    expect_eq("graph_edges", *it, got);
  }
  if (auto it = expected.find("graph_levels"); it != expected.end()) {
    json got = json::object();
    for (const auto& [tp, level] : result.report.graph.third_parties) got[tp] = to_string(level);
    expect_eq("graph_levels", *it, got);
  }
  if (auto it = expected.find("summary"); it != expected.end()) {
    auto s = result.files.find("summary.json");
    json got = s == result.files.end() ? json::object() : json::parse(s->second);
    for (const auto& [k, v] : it->items()) expect_eq("summary." + k, v, got.value(k, json()));
  }
  return bad;
}

}  // namespace hintscope::testbed
