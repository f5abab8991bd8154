#include "hintscope/dataset_store.hpp"

#include <algorithm>
#include <istream>

#include <json.hpp>

#include "hintscope/log.hpp"
#include "hintscope/login_discovery.hpp"
#include "hintscope/text.hpp"
#include "hintscope/url.hpp"

namespace hintscope {

std::string_view to_string(RbaStatus status) {
  switch (status) {
    case RbaStatus::rba: return "rba";
    case RbaStatus::no_rba: return "no-rba";
    case RbaStatus::unknown: break;
  }
  return "unknown";
}

std::optional<RbaStatus> parse_rba_status(std::string_view text) {
  auto t = to_lower(trim(text));
  std::replace(t.begin(), t.end(), '_', '-');
  if (t == "rba" || t == "yes" || t == "true") return RbaStatus::rba;
  if (t == "no-rba" || t == "no" || t == "false") return RbaStatus::no_rba;
  if (t == "unknown" || t.empty()) return RbaStatus::unknown;
  return std::nullopt;
}

HintSet SiteProfile::all_hints() const {
  HintSet out;
  for (const auto& [kind, hints] : hints_by_page_kind) out.insert(hints.begin(), hints.end());
  return out;
}

std::map<std::string, HintSet> SiteProfile::requesting_third_parties() const {
  std::map<std::string, HintSet> out;
  for (const auto& [kind, tps] : third_party_hints) {
    for (const auto& [domain, hints] : tps) {
      if (!hints.empty()) out[domain].insert(hints.begin(), hints.end());
    }
  }
  return out;
}

void SiteProfile::recompute_max_level(const HintRegistry& registry) {
  max_level = registry.max_level(all_hints());
}

void merge_profile(SiteProfile& into, const SiteProfile& from, const HintRegistry& registry) {
  if (!into.rank || (from.rank && *from.rank < *into.rank)) into.rank = from.rank;
  for (const auto& [kind, hints] : from.hints_by_page_kind) {
    into.hints_by_page_kind[kind].insert(hints.begin(), hints.end());
  }
  into.page_kinds_ok.insert(from.page_kinds_ok.begin(), from.page_kinds_ok.end());
  if (!into.categories) into.categories = from.categories;
  if (into.rba_status == RbaStatus::unknown) into.rba_status = from.rba_status;
  std::set<std::string> trackers(into.tracker_linked_third_parties.begin(),
                                 into.tracker_linked_third_parties.end());
  trackers.insert(from.tracker_linked_third_parties.begin(), from.tracker_linked_third_parties.end());
  into.tracker_linked_third_parties.assign(trackers.begin(), trackers.end());
  for (const auto& [kind, tps] : from.third_party_hints) {
    for (const auto& [domain, hints] : tps) {
      into.third_party_hints[kind][domain].insert(hints.begin(), hints.end());
    }
  }
  into.unrecognized_tokens.insert(from.unrecognized_tokens.begin(), from.unrecognized_tokens.end());
  into.vantages.insert(from.vantages.begin(), from.vantages.end());
  into.recompute_max_level(registry);
}

namespace {

std::string domain_key(std::string_view domain, const PublicSuffixList& psl) {
  auto lowered = to_lower(trim(domain));
  if (auto reg = psl.try_registrable_domain(lowered)) return *reg;
  return lowered;
}

}  // namespace

ProfileBuildReport build_profiles(const std::vector<CrawlRecord>& records, const HintRegistry& registry,
                                  const FilterSet* trackers, const PublicSuffixList& psl) {
  ProfileBuildReport report;
  std::map<std::string, SiteProfile> by_domain;
  std::map<std::string, std::set<std::string>> tracker_sets;
  for (const auto& r : records) {
    ++report.records;
    auto key = domain_key(r.target_domain, psl);
    if (r.page_kind == PageKind::login && !validate_login_domain(r.url, key, psl)) {
      ++report.login_domain_mismatches;
      continue;
    }
    auto& p = by_domain[key];
    p.domain = key;
    if (r.rank && (!p.rank || *r.rank < *p.rank)) p.rank = r.rank;
    p.vantages.insert(r.vantage);
    if (!r.ok()) {
      ++report.failed_records;
      continue;
    }
    p.page_kinds_ok.insert(r.page_kind);
    auto& hints = p.hints_by_page_kind[r.page_kind];
    if (r.accept_ch) {
      hints.insert(r.accept_ch->recognized.begin(), r.accept_ch->recognized.end());
      for (const auto& tok : r.accept_ch->unrecognized) p.unrecognized_tokens.insert(to_lower(tok));
    }
    for (const auto& tp : r.third_parties) {
      if (tp.error) continue;
      auto& tp_hints = p.third_party_hints[r.page_kind][tp.domain];
      if (tp.accept_ch) tp_hints.insert(tp.accept_ch->recognized.begin(), tp.accept_ch->recognized.end());
      if (trackers && trackers->match(tp.resource_url).is_tracker) tracker_sets[key].insert(tp.domain);
    }
  }
  for (auto& [key, p] : by_domain) {
    auto it = tracker_sets.find(key);
    if (it != tracker_sets.end()) p.tracker_linked_third_parties.assign(it->second.begin(), it->second.end());
    p.recompute_max_level(registry);
    report.profiles.push_back(std::move(p));
  }
  return report;
}

namespace {

const nlohmann::json* find_field(const nlohmann::json& row, const std::string& name) {
  auto it = row.find(name);
  if (it == row.end() || it->is_null()) return nullptr;
  return &*it;
}

std::optional<std::vector<std::string>> header_values(const nlohmann::json& headers, std::string_view name) {
  std::vector<std::string> out;
  auto take = [&out](const nlohmann::json& v) {
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& e : v) {
        if (e.is_string()) out.push_back(e.get<std::string>());
      }
    }
  };
  if (headers.is_object()) {
    for (const auto& [k, v] : headers.items()) {
      if (iequals(k, name)) take(v);
    }
  } else if (headers.is_array()) {
    for (const auto& h : headers) {
      if (!h.is_object()) continue;
      auto n = h.find("name");
      auto v = h.find("value");
      if (n != h.end() && n->is_string() && v != h.end() && iequals(n->get<std::string>(), name)) take(*v);
    }
  } else {
    return std::nullopt;
  }
  return out;
}

}  // namespace

IngestReport ingest_archive(std::istream& in, const FieldMap& map,
                            const std::function<void(CrawlRecord)>& sink, const HintRegistry& registry,
                            const PublicSuffixList& psl) {
  IngestReport report;
  auto skip = [&report](std::size_t line_no, std::string why) {
    ++report.skipped;
    if (report.skip_reasons.size() < 20) {
      report.skip_reasons.push_back("line " + std::to_string(line_no) + ": " + std::move(why));
    }
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++report.rows;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      skip(line_no, "not JSON");
      continue;
    }
    if (!row.is_object()) {
      skip(line_no, "not an object");
      continue;
    }
    const auto* url_f = find_field(row, map.url);
    const auto* ts_f = find_field(row, map.timestamp);
    const auto* hdr_f = find_field(row, map.headers);
    if (!url_f || !url_f->is_string()) {
      skip(line_no, "missing " + map.url);
      continue;
    }
    if (!ts_f) {
      skip(line_no, "missing " + map.timestamp);
      continue;
    }
    if (!hdr_f) {
      skip(line_no, "missing " + map.headers);
      continue;
    }
    auto url = Url::parse(url_f->get<std::string>());
    if (!url) {
      skip(line_no, "bad url");
      continue;
    }
    auto domain = psl.try_registrable_domain(url->host);
    if (!domain) {
      skip(line_no, "no registrable domain for " + url->host);
      continue;
    }
    std::optional<std::chrono::sys_seconds> ts;
    if (ts_f->is_string()) {
      ts = parse_timestamp(ts_f->get<std::string>());
    } else if (ts_f->is_number_integer()) {
      ts = std::chrono::sys_seconds{std::chrono::seconds{ts_f->get<long long>()}};
    }
    if (!ts) {
      skip(line_no, "bad timestamp");
      continue;
    }
    auto values = header_values(*hdr_f, map.accept_ch_header);
    if (!values) {
      skip(line_no, "headers field is neither object nor array");
      continue;
    }
    CrawlRecord r;
    r.run_id = map.run_id;
    r.target_domain = *domain;
    r.url = url->str();
    r.page_kind = PageKind::start;
    r.vantage = map.vantage;
    r.timestamp = *ts;
    r.status = 200;
    if (const auto* st = find_field(row, map.status); st && st->is_number_integer()) r.status = st->get<int>();
    if (const auto* rk = find_field(row, map.rank); rk && rk->is_number_integer()) r.rank = rk->get<long>();
    if (!values->empty()) r.accept_ch = registry.parse_accept_ch(*values);
    ++report.emitted;
    sink(std::move(r));
  }
  return report;
}

namespace {

std::map<std::string, SiteProfile> collapse(const std::vector<SiteProfile>& in, const HintRegistry& registry,
                                            const PublicSuffixList& psl, std::string_view side) {
  std::map<std::string, SiteProfile> out;
  for (const auto& p : in) {
    auto key = domain_key(p.domain, psl);
    auto [it, inserted] = out.try_emplace(key, p);
    if (inserted) {
      it->second.domain = key;
    } else {
      log::warn("duplicate domain " + key + " in dataset " + std::string(side) + "; merging");
      merge_profile(it->second, p, registry);
    }
  }
  return out;
}

}  // namespace

std::vector<AlignedPair> align_datasets(const std::vector<SiteProfile>& a, const std::vector<SiteProfile>& b,
                                        const HintRegistry& registry, const PublicSuffixList& psl) {
  auto ca = collapse(a, registry, psl, "a");
  auto cb = collapse(b, registry, psl, "b");
  std::vector<AlignedPair> out;
  for (auto& [domain, pa] : ca) {
    auto it = cb.find(domain);
    if (it != cb.end()) out.push_back({domain, std::move(pa), std::move(it->second)});
  }
  return out;
}

std::map<std::string, long> parse_rank_list(std::string_view text) {
  std::map<std::string, long> out;
  long position = 0;
  for (auto line : data_lines(text)) {
    ++position;
    auto fields = split_csv(line);
    std::string domain;
    long rank = position;
    if (fields.size() >= 2) {
      try {
        rank = std::stol(fields[0]);
      } catch (const std::exception&) {
        throw std::runtime_error("bad rank line: " + std::string(line));
      }
      domain = to_lower(trim(fields[1]));
    } else {
      domain = to_lower(trim(fields[0]));
    }
    out.try_emplace(domain, rank);
  }
  return out;
}

std::map<std::string, RbaStatus> parse_rba_labels(std::string_view text) {
  std::map<std::string, RbaStatus> out;
  for (auto line : data_lines(text)) {
    auto fields = split_csv(line);
    auto status = fields.size() >= 2 ? parse_rba_status(fields[1]) : std::nullopt;
    if (!status) throw std::runtime_error("bad RBA label line: " + std::string(line));
    out[to_lower(trim(fields[0]))] = *status;
  }
  return out;
}

void join_labels(std::vector<SiteProfile>& profiles, const LabelSources& sources) {
  for (auto& p : profiles) {
    if (sources.ranks) {
      auto it = sources.ranks->find(p.domain);
      if (it != sources.ranks->end()) p.rank = it->second;
    }
    if (sources.rba) {
      auto it = sources.rba->find(p.domain);
      p.rba_status = it != sources.rba->end() ? it->second : RbaStatus::unknown;
    }
    if (sources.categories) {
      try {
        p.categories = sources.categories->lookup(p.domain);
      } catch (const CategoryError& e) {
        p.categories.reset();
        log::warn("category lookup failed for " + p.domain + ": " + e.what());
      }
    }
  }
}

}  // namespace hintscope
