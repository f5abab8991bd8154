#include "hintscope/report.hpp"

#include <filesystem>

#include <json.hpp>

#include "hintscope/text.hpp"

namespace hintscope {

AnalysisReport analyze(const std::vector<CrawlRecord>& records, const AnalysisOptions& options,
                       const HintRegistry& registry, const PublicSuffixList& psl) {
  AnalysisReport rep;
  std::set<std::string> runs;
  for (const auto& r : records) runs.insert(r.run_id);
  rep.run_ids.assign(runs.begin(), runs.end());

  rep.build = build_profiles(records, registry, options.trackers, psl);
  auto& profiles = rep.build.profiles;
  join_labels(profiles, options.labels);

  rep.frequency = hint_frequency(profiles, registry);
  rep.adoption = adoption_by_rank_bucket(profiles, options.buckets, true, registry, options.rules);
  rep.over_time = adoption_over_time(records, options.buckets, registry, options.rules);
  rep.diff = page_kind_diff(profiles, registry, options.rules);
  rep.graph = build_interconnection_graph(profiles, registry);
  rep.login_graph = build_interconnection_graph(profiles, registry, PageKind::login);
  rep.vantages = per_vantage_counts(records, registry, options.rules);
  rep.misspellings = misspelling_report(profiles, registry, options.misspelling_top_n);
  rep.levels = level_by_category(profiles);

  std::map<std::string, std::string> grouping;
  if (options.groups) {
    grouping = *options.groups;
  } else {
    for (const auto& p : profiles) {
      if (p.rba_status != RbaStatus::unknown) grouping[p.domain] = std::string(to_string(p.rba_status));
    }
  }
  if (!grouping.empty()) {
    try {
      rep.comparison = group_comparison(profiles, grouping, true, options.alpha, registry);
    } catch (const StatsError& e) {
      rep.notes.push_back(std::string("group comparison skipped: ") + e.what());
    }
  }
  return rep;
}

namespace {

std::string fx(double v) { return format_fixed(v, 4); }

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

void stat_row(std::string& out, const StatResult& r, std::string_view kind) {
  out += std::string(kind) + "," + csv_escape(r.label) + "," + csv_escape(join(r.groups, ';')) + "," +
         fx(r.chi2) + "," + std::to_string(r.dof) + "," + format_p(r.p) + ",";
  if (r.p_adjusted) out += format_p(*r.p_adjusted);
  char buf[64];
  std::snprintf(buf, sizeof buf, ",%.17g", r.p);
  out += buf;
  out += "\n";
}

std::string stats_csv(const std::optional<SummaryStats>& s) {
  if (!s) return ",,0";
  return fx(s->median) + "," + fx(s->sd) + "," + std::to_string(s->n);
}

}  // namespace

std::map<std::string, std::string> render_report(const AnalysisReport& rep, const HintRegistry& registry) {
  std::map<std::string, std::string> files;

  nlohmann::ordered_json summary;
  summary["runs"] = rep.run_ids;
  summary["records"] = rep.build.records;
  summary["failed_records"] = rep.build.failed_records;
  summary["login_domain_mismatches"] = rep.build.login_domain_mismatches;
  summary["sites"] = rep.build.profiles.size();
  std::size_t adopting = 0;
  for (const auto& p : rep.build.profiles) adopting += !p.all_hints().empty();
  summary["sites_requesting_hints"] = adopting;
  summary["notes"] = rep.notes;
  if (rep.comparison) summary["comparison_notes"] = rep.comparison->notes;
  files["summary.json"] = summary.dump(2) + "\n";

  std::string freq = "rank,hint,level,count,share\n";
  for (std::size_t i = 0; i < rep.frequency.size(); ++i) {
    const auto& r = rep.frequency[i];
    const auto* d = registry.find(r.hint);
    freq += std::to_string(i + 1) + "," + r.hint + "," + (d ? std::string(to_string(d->level)) : "") + "," +
            std::to_string(r.count) + "," + fx(r.share) + "\n";
  }
  files["hint_frequency.csv"] = freq;

  std::string adoption =
      "threshold,sites,first_party,first_party_pct,third_party,third_party_pct,with_third_party,"
      "with_third_party_pct\n";
  for (const auto& r : rep.adoption) {
    adoption += std::to_string(r.threshold) + "," + std::to_string(r.sites) + "," + std::to_string(r.first_party) +
                "," + fx(r.first_party_pct) + ",";
    adoption += r.third_party ? std::to_string(*r.third_party) + "," + fx(*r.third_party_pct) : ",";
    adoption += ",";
    adoption += r.with_third_party ? std::to_string(*r.with_third_party) + "," + fx(*r.with_third_party_pct) : ",";
    adoption += "\n";
  }
  files["adoption_by_rank.csv"] = adoption;

  std::string over_time = "month,bucket,sites,adopting,pct\n";
  for (const auto& p : rep.over_time) {
    over_time += p.month + "," + p.bucket + "," + std::to_string(p.sites) + "," + std::to_string(p.adopting) + "," +
                 fx(p.pct) + "\n";
  }
  files["adoption_over_time.csv"] = over_time;

  const auto& d = rep.diff;
  std::string diff = "metric,value\n";
  diff += "compared," + std::to_string(d.compared) + "\n";
  diff += "excluded," + std::to_string(d.excluded) + "\n";
  diff += "both_silent," + std::to_string(d.both_silent) + "\n";
  diff += "identical," + std::to_string(d.identical) + "\n";
  diff += "different," + std::to_string(d.different) + "\n";
  diff += "login_silent," + std::to_string(d.login_silent) + "\n";
  diff += "identical_pct," + fx(d.identical_pct) + "\n";
  diff += "different_pct," + fx(d.different_pct) + "\n";
  diff += "login_silent_among_different_pct," + fx(d.login_silent_among_different_pct) + "\n";
  files["page_kind_diff.csv"] = diff;
  files["page_kind_stats.csv"] = "page_kind,median,sd,n\nstart," + stats_csv(d.start_stats) + "\nlogin," +
                                 stats_csv(d.login_stats) + "\n";

  std::string levels = "category,sites,none";
  for (int l = 0; l < kHintLevelCount; ++l) levels += "," + std::string(to_string(static_cast<HintLevel>(l)));
  levels += "\n";
  for (const auto& r : rep.levels) {
    levels += csv_escape(r.category) + "," + std::to_string(r.sites) + "," + std::to_string(r.none);
    for (auto n : r.by_level) levels += "," + std::to_string(n);
    levels += "\n";
  }
  files["level_by_category.csv"] = levels;

  std::string stats = "kind,test,groups,chi2,dof,p,p_adjusted,p_exact\n";
  if (rep.comparison) {
    for (const auto& t : rep.comparison->tests) {
      stat_row(stats, t.omnibus, "omnibus");
      for (const auto& pw : t.pairwise) stat_row(stats, pw, "pairwise");
    }
  }
  files["group_stats.csv"] = stats;

  files["graph_edges.csv"] = rep.graph.edge_list_csv();
  files["graph.dot"] = rep.graph.to_dot();
  files["graph_login_edges.csv"] = rep.login_graph.edge_list_csv();

  std::string miss = "token,sites,suggestion\n";
  for (const auto& m : rep.misspellings) {
    miss += csv_escape(m.token) + "," + std::to_string(m.sites) + "," + (m.suggestion ? *m.suggestion : "") + "\n";
  }
  files["misspellings.csv"] = miss;

  std::string vant = "region,isp,sites,adopting\n";
  for (const auto& v : rep.vantages) {
    vant += csv_escape(v.vantage.region) + "," + csv_escape(v.vantage.isp) + "," + std::to_string(v.sites) + "," +
            std::to_string(v.adopting) + "\n";
  }
  files["vantages.csv"] = vant;

  std::string sites = "domain,rank,rba,categories,start_hints,login_hints,max_level,trackers,requesting_third_parties\n";
  for (const auto& p : rep.build.profiles) {
    auto kind_hints = [&](PageKind k) {
      auto it = p.hints_by_page_kind.find(k);
      return it == p.hints_by_page_kind.end() ? std::string() : join(registry.names(it->second), ';');
    };
    std::vector<std::string> tps;
    for (const auto& [dom, h] : p.requesting_third_parties()) tps.push_back(dom);
    sites += csv_escape(p.domain) + "," + (p.rank ? std::to_string(*p.rank) : "") + "," +
             std::string(to_string(p.rba_status)) + "," + csv_escape(p.categories ? join(*p.categories, ';') : "") +
             "," + csv_escape(kind_hints(PageKind::start)) + "," + csv_escape(kind_hints(PageKind::login)) + "," +
             (p.max_level ? std::string(to_string(*p.max_level)) : "none") + "," +
             csv_escape(join(p.tracker_linked_third_parties, ';')) + "," + csv_escape(join(tps, ';')) + "\n";
  }
  files["sites.csv"] = sites;
  return files;
}

void write_report(const AnalysisReport& report, const std::string& dir, const HintRegistry& registry) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : render_report(report, registry)) {
    write_file((std::filesystem::path(dir) / name).string(), content);
  }
}

}  // namespace hintscope
