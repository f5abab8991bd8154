#include "hintscope/analytics.hpp"

#include <algorithm>
#include <cstdio>

#include "hintscope/text.hpp"

namespace hintscope {

namespace {

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

bool requests_counted(const HintSet& hints, const HintRegistry& registry, const CountingRules& rules) {
  return !registry.counted(hints, rules).empty();
}

}  // namespace

std::vector<HintFrequencyRow> hint_frequency(const std::vector<SiteProfile>& profiles,
                                             const HintRegistry& registry, const ProfileFilter& filter) {
  std::map<HintId, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& p : profiles) {
    if (filter && !filter(p)) continue;
    ++total;
    for (auto id : p.all_hints()) ++counts[id];
  }
  std::vector<HintFrequencyRow> rows;
  for (const auto& [id, n] : counts) {
    rows.push_back({registry.at(id).header_name, n, static_cast<double>(n) / static_cast<double>(total)});
  }
  std::sort(rows.begin(), rows.end(), [](const HintFrequencyRow& a, const HintFrequencyRow& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.hint < b.hint;
  });
  return rows;
}

std::vector<AdoptionRow> adoption_by_rank_bucket(const std::vector<SiteProfile>& profiles,
                                                 const std::vector<long>& buckets, bool include_third_party,
                                                 const HintRegistry& registry, const CountingRules& rules) {
  if (!std::is_sorted(buckets.begin(), buckets.end())) throw StatsError("rank buckets must be ascending");
  std::vector<AdoptionRow> rows;
  for (long threshold : buckets) {
    AdoptionRow row;
    row.threshold = threshold;
    std::size_t tp = 0, either = 0;
    for (const auto& p : profiles) {
      if (!p.rank || *p.rank > threshold) continue;
      ++row.sites;
      bool own = requests_counted(p.all_hints(), registry, rules);
      bool third = false;
      for (const auto& [domain, hints] : p.requesting_third_parties()) {
        if (requests_counted(hints, registry, rules)) {
          third = true;
          break;
        }
      }
      row.first_party += own;
      tp += third;
      either += own || third;
    }
    if (row.sites == 0) continue;
    row.first_party_pct = pct(row.first_party, row.sites);
    if (include_third_party) {
      row.third_party = tp;
      row.third_party_pct = pct(tp, row.sites);
      row.with_third_party = either;
      row.with_third_party_pct = pct(either, row.sites);
    }
    rows.push_back(row);
  }
  return rows;
}

PageKindDiff page_kind_diff(const std::vector<SiteProfile>& profiles, const HintRegistry& registry,
                            const CountingRules& rules) {
  PageKindDiff d;
  std::vector<double> start_counts, login_counts;
  for (const auto& p : profiles) {
    if (!p.page_kinds_ok.contains(PageKind::start) || !p.page_kinds_ok.contains(PageKind::login)) {
      ++d.excluded;
      continue;
    }
    auto get = [&](PageKind k) {
      auto it = p.hints_by_page_kind.find(k);
      return it == p.hints_by_page_kind.end() ? HintSet{} : registry.counted(it->second, rules);
    };
    auto start = get(PageKind::start);
    auto login = get(PageKind::login);
    if (start.empty() && login.empty()) {
      ++d.both_silent;
      continue;
    }
    ++d.compared;
    if (start == login) {
      ++d.identical;
    } else {
      ++d.different;
      if (login.empty()) ++d.login_silent;
    }
    if (!start.empty()) start_counts.push_back(static_cast<double>(start.size()));
    if (!login.empty()) login_counts.push_back(static_cast<double>(login.size()));
  }
  d.identical_pct = pct(d.identical, d.compared);
  d.different_pct = pct(d.different, d.compared);
  d.login_silent_among_different_pct = pct(d.login_silent, d.different);
  d.start_stats = summarize(std::move(start_counts));
  d.login_stats = summarize(std::move(login_counts));
  return d;
}

std::vector<AdoptionPoint> adoption_over_time(const std::vector<CrawlRecord>& records,
                                              const std::vector<long>& buckets, const HintRegistry& registry,
                                              const CountingRules& rules) {
  struct Site {
    std::optional<long> rank;
    bool adopts = false;
  };
  std::map<std::string, std::map<std::string, Site>> months;
  for (const auto& r : records) {
    if (r.page_kind != PageKind::start || !r.ok()) continue;
    auto ymd = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(r.timestamp)};
    char month[16];
    std::snprintf(month, sizeof month, "%04d-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()));
    auto& site = months[month][to_lower(r.target_domain)];
    if (r.rank && (!site.rank || *r.rank < *site.rank)) site.rank = r.rank;
    if (r.accept_ch && requests_counted(r.accept_ch->recognized, registry, rules)) site.adopts = true;
  }
  std::vector<AdoptionPoint> out;
  for (const auto& [month, sites] : months) {
    auto emit = [&](std::string label, const std::function<bool(const Site&)>& in_bucket) {
      AdoptionPoint pt{month, std::move(label)};
      for (const auto& [domain, s] : sites) {
        if (!in_bucket(s)) continue;
        ++pt.sites;
        pt.adopting += s.adopts;
      }
      if (pt.sites == 0) return;
      pt.pct = pct(pt.adopting, pt.sites);
      out.push_back(std::move(pt));
    };
    for (long t : buckets) {
      emit(std::to_string(t), [t](const Site& s) { return s.rank && *s.rank <= t; });
    }
    emit("all", [](const Site&) { return true; });
  }
  return out;
}

std::string InterconnectionGraph::edge_list_csv() const {
  std::string out = "site,third_party,level\n";
  for (const auto& [site, tp] : edges) {
    out += csv_escape(site) + "," + csv_escape(tp) + "," + std::string(to_string(third_parties.at(tp))) + "\n";
  }
  return out;
}

std::string InterconnectionGraph::to_dot() const {
  std::string out = "graph interconnection {\n";
  for (const auto& s : sites) out += "  \"" + s + "\" [shape=box, kind=site];\n";
  for (const auto& [tp, level] : third_parties) {
    out += "  \"" + tp + "\" [shape=ellipse, kind=third_party, level=\"" + std::string(to_string(level)) + "\"];\n";
  }
  for (const auto& [s, tp] : edges) out += "  \"" + s + "\" -- \"" + tp + "\";\n";
  out += "}\n";
  return out;
}

InterconnectionGraph build_interconnection_graph(const std::vector<SiteProfile>& profiles,
                                                 const HintRegistry& registry,
                                                 std::optional<PageKind> page_kind) {
  InterconnectionGraph g;
  std::map<std::string, HintSet> tp_hints;
  for (const auto& p : profiles) {
    for (const auto& [kind, tps] : p.third_party_hints) {
      if (page_kind && kind != *page_kind) continue;
      for (const auto& [domain, hints] : tps) {
        if (hints.empty() || domain == p.domain) continue;
        g.sites.insert(p.domain);
        g.edges.emplace(p.domain, domain);
        tp_hints[domain].insert(hints.begin(), hints.end());
      }
    }
  }
  for (const auto& [domain, hints] : tp_hints) g.third_parties[domain] = *registry.max_level(hints);
  // A domain that is both a crawled site and a third party would break
  // bipartiteness in the node sets; the third-party role wins there.
  for (const auto& [domain, level] : g.third_parties) {
    if (g.sites.contains(domain)) {
      g.sites.erase(domain);
      std::erase_if(g.edges, [&](const auto& e) { return e.first == domain; });
    }
  }
  return g;
}

namespace {

std::string pair_label(const std::string& a, const std::string& b) { return a + " vs " + b; }

}  // namespace

GroupComparison group_comparison(const std::vector<SiteProfile>& profiles,
                                 const std::map<std::string, std::string>& grouping, bool per_hint,
                                 double alpha, const HintRegistry& registry) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError("alpha must be in (0, 1)");
  std::map<std::string, std::vector<const SiteProfile*>> members;
  for (const auto& p : profiles) {
    auto it = grouping.find(p.domain);
    if (it != grouping.end()) members[it->second].push_back(&p);
  }
  if (members.size() < 2) throw StatsError("group comparison needs at least two non-empty groups");
  GroupComparison out;
  for (const auto& [g, _] : members) out.groups.push_back(g);

  using Predicate = std::function<bool(const SiteProfile&)>;
  std::vector<std::pair<std::string, Predicate>> questions;
  if (per_hint) {
    for (const auto& d : registry.descriptors()) {
      HintId id = d.id;
      questions.emplace_back(d.header_name, [id](const SiteProfile& p) { return p.all_hints().contains(id); });
    }
  } else {
    questions.emplace_back("any", [](const SiteProfile& p) { return !p.all_hints().empty(); });
  }

  auto table_for = [&](const Predicate& pred, const std::vector<std::string>& groups) {
    ContingencyTable t;
    for (const auto& g : groups) {
      double yes = 0, no = 0;
      for (const auto* p : members.at(g)) (pred(*p) ? yes : no) += 1;
      t.push_back({yes, no});
    }
    return t;
  };

  for (const auto& [label, pred] : questions) {
    try {
      HintTest test;
      test.omnibus = chi_squared(table_for(pred, out.groups));
      test.omnibus.label = label;
      test.omnibus.groups = out.groups;
      out.tests.push_back(std::move(test));
    } catch (const StatsError& e) {
      out.notes.push_back(label + ": skipped (" + e.what() + ")");
    }
  }
  std::vector<double> ps;
  for (const auto& t : out.tests) ps.push_back(t.omnibus.p);
  if (!ps.empty()) {
    auto adj = bonferroni(ps, ps.size());
    for (std::size_t i = 0; i < adj.size(); ++i) out.tests[i].omnibus.p_adjusted = adj[i];
  }
  const std::size_t n_pairs = out.groups.size() * (out.groups.size() - 1) / 2;
  for (auto& t : out.tests) {
    if (out.groups.size() < 3 || !(t.omnibus.p < alpha)) continue;
    const auto& pred = std::find_if(questions.begin(), questions.end(),
                                    [&](const auto& q) { return q.first == t.omnibus.label; })->second;
    for (std::size_t i = 0; i < out.groups.size(); ++i) {
      for (std::size_t j = i + 1; j < out.groups.size(); ++j) {
        std::vector<std::string> pair{out.groups[i], out.groups[j]};
        try {
          auto r = chi_squared(table_for(pred, pair));
          r.label = t.omnibus.label + ": " + pair_label(pair[0], pair[1]);
          r.groups = pair;
          r.p_adjusted = std::min(1.0, r.p * static_cast<double>(n_pairs));
          t.pairwise.push_back(std::move(r));
        } catch (const StatsError& e) {
          out.notes.push_back(t.omnibus.label + ": " + pair_label(pair[0], pair[1]) + ": skipped (" + e.what() + ")");
        }
      }
    }
  }
  return out;
}

std::vector<VantageCount> per_vantage_counts(const std::vector<CrawlRecord>& records,
                                             const HintRegistry& registry, const CountingRules& rules) {
  std::map<Vantage, std::map<std::string, bool>> seen;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    auto& adopts = seen[r.vantage][to_lower(r.target_domain)];
    if (r.accept_ch && requests_counted(r.accept_ch->recognized, registry, rules)) adopts = true;
  }
  std::vector<VantageCount> out;
  for (const auto& [v, sites] : seen) {
    VantageCount c{v, sites.size(), 0};
    for (const auto& [d, a] : sites) c.adopting += a;
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::optional<std::string> suggest_hint_name(std::string_view token, const HintRegistry& registry) {
  const std::string t = to_lower(trim(token));
  const std::string prefix = "sec-ch-";
  for (const auto& d : registry.descriptors()) {
    auto n = to_lower(d.header_name);
    if (t == prefix + n || prefix + t == n) return d.header_name;
  }
  std::optional<std::string> best;
  std::size_t best_dist = 3;
  for (const auto& d : registry.descriptors()) {
    auto dist = edit_distance(t, to_lower(d.header_name));
    if (dist < best_dist) {
      best_dist = dist;
      best = d.header_name;
    }
  }
  return best;
}

std::vector<MisspellingRow> misspelling_report(const std::vector<SiteProfile>& profiles,
                                               const HintRegistry& registry, std::size_t top_n) {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : profiles) {
    for (const auto& tok : p.unrecognized_tokens) ++counts[tok];
  }
  std::vector<MisspellingRow> rows;
  for (const auto& [tok, n] : counts) rows.push_back({tok, n, suggest_hint_name(tok, registry)});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MisspellingRow& a, const MisspellingRow& b) { return a.sites > b.sites; });
  if (rows.size() > top_n) rows.resize(top_n);
  return rows;
}

std::vector<LevelRow> level_by_category(const std::vector<SiteProfile>& profiles) {
  std::map<std::string, LevelRow> rows;
  for (const auto& p : profiles) {
    std::vector<std::string> cats;
    if (p.categories && !p.categories->empty()) {
      cats = *p.categories;
    } else {
      cats = {"uncategorized"};
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    for (const auto& c : cats) {
      auto& row = rows[c];
      row.category = c;
      ++row.sites;
      if (p.max_level) {
        ++row.by_level[static_cast<std::size_t>(*p.max_level)];
      } else {
        ++row.none;
      }
    }
  }
  std::vector<LevelRow> out;
  for (auto& [c, r] : rows) out.push_back(std::move(r));
  return out;
}

}  // namespace hintscope
