#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hintscope/analytics.hpp"
#include "hintscope/dataset_store.hpp"
#include "hintscope/filter_list.hpp"

namespace hintscope {

struct AnalysisOptions {
  std::vector<long> buckets = kDefaultRankBuckets;
  double alpha = 0.05;
  CountingRules rules;
  const FilterSet* trackers = nullptr;
  LabelSources labels;
  /// Domain -> group label for chi-squared comparisons. When absent and RBA
  /// labels split the sites into rba/no-rba, those are used.
  std::optional<std::map<std::string, std::string>> groups;
  std::size_t misspelling_top_n = 50;
};

struct AnalysisReport {
  std::vector<std::string> run_ids;
  ProfileBuildReport build;
  std::vector<HintFrequencyRow> frequency;
  std::vector<AdoptionRow> adoption;
  std::vector<AdoptionPoint> over_time;
  PageKindDiff diff;
  InterconnectionGraph graph;
  InterconnectionGraph login_graph;
  std::optional<GroupComparison> comparison;
  std::vector<VantageCount> vantages;
  std::vector<MisspellingRow> misspellings;
  std::vector<LevelRow> levels;
  std::vector<std::string> notes;
};

AnalysisReport analyze(const std::vector<CrawlRecord>& records, const AnalysisOptions& options = {},
                       const HintRegistry& registry = HintRegistry::builtin(),
                       const PublicSuffixList& psl = PublicSuffixList::builtin());

/// File name -> content. Output is a pure function of the report.
std::map<std::string, std::string> render_report(const AnalysisReport& report,
                                                 const HintRegistry& registry = HintRegistry::builtin());

/// Writes render_report() into `dir`, creating it if needed.
void write_report(const AnalysisReport& report, const std::string& dir,
                  const HintRegistry& registry = HintRegistry::builtin());

}  // namespace hintscope
