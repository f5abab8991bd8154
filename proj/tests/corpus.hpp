#pragma once

#include <map>
#include <string>
#include <vector>

#include "hintscope/login_discovery.hpp"
#include "support.hpp"

namespace hintscope::test {

struct ScoredCase {
  std::string group;
  LoginCandidate candidate;
  int expected = 0;
};

struct LoginCorpus {
  std::vector<ScoredCase> cases;
  std::map<std::string, std::string> selection;  // group -> url or "none"

  static LoginCorpus load() {
    LoginCorpus c;
    const auto text = fixture("fixtures/login_corpus.csv");
    auto lines = data_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      auto f = split_csv(lines[i]);
      ScoredCase sc;
      sc.group = f.at(0);
      sc.candidate.position = std::stoul(f.at(1));
      sc.candidate.url = f.at(2);
      sc.candidate.text = f.at(3);
      sc.expected = std::stoi(f.at(4));
      c.cases.push_back(std::move(sc));
    }
    const auto sel_text = fixture("fixtures/login_corpus_selection.csv");
    auto sel = data_lines(sel_text);
    for (std::size_t i = 1; i < sel.size(); ++i) {
      auto f = split_csv(sel[i]);
      c.selection[f.at(0)] = f.at(1);
    }
    return c;
  }

  std::map<std::string, std::vector<LoginCandidate>> scored_groups(const IndicatorSet& indicators) const {
    std::map<std::string, std::vector<LoginCandidate>> groups;
    for (const auto& sc : cases) {
      auto cand = sc.candidate;
      cand.score = score_candidate(cand, indicators);
      groups[sc.group].push_back(cand);
    }
    return groups;
  }
};

}  // namespace hintscope::test
