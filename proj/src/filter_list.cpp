#include "hintscope/filter_list.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include "hintscope/text.hpp"
#include "hintscope/url.hpp"

namespace hintscope {

namespace {

bool is_separator(char c) {
  auto u = static_cast<unsigned char>(c);
  return !(std::isalnum(u) || c == '_' || c == '-' || c == '.' || c == '%');
}

// Matches pattern[p..] against text[t..]. With `to_end`, the match must
// consume the whole text.
bool match_from(std::string_view pattern, std::size_t p, std::string_view text, std::size_t t,
                bool to_end) {
  while (p < pattern.size()) {
    char pc = pattern[p];
    if (pc == '*') {
      while (p < pattern.size() && pattern[p] == '*') ++p;
      if (p == pattern.size()) return true;
      for (std::size_t k = t; k <= text.size(); ++k) {
        if (match_from(pattern, p, text, k, to_end)) return true;
      }
      return false;
    }
    if (pc == '^') {
      if (t == text.size()) {
        ++p;
        continue;
      }
      if (!is_separator(text[t])) return false;
    } else if (t == text.size() || text[t] != pc) {
      return false;
    }
    ++p;
    ++t;
  }
  return !to_end || t == text.size();
}

std::size_t host_begin(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return 0;
  auto start = sep + 3;
  auto end = url.find_first_of("/?#", start);
  auto at = url.substr(start, end == std::string_view::npos ? end : end - start).rfind('@');
  return at == std::string_view::npos ? start : start + at + 1;
}

std::size_t host_end(std::string_view url, std::size_t begin) {
  auto end = url.find_first_of(":/?#", begin);
  return end == std::string_view::npos ? url.size() : end;
}

// Literal host a domain-anchored rule names in full, if any.
std::optional<std::string> anchor_host(const FilterRule& rule) {
  if (rule.kind != FilterRule::Kind::domain_anchor) return std::nullopt;
  auto end = rule.pattern.find_first_of("^/:*|?");
  if (end == std::string::npos) {
    if (rule.end_anchor) return rule.pattern;
    return std::nullopt;
  }
  if (rule.pattern[end] == '*' || rule.pattern[end] == '|' || rule.pattern[end] == '?') {
    return std::nullopt;
  }
  return rule.pattern.substr(0, end);
}

}  // namespace

FilterParseReport load_filter_list(std::string_view text) {
  FilterParseReport report;
  std::size_t line_no = 0;
  for (auto raw_line : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw_line);
    if (line.empty()) continue;
    auto skip = [&](std::string reason) {
      report.skipped.push_back({line_no, std::string(line), std::move(reason)});
    };
    if (line.front() == '!' || line.front() == '[') {
      skip("comment");
      continue;
    }
    if (line.find("##") != std::string_view::npos || line.find("#@#") != std::string_view::npos ||
        line.find("#?#") != std::string_view::npos || line.find("#$#") != std::string_view::npos) {
      skip("cosmetic");
      continue;
    }
    FilterRule rule;
    rule.text = std::string(line);
    rule.line = line_no;
    std::string_view body = line;
    if (body.substr(0, 2) == "@@") {
      rule.exception = true;
      body.remove_prefix(2);
    }
    if (auto dollar = body.rfind('$'); dollar != std::string_view::npos) {
      bool supported = true;
      for (auto opt : split(body.substr(dollar + 1), ',')) {
        auto o = to_lower(trim(opt));
        // Every observation matched here is already a third-party request.
        if (o != "third-party" && o != "3p") supported = false;
      }
      if (!supported) {
        skip("unsupported-option");
        continue;
      }
      body = body.substr(0, dollar);
    }
    if (body.size() > 2 && body.front() == '/' && body.back() == '/') {
      skip("regex");
      continue;
    }
    if (body.substr(0, 2) == "||") {
      rule.kind = FilterRule::Kind::domain_anchor;
      body.remove_prefix(2);
    } else if (!body.empty() && body.front() == '|') {
      rule.start_anchor = true;
      body.remove_prefix(1);
    }
    if (!body.empty() && body.back() == '|') {
      rule.end_anchor = true;
      body.remove_suffix(1);
    }
    rule.pattern = to_lower(body);
    if (rule.pattern.empty() || std::all_of(rule.pattern.begin(), rule.pattern.end(),
                                            [](char c) { return c == '*'; })) {
      skip("empty-pattern");
      continue;
    }
    report.rules.push_back(std::move(rule));
  }
  return report;
}

bool rule_matches(const FilterRule& rule, std::string_view url) {
  if (rule.kind == FilterRule::Kind::domain_anchor) {
    auto begin = host_begin(url);
    auto end = host_end(url, begin);
    for (auto i = begin; i < end; ++i) {
      if (i != begin && url[i - 1] != '.') continue;
      if (match_from(rule.pattern, 0, url, i, rule.end_anchor)) return true;
    }
    return false;
  }
  if (rule.start_anchor) return match_from(rule.pattern, 0, url, 0, rule.end_anchor);
  for (std::size_t i = 0; i <= url.size(); ++i) {
    if (match_from(rule.pattern, 0, url, i, rule.end_anchor)) return true;
  }
  return false;
}

FilterSet::FilterSet(std::vector<FilterRule> rules, const PublicSuffixList& psl)
    : rules_(std::move(rules)), psl_(&psl) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (auto host = anchor_host(rules_[i])) {
      by_host_[*host].push_back(i);
    } else {
      unindexed_.push_back(i);
    }
  }
}

FilterSet FilterSet::from_text(std::string_view text, const PublicSuffixList& psl) {
  return FilterSet(load_filter_list(text).rules, psl);
}

void FilterSet::candidates(std::string_view host, std::vector<std::size_t>& out) const {
  out = unindexed_;
  std::size_t pos = 0;
  for (;;) {
    auto it = by_host_.find(std::string(host.substr(pos)));
    if (it != by_host_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    auto dot = host.find('.', pos);
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
}

TrackerVerdict FilterSet::match(std::string_view url) const {
  TrackerVerdict verdict;
  auto lowered = to_lower(url);
  auto parsed = Url::parse(lowered);
  if (parsed) verdict.domain = psl_->try_registrable_domain(parsed->host).value_or(parsed->host);

  auto begin = host_begin(lowered);
  std::vector<std::size_t> idx;
  candidates(std::string_view(lowered).substr(begin, host_end(lowered, begin) - begin), idx);

  const FilterRule* best = nullptr;
  for (auto i : idx) {
    const auto& rule = rules_[i];
    if (!rule_matches(rule, lowered)) continue;
    if (rule.exception) return verdict;
    if (!best || std::tie(rule.pattern, rule.text) < std::tie(best->pattern, best->text)) best = &rule;
  }
  if (best) {
    verdict.is_tracker = true;
    verdict.matched_rule = *best;
  }
  return verdict;
}

TrackerVerdict match_tracker(std::string_view url, const FilterSet& rules) { return rules.match(url); }

}  // namespace hintscope
