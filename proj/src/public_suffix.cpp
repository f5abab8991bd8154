#include "hintscope/public_suffix.hpp"

#include <vector>

#include "hintscope/embedded_data.hpp"
#include "hintscope/text.hpp"
#include "hintscope/url.hpp"

namespace hintscope {

namespace {

std::string join_labels(const std::vector<std::string_view>& labels, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < labels.size(); ++i) {
    if (i > from) out += '.';
    out += labels[i];
  }
  return out;
}

}  // namespace

PublicSuffixList PublicSuffixList::parse(std::string_view dat) {
  PublicSuffixList psl;
  for (auto line : split(dat, '\n')) {
    line = trim(line);
    if (line.empty() || line.substr(0, 2) == "//") continue;
    // Rules end at the first whitespace.
    if (auto ws = line.find_first_of(" \t"); ws != std::string_view::npos) line = line.substr(0, ws);
    auto rule = to_lower(line);
    if (rule.front() == '!') {
      psl.exceptions_.insert(rule.substr(1));
    } else if (rule.rfind("*.", 0) == 0) {
      psl.wildcards_.insert(rule.substr(2));
    } else {
      psl.rules_.insert(rule);
    }
  }
  return psl;
}

const PublicSuffixList& PublicSuffixList::builtin() {
  static const PublicSuffixList psl = parse(embedded::public_suffix_list());
  return psl;
}

long PublicSuffixList::suffix_start(const std::vector<std::string_view>& labels) const {
  const auto n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto candidate = join_labels(labels, i);
    if (exceptions_.contains(candidate)) return static_cast<long>(i + 1);
    if (i + 1 < n && wildcards_.contains(join_labels(labels, i + 1))) return static_cast<long>(i);
    if (rules_.contains(candidate)) return static_cast<long>(i);
  }
  return static_cast<long>(n) - 1;  // implicit "*" rule
}

std::optional<std::string> PublicSuffixList::public_suffix(std::string_view host) const {
  auto lowered = to_lower(trim(host));
  if (!lowered.empty() && lowered.back() == '.') lowered.pop_back();
  if (lowered.empty() || is_ip_literal(lowered) || !is_valid_hostname(lowered)) return std::nullopt;
  auto labels = split(lowered, '.');
  return join_labels(labels, static_cast<std::size_t>(suffix_start(labels)));
}

std::optional<std::string> PublicSuffixList::try_registrable_domain(std::string_view host) const {
  auto lowered = to_lower(trim(host));
  if (!lowered.empty() && lowered.back() == '.') lowered.pop_back();
  if (is_ip_literal(lowered)) return lowered;
  if (lowered.empty() || !is_valid_hostname(lowered)) return std::nullopt;
  auto labels = split(lowered, '.');
  auto start = suffix_start(labels);
  if (start <= 0) return std::nullopt;
  return join_labels(labels, static_cast<std::size_t>(start - 1));
}

std::string PublicSuffixList::registrable_domain(std::string_view host) const {
  auto d = try_registrable_domain(host);
  if (!d) throw DomainError("no registrable domain: " + std::string(host));
  return *d;
}

}  // namespace hintscope
