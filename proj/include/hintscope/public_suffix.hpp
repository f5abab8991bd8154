#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hintscope {

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Public suffix list (publicsuffix.org format) and registrable-domain
/// extraction. Both the ICANN and private sections are honored.
class PublicSuffixList {
 public:
  static PublicSuffixList parse(std::string_view dat);
  /// The pinned snapshot shipped with the library.
  static const PublicSuffixList& builtin();

  /// Public suffix plus one label, lowercased. nullopt for malformed hosts
  /// and for hosts that are themselves a public suffix. IP literals are
  /// returned unchanged.
  std::optional<std::string> try_registrable_domain(std::string_view host) const;

  /// As above but throws DomainError("no registrable domain: ...").
  std::string registrable_domain(std::string_view host) const;

  std::optional<std::string> public_suffix(std::string_view host) const;

  std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  // Index of the first label of the public suffix, or -1 for bad input.
  long suffix_start(const std::vector<std::string_view>& labels) const;

  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;  // parent of "*.parent"
  std::unordered_set<std::string> exceptions_;
};

}  // namespace hintscope
