#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintscope {

class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Regularized upper incomplete gamma Q(s, x) for s > 0, x >= 0.
double gamma_q(double s, double x);

/// Upper tail P(X >= x) of the chi-squared distribution.
double chi_squared_sf(double x, double dof);

struct StatResult {
  std::string label;
  std::vector<std::string> groups;
  double chi2 = 0.0;
  int dof = 1;
  /// Clamped to the smallest positive double so it stays in (0, 1].
  double p = 1.0;
  std::optional<double> p_adjusted;
};

using ContingencyTable = std::vector<std::vector<double>>;

/// Pearson's chi-squared test of independence. Throws StatsError for tables
/// smaller than 2x2, ragged or negative or non-integer counts, and any zero
/// row or column sum ("degenerate table").
StatResult chi_squared(const ContingencyTable& table);

/// min(1, m * p) for each p. Throws StatsError when m is smaller than the
/// number of p-values or a p lies outside (0, 1].
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

struct SummaryStats {
  double median = 0.0;
  /// Sample standard deviation (n - 1); 0 when n == 1.
  double sd = 0.0;
  std::size_t n = 0;
};

std::optional<SummaryStats> summarize(std::vector<double> values);

/// Four decimals, or "<0.0001" when that would read 0.0000.
std::string format_p(double p);

}  // namespace hintscope
