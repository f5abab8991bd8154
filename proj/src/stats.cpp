#include "hintscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hintscope/text.hpp"

namespace hintscope {

namespace {

constexpr double kEps = 1e-15;
constexpr int kMaxIter = 10000;

// Lower series: P(s, x) = e^-x x^s / Gamma(s+1) * sum x^n / ((s+1)...(s+n)).
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double denom = s;
  for (int n = 0; n < kMaxIter; ++n) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Continued fraction for Q(s, x), modified Lentz.
double gamma_q_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double gamma_q(double s, double x) {
  if (!(s > 0.0) || x < 0.0 || std::isnan(x)) throw StatsError("gamma_q: need s > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_fraction(s, x);
}

double chi_squared_sf(double x, double dof) {
  if (!(dof > 0.0)) throw StatsError("degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(dof / 2.0, x / 2.0);
}

StatResult chi_squared(const ContingencyTable& table) {
  const std::size_t r = table.size();
  if (r < 2) throw StatsError("table needs at least 2 rows");
  const std::size_t c = table.front().size();
  if (c < 2) throw StatsError("table needs at least 2 columns");
  std::vector<double> row_sum(r, 0.0), col_sum(c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    if (table[i].size() != c) throw StatsError("ragged table");
    for (std::size_t j = 0; j < c; ++j) {
      double v = table[i][j];
      if (!(v >= 0.0) || std::isinf(v)) throw StatsError("counts must be non-negative");
      if (v != std::floor(v)) throw StatsError("counts must be integers");
      row_sum[i] += v;
      col_sum[j] += v;
    }
  }
  auto zero = [](double v) { return v == 0.0; };
  if (std::any_of(row_sum.begin(), row_sum.end(), zero) || std::any_of(col_sum.begin(), col_sum.end(), zero)) {
    throw StatsError("degenerate table");
  }
  const double total = std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
  StatResult out;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      double expected = row_sum[i] * col_sum[j] / total;
      double diff = table[i][j] - expected;
      out.chi2 += diff * diff / expected;
    }
  }
  out.dof = static_cast<int>((r - 1) * (c - 1));
  out.p = std::max(chi_squared_sf(out.chi2, out.dof), std::numeric_limits<double>::min());
  out.p = std::min(out.p, 1.0);
  return out;
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m == 0 || m < p_values.size()) throw StatsError("bonferroni: m must cover every comparison");
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    if (!(p > 0.0 && p <= 1.0)) throw StatsError("p-value outside (0, 1]");
    out.push_back(std::min(1.0, p * static_cast<double>(m)));
  }
  return out;
}

std::optional<SummaryStats> summarize(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  SummaryStats s;
  s.n = values.size();
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  if (s.n > 1) {
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.sd = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

std::string format_p(double p) {
  if (p < 5e-5) return "<0.0001";
  return format_fixed(p, 4);
}

}  // namespace hintscope
