/* Copyright 2026 The Oralscreen Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "oralscreen/exact_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "oralscreen/errors.hpp"

namespace oralscreen {
namespace {

constexpr double kTieSlack = 1e-7;
constexpr int kMaxBetaIterations = 300;
constexpr double kBetaTolerance = 1e-14;
constexpr double kTiny = 1e-300;
// Below this many factors the binomial is summed term by term.
constexpr std::uint64_t kDirectLogChooseLimit = 30;

// Sum in ascending order to limit rounding on long tails.
double SumSmallestFirst(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

// Continued fraction for the incomplete beta function.
double BetaContinuedFraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxBetaIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kBetaTolerance) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge (a=" +
                       std::to_string(a) + ", b=" + std::to_string(b) +
                       ", x=" + std::to_string(x) + ")");
}

}  // namespace

void validate(const ContingencyTable& t) {
  if (t.total() == 0) throw ValidationError("contingency table is all zero");
}

std::string_view to_string(TailMode t) {
  switch (t) {
    case TailMode::kTwoSided:
      return "two-sided";
    case TailMode::kGreater:
      return "greater";
    case TailMode::kLess:
      return "less";
  }
  return "unknown";
}

TailMode parse_tail_mode(std::string_view s) {
  for (TailMode t : {TailMode::kTwoSided, TailMode::kGreater, TailMode::kLess}) {
    if (s == to_string(t)) return t;
  }
  throw ValidationError("unknown tail '" + std::string(s) +
                        "' (expected two-sided, greater or less)");
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("summarize: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return SummaryStats{mean, sd, static_cast<std::int64_t>(values.size())};
}

double log_choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) {
    throw ValidationError("log_choose: k=" + std::to_string(k) + " > n=" +
                          std::to_string(n));
  }
  const std::uint64_t m = std::min(k, n - k);
  if (m == 0) return 0.0;
  if (m <= kDirectLogChooseLimit) {
    long double s = 0.0L;
    for (std::uint64_t i = 1; i <= m; ++i) {
      s += std::log(static_cast<long double>(n - m + i) /
                    static_cast<long double>(i));
    }
    return static_cast<double>(s);
  }
  const long double r = std::lgamma(static_cast<long double>(n) + 1.0L) -
                        std::lgamma(static_cast<long double>(k) + 1.0L) -
                        std::lgamma(static_cast<long double>(n - k) + 1.0L);
  return static_cast<double>(r);
}

LogFactorialTable::LogFactorialTable(std::size_t max_n) : values_(max_n + 1) {
  for (std::size_t i = 0; i <= max_n; ++i) {
    values_[i] = static_cast<double>(
        std::lgamma(static_cast<long double>(i) + 1.0L));
  }
}

double LogFactorialTable::log_factorial(std::size_t n) const {
  return values_.at(n);
}

double LogFactorialTable::log_choose(std::size_t n, std::size_t k) const {
  if (k > n) {
    throw ValidationError("log_choose: k=" + std::to_string(k) + " > n=" +
                          std::to_string(n));
  }
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

FeasibleRange feasible_range(const ContingencyTable& m) {
  const std::uint64_t r1 = m.row1();
  const std::uint64_t r2 = m.row2();
  const std::uint64_t c1 = m.col1();
  return FeasibleRange{c1 > r2 ? c1 - r2 : 0, std::min(r1, c1)};
}

double hypergeom_pmf(std::uint64_t x, const ContingencyTable& margins) {
  validate(margins);
  const FeasibleRange range = feasible_range(margins);
  if (x < range.lo || x > range.hi) {
    throw ValidationError("hypergeom_pmf: x=" + std::to_string(x) +
                          " outside feasible range [" +
                          std::to_string(range.lo) + ", " +
                          std::to_string(range.hi) + "]");
  }
  const double lp = log_choose(margins.row1(), x) +
                    log_choose(margins.row2(), margins.col1() - x) -
                    log_choose(margins.total(), margins.col1());
  return std::exp(lp);
}

TestResult fisher_exact(const ContingencyTable& table, TailMode tail) {
  validate(table);
  const FeasibleRange range = feasible_range(table);
  const std::uint64_t r1 = table.row1();
  const std::uint64_t r2 = table.row2();
  const std::uint64_t c1 = table.col1();
  const double log_denominator = log_choose(table.total(), c1);

  std::vector<double> log_pmf;
  log_pmf.reserve(range.hi - range.lo + 1);
  for (std::uint64_t x = range.lo; x <= range.hi; ++x) {
    log_pmf.push_back(log_choose(r1, x) + log_choose(r2, c1 - x) -
                      log_denominator);
  }
  const std::size_t observed = table.a - range.lo;

  std::vector<double> terms;
  terms.reserve(log_pmf.size());
  switch (tail) {
    case TailMode::kTwoSided: {
      const double cutoff = log_pmf[observed] + std::log1p(kTieSlack);
      for (double lp : log_pmf) {
        if (lp <= cutoff) terms.push_back(std::exp(lp));
      }
      break;
    }
    case TailMode::kGreater:
      for (std::size_t i = observed; i < log_pmf.size(); ++i) {
        terms.push_back(std::exp(log_pmf[i]));
      }
      break;
    case TailMode::kLess:
      for (std::size_t i = 0; i <= observed; ++i) {
        terms.push_back(std::exp(log_pmf[i]));
      }
      break;
  }
  const double p = std::clamp(SumSmallestFirst(terms), 0.0, 1.0);

  const double ad = static_cast<double>(table.a) * static_cast<double>(table.d);
  const double bc = static_cast<double>(table.b) * static_cast<double>(table.c);
  double odds_ratio;
  if (bc > 0.0) {
    odds_ratio = ad / bc;
  } else {
    odds_ratio = ad > 0.0 ? std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::quiet_NaN();
  }
  return TestResult{p, odds_ratio, 0.0, tail};
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ValidationError("incomplete beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError("incomplete beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
  if (!(df > 0.0)) {
    throw ValidationError("student_t_sf: df must be positive");
  }
  if (!std::isfinite(t)) {
    if (std::isnan(t)) throw ValidationError("student_t_sf: t is NaN");
    return t > 0 ? 0.0 : 1.0;
  }
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5);
  return t > 0.0 ? tail : 1.0 - tail;
}

TestResult welch_t_from_summary(const SummaryStats& g1,
                                const SummaryStats& g2) {
  for (const SummaryStats* g : {&g1, &g2}) {
    if (g->n < 2) throw ValidationError("welch: each group needs n >= 2");
    if (!(g->sd >= 0.0) || !std::isfinite(g->sd) || !std::isfinite(g->mean)) {
      throw ValidationError("welch: sd must be finite and non-negative");
    }
  }
  const double n1 = static_cast<double>(g1.n);
  const double n2 = static_cast<double>(g2.n);
  const double v1 = g1.sd * g1.sd / n1;
  const double v2 = g2.sd * g2.sd / n2;
  const double diff = g1.mean - g2.mean;
  const double se2 = v1 + v2;
  if (se2 == 0.0) {
    // Both groups constant: the difference is either certain or absent.
    const double df = n1 + n2 - 2.0;
    if (diff == 0.0) return TestResult{1.0, 0.0, df, TailMode::kTwoSided};
    return TestResult{0.0,
                      std::copysign(std::numeric_limits<double>::infinity(),
                                    diff),
                      df, TailMode::kTwoSided};
  }
  const double t = diff / std::sqrt(se2);
  const double df =
      se2 * se2 / (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0));
  const double p = std::clamp(2.0 * student_t_sf(std::fabs(t), df), 0.0, 1.0);
  return TestResult{p, t, df, TailMode::kTwoSided};
}

}  // namespace oralscreen
