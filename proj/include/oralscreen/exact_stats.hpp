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
#ifndef ORALSCREEN_EXACT_STATS_HPP_
#define ORALSCREEN_EXACT_STATS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace oralscreen {

// 2x2 counts. Rows are groups, columns are condition present / absent:
//
//              condition   no condition
//   group 1        a            b
//   group 2        c            d
struct ContingencyTable {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  std::uint64_t d = 0;

  std::uint64_t total() const { return a + b + c + d; }
  std::uint64_t row1() const { return a + b; }
  std::uint64_t row2() const { return c + d; }
  std::uint64_t col1() const { return a + c; }
  std::uint64_t col2() const { return b + d; }
  bool operator==(const ContingencyTable&) const = default;
};

// Throws ValidationError for an all-zero table.
void validate(const ContingencyTable& t);

// kGreater: alternative odds ratio > 1 (large a). kLess: odds ratio < 1.
enum class TailMode { kTwoSided, kGreater, kLess };

std::string_view to_string(TailMode t);  // "two-sided", "greater", "less"
TailMode parse_tail_mode(std::string_view s);

struct TestResult {
  double p_value = 1.0;
  // Fisher: sample odds ratio ad/bc (inf when bc = 0 < ad, NaN when both are
  // 0). Welch: t statistic.
  double statistic = 0.0;
  // Welch-Satterthwaite degrees of freedom; 0 for Fisher.
  double df = 0.0;
  TailMode tail = TailMode::kTwoSided;
};

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1 denominator)
  std::int64_t n = 0;
};

// Sample mean and standard deviation. Throws ValidationError for fewer than
// one value; sd is 0 for a single value.
SummaryStats summarize(std::span<const double> values);

// ln C(n, k). Throws ValidationError when k > n.
double log_choose(std::uint64_t n, std::uint64_t k);

// ln n! for n <= max_n, precomputed. Immutable after construction, so one
// instance can be shared across threads.
class LogFactorialTable {
 public:
  explicit LogFactorialTable(std::size_t max_n);

  std::size_t max_n() const { return values_.size() - 1; }
  // Throws std::out_of_range beyond max_n.
  double log_factorial(std::size_t n) const;
  double log_choose(std::size_t n, std::size_t k) const;

 private:
  std::vector<double> values_;
};

// Feasible values of the top-left cell given the table's margins.
struct FeasibleRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};
FeasibleRange feasible_range(const ContingencyTable& margins);

// P(X = x) for the top-left cell under fixed margins (hypergeometric).
// Throws ValidationError when x is infeasible.
double hypergeom_pmf(std::uint64_t x, const ContingencyTable& margins);

// Fisher's exact test. Two-sided p sums every same-margin table whose
// probability is at most pmf(observed) * (1 + 1e-7).
TestResult fisher_exact(const ContingencyTable& table,
                        TailMode tail = TailMode::kTwoSided);

// I_x(a, b) via continued fraction (modified Lentz, at most 300 iterations,
// tolerance 1e-14). Throws NumericalError when it does not converge.
double regularized_incomplete_beta(double x, double a, double b);

// P(T > t) for Student's t with df degrees of freedom.
double student_t_sf(double t, double df);

// Two-sided Welch t-test from summary statistics.
TestResult welch_t_from_summary(const SummaryStats& g1,
                                const SummaryStats& g2);

}  // namespace oralscreen

#endif  // ORALSCREEN_EXACT_STATS_HPP_
