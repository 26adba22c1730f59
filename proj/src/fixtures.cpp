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
#include "oralscreen/fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "oralscreen/mask_io.hpp"
#include "oralscreen/mask_synthesis.hpp"

namespace oralscreen::fixtures {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kLevels = MgiScore::kLevels;
constexpr std::size_t kQ = kQuestionnaireItemCount;
constexpr std::size_t kS = kPublishedScreeningColumns;

using Pair = std::array<std::size_t, 2>;
using Quad = std::array<std::size_t, 4>;

// [mgi][gender][cohort]
constexpr std::array<std::array<Quad, 2>, kLevels> kHistogram = {{
    {{{1, 0, 0, 0}, {0, 0, 1, 0}}},
    {{{9, 10, 3, 0}, {4, 5, 5, 3}}},
    {{{20, 17, 19, 2}, {8, 23, 21, 10}}},
    {{{3, 10, 9, 3}, {7, 21, 24, 15}}},
    {{{0, 0, 8, 2}, {0, 5, 8, 7}}},
    {{{0, 0, 1, 0}, {0, 0, 0, 0}}},
}};

constexpr std::array<std::array<std::size_t, kQ>, kLevels> kQuestionnaireMain = {{
    {1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {23, 11, 4, 7, 13, 7, 1, 3, 1, 1, 1, 3, 1, 3, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0},
    {59, 27, 23, 17, 30, 22, 7, 8, 6, 8, 5, 5, 3, 2, 2, 1, 1, 2, 0, 0, 0, 1, 0, 0, 1, 0},
    {43, 25, 29, 22, 12, 12, 11, 12, 8, 7, 6, 2, 2, 3, 3, 1, 2, 1, 1, 2, 0, 1, 0, 0, 0, 0},
    {15, 8, 14, 11, 5, 2, 3, 5, 2, 4, 1, 1, 3, 0, 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 1},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
}};

constexpr std::array<std::array<std::size_t, kS>, kLevels> kScreeningMain = {{
    {1, 0, 2, 0, 0, 0, 0, 0, 0},
    {4, 1, 18, 5, 1, 5, 3, 0, 0},
    {24, 0, 55, 19, 6, 0, 8, 0, 0},
    {14, 2, 11, 18, 4, 0, 10, 2, 1},
    {9, 0, 11, 7, 1, 0, 2, 0, 1},
    {0, 0, 0, 0, 0, 0, 0, 0, 0},
}};

constexpr std::array<std::array<Pair, kQ>, kLevels> kQuestionnaireGender = {{
    {{{0, 1}, {0, 0}, {0, 0}, {0, 0}, {1, 0}, {0, 0}, {0, 1}, {0, 0}, {0, 0},
      {0, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0},
      {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}},
    {{{15, 8}, {4, 7}, {1, 3}, {2, 5}, {8, 5}, {5, 2}, {0, 1}, {0, 3}, {0, 1},
      {0, 1}, {0, 1}, {1, 2}, {0, 1}, {1, 2}, {0, 0}, {0, 0}, {0, 0}, {1, 0},
      {0, 0}, {0, 0}, {0, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 1}, {0, 0}}},
    {{{18, 31}, {10, 17}, {10, 13}, {6, 11}, {11, 11}, {14, 8}, {1, 6}, {5, 3},
      {2, 4}, {3, 5}, {2, 3}, {2, 3}, {0, 3}, {0, 2}, {0, 2}, {0, 1}, {1, 0},
      {1, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 1}, {0, 0}, {0, 0}, {1, 0}, {0, 0}}},
    {{{15, 28}, {6, 19}, {9, 20}, {4, 18}, {4, 18}, {4, 8}, {0, 11}, {2, 10},
      {3, 5}, {2, 5}, {1, 5}, {0, 2}, {0, 2}, {2, 1}, {0, 3}, {0, 1}, {2, 0},
      {1, 0}, {1, 0}, {0, 2}, {0, 0}, {0, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}},
    {{{6, 9}, {3, 5}, {7, 7}, {5, 6}, {1, 6}, {0, 2}, {0, 3}, {4, 1}, {0, 2},
      {0, 3}, {1, 0}, {1, 0}, {0, 3}, {0, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 0},
      {0, 2}, {0, 0}, {0, 0}, {0, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 1}}},
    {{{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0},
      {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0},
      {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}},
}};

constexpr std::array<std::array<Pair, kS>, kLevels> kScreeningGender = {{
    {{{0, 1}, {0, 0}, {1, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}},
    {{{1, 3}, {1, 0}, {11, 7}, {3, 2}, {1, 0}, {1, 4}, {2, 1}, {0, 0}, {0, 0}}},
    {{{7, 17}, {0, 0}, {24, 31}, {12, 7}, {1, 5}, {0, 0}, {5, 3}, {0, 0}, {0, 0}}},
    {{{1, 13}, {1, 1}, {8, 25}, {6, 12}, {1, 3}, {0, 0}, {1, 10}, {0, 2}, {0, 1}}},
    {{{2, 7}, {0, 0}, {4, 7}, {2, 5}, {1, 0}, {0, 0}, {1, 1}, {0, 0}, {0, 1}}},
    {{{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}},
}};

constexpr std::array<std::array<Quad, kQ>, kLevels> kQuestionnaireCohort = {{
    {{{0, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}}},
    {{{7, 7, 8, 1}, {1, 3, 5, 2}, {0, 1, 1, 2}, {0, 2, 3, 2}, {4, 7, 2, 0},
      {3, 4, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 3}, {0, 0, 1, 0}, {0, 0, 1, 0},
      {0, 0, 1, 0}, {0, 0, 3, 0}, {0, 0, 1, 0}, {0, 2, 1, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 0},
      {0, 0, 0, 0}}},
    {{{10, 13, 29, 7}, {1, 8, 14, 4}, {0, 5, 13, 5}, {1, 1, 9, 6}, {7, 9, 13, 1},
      {6, 8, 8, 0}, {0, 3, 2, 2}, {0, 1, 4, 3}, {0, 0, 5, 1}, {0, 1, 6, 1},
      {0, 0, 4, 1}, {0, 1, 3, 1}, {0, 1, 1, 1}, {0, 1, 1, 0}, {0, 0, 2, 0},
      {0, 0, 1, 0}, {1, 0, 0, 0}, {0, 1, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 0},
      {0, 0, 0, 0}}},
    {{{3, 12, 16, 12}, {2, 6, 12, 5}, {0, 1, 18, 10}, {0, 2, 14, 6}, {3, 6, 3, 0},
      {2, 6, 2, 2}, {0, 1, 5, 5}, {0, 0, 9, 3}, {0, 0, 2, 6}, {0, 0, 4, 3},
      {0, 0, 1, 5}, {0, 0, 2, 0}, {0, 0, 2, 0}, {0, 2, 0, 1}, {0, 0, 0, 3},
      {0, 0, 1, 0}, {0, 1, 1, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 1, 1},
      {0, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}}},
    {{{0, 1, 10, 4}, {0, 1, 5, 2}, {0, 1, 7, 6}, {0, 0, 7, 4}, {0, 3, 2, 0},
      {0, 1, 1, 0}, {0, 1, 1, 1}, {0, 0, 4, 1}, {0, 0, 1, 1}, {0, 0, 3, 1},
      {0, 0, 1, 0}, {0, 0, 1, 0}, {0, 0, 1, 2}, {0, 0, 0, 0}, {0, 0, 1, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 1, 0, 0}}},
    {{{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}}},
}};

constexpr std::array<std::array<Quad, kS>, kLevels> kScreeningCohort = {{
    {{{0, 0, 1, 0}, {0, 0, 0, 0}, {1, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
    {{{0, 3, 1, 0}, {0, 1, 0, 0}, {5, 6, 6, 1}, {4, 1, 0, 0}, {0, 0, 1, 0},
      {1, 1, 1, 2}, {0, 2, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
    {{{1, 6, 12, 5}, {0, 0, 0, 0}, {8, 16, 28, 3}, {7, 9, 1, 2}, {2, 1, 2, 1},
      {0, 0, 0, 0}, {1, 2, 3, 2}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
    {{{0, 1, 9, 4}, {1, 0, 1, 0}, {2, 8, 16, 7}, {3, 4, 5, 6}, {0, 1, 1, 2},
      {0, 0, 0, 0}, {2, 2, 4, 3}, {0, 0, 2, 0}, {0, 0, 0, 1}}},
    {{{0, 1, 6, 2}, {0, 0, 0, 0}, {0, 2, 8, 1}, {0, 2, 3, 2}, {0, 0, 1, 0},
      {0, 0, 0, 0}, {0, 0, 1, 1}, {0, 0, 0, 0}, {0, 1, 0, 0}}},
    {{{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0},
      {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
}};

constexpr std::array<Condition, kS> kScreeningColumns = {
    Condition::kHighBpMeasured, Condition::kLowBpMeasured, Condition::kHighBmi,
    Condition::kLowBmi,         Condition::kLowO2,         Condition::kRetinal,
    Condition::kTm,             Condition::kFingerNose,    Condition::kGait};

constexpr std::array<std::array<int, 2>, 4> kCohortAges = {
    {{18, 19}, {20, 39}, {40, 64}, {65, 90}}};

std::size_t CheckMgi(int mgi) {
  if (mgi < MgiScore::kMin || mgi > MgiScore::kMax) {
    throw std::out_of_range("MGI out of range: " + std::to_string(mgi));
  }
  return static_cast<std::size_t>(mgi);
}

std::size_t CheckColumn(PublishedGrid grid, std::size_t column) {
  const std::size_t n = grid == PublishedGrid::kQuestionnaire ? kQ : kS;
  if (column >= n) throw std::out_of_range("column out of range");
  return column;
}

std::size_t Sum(std::span<const std::size_t> v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{0});
}

std::size_t Distance(std::size_t x, std::size_t y) {
  return x > y ? x - y : y - x;
}

using Capacity = std::array<Quad, 2>;
using Split = std::array<Quad, 2>;

// Splits a per-cohort count between genders within the capacities, choosing
// the female total closest to the published gender split; ties go to the
// smaller female deviation, then to the smaller female total.
Split Allocate(const Quad& by_cohort, const Pair& gender, const Capacity& cap) {
  Quad lo{};
  Quad hi{};
  for (std::size_t c = 0; c < 4; ++c) {
    lo[c] = by_cohort[c] > cap[1][c] ? by_cohort[c] - cap[1][c] : 0;
    hi[c] = std::min(cap[0][c], by_cohort[c]);
    if (lo[c] > hi[c]) throw std::logic_error("fixture allocation infeasible");
  }
  const std::size_t total = Sum(by_cohort);
  const std::size_t f_min = Sum(lo);
  const std::size_t f_max = Sum(hi);
  std::size_t best = f_min;
  std::pair<std::size_t, std::size_t> best_key{SIZE_MAX, SIZE_MAX};
  for (std::size_t f = f_min; f <= f_max; ++f) {
    const std::pair<std::size_t, std::size_t> key{
        Distance(f, gender[0]) + Distance(total - f, gender[1]),
        Distance(f, gender[0])};
    if (key < best_key) {
      best_key = key;
      best = f;
    }
  }
  Split out{};
  std::size_t remaining = best - f_min;
  for (std::size_t c = 0; c < 4; ++c) {
    const std::size_t extra = std::min(remaining, hi[c] - lo[c]);
    out[0][c] = lo[c] + extra;
    out[1][c] = by_cohort[c] - out[0][c];
    remaining -= extra;
  }
  return out;
}

struct Sources {
  std::size_t main = 0;
  Pair gender{};
  Quad cohort{};
};

Sources SourcesFor(PublishedGrid grid, std::size_t m, std::size_t j) {
  if (grid == PublishedGrid::kQuestionnaire) {
    return {kQuestionnaireMain[m][j], kQuestionnaireGender[m][j],
            kQuestionnaireCohort[m][j]};
  }
  return {kScreeningMain[m][j], kScreeningGender[m][j], kScreeningCohort[m][j]};
}

// Subject index lists per (mgi, gender, cohort).
using Roster = std::array<std::array<std::array<std::vector<std::size_t>, 4>, 2>,
                          kLevels>;

// Picks `count` members of `pool` starting at a rotating offset.
std::vector<std::size_t> Pick(const std::vector<std::size_t>& pool,
                              std::size_t count, std::size_t offset) {
  std::vector<std::size_t> out;
  if (count == 0) return out;
  if (count > pool.size()) throw std::logic_error("fixture cell over capacity");
  const std::size_t start = offset % pool.size();
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(pool[(start + k) % pool.size()]);
  }
  return out;
}

Timestamp BaseTime() {
  return std::chrono::sys_days{std::chrono::year{2023} / 3 / 1} +
         std::chrono::hours{8};
}

std::string NumberedId(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

// Image-level labels whose greater-tie mode is `m`.
std::vector<int> ImageLabels(int m, std::size_t n_images, std::size_t pattern) {
  std::vector<int> out(n_images, m);
  if (pattern == 1 && m >= 1) {
    for (std::size_t i = 1; i < n_images; i += 2) out[i] = m - 1;
  } else if (pattern != 0) {
    const int alt = m < MgiScore::kMax ? m + 1 : m - 1;
    out[3] = alt;
    if (n_images > 4) out[4] = m >= 1 ? m - 1 : alt;
  }
  return out;
}

// Annotator votes whose greater-tie mode is `label`.
std::vector<int> Votes(int label, std::size_t pattern) {
  const int other = label > 0 ? label - 1 : label + 1;
  switch (pattern) {
    case 1:
      return {label, label, other};
    case 2:
      if (label >= 1) return {label, label - 1};
      return {label, label, label};
    case 3:
      if (label >= 2) return {label, label - 1, label - 2};
      return {label, label, other};
    default:
      return {label, label, label};
  }
}

std::vector<SiteMark> Marks(int vote, std::size_t image_index) {
  const int dy = static_cast<int>(image_index % 7) * 3;
  SiteMark margin{Site::kGingivalMargin, {}, vote >= 1};
  for (int k = 0; k < 6; ++k) {
    const double t = k / 5.0;
    margin.points.push_back(
        {100 + 88 * k,
         300 + dy + static_cast<int>(std::lround(30.0 * std::sin(3.14159 * t)))});
  }
  std::vector<SiteMark> out{margin};
  if (vote >= 3) {
    out.push_back({Site::kLeftPapilla, {{200, 250 + dy}, {215, 262 + dy}, {190, 270 + dy}},
                   true});
    out.push_back({Site::kRightPapilla, {{440, 250 + dy}, {455, 262 + dy}, {430, 270 + dy}},
                   true});
  }
  return out;
}

RgbImage RenderImage(const std::vector<SiteMark>& marks, int severity) {
  RgbImage img(kImageWidth, kImageHeight, Rgb{150, 95, 90});
  const int radius = 6 + 3 * severity;
  for (const SiteMark& mark : marks) {
    if (!mark.diseased) continue;
    for (const PixelPoint& p : mark.points) {
      for (int y = std::max(0, p.y - radius);
           y <= std::min(kImageHeight - 1, p.y + radius); ++y) {
        for (int x = std::max(0, p.x - radius);
             x <= std::min(kImageWidth - 1, p.x + radius); ++x) {
          const int dx = x - p.x;
          const int dyy = y - p.y;
          if (dx * dx + dyy * dyy <= radius * radius) {
            img.set(x, y, Rgb{220, 60, 55});
          }
        }
      }
    }
  }
  return img;
}

}  // namespace

std::span<const Condition> published_screening_columns() {
  return kScreeningColumns;
}

std::span<const Condition> published_columns(PublishedGrid grid) {
  return grid == PublishedGrid::kQuestionnaire ? questionnaire_conditions()
                                               : published_screening_columns();
}

std::size_t published_histogram(int mgi, Gender g, AgeCohort c) {
  return kHistogram[CheckMgi(mgi)][static_cast<std::size_t>(g)]
                   [static_cast<std::size_t>(c)];
}

std::size_t published_count(PublishedGrid grid, int mgi, std::size_t column) {
  return SourcesFor(grid, CheckMgi(mgi), CheckColumn(grid, column)).main;
}

std::array<std::size_t, 2> published_gender_split(PublishedGrid grid, int mgi,
                                                  std::size_t column) {
  return SourcesFor(grid, CheckMgi(mgi), CheckColumn(grid, column)).gender;
}

std::array<std::size_t, 4> published_cohort_split(PublishedGrid grid, int mgi,
                                                  std::size_t column) {
  return SourcesFor(grid, CheckMgi(mgi), CheckColumn(grid, column)).cohort;
}

std::size_t StudyFixture::expected_count(int mgi, Condition c) const {
  const CellSplit& s = allocation[index_of(c)];
  const std::size_t m = CheckMgi(mgi);
  return Sum(s[m][0]) + Sum(s[m][1]);
}

std::size_t StudyFixture::expected_count(int mgi, Condition c, Gender g) const {
  return Sum(allocation[index_of(c)][CheckMgi(mgi)][static_cast<std::size_t>(g)]);
}

std::size_t StudyFixture::expected_count(int mgi, Condition c, AgeCohort a) const {
  const CellSplit& s = allocation[index_of(c)];
  const std::size_t m = CheckMgi(mgi);
  const auto k = static_cast<std::size_t>(a);
  return s[m][0][k] + s[m][1][k];
}

StudyFixture build_study_fixture() {
  StudyFixture fx;

  // Subjects, cohort-major so ages and ids are stable.
  Roster roster;
  std::vector<int> target_mgi;
  std::vector<SubjectRecord>& subjects = fx.dataset.subjects;
  for (std::size_t c = 0; c < 4; ++c) {
    const int lo = kCohortAges[c][0];
    const int span = kCohortAges[c][1] - lo + 1;
    std::size_t in_cohort = 0;
    for (std::size_t g = 0; g < 2; ++g) {
      for (std::size_t m = 0; m < kLevels; ++m) {
        for (std::size_t k = 0; k < kHistogram[m][g][c]; ++k) {
          SubjectRecord s;
          s.subject_id = NumberedId("S", subjects.size() + 1, 4);
          s.age = lo + static_cast<int>((in_cohort * 7) % static_cast<std::size_t>(span));
          s.gender = kAllGenders[g];
          s.routine = {120.0, 80.0, 22.0};
          s.tes.spo2_percent = 97.0;
          roster[m][g][c].push_back(subjects.size());
          target_mgi.push_back(static_cast<int>(m));
          subjects.push_back(std::move(s));
          ++in_cohort;
        }
      }
    }
  }

  // Condition allocation per published grid.
  auto assign = [&](PublishedGrid grid, std::size_t j, Condition cond,
                    const CellSplit* partner, std::vector<bool>* taken) {
    for (std::size_t m = 0; m < kLevels; ++m) {
      const Sources src = SourcesFor(grid, m, j);
      const std::size_t by_cohort = Sum(src.cohort);
      const std::size_t by_gender = src.gender[0] + src.gender[1];
      std::size_t total = by_cohort;
      if (src.main != by_cohort && by_gender != by_cohort) {
        throw std::logic_error("no majority among published sources");
      }
      Capacity cap = kHistogram[m];
      if (partner) {
        for (std::size_t g = 0; g < 2; ++g) {
          for (std::size_t c = 0; c < 4; ++c) cap[g][c] -= (*partner)[m][g][c];
        }
      }
      const Split split = Allocate(src.cohort, src.gender, cap);
      fx.allocation[index_of(cond)][m] = split;
      const Pair used{Sum(split[0]), Sum(split[1])};
      if (src.main != total || by_gender != total || used != src.gender) {
        fx.adjustments.push_back({grid, static_cast<int>(m), cond, src.main,
                                  by_gender, by_cohort, total, src.gender, used});
      }
      for (std::size_t g = 0; g < 2; ++g) {
        for (std::size_t c = 0; c < 4; ++c) {
          std::vector<std::size_t> pool;
          for (std::size_t i : roster[m][g][c]) {
            if (!taken || !(*taken)[i]) pool.push_back(i);
          }
          for (std::size_t i : Pick(pool, split[g][c], j * 5 + m)) {
            SubjectRecord& s = subjects[i];
            switch (cond) {
              case Condition::kHighBpMeasured:
                s.routine.systolic = 150.0;
                s.routine.diastolic = 85.0;
                break;
              case Condition::kLowBpMeasured:
                s.routine.systolic = 85.0;
                s.routine.diastolic = 55.0;
                break;
              case Condition::kHighBmi: s.routine.bmi = 27.0; break;
              case Condition::kLowBmi: s.routine.bmi = 17.5; break;
              case Condition::kLowO2: s.tes.spo2_percent = 88.0; break;
              case Condition::kRetinal: s.tes.retinal_abnormal = true; break;
              case Condition::kTm: s.tes.tympanic_abnormal = true; break;
              case Condition::kFingerNose: s.tes.finger_nose_abnormal = true; break;
              case Condition::kGait: s.tes.gait_abnormal = true; break;
              default: s.questionnaire[cond] = true; break;
            }
          }
        }
      }
    }
  };

  for (std::size_t j = 0; j < kQ; ++j) {
    assign(PublishedGrid::kQuestionnaire, j, questionnaire_conditions()[j], nullptr,
           nullptr);
  }
  for (std::size_t j = 0; j < kS; ++j) {
    const Condition cond = kScreeningColumns[j];
    // Low BP and low BMI exclude subjects already flagged high.
    if (j == 1 || j == 3) {
      const Condition high = kScreeningColumns[j - 1];
      std::vector<bool> taken(subjects.size(), false);
      for (std::size_t i = 0; i < subjects.size(); ++i) {
        const ConditionFlags f = derive_condition_flags(subjects[i]);
        taken[i] = f[high];
      }
      const CellSplit partner = fx.allocation[index_of(high)];
      assign(PublishedGrid::kScreening, j, cond, &partner, &taken);
    } else {
      assign(PublishedGrid::kScreening, j, cond, nullptr, nullptr);
    }
  }

  // Images and annotations.
  const std::size_t extra = kFixtureImageCount - 4 * subjects.size();
  std::size_t image_no = 0;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const std::size_t n_images = i < extra ? 5 : 4;
    const std::vector<int> labels = ImageLabels(target_mgi[i], n_images, i % 3);
    for (std::size_t k = 0; k < n_images; ++k) {
      ++image_no;
      const std::string image_id = NumberedId("IMG", image_no, 5);
      fx.images.push_back({image_id, subjects[i].subject_id, {}});
      const std::vector<int> votes = Votes(labels[k], image_no % 4);
      for (std::size_t a = 0; a < votes.size(); ++a) {
        ImageAnnotation ann;
        ann.image_id = image_id;
        ann.subject_id = subjects[i].subject_id;
        ann.annotator_id = "A" + std::to_string(a + 1);
        ann.mgi = MgiScore(votes[a]);
        ann.marks = Marks(votes[a], image_no);
        ann.timestamp = BaseTime() + std::chrono::minutes(3 * image_no + a);
        fx.dataset.annotations.push_back(std::move(ann));
      }
    }
  }
  return fx;
}

void write_study_fixture(const StudyFixture& fixture, const fs::path& dir,
                         bool render_images) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string());
  }
  write_dataset(fixture.dataset, DatasetPaths::in_directory(dir));
  std::vector<ImageEntry> images = fixture.images;
  if (render_images) {
    const fs::path image_dir = dir / "images";
    fs::create_directories(image_dir, ec);
    if (ec) throw IoError("cannot create directory " + image_dir.string());
    std::map<std::string, const ImageAnnotation*> first;
    for (const ImageAnnotation& a : fixture.dataset.annotations) {
      first.emplace(a.image_id, &a);
    }
    for (ImageEntry& e : images) {
      const auto it = first.find(e.image_id);
      const RgbImage img =
          it == first.end() ? RgbImage(kImageWidth, kImageHeight, Rgb{150, 95, 90})
                            : RenderImage(it->second->marks, it->second->mgi.value());
      write_image_png(image_dir / (e.image_id + ".png"), img);
      e.file = fs::path("images") / (e.image_id + ".png");
    }
  }
  write_image_manifest(dir / "images.csv", images);
}

}  // namespace oralscreen::fixtures
