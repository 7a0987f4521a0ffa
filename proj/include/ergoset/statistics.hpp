// Copyright 2026 The ergoset Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ERGOSET_STATISTICS_HPP_
#define ERGOSET_STATISTICS_HPP_

#include <span>

#include <json.hpp>

namespace ergoset::stats {

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

struct SampleComparison {
  double mean_before = 0.0;
  double mean_after = 0.0;
  double std_before = 0.0;  // n - 1 denominator
  double std_after = 0.0;
  TTest welch;   // unequal variances, Welch–Satterthwaite df
  TTest pooled;  // Student, df = n1 + n2 - 2
};

// Throws StatisticsError if either sample has fewer than 2 values.
SampleComparison CompareSamples(std::span<const double> before,
                                std::span<const double> after);

// Pearson correlation. Throws StatisticsError on unequal lengths, fewer than
// 2 values, or a constant sample.
double Correlate(std::span<const double> x, std::span<const double> y);

nlohmann::json ComparisonToJson(const SampleComparison& c);

}  // namespace ergoset::stats

#endif  // ERGOSET_STATISTICS_HPP_
