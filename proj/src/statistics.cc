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

#include "ergoset/statistics.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "ergoset/errors.hpp"

namespace ergoset::stats {

namespace {

struct Moments {
  double n;
  double mean;
  double var;
};

Moments Describe(std::span<const double> x) {
  Moments m{static_cast<double>(x.size()), 0.0, 0.0};
  for (double v : x) m.mean += v;
  m.mean /= m.n;
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= m.n - 1.0;
  return m;
}

TTest Finish(double diff, double se, double df) {
  TTest t;
  t.df = df;
  if (se == 0.0) {
    // Both samples constant.
    t.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    t.p_value = diff == 0.0 ? 1.0 : 0.0;
    return t;
  }
  t.t = diff / se;
  boost::math::students_t dist(df);
  t.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t.t)));
  return t;
}

}  // namespace

SampleComparison CompareSamples(std::span<const double> before,
                                std::span<const double> after) {
  if (before.size() < 2 || after.size() < 2) {
    throw StatisticsError("t-test needs at least 2 values per sample");
  }
  const Moments a = Describe(before);
  const Moments b = Describe(after);
  SampleComparison c;
  c.mean_before = a.mean;
  c.mean_after = b.mean;
  c.std_before = std::sqrt(a.var);
  c.std_after = std::sqrt(b.var);
  const double diff = a.mean - b.mean;

  const double va = a.var / a.n;
  const double vb = b.var / b.n;
  const double welch_se = std::sqrt(va + vb);
  const double welch_df =
      welch_se == 0.0 ? a.n + b.n - 2.0
                      : (va + vb) * (va + vb) /
                            (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
  c.welch = Finish(diff, welch_se, welch_df);

  const double pooled_df = a.n + b.n - 2.0;
  const double pooled_var = ((a.n - 1.0) * a.var + (b.n - 1.0) * b.var) / pooled_df;
  c.pooled = Finish(diff, std::sqrt(pooled_var * (1.0 / a.n + 1.0 / b.n)), pooled_df);
  return c;
}

double Correlate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatisticsError("correlation of unequal-length samples");
  if (x.size() < 2) throw StatisticsError("correlation needs at least 2 pairs");
  const Moments mx = Describe(x);
  const Moments my = Describe(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx.mean;
    const double dy = y[i] - my.mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw StatisticsError("correlation of a constant sample");
  return sxy / std::sqrt(sxx * syy);
}

nlohmann::json ComparisonToJson(const SampleComparison& c) {
  auto test = [](const TTest& t) {
    return nlohmann::json{{"t", t.t}, {"df", t.df}, {"p_value", t.p_value}};
  };
  return {{"mean_before", c.mean_before}, {"mean_after", c.mean_after},
          {"std_before", c.std_before},   {"std_after", c.std_after},
          {"welch", test(c.welch)},       {"pooled", test(c.pooled)}};
}

}  // namespace ergoset::stats
