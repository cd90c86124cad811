/*
 * Copyright 2026 The hdrbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Straightforward Akima evaluator used as a test oracle. It follows the
// textbook construction (extend the knot table by two points on each side,
// take weighted slopes, evaluate the cubic Hermite basis) and shares no code
// with the library.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hdrbench_test {

class ReferenceAkima {
 public:
  ReferenceAkima(const std::vector<double>& x, const std::vector<double>& y) : x_(x), y_(y) {
    const std::size_t n = x.size();
    // d[j] is the slope of segment j - 2, so d[0], d[1], d[n+1], d[n+2] are
    // the extrapolated ones.
    std::vector<double> d(n + 3, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) d[j + 2] = (y[j + 1] - y[j]) / (x[j + 1] - x[j]);
    d[1] = d[2] + (d[2] - d[3]);
    d[0] = d[1] + (d[1] - d[2]);
    d[n + 1] = d[n] + (d[n] - d[n - 1]);
    d[n + 2] = d[n + 1] + (d[n + 1] - d[n]);

    t_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = d[i], b = d[i + 1], c = d[i + 2], e = d[i + 3];
      const double num = std::fabs(e - c) * b + std::fabs(b - a) * c;
      const double den = std::fabs(e - c) + std::fabs(b - a);
      t_[i] = den > 0.0 ? num / den : (b + c) / 2.0;
    }
  }

  double operator()(double v) const {
    if (v < x_.front() || v > x_.back()) throw std::out_of_range("outside knots");
    std::size_t i = 0;
    while (i + 2 < x_.size() && v >= x_[i + 1]) ++i;
    const double h = x_[i + 1] - x_[i];
    const double s = (v - x_[i]) / h;
    const double h00 = 2 * s * s * s - 3 * s * s + 1;
    const double h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s;
    const double h11 = s * s * s - s * s;
    return h00 * y_[i] + h10 * h * t_[i] + h01 * y_[i + 1] + h11 * h * t_[i + 1];
  }

  const std::vector<double>& tangents() const { return t_; }

 private:
  std::vector<double> x_, y_, t_;
};

}  // namespace hdrbench_test
