// Copyright 2026 The QPR Authors
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

// Finite Fourier series on T^d, truncated to an l1 ball of modes.  Products
// are exact convolutions restricted to the ball; the mass that falls outside
// is accumulated as a truncation indicator.

#pragma once

#include "qpr/common.hpp"

#include <vector>

namespace qpr {

class TrigSeries {
 public:
  TrigSeries() = default;
  TrigSeries(int d, int radius);

  int dim() const { return d_; }
  int radius() const { return radius_; }

  bool contains(const Mode& nu) const;
  Complex get(const Mode& nu) const;  // zero outside the ball
  void set(const Mode& nu, Complex v);
  void add(const Mode& nu, Complex v);

  // Mass dropped by truncation while building this series.
  double truncation_mass() const { return truncation_mass_; }
  double l1_norm() const;

  TrigSeries& operator+=(const TrigSeries& o);
  TrigSeries& operator*=(Complex s);
  friend TrigSeries operator*(const TrigSeries& a, const TrigSeries& b);

  // this += factor * e^{i shift.alpha} * src (truncated to the ball)
  void add_shifted(const TrigSeries& src, const Mode& shift, Complex factor);

  // exp(z) by its Taylor series; stops once a term's l1 norm drops below tol.
  static TrigSeries exp(const TrigSeries& z, double tol = 1e-22);

  // Visits every mode of the ball in a fixed lexicographic order.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (inside_[i]) f(modes_[i], coeffs_[i]);
  }
  template <class F>
  void for_each_nonzero(F&& f) const {
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (inside_[i] && coeffs_[i] != Complex{}) f(modes_[i], coeffs_[i]);
  }

 private:
  std::size_t index(const Mode& nu) const;

  int d_ = 0;
  int radius_ = 0;
  std::vector<Complex> coeffs_;
  std::vector<Mode> modes_;
  std::vector<char> inside_;
  double truncation_mass_ = 0.0;
};

// All modes with 0 < |nu|_1 <= radius in d dimensions, lexicographic order.
std::vector<Mode> nonzero_modes(int d, int radius);

}  // namespace qpr
