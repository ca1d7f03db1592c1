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

#include "qpr/trig_series.hpp"

#include <cmath>

namespace qpr {

TrigSeries::TrigSeries(int d, int radius) : d_(d), radius_(radius) {
  if (d < 1 || d > kMaxDim) throw ValidationError("trig series: bad dimension");
  if (radius < 0) throw ValidationError("trig series: negative radius");
  std::size_t size = 1;
  for (int i = 0; i < d; ++i) size *= static_cast<std::size_t>(2 * radius + 1);
  coeffs_.assign(size, Complex{});
  modes_.resize(size);
  inside_.assign(size, 0);
  for (std::size_t idx = 0; idx < size; ++idx) {
    std::size_t rest = idx;
    Mode m;
    for (int i = d - 1; i >= 0; --i) {
      m[i] = static_cast<int>(rest % static_cast<std::size_t>(2 * radius + 1)) - radius;
      rest /= static_cast<std::size_t>(2 * radius + 1);
    }
    modes_[idx] = m;
    inside_[idx] = m.l1() <= radius ? 1 : 0;
  }
}

std::size_t TrigSeries::index(const Mode& nu) const {
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i)
    idx = idx * static_cast<std::size_t>(2 * radius_ + 1) + static_cast<std::size_t>(nu[i] + radius_);
  return idx;
}

bool TrigSeries::contains(const Mode& nu) const {
  for (int i = d_; i < kMaxDim; ++i)
    if (nu[i] != 0) return false;
  return nu.l1() <= radius_;
}

Complex TrigSeries::get(const Mode& nu) const {
  if (!contains(nu)) return {};
  return coeffs_[index(nu)];
}

void TrigSeries::set(const Mode& nu, Complex v) {
  if (!contains(nu)) throw ValidationError("trig series: mode outside the ball");
  coeffs_[index(nu)] = v;
}

void TrigSeries::add(const Mode& nu, Complex v) {
  if (!contains(nu)) {
    truncation_mass_ += std::abs(v);
    return;
  }
  coeffs_[index(nu)] += v;
}

double TrigSeries::l1_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    if (inside_[i]) s += std::abs(coeffs_[i]);
  return s;
}

TrigSeries& TrigSeries::operator+=(const TrigSeries& o) {
  o.for_each_nonzero([&](const Mode& m, Complex c) { add(m, c); });
  truncation_mass_ += o.truncation_mass_;
  return *this;
}

TrigSeries& TrigSeries::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  truncation_mass_ *= std::abs(s);
  return *this;
}

TrigSeries operator*(const TrigSeries& a, const TrigSeries& b) {
  if (a.d_ != b.d_) throw ValidationError("trig series: dimension mismatch");
  TrigSeries out(a.d_, std::max(a.radius_, b.radius_));
  std::vector<std::pair<Mode, Complex>> bn;
  b.for_each_nonzero([&](const Mode& m, Complex c) { bn.emplace_back(m, c); });
  a.for_each_nonzero([&](const Mode& ma, Complex ca) {
    for (const auto& [mb, cb] : bn) out.add(ma + mb, ca * cb);
  });
  out.truncation_mass_ += a.truncation_mass_ * b.l1_norm() + b.truncation_mass_ * a.l1_norm();
  return out;
}

void TrigSeries::add_shifted(const TrigSeries& src, const Mode& shift, Complex factor) {
  src.for_each_nonzero([&](const Mode& m, Complex c) { add(m + shift, factor * c); });
  truncation_mass_ += std::abs(factor) * src.truncation_mass_;
}

TrigSeries TrigSeries::exp(const TrigSeries& z, double tol) {
  TrigSeries sum(z.d_, z.radius_);
  TrigSeries term(z.d_, z.radius_);
  term.set(Mode{}, Complex{1.0, 0.0});
  sum.set(Mode{}, Complex{1.0, 0.0});
  for (int n = 1; n < 400; ++n) {
    term = term * z;
    term *= Complex{1.0 / n, 0.0};
    sum += term;
    if (term.l1_norm() + term.truncation_mass() < tol) break;
  }
  return sum;
}

std::vector<Mode> nonzero_modes(int d, int radius) {
  std::vector<Mode> out;
  TrigSeries ball(d, radius);
  ball.for_each([&](const Mode& m, Complex) {
    if (!m.is_zero()) out.push_back(m);
  });
  return out;
}

}  // namespace qpr
