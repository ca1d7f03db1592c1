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

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>

namespace qpr {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Largest torus dimension d supported by the fixed-size integer vectors.
inline constexpr int kMaxDim = 4;

// Integer Fourier index on T^d.  Components beyond the active dimension are
// kept at zero so that comparison and hashing ignore them.
struct Mode {
  std::array<int, kMaxDim> c{};

  int& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  int operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  friend Mode operator+(const Mode& a, const Mode& b) {
    Mode m;
    for (int i = 0; i < kMaxDim; ++i) m[i] = a[i] + b[i];
    return m;
  }
  friend Mode operator-(const Mode& a, const Mode& b) {
    Mode m;
    for (int i = 0; i < kMaxDim; ++i) m[i] = a[i] - b[i];
    return m;
  }
  friend Mode operator-(const Mode& a) {
    Mode m;
    for (int i = 0; i < kMaxDim; ++i) m[i] = -a[i];
    return m;
  }
  Mode& operator+=(const Mode& o) {
    for (int i = 0; i < kMaxDim; ++i) c[static_cast<std::size_t>(i)] += o[i];
    return *this;
  }
  friend auto operator<=>(const Mode&, const Mode&) = default;

  bool is_zero() const {
    for (int v : c)
      if (v != 0) return false;
    return true;
  }
  int l1() const {
    int s = 0;
    for (int v : c) s += std::abs(v);
    return s;
  }
};

std::string to_string(const Mode& m, int d);

struct ModeHash {
  std::size_t operator()(const Mode& m) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (int v : m.c) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Error hierarchy.  The CLI maps each class onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "budget"; }
};

class ResonanceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "resonance"; }
};

// Raised when x^2 1 - M(x) is too close to singular for the requested
// propagator, i.e. the (eps, beta0) point lies outside the property-1 region.
class NearSingularPropagator : public Error {
 public:
  NearSingularPropagator(const std::string& what, int scale, double x)
      : Error(what), scale_(scale), x_(x) {}
  const char* kind() const noexcept override { return "near_singular"; }
  int scale() const { return scale_; }
  double x() const { return x_; }

 private:
  int scale_;
  double x_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "convergence"; }
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace qpr
