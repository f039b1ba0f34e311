// Copyright 2026 The cubify3d Authors
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

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace cubify3d {

/// Forward-mode first-order dual number carrying N partial derivatives.
/// Comparisons act on the primal value, so branchy geometry code (clipping,
/// interval overlap) instantiates cleanly; derivatives are exact wherever the
/// branch structure is locally stable.
template <std::size_t N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit by design, constants promote

  static Dual seeded(double value, std::size_t index) {
    Dual out(value);
    out.d[index] = 1.0;
    return out;
  }

  Dual operator-() const {
    Dual out(-v);
    for (std::size_t i = 0; i < N; ++i) out.d[i] = -d[i];
    return out;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
    v *= inv;
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
  friend bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
  friend bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }
};

template <std::size_t N>
inline Dual<N> sin(const Dual<N>& a) {
  Dual<N> out(std::sin(a.v));
  const double c = std::cos(a.v);
  for (std::size_t i = 0; i < N; ++i) out.d[i] = c * a.d[i];
  return out;
}

template <std::size_t N>
inline Dual<N> cos(const Dual<N>& a) {
  Dual<N> out(std::cos(a.v));
  const double s = -std::sin(a.v);
  for (std::size_t i = 0; i < N; ++i) out.d[i] = s * a.d[i];
  return out;
}

template <std::size_t N>
inline Dual<N> sqrt(const Dual<N>& a) {
  const double r = std::sqrt(a.v);
  Dual<N> out(r);
  const double scale = 0.5 / r;
  for (std::size_t i = 0; i < N; ++i) out.d[i] = scale * a.d[i];
  return out;
}

template <std::size_t N>
inline Dual<N> log(const Dual<N>& a) {
  Dual<N> out(std::log(a.v));
  const double inv = 1.0 / a.v;
  for (std::size_t i = 0; i < N; ++i) out.d[i] = inv * a.d[i];
  return out;
}

// Non-differentiable at 0; callers are expected to stay off that boundary.
template <std::size_t N>
inline Dual<N> abs(const Dual<N>& a) {
  return a.v < 0.0 ? -a : a;
}

template <std::size_t N>
inline Dual<N> max(const Dual<N>& a, const Dual<N>& b) {
  return a.v >= b.v ? a : b;
}

template <std::size_t N>
inline Dual<N> min(const Dual<N>& a, const Dual<N>& b) {
  return a.v <= b.v ? a : b;
}

// Scalar fallbacks so templated numeric code can use unqualified calls.
inline double sin(double a) { return std::sin(a); }
inline double cos(double a) { return std::cos(a); }
inline double sqrt(double a) { return std::sqrt(a); }
inline double log(double a) { return std::log(a); }
inline double abs(double a) { return std::fabs(a); }
inline double max(double a, double b) { return a >= b ? a : b; }
inline double min(double a, double b) { return a <= b ? a : b; }

}  // namespace cubify3d
