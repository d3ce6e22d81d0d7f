#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "ihw/signal_group.hpp"

// Closed forms used only to validate the numerical routines.
namespace ihw::oracles {

/// Order-1 arc-cosine kernel (1/pi) |u||v| J(theta) / 2 with
/// J(theta) = sin(theta) + (pi - theta) cos(theta): the expectation of
/// |<w,u>|_+ |<w,v>|_+ for w ~ N(0, I).
inline double arc_cosine_order1(std::span<const double> u, std::span<const double> v) {
  const double nu = norm2(u), nv = norm2(v);
  const double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
  const double theta = std::acos(c);
  return nu * nv * (std::sin(theta) + (std::numbers::pi - theta) * c) / (2.0 * std::numbers::pi);
}

/// K0(x, x2) under standard Gaussian template and bias laws: the bias is
/// absorbed by augmenting both inputs with a constant 1 coordinate.
inline double k0_gaussian(const Signal& x, const Signal& x2) {
  std::vector<double> u(x.values().begin(), x.values().end()), v(x2.values().begin(), x2.values().end());
  u.push_back(1.0);
  v.push_back(1.0);
  return arc_cosine_order1(u, v);
}

/// p - (x + x' + |x - x'|) / 2
inline double step_kernel_identity(double x, double x2, double p) { return p - 0.5 * (x + x2 + std::abs(x - x2)); }

}  // namespace ihw::oracles
