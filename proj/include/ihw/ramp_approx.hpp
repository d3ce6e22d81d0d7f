#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace ihw::ramp {

inline double relu(double s) noexcept { return s > 0.0 ? s : 0.0; }

/// |s|_+ + |-s|_+, which equals |s| exactly.
double abs_identity(double s) noexcept;

/// Ramp-built step alpha (|s|_+ - |s - 1/alpha|_+): 0 for s <= 0, alpha s on
/// (0, 1/alpha), 1 from 1/alpha on.
double step_approx(double s, double alpha);

/// Triangular bump of half-width w from three ramps,
/// (1/w)(|s+w|_+ - 2|s|_+ + |s-w|_+). Peak 1 at 0, zero outside [-w, w].
double hat_via_ramps(double s, double w);

struct RampUnit {
  double coeff = 0.0;
  double bias = 0.0;
  int sign = 1;  // +1 or -1

  /// Kink location: where sign * s + bias = 0.
  double breakpoint() const noexcept { return -sign * bias; }
};

/// s -> sum_i c_i |sign_i s + b_i|_+
class RampCombination {
 public:
  explicit RampCombination(std::vector<RampUnit> units);

  double operator()(double s) const noexcept;
  const std::vector<RampUnit>& units() const noexcept { return units_; }

 private:
  std::vector<RampUnit> units_;
};

struct RampFit {
  RampCombination combination;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n_points = 0;
  double sup_error = 0.0;  // max deviation over the fitting grid
};

/// Least-squares fit of `target` on an evenly spaced grid of n_points over
/// [lo, hi] with k ramps at fixed breakpoints: one right-facing ramp at the
/// interval midpoint and k - 1 left-facing ramps at the interior knots of a
/// uniform k-cell partition. Doubling k refines the knot set, so the spans are
/// nested. Requires n_points >= 10 k.
RampFit fit_ramp_combination(const std::function<double(double)>& target, double lo, double hi,
                             std::size_t n_points, std::size_t k);

/// {"units": [{"c", "b", "sign"}], "grid": {"lo", "hi", "n_points"}, "sup_error"}
std::string to_json(const RampFit& fit);

}  // namespace ihw::ramp
