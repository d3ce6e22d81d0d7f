#include "ihw/ramp_approx.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ihw/error.hpp"
#include "json.hpp"

namespace ihw::ramp {

double abs_identity(double s) noexcept { return relu(s) + relu(-s); }

double step_approx(double s, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "step_approx requires alpha > 0");
  // Closed form of alpha (|s|_+ - |s - 1/alpha|_+); the ramp difference itself
  // rounds to 1 - O(eps) on the plateau.
  return std::clamp(alpha * s, 0.0, 1.0);
}

double hat_via_ramps(double s, double w) {
  if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "hat_via_ramps requires w > 0");
  // The bump is even; evaluating at |s| makes hat(s) == hat(-s) bit for bit.
  const double a = std::abs(s);
  return (relu(a + w) - 2.0 * relu(a) + relu(a - w)) / w;
}

RampCombination::RampCombination(std::vector<RampUnit> units) : units_(std::move(units)) {
  if (units_.empty()) throw Error(ErrorCode::InvalidArgument, "ramp combination needs at least one unit");
  for (const auto& u : units_)
    if (u.sign != 1 && u.sign != -1) throw Error(ErrorCode::InvalidArgument, "ramp sign must be +1 or -1");
}

double RampCombination::operator()(double s) const noexcept {
  double acc = 0.0;
  for (const auto& u : units_) acc += u.coeff * relu(u.sign * s + u.bias);
  return acc;
}

RampFit fit_ramp_combination(const std::function<double(double)>& target, double lo, double hi,
                             std::size_t n_points, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "need at least one ramp unit");
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "fit interval must satisfy lo < hi");
  if (n_points < 10 * k) throw Error(ErrorCode::InvalidArgument, "need n_points >= 10 k");

  std::vector<RampUnit> units;
  units.reserve(k);
  const double width = hi - lo;
  units.push_back({0.0, -(lo + 0.5 * width), 1});
  for (std::size_t i = 1; i < k; ++i) units.push_back({0.0, lo + width * static_cast<double>(i) / k, -1});

  const auto n = static_cast<Eigen::Index>(n_points);
  Eigen::VectorXd grid(n);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(k));
  for (Eigen::Index j = 0; j < n; ++j) {
    grid[j] = lo + width * static_cast<double>(j) / static_cast<double>(n - 1);
    y[j] = target(grid[j]);
    for (std::size_t i = 0; i < k; ++i)
      design(j, static_cast<Eigen::Index>(i)) = relu(units[i].sign * grid[j] + units[i].bias);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-10 * sv[0])
    throw Error(ErrorCode::SingularDesign, "ramp design matrix is rank deficient");
  const Eigen::VectorXd coeffs = svd.solve(y);
  for (std::size_t i = 0; i < k; ++i) units[i].coeff = coeffs[static_cast<Eigen::Index>(i)];

  const double sup = (design * coeffs - y).cwiseAbs().maxCoeff();
  return RampFit{RampCombination(std::move(units)), lo, hi, n_points, sup};
}

std::string to_json(const RampFit& fit) {
  using nlohmann::json;
  json units = json::array();
  for (const auto& u : fit.combination.units()) units.push_back({{"c", u.coeff}, {"b", u.bias}, {"sign", u.sign}});
  json doc{{"units", units},
           {"grid", {{"lo", fit.lo}, {"hi", fit.hi}, {"n_points", fit.n_points}}},
           {"sup_error", fit.sup_error}};
  return doc.dump(2);
}

}  // namespace ihw::ramp
