#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ihw::hbf {

/// f(x) = sum_a c_a G(||x - t_a||^2) with Gaussian G(r2) = exp(-r2 / (2 sigma^2)).
struct HBFModel {
  Eigen::MatrixXd centers;  // n x d, one center per row
  Eigen::VectorXd coeffs;   // n
  double sigma = 1.0;
  double lambda = 0.0;

  Eigen::Index n() const noexcept { return centers.rows(); }
  Eigen::Index d() const noexcept { return centers.cols(); }
  void validate() const;
};

struct TrainingSet {
  Eigen::MatrixXd inputs;   // N x d
  Eigen::VectorXd targets;  // N

  Eigen::Index size() const noexcept { return inputs.rows(); }
  void validate() const;
};

double radial_basis(double r2, double sigma);
/// dG/d(r2) = -G(r2) / (2 sigma^2)
double radial_basis_derivative(double r2, double sigma);

double hbf_eval(const HBFModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Delta_i = y_i - f(x_i)
Eigen::VectorXd residuals(const HBFModel& model, const TrainingSet& data);
/// sum_i Delta_i^2
double objective(const HBFModel& model, const TrainingSet& data);
/// dH/dc_a = -2 sum_i Delta_i G(||x_i - t_a||^2)
Eigen::VectorXd grad_coeffs(const HBFModel& model, const TrainingSet& data);
/// dH/dt_a = 4 c_a sum_i Delta_i G'(||x_i - t_a||^2) (x_i - t_a), one row per center
Eigen::MatrixXd grad_centers(const HBFModel& model, const TrainingSet& data);

struct SolveReport {
  Eigen::VectorXd coeffs;
  double max_residual = 0.0;   // max_i |Delta_i| with the solved coefficients
  bool underdetermined = false;  // N < n
};

inline constexpr double kJitter = 1e-12;

/// Minimizer of ||G c - y||^2 + c^T (lambda g + jitter I) c, i.e.
/// c = (G^T G + lambda g)^-1 G^T y with a 1e-12 diagonal floor. Solved as an
/// augmented least-squares problem by pivoted QR instead of forming G^T G.
SolveReport solve_coeffs(const HBFModel& model, const TrainingSet& data);

/// Median of the pairwise Euclidean distances between inputs (default width).
double median_pairwise_distance(const Eigen::MatrixXd& inputs);
/// Smallest distance between two rows; a width that keeps square
/// interpolation systems well conditioned.
double min_pairwise_distance(const Eigen::MatrixXd& inputs);

/// k-means with k = n: distinct-sample seeding, at most 50 Lloyd iterations or
/// relative center shift < 1e-8, empty clusters re-seeded to the point farthest
/// from its center, ties broken by lowest index.
Eigen::MatrixXd init_centers(const TrainingSet& data, Eigen::Index n, std::uint64_t seed);

struct TrainConfig {
  double omega = 1e-3;
  std::size_t max_iters = 1000;
  double grad_tol = 1e-8;
  double noise_amplitude = 0.0;  // amplitude at update k is noise_amplitude / k
  std::uint64_t seed = 0;
  bool move_centers = true;
  std::size_t resolve_every = 0;  // re-solve c by solve_coeffs every k updates; 0 = never

  void validate() const;
};

struct TraceRow {
  std::size_t iteration = 0;  // number of updates applied so far
  double objective = 0.0;
  double grad_inf_norm = 0.0;
};

struct TrainResult {
  HBFModel model;
  std::vector<TraceRow> trace;
  bool converged = false;  // stopped because grad_inf_norm < grad_tol
};

/// Joint gradient descent on (c, t) with optional decaying Gaussian noise.
/// Throws DivergenceDetected when the objective exceeds 1e6 times its start.
TrainResult train(const HBFModel& model, const TrainingSet& data, const TrainConfig& config);

struct FixedPointReport {
  double residual = 0.0;               // max over non-skipped centers
  std::vector<double> per_center;      // 0 for skipped centers
  std::vector<bool> skipped;           // |sum_i P_i^a| <= 1e-12
  std::size_t skipped_count() const noexcept;
};

/// Distance of each center from sum_i P_i x_i / sum_i P_i, with
/// P_i = Delta_i G'(||x_i - t_a||^2), in the infinity norm.
FixedPointReport center_fixed_point_residual(const HBFModel& model, const TrainingSet& data);

struct CapacityReport {
  double ratio = 0.0;  // N / (n + n d)
  bool pass = false;
};

CapacityReport check_capacity(std::size_t examples, std::size_t centers, std::size_t dim, double threshold = 5.0);

/// {d, n, sigma, lambda, centers: [[...]], coeffs: [...]}
std::string model_to_json(const HBFModel& model);
HBFModel model_from_json(std::string_view text);
/// "iteration,objective,grad_inf_norm"
std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace ihw::hbf
