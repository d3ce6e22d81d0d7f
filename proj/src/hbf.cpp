#include "ihw/hbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ihw/error.hpp"
#include "ihw/format.hpp"
#include "ihw/rng.hpp"
#include "json.hpp"

namespace ihw::hbf {

namespace {

// Basis matrix (G)_{i a} = G(||x_i - t_a||^2) and the squared distances.
struct Design {
  Eigen::MatrixXd basis;
  Eigen::MatrixXd r2;
};

Design design(const HBFModel& model, const TrainingSet& data) {
  const Eigen::Index N = data.size(), n = model.n();
  Design out{Eigen::MatrixXd(N, n), Eigen::MatrixXd(N, n)};
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index i = 0; i < N; ++i) {
      const double r2 = (data.inputs.row(i) - model.centers.row(a)).squaredNorm();
      out.r2(i, a) = r2;
      out.basis(i, a) = radial_basis(r2, model.sigma);
    }
  return out;
}

void check_compatible(const HBFModel& model, const TrainingSet& data) {
  model.validate();
  data.validate();
  require_dims(static_cast<std::size_t>(model.d()), static_cast<std::size_t>(data.inputs.cols()), "input dimension");
}

Eigen::MatrixXd center_gradient(const HBFModel& model, const TrainingSet& data, const Design& des,
                                const Eigen::VectorXd& delta) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(model.n(), model.d());
  const double dscale = -1.0 / (2.0 * model.sigma * model.sigma);
  for (Eigen::Index a = 0; a < model.n(); ++a) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(model.d());
    for (Eigen::Index i = 0; i < data.size(); ++i)
      acc += (delta[i] * des.basis(i, a) * dscale) * (data.inputs.row(i) - model.centers.row(a));
    grad.row(a) = 4.0 * model.coeffs[a] * acc;
  }
  return grad;
}

}  // namespace

void HBFModel::validate() const {
  if (centers.rows() < 1 || centers.cols() < 1) throw Error(ErrorCode::InvalidArgument, "model needs n >= 1, d >= 1");
  require_dims(static_cast<std::size_t>(centers.rows()), static_cast<std::size_t>(coeffs.size()), "coefficients");
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
}

void TrainingSet::validate() const {
  if (inputs.rows() < 1 || inputs.cols() < 1) throw Error(ErrorCode::InvalidArgument, "training set needs N >= 1");
  require_dims(static_cast<std::size_t>(inputs.rows()), static_cast<std::size_t>(targets.size()), "targets");
}

double radial_basis(double r2, double sigma) { return std::exp(-r2 / (2.0 * sigma * sigma)); }

double radial_basis_derivative(double r2, double sigma) {
  return -radial_basis(r2, sigma) / (2.0 * sigma * sigma);
}

double hbf_eval(const HBFModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  model.validate();
  require_dims(static_cast<std::size_t>(model.d()), static_cast<std::size_t>(x.size()), "hbf_eval input");
  double f = 0.0;
  for (Eigen::Index a = 0; a < model.n(); ++a)
    f += model.coeffs[a] * radial_basis((x.transpose() - model.centers.row(a)).squaredNorm(), model.sigma);
  return f;
}

Eigen::VectorXd residuals(const HBFModel& model, const TrainingSet& data) {
  check_compatible(model, data);
  return data.targets - design(model, data).basis * model.coeffs;
}

double objective(const HBFModel& model, const TrainingSet& data) { return residuals(model, data).squaredNorm(); }

Eigen::VectorXd grad_coeffs(const HBFModel& model, const TrainingSet& data) {
  check_compatible(model, data);
  const auto des = design(model, data);
  const Eigen::VectorXd delta = data.targets - des.basis * model.coeffs;
  return -2.0 * des.basis.transpose() * delta;
}

Eigen::MatrixXd grad_centers(const HBFModel& model, const TrainingSet& data) {
  check_compatible(model, data);
  const auto des = design(model, data);
  const Eigen::VectorXd delta = data.targets - des.basis * model.coeffs;
  return center_gradient(model, data, des, delta);
}

SolveReport solve_coeffs(const HBFModel& model, const TrainingSet& data) {
  check_compatible(model, data);
  const Eigen::Index N = data.size(), n = model.n();
  const auto des = design(model, data);

  // Square root of (lambda g + jitter I) from its eigendecomposition.
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      g(a, b) = radial_basis((model.centers.row(a) - model.centers.row(b)).squaredNorm(), model.sigma);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.lambda * g);
  const Eigen::VectorXd w = (eig.eigenvalues().cwiseMax(0.0).array() + kJitter).sqrt();
  const Eigen::MatrixXd root = w.asDiagonal() * eig.eigenvectors().transpose();

  Eigen::MatrixXd aug(N + n, n);
  aug << des.basis, root;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + n);
  rhs.head(N) = data.targets;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aug);
  if (qr.rank() < n) throw Error(ErrorCode::SingularSystem, "regularized normal equations are singular");
  SolveReport report;
  report.coeffs = qr.solve(rhs);
  if (!report.coeffs.allFinite()) throw Error(ErrorCode::SingularSystem, "non-finite coefficients");
  report.max_residual = (data.targets - des.basis * report.coeffs).cwiseAbs().maxCoeff();
  report.underdetermined = N < n;
  return report;
}

double median_pairwise_distance(const Eigen::MatrixXd& inputs) {
  std::vector<double> dist;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) dist.push_back((inputs.row(i) - inputs.row(j)).norm());
  if (dist.empty()) throw Error(ErrorCode::InvalidArgument, "median distance needs at least two inputs");
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  if (dist.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dist.begin(), mid);
  return 0.5 * (lower + upper);
}

double min_pairwise_distance(const Eigen::MatrixXd& inputs) {
  if (inputs.rows() < 2) throw Error(ErrorCode::InvalidArgument, "min distance needs at least two inputs");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) best = std::min(best, (inputs.row(i) - inputs.row(j)).norm());
  return best;
}

Eigen::MatrixXd init_centers(const TrainingSet& data, Eigen::Index n, std::uint64_t seed) {
  data.validate();
  const Eigen::Index N = data.size(), d = data.inputs.cols();
  if (n < 1 || n > N) throw Error(ErrorCode::InvalidN, "need 1 <= n <= N, got n = " + std::to_string(n));

  // Partial Fisher-Yates: the first n entries are n distinct sample indices.
  Rng rng(derive_seed(seed, {0x6b6d65616e73ULL}));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (Eigen::Index k = 0; k < n; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, N - 1);
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
  }
  Eigen::MatrixXd centers(n, d);
  for (Eigen::Index k = 0; k < n; ++k) centers.row(k) = data.inputs.row(order[static_cast<std::size_t>(k)]);

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(N));
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<double> dist(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < n; ++a) {
        const double r2 = (data.inputs.row(i) - centers.row(a)).squaredNorm();
        if (r2 < best_d) {  // strict: ties keep the lowest center index
          best_d = r2;
          best = a;
        }
      }
      assign[static_cast<std::size_t>(i)] = best;
      dist[static_cast<std::size_t>(i)] = best_d;
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, d);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < N; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += data.inputs.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    Eigen::MatrixXd next(n, d);
    for (Eigen::Index a = 0; a < n; ++a) {
      if (counts[static_cast<std::size_t>(a)] > 0) {
        next.row(a) = sums.row(a) / static_cast<double>(counts[static_cast<std::size_t>(a)]);
        continue;
      }
      // Empty cluster: take the point farthest from its center; it is then
      // spent so a second empty cluster picks a different one.
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < N; ++i)
        if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) far = i;
      next.row(a) = data.inputs.row(far);
      dist[static_cast<std::size_t>(far)] = -1.0;
    }

    const double scale = std::max(1.0, centers.cwiseAbs().maxCoeff());
    const double shift = (next - centers).rowwise().norm().maxCoeff() / scale;
    centers = next;
    if (shift < 1e-8) break;
  }
  return centers;
}

void TrainConfig::validate() const {
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "grad_tol must be positive");
  if (!(noise_amplitude >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_amplitude must be nonnegative");
}

TrainResult train(const HBFModel& model, const TrainingSet& data, const TrainConfig& config) {
  check_compatible(model, data);
  config.validate();

  TrainResult result{model, {}, false};
  HBFModel& m = result.model;
  Rng rng(derive_seed(config.seed, {0x747261696eULL}));
  std::normal_distribution<double> normal;
  double initial = 0.0;

  for (std::size_t iter = 0;; ++iter) {
    const auto des = design(m, data);
    const Eigen::VectorXd delta = data.targets - des.basis * m.coeffs;
    const Eigen::VectorXd gc = -2.0 * des.basis.transpose() * delta;
    const Eigen::MatrixXd gt =
        config.move_centers ? center_gradient(m, data, des, delta) : Eigen::MatrixXd::Zero(m.n(), m.d());
    const double obj = delta.squaredNorm();
    const double gnorm = std::max(gc.cwiseAbs().maxCoeff(), gt.cwiseAbs().maxCoeff());
    result.trace.push_back({iter, obj, gnorm});

    if (iter == 0) initial = obj;
    if (!std::isfinite(obj) || obj > 1e6 * initial)
      throw Error(ErrorCode::DivergenceDetected, "objective grew beyond 1e6 x its initial value");
    if (gnorm < config.grad_tol) {
      result.converged = true;
      break;
    }
    if (iter == config.max_iters) break;

    const double amp = config.noise_amplitude / static_cast<double>(iter + 1);
    m.coeffs -= config.omega * gc;
    if (config.move_centers) m.centers -= config.omega * gt;
    if (amp > 0.0) {
      for (Eigen::Index a = 0; a < m.n(); ++a) m.coeffs[a] += amp * normal(rng);
      if (config.move_centers)
        for (Eigen::Index a = 0; a < m.n(); ++a)
          for (Eigen::Index k = 0; k < m.d(); ++k) m.centers(a, k) += amp * normal(rng);
    }
    if (config.resolve_every > 0 && (iter + 1) % config.resolve_every == 0) m.coeffs = solve_coeffs(m, data).coeffs;
  }
  return result;
}

std::size_t FixedPointReport::skipped_count() const noexcept {
  return static_cast<std::size_t>(std::count(skipped.begin(), skipped.end(), true));
}

FixedPointReport center_fixed_point_residual(const HBFModel& model, const TrainingSet& data) {
  check_compatible(model, data);
  const auto des = design(model, data);
  const Eigen::VectorXd delta = data.targets - des.basis * model.coeffs;
  const double dscale = -1.0 / (2.0 * model.sigma * model.sigma);

  FixedPointReport report;
  report.per_center.assign(static_cast<std::size_t>(model.n()), 0.0);
  report.skipped.assign(static_cast<std::size_t>(model.n()), false);
  for (Eigen::Index a = 0; a < model.n(); ++a) {
    double den = 0.0;
    Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(model.d());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const double p = delta[i] * des.basis(i, a) * dscale;
      den += p;
      num += p * data.inputs.row(i);
    }
    if (std::abs(den) <= 1e-12) {
      report.skipped[static_cast<std::size_t>(a)] = true;
      continue;
    }
    const double r = (model.centers.row(a) - num / den).cwiseAbs().maxCoeff();
    report.per_center[static_cast<std::size_t>(a)] = r;
    report.residual = std::max(report.residual, r);
  }
  return report;
}

CapacityReport check_capacity(std::size_t examples, std::size_t centers, std::size_t dim, double threshold) {
  if (examples == 0 || centers == 0 || dim == 0)
    throw Error(ErrorCode::InvalidArgument, "capacity check needs positive N, n, d");
  const double ratio = static_cast<double>(examples) / static_cast<double>(centers + centers * dim);
  return {ratio, ratio >= threshold};
}

std::string model_to_json(const HBFModel& model) {
  model.validate();
  nlohmann::json centers = nlohmann::json::array();
  for (Eigen::Index a = 0; a < model.n(); ++a) {
    std::vector<double> row(static_cast<std::size_t>(model.d()));
    for (Eigen::Index k = 0; k < model.d(); ++k) row[static_cast<std::size_t>(k)] = model.centers(a, k);
    centers.push_back(row);
  }
  nlohmann::json doc{{"d", model.d()},
                     {"n", model.n()},
                     {"sigma", model.sigma},
                     {"lambda", model.lambda},
                     {"centers", centers},
                     {"coeffs", std::vector<double>(model.coeffs.data(), model.coeffs.data() + model.coeffs.size())}};
  return doc.dump(2);
}

HBFModel model_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto d = doc.at("d").get<Eigen::Index>();
    const auto n = doc.at("n").get<Eigen::Index>();
    HBFModel model;
    model.sigma = doc.at("sigma").get<double>();
    model.lambda = doc.at("lambda").get<double>();
    const auto& centers = doc.at("centers");
    const auto coeffs = doc.at("coeffs").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(centers.size()) != n || static_cast<Eigen::Index>(coeffs.size()) != n)
      throw Error(ErrorCode::MalformedFile, "model: centers/coeffs length differs from n");
    model.centers.resize(n, d);
    model.coeffs.resize(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const auto row = centers[static_cast<std::size_t>(a)].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != d) throw Error(ErrorCode::MalformedFile, "model: center length differs from d");
      for (Eigen::Index k = 0; k < d; ++k) model.centers(a, k) = row[static_cast<std::size_t>(k)];
      model.coeffs[a] = coeffs[static_cast<std::size_t>(a)];
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("model: ") + e.what());
  }
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "iteration,objective,grad_inf_norm\n";
  for (const auto& row : trace)
    out << row.iteration << ',' << format_double(row.objective) << ',' << format_double(row.grad_inf_norm) << '\n';
  return out.str();
}

}  // namespace ihw::hbf
