#include "ihw/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ihw/error.hpp"
#include "ihw/format.hpp"
#include "ihw/hw_module.hpp"
#include "ihw/parallel.hpp"
#include "ihw/rng.hpp"
#include "json.hpp"

namespace ihw {

namespace {

struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }

  // Chan et al. pairwise combination.
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double n = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / n;
    m2 += o.m2 + delta * delta * count * o.count / n;
    count = n;
  }
};

class TemplateStream {
 public:
  TemplateStream(const TemplateSampler& sampler, std::size_t block, std::size_t dim)
      : sampler_(sampler), rng_(derive_seed(sampler.seed, {block})), t_(dim) {}

  void next() {
    for (double& v : t_) v = normal_(rng_);
    if (sampler_.template_law == TemplateLaw::UniformSphere) {
      const double n = norm2(t_);
      for (double& v : t_) v /= n;
    }
    b_ = sampler_.bias_law == BiasLaw::GaussianStdNormal ? normal_(rng_) : uniform_(rng_) * sampler_.bias_bound;
  }

  const std::vector<double>& t() const noexcept { return t_; }
  double b() const noexcept { return b_; }

 private:
  const TemplateSampler& sampler_;
  Rng rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{-1.0, 1.0};
  std::vector<double> t_;
  double b_ = 0.0;
};

// Mean and standard error of per_sample(t, b) over `samples` draws. Blocks are
// reduced in block order, so the result does not depend on `workers`.
template <typename PerSample>
KernelEstimate monte_carlo(std::size_t dim, const TemplateSampler& sampler, std::size_t samples, unsigned workers,
                           PerSample&& per_sample) {
  sampler.validate();
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "Monte-Carlo estimate needs at least 2 samples");
  const std::size_t blocks = (samples + kSampleBlock - 1) / kSampleBlock;
  std::vector<Moments> partial(blocks);
  parallel_for(blocks, workers, [&](std::size_t block) {
    TemplateStream stream(sampler, block, dim);
    const std::size_t n = std::min(kSampleBlock, samples - block * kSampleBlock);
    Moments m;
    for (std::size_t s = 0; s < n; ++s) {
      stream.next();
      m.add(per_sample(stream.t(), stream.b()));
    }
    partial[block] = m;
  });
  Moments total;
  for (const auto& m : partial) total.merge(m);
  const double var = total.m2 / (total.count - 1.0);
  return {total.mean, std::sqrt(std::max(var, 0.0) / total.count), samples};
}

// mean_g |<g t, x> + b|_+ with <g t, x> = sum_i t[i] x[g(i)]
double orbit_response(const FiniteGroup& group, std::span<const double> t, const Signal& x, double b) {
  double acc = 0.0;
  for (const auto& g : group.elements()) {
    const auto map = g.map();
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * x[map[i]];
    acc += std::max(s + b, 0.0);
  }
  return acc / static_cast<double>(group.order());
}

double ramp_step(double s, double alpha) {
  // alpha (|s|_+ - |s - 1/alpha|_+), evaluated literally.
  return alpha * (std::max(s, 0.0) - std::max(s - 1.0 / alpha, 0.0));
}

void check_projection_range(double v, double p, const char* what) {
  if (v < -p || v > p) throw Error(ErrorCode::OutOfRange, std::string(what) + " outside [-p, p]");
}

}  // namespace

void TemplateSampler::validate() const {
  if (bias_law == BiasLaw::Uniform && !(bias_bound > 0.0))
    throw Error(ErrorCode::InvalidArgument, "uniform bias law needs B > 0");
}

KernelEstimate k0_mc(const Signal& x, const Signal& x2, const TemplateSampler& sampler, std::size_t samples,
                     unsigned workers) {
  require_dims(x.dim(), x2.dim(), "k0_mc");
  return monte_carlo(x.dim(), sampler, samples, workers, [&](const std::vector<double>& t, double b) {
    return std::max(dot(t, x.values()) + b, 0.0) * std::max(dot(t, x2.values()) + b, 0.0);
  });
}

KernelEstimate ktilde_mc(const Signal& x, const Signal& x2, const FiniteGroup& group, const TemplateSampler& sampler,
                         std::size_t samples, unsigned workers) {
  require_dims(x.dim(), x2.dim(), "ktilde_mc");
  require_dims(group.dim(), x.dim(), "ktilde_mc group");
  return monte_carlo(x.dim(), sampler, samples, workers, [&](const std::vector<double>& t, double b) {
    return orbit_response(group, t, x, b) * orbit_response(group, t, x2, b);
  });
}

double step_kernel_exact(double xs, double xs2, double p) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "step kernel requires p > 0");
  check_projection_range(xs, p, "xs");
  check_projection_range(xs2, p, "xs2");
  return p - std::max(xs, xs2);
}

double step_kernel_numeric(double xs, double xs2, double p, std::size_t grid_points, double alpha) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "step kernel requires p > 0");
  if (grid_points < 1000) throw Error(ErrorCode::InvalidArgument, "step_kernel_numeric needs >= 1000 grid points");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  check_projection_range(xs, p, "xs");
  check_projection_range(xs2, p, "xs2");
  const double h = 2.0 * p / static_cast<double>(grid_points - 1);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double b = -p + h * static_cast<double>(j);
    const double f = ramp_step(b - xs, alpha) * ramp_step(b - xs2, alpha);
    acc += (j == 0 || j + 1 == grid_points) ? 0.5 * f : f;
  }
  return acc * h;
}

double ktilde_step(const Signal& in, const Signal& in2, const std::vector<Signal>& templates,
                   const std::vector<double>& weights, const FiniteGroup& group, double p) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "ktilde_step requires p > 0");
  require_dims(in.dim(), in2.dim(), "ktilde_step");
  require_dims(group.dim(), in.dim(), "ktilde_step group");
  if (templates.empty() || templates.size() != weights.size())
    throw Error(ErrorCode::InvalidArgument, "need one weight per template");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error(ErrorCode::WeightsNotNormalized, "negative template weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw Error(ErrorCode::WeightsNotNormalized, "template weights must sum to 1");

  const double slack = 1e-12 * std::max(1.0, p);
  auto projection = [&](const Signal& v, const std::vector<double>& gt) {
    const double s = dot(v.values(), gt);
    check_projection_range(s, p + slack, "projection");
    return std::clamp(s, -p, p);
  };

  const std::size_t order = group.order();
  std::vector<double> a(order), b(order), maxima(order * order);
  double acc = 0.0;
  for (std::size_t k = 0; k < templates.size(); ++k) {
    require_dims(in.dim(), templates[k].dim(), "ktilde_step template");
    for (std::size_t g = 0; g < order; ++g) {
      const auto gt = group[g].apply(templates[k].values());
      a[g] = projection(in2, gt);
      b[g] = projection(in, gt);
    }
    for (std::size_t g = 0; g < order; ++g)
      for (std::size_t h = 0; h < order; ++h) maxima[g * order + h] = std::max(a[g], b[h]);
    // Sorting makes the sum independent of which argument came first.
    std::sort(maxima.begin(), maxima.end());
    acc += weights[k] * std::accumulate(maxima.begin(), maxima.end(), 0.0) / static_cast<double>(maxima.size());
  }
  return p - acc;
}

double mex_similarity(const Signal& x, const Signal& y, const FiniteGroup& group, double xi) {
  require_dims(x.dim(), y.dim(), "mex_similarity");
  require_dims(group.dim(), x.dim(), "mex_similarity group");
  std::vector<double> values;
  values.reserve(group.order());
  for (const auto& g : group.elements()) values.push_back(dot(x.values(), g.apply(y.values())));
  // {<x, g y>} and {<y, g x>} coincide as multisets; sorting makes the result symmetric.
  std::sort(values.begin(), values.end());
  return pool(values, PoolingSpec::mex(xi));
}

GramReport gram(const std::vector<Signal>& points, const KernelFn& kernel, unsigned workers) {
  const std::size_t n = points.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "gram needs at least 2 points");
  Eigen::MatrixXd raw(n, n);
  parallel_for(n * n, workers, [&](std::size_t idx) {
    const std::size_t i = idx / n, j = idx % n;
    raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel(points[i], points[j]);
  });
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index j = i + 1; j < raw.cols(); ++j)
      if (std::abs(raw(i, j) - raw(j, i)) > 1e-9)
        throw Error(ErrorCode::KernelAsymmetric, "K(" + std::to_string(i) + "," + std::to_string(j) + ") != K(" +
                                                     std::to_string(j) + "," + std::to_string(i) + ")");

  GramReport report;
  report.matrix = 0.5 * (raw + raw.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(report.matrix, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = eig.eigenvalues().minCoeff();
  report.max_eigenvalue = eig.eigenvalues().maxCoeff();
  report.psd_pass = report.min_eigenvalue >= -1e-8 * std::max(std::abs(report.max_eigenvalue), 1.0);
  return report;
}

MexScanReport mex_psd_scan(std::uint64_t seed, std::size_t instances, double threshold) {
  static constexpr double kXi[] = {1.0, 5.0, 25.0};
  MexScanReport report;
  report.instances = instances;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t d = 2 + i % 3;
    const double xi = kXi[(i / 3) % 3];
    const std::size_t n = 3 + (i / 9) % 4;
    Rng rng(derive_seed(seed, {0x6d6578ULL, i}));
    std::normal_distribution<double> normal;
    std::vector<Signal> points;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> v(d);
      for (double& c : v) c = normal(rng);
      points.push_back(Signal::normalize(v));
    }
    const auto group = cyclic_group(d);
    const auto g = gram(points, [&](const Signal& a, const Signal& b) { return mex_similarity(a, b, group, xi); });
    report.min_eigenvalue = std::min(report.min_eigenvalue, g.min_eigenvalue);
    if (g.min_eigenvalue < threshold) {
      ++report.violations;
      if (!report.first_violation) report.first_violation = i;
    }
  }
  return report;
}

SelectivityReport selectivity_scan(const std::vector<Orbit>& orbits, const KernelFn& kernel, double threshold) {
  const std::size_t m = orbits.size();
  std::vector<std::size_t> cls(m);
  std::iota(cls.begin(), cls.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) { return cls[i] == i ? i : cls[i] = find(cls[i]); };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const auto& mem = orbits[i].members;
      if (i != j && std::find(mem.begin(), mem.end(), orbits[j].representative) != mem.end())
        cls[find(j)] = find(i);
    }

  auto normalized = [&](const Signal& a, const Signal& b) {
    const double kaa = kernel(a, a), kbb = kernel(b, b);
    if (!(kaa > 0.0) || !(kbb > 0.0))
      throw Error(ErrorCode::InvalidArgument, "normalized kernel needs K(x,x) > 0");
    return kernel(a, b) / std::sqrt(kaa * kbb);
  };

  SelectivityReport report;
  report.same_orbit_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const bool same = find(i) == find(j);
      for (const auto& a : orbits[i].members) {
        for (const auto& b : orbits[j].members) {
          const double v = normalized(a, b);
          report.max_abs_normalized = std::max(report.max_abs_normalized, std::abs(v));
          if (same) report.same_orbit_min = std::min(report.same_orbit_min, v);
          else report.distinct_orbit_max = std::max(report.distinct_orbit_max.value_or(v), v);
        }
      }
    }
  }
  if (report.distinct_orbit_max) report.margin = report.same_orbit_min - *report.distinct_orbit_max;
  report.pass = !report.margin || *report.margin >= threshold;
  return report;
}

std::string gram_to_csv(const GramReport& report) {
  std::ostringstream out;
  out << "row,col,value\n";
  for (Eigen::Index i = 0; i < report.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < report.matrix.cols(); ++j)
      out << i << ',' << j << ',' << format_double(report.matrix(i, j)) << '\n';
  return out.str();
}

std::string gram_summary_json(const GramReport& report, const std::string& kernel_id, std::uint64_t seed) {
  nlohmann::json doc{{"min_eig", report.min_eigenvalue},
                     {"max_eig", report.max_eigenvalue},
                     {"psd_pass", report.psd_pass},
                     {"n_points", report.matrix.rows()},
                     {"kernel_id", kernel_id},
                     {"seed", seed}};
  return doc.dump(2);
}

}  // namespace ihw
