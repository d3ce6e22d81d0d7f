#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ihw/signal_group.hpp"

namespace ihw {

enum class TemplateLaw { GaussianStdNormal, UniformSphere };
enum class BiasLaw { GaussianStdNormal, Uniform };

/// Law of the random (template, bias) pairs behind the Monte-Carlo kernels.
/// Samples are drawn in fixed-size blocks, each from its own stream derived
/// from (seed, block index); every kernel evaluation with the same sampler sees
/// the same draws regardless of worker count.
struct TemplateSampler {
  TemplateLaw template_law = TemplateLaw::GaussianStdNormal;
  BiasLaw bias_law = BiasLaw::GaussianStdNormal;
  double bias_bound = 1.0;  // B for Uniform(-B, B)
  std::uint64_t seed = 0;

  static TemplateSampler gaussian(std::uint64_t seed) { return {TemplateLaw::GaussianStdNormal, BiasLaw::GaussianStdNormal, 1.0, seed}; }
  void validate() const;
};

inline constexpr std::size_t kSampleBlock = 4096;

struct KernelEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(samples)
  std::size_t samples = 0;
};

/// Mean over S draws of |<t,x>+b|_+ |<t,x2>+b|_+.
KernelEstimate k0_mc(const Signal& x, const Signal& x2, const TemplateSampler& sampler, std::size_t samples,
                     unsigned workers = 1);

/// Group-averaged K0: exact average over all (g, g') pairs, Monte-Carlo over
/// (t, b) only. The pair average factorizes into a product of two orbit means.
KernelEstimate ktilde_mc(const Signal& x, const Signal& x2, const FiniteGroup& group, const TemplateSampler& sampler,
                         std::size_t samples, unsigned workers = 1);

/// int_{-p}^{p} H(b - xs) H(b - xs2) db = p - max(xs, xs2)
double step_kernel_exact(double xs, double xs2, double p);

/// Trapezoid integration of the same integral with H replaced by the ramp step
/// alpha(|s|_+ - |s - 1/alpha|_+). Independent check of step_kernel_exact.
double step_kernel_numeric(double xs, double xs2, double p, std::size_t grid_points, double alpha = 1e4);

/// p - sum_t w_t mean_{g,g'} max(<I2, g t>, <I, g' t>).
/// Projections may exceed [-p, p] by at most 1e-12 max(1, p) of rounding slack.
double ktilde_step(const Signal& in, const Signal& in2, const std::vector<Signal>& templates,
                   const std::vector<double>& weights, const FiniteGroup& group, double p);

/// Mex-pooled similarity Mex_xi({<x, g y> : g in G}).
double mex_similarity(const Signal& x, const Signal& y, const FiniteGroup& group, double xi);

using KernelFn = std::function<double(const Signal&, const Signal&)>;

struct GramReport {
  Eigen::MatrixXd matrix;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool psd_pass = false;
};

/// Full Gram matrix with a symmetric eigensolve. Kernel calls may run on
/// `workers` threads, so `kernel` must be safe to call concurrently.
GramReport gram(const std::vector<Signal>& points, const KernelFn& kernel, unsigned workers = 1);

struct MexScanReport {
  std::size_t instances = 0;
  std::size_t violations = 0;  // instances with min eigenvalue < threshold
  double min_eigenvalue = 0.0;
  std::optional<std::size_t> first_violation;
};

/// Randomized search for Mex-similarity Gram matrices that are not PSD.
/// Instance i uses d = 2 + i % 3 (cyclic group), xi from {1, 5, 25}, and 3..6
/// random unit points.
MexScanReport mex_psd_scan(std::uint64_t seed, std::size_t instances = 1000, double threshold = -1e-6);

struct SelectivityReport {
  double same_orbit_min = 0.0;
  std::optional<double> distinct_orbit_max;
  std::optional<double> margin;  // same_orbit_min - distinct_orbit_max
  double max_abs_normalized = 0.0;
  bool pass = false;             // margin >= threshold, or no distinct pairs
};

/// Normalized kernel K(a,b)/sqrt(K(a,a)K(b,b)) over all member pairs. Orbits
/// whose representative appears in another orbit's members are the same orbit.
SelectivityReport selectivity_scan(const std::vector<Orbit>& orbits, const KernelFn& kernel, double threshold = 1e-3);

/// "row,col,value" lines, header included.
std::string gram_to_csv(const GramReport& report);
/// {min_eig, max_eig, psd_pass, n_points, kernel_id, seed}
std::string gram_summary_json(const GramReport& report, const std::string& kernel_id, std::uint64_t seed);

}  // namespace ihw
