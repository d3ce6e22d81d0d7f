#include "ihw/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ihw/error.hpp"
#include "ihw/format.hpp"
#include "ihw/hbf.hpp"
#include "ihw/hvq.hpp"
#include "ihw/hw_module.hpp"
#include "ihw/kernels.hpp"
#include "ihw/oracles.hpp"
#include "ihw/parallel.hpp"
#include "ihw/ramp_approx.hpp"
#include "ihw/rng.hpp"
#include "ihw/signal_group.hpp"

namespace ihw::cli {

namespace {

constexpr std::pair<Suite, std::string_view> kSuiteNames[] = {
    {Suite::Invariance, "invariance"}, {Suite::Kernels, "kernels"}, {Suite::Mex, "mex"}, {Suite::Ramps, "ramps"},
    {Suite::Hbf, "hbf"},               {Suite::Hvq, "hvq"},         {Suite::All, "all"}};

Format format_from_string(std::string_view name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  throw Error(ErrorCode::InvalidConfig, "unknown format '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Check helpers

CheckRow make_row(std::string id, double value, std::string_view relation, double tolerance,
                  std::string provenance, std::string note = {}) {
  bool ok = false;
  if (relation == "le") ok = value <= tolerance;
  else if (relation == "lt") ok = value < tolerance;
  else if (relation == "ge") ok = value >= tolerance;
  else if (relation == "gt") ok = value > tolerance;
  else if (relation == "eq") ok = value == tolerance;
  return {std::move(id), ok ? Status::Pass : Status::Fail, value, tolerance, std::string(relation),
          std::move(provenance), std::move(note)};
}

Signal random_unit(Rng& rng, std::size_t d) {
  std::normal_distribution<double> normal;
  std::vector<double> v(d);
  for (auto& x : v) x = normal(rng);
  return Signal::normalize(v);
}

Signal one_hot(std::size_t d, std::size_t k) {
  std::vector<double> v(d, 0.0);
  v[k] = 1.0;
  return Signal::normalize(v);
}

double mex_of(std::span<const double> v, double xi) { return pool(v, PoolingSpec::mex(xi)); }

std::string count_note(std::string_view label, std::size_t k, std::size_t n) {
  return std::string(label) + "=" + std::to_string(k) + "/" + std::to_string(n);
}

using Rows = std::vector<CheckRow>;
using CheckTask = std::function<Rows(const SuiteConfig&)>;

// ---------------------------------------------------------------------------
// mex

Rows mex_limits(const SuiteConfig&) {
  const std::vector<double> v{1, 2, 3, 4};
  Rows rows;
  rows.push_back(make_row("mex.limit_max", std::abs(mex_of(v, 100.0) - 4.0), "le", 0.05, "DERIVED",
                          "values {1,2,3,4} xi=100"));
  rows.push_back(make_row("mex.limit_mean", std::abs(mex_of(v, 1e-6) - 2.5), "le", 1e-4, "TRIVIAL",
                          "values {1,2,3,4} xi=1e-6"));
  rows.push_back(make_row("mex.limit_min", std::abs(mex_of(v, -100.0) - 1.0), "le", 0.05, "DERIVED",
                          "values {1,2,3,4} xi=-100"));
  const std::vector<double> two{0, 1};
  rows.push_back(make_row("mex.two_values", std::abs(mex_of(two, 1.0) - std::log((1.0 + std::numbers::e) / 2.0)),
                          "le", 1e-12, "DERIVED", "values {0,1} xi=1"));
  const double m = mex_of(v, 100.0);
  rows.push_back(make_row("mex.max_bound", std::max(4.0 - m - std::log(4.0) / 100.0, m - 4.0), "le", 1e-12,
                          "DERIVED", "max - ln(4)/xi <= Mex <= max"));
  return rows;
}

Rows mex_properties(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x6d6f6e}));
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::vector<double> xis;
  for (int e = -7; e <= 7; ++e)
    for (double m : {1.0, 2.5, 5.0}) {
      xis.push_back(m * std::pow(10.0, e));
      xis.push_back(-m * std::pow(10.0, e));
    }
  xis.push_back(0.0);
  std::sort(xis.begin(), xis.end());
  double monotone_violation = 0.0, bound_violation = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 9);
    for (auto& x : v) x = unif(rng);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double prev = -std::numeric_limits<double>::infinity();
    for (double xi : xis) {
      const double m = mex_of(v, xi);
      monotone_violation = std::max(monotone_violation, prev - m);
      bound_violation = std::max({bound_violation, *lo - m, m - *hi});
      prev = m;
    }
  }
  Rows rows;
  rows.push_back(make_row("mex.monotone_in_xi", std::max(monotone_violation, 0.0), "le", 1e-12, "TRIVIAL",
                          "200 random value sets over a signed log grid of xi"));
  rows.push_back(make_row("mex.within_min_max", std::max(bound_violation, 0.0), "le", 1e-12, "TRIVIAL",
                          "200 random value sets"));

  const std::vector<double> sm{1.0, 0.0};
  rows.push_back(make_row("softmax.example_n2", std::abs(pool(sm, PoolingSpec::softmax(2)) - 1.0 / 3.0), "le", 1e-15,
                          "DERIVED", "values {1,0} n=2"));
  return rows;
}

Rows mex_scan(const SuiteConfig& config) {
  const auto scan = mex_psd_scan(config.seed, 1000, -1e-6);
  return {make_row("mex.non_psd_scan", scan.min_eigenvalue, "lt", -1e-6, "DERIVED",
                   count_note("violations", scan.violations, scan.instances))};
}

// ---------------------------------------------------------------------------
// invariance

Rows invariance_groups(const SuiteConfig&) {
  std::size_t failures = 0;
  for (std::size_t d = 1; d <= 64; ++d)
    if (!verify_group_axioms(cyclic_group(d)).all_ok()) ++failures;
  const FiniteGroup subset({GroupElement::identity(3), GroupElement::shift(3, 1)});
  const bool detected = !verify_group_axioms(subset).closure_ok;
  return {make_row("group.axioms_cyclic_1_64", static_cast<double>(failures), "eq", 0.0, "TRIVIAL"),
          make_row("group.closure_detects_subset", detected ? 1.0 : 0.0, "eq", 1.0, "TRIVIAL",
                   "{identity, shift1} in d=3")};
}

Rows invariance_ktilde(const SuiteConfig& config) {
  Rows rows;
  for (std::size_t d : {2u, 4u, 8u}) {
    Rng rng(derive_seed(config.seed, {0x6b74, d}));
    const auto group = cyclic_group(d);
    const Signal x = random_unit(rng, d), x2 = random_unit(rng, d);
    const auto sampler = TemplateSampler::gaussian(derive_seed(config.seed, {0x6b74, d, 1}));
    const double base = ktilde_mc(x, x2, group, sampler, config.samples).value;
    double gap = 0.0;
    for (const auto& g : group.elements()) {
      gap = std::max(gap, std::abs(ktilde_mc(g.apply(x), x2, group, sampler, config.samples).value - base));
      gap = std::max(gap, std::abs(ktilde_mc(x, g.apply(x2), group, sampler, config.samples).value - base));
    }
    rows.push_back(make_row("ktilde.invariance_d" + std::to_string(d), gap, "le", 1e-10, "TRIVIAL",
                            "cyclic group, equal seeds"));
  }
  return rows;
}

Rows invariance_layers(const SuiteConfig& config) {
  constexpr std::size_t d = 8;
  Rng rng(derive_seed(config.seed, {0x6c6179}));
  std::vector<Signal> templates;
  for (int k = 0; k < 3; ++k) templates.push_back(random_unit(rng, d));
  const std::vector<double> biases{-0.3, 0.0, 0.2};
  std::vector<Signal> inputs;
  for (int k = 0; k < 10; ++k) inputs.push_back(random_unit(rng, d));

  const std::pair<std::string, PoolingSpec> specs[] = {{"sum", PoolingSpec::sum()},
                                                       {"max", PoolingSpec::max()},
                                                       {"mean", PoolingSpec::mean()},
                                                       {"softmax", PoolingSpec::softmax(2)},
                                                       {"mex", PoolingSpec::mex(5.0)}};
  Rows rows;
  for (const auto& [name, spec] : specs) {
    const HWLayer layer(templates, biases, cyclic_group(d), spec);
    double gap = 0.0;
    for (const auto& x : inputs) gap = std::max(gap, invariance_gap(x, layer));
    rows.push_back(make_row("layer.invariance_gap_" + name, gap, "le", 1e-12, "TRIVIAL", "d=8 cyclic, 10 inputs"));
  }

  // A subset that is not closed under composition breaks invariance.
  const FiniteGroup subset({GroupElement::identity(4), GroupElement::shift(4, 1)});
  const HWLayer layer({one_hot(4, 0)}, {0.0}, subset, PoolingSpec::sum());
  double gap = 0.0;
  for (std::size_t k = 0; k < 4; ++k) gap = std::max(gap, invariance_gap(one_hot(4, k), layer));
  rows.push_back(make_row("layer.subset_gap_d4", gap, "gt", 0.0, "DERIVED", "{identity, shift1}, sum pooling"));
  return rows;
}

Rows invariance_selectivity(const SuiteConfig&) {
  const auto group = cyclic_group(4);
  const std::vector<Signal> templates{Signal::normalize(std::vector<double>{1, 2, 3, 4})};
  const std::vector<double> weights{1.0};
  const KernelFn kernel = [&](const Signal& a, const Signal& b) {
    return ktilde_step(a, b, templates, weights, group, 1.0);
  };
  const std::vector<Orbit> orbits{orbit(group, one_hot(4, 0)),
                                  orbit(group, Signal::normalize(std::vector<double>{1, 1, 1, 1}))};
  const auto report = selectivity_scan(orbits, kernel, 1e-3);
  return {make_row("selectivity.margin_d4", report.margin.value_or(0.0), "ge", 1e-3, "DERIVED",
                   "one-hot vs normalized all-ones, step kernel"),
          make_row("selectivity.cauchy_schwarz", report.max_abs_normalized, "le", 1.0 + 1e-9, "TRIVIAL")};
}

// ---------------------------------------------------------------------------
// kernels

Rows kernels_arccos(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x6163}));
  double worst_z = 0.0, worst_err = 0.0;
  for (std::size_t pair = 0; pair < 20; ++pair) {
    const Signal x = random_unit(rng, 3);
    Signal x2 = random_unit(rng, 3);
    if (pair == 0) x2 = x;
    if (pair == 1) {
      std::vector<double> neg(x.values().begin(), x.values().end());
      for (auto& v : neg) v = -v;
      x2 = Signal::normalize(neg);
    }
    const auto est = k0_mc(x, x2, TemplateSampler::gaussian(derive_seed(config.seed, {0x6163, pair})),
                           config.samples);
    const double err = std::abs(est.value - oracles::k0_gaussian(x, x2));
    worst_err = std::max(worst_err, err);
    worst_z = std::max(worst_z, err / est.std_error);
  }
  return {make_row("arccos.max_z_20_pairs", worst_z, "le", 3.0, "DERIVED",
                   "max abs error " + format_double(worst_err))};
}

Rows kernels_k0_properties(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x6b30}));
  const Signal x = random_unit(rng, 4), x2 = random_unit(rng, 4);
  const auto sampler = TemplateSampler::gaussian(derive_seed(config.seed, {0x6b30, 1}));
  const std::size_t s = std::max<std::size_t>(config.samples / 16, 2);
  const double sym = std::abs(k0_mc(x, x2, sampler, s).value - k0_mc(x2, x, sampler, s).value);
  const double triv =
      std::abs(ktilde_mc(x, x2, trivial_group(4), sampler, s).value - k0_mc(x, x2, sampler, s).value);

  // Quadrupling S halves the standard error; averaged over repeated trials.
  double ratio_sum = 0.0;
  constexpr int trials = 4;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto a = k0_mc(x, x2, TemplateSampler::gaussian(derive_seed(config.seed, {0x6b30, 2, t})), s);
    const auto b = k0_mc(x, x2, TemplateSampler::gaussian(derive_seed(config.seed, {0x6b30, 3, t})), 4 * s);
    ratio_sum += a.std_error / b.std_error;
  }
  const double ratio = ratio_sum / trials;
  return {make_row("k0.symmetry", sym, "eq", 0.0, "TRIVIAL"),
          make_row("ktilde.trivial_group_equals_k0", triv, "eq", 0.0, "TRIVIAL"),
          make_row("k0.stderr_scaling", std::abs(std::log(ratio / 2.0)), "le", std::log(1.5), "TRIVIAL",
                   "stderr(S)/stderr(4S)=" + format_double(ratio))};
}

Rows kernels_step(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x7374}));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double numeric_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double a = unif(rng), b = unif(rng);
    numeric_err = std::max(numeric_err, std::abs(step_kernel_exact(a, b, 1.0) - step_kernel_numeric(a, b, 1.0, 100000)));
  }
  double identity_err = 0.0;
  std::uniform_real_distribution<double> unif_p(0.1, 10.0);
  for (int k = 0; k < 10000; ++k) {
    const double p = unif_p(rng);
    const double a = p * unif(rng), b = p * unif(rng);
    identity_err = std::max(identity_err, std::abs(step_kernel_exact(a, b, p) - oracles::step_kernel_identity(a, b, p)));
  }
  const auto group = cyclic_group(2);
  const double example = ktilde_step(one_hot(2, 0), one_hot(2, 1), {one_hot(2, 0)}, {1.0}, group, 1.0);
  return {make_row("step.exact_vs_numeric_100", numeric_err, "le", 1e-3, "DERIVED", "p=1, 1e5 grid points"),
          make_row("step.max_identity_1e4", identity_err, "le", 1e-12, "DERIVED"),
          make_row("step.ktilde_example_d2", std::abs(example - 0.25), "le", 1e-15, "DERIVED")};
}

Rows kernels_gram(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x6772}));
  std::vector<Signal> points;
  for (int k = 0; k < 5; ++k) points.push_back(random_unit(rng, 4));
  std::vector<Signal> templates;
  for (int k = 0; k < 3; ++k) templates.push_back(random_unit(rng, 4));
  const std::vector<double> weights{0.5, 0.3, 0.2};
  const auto group = cyclic_group(4);
  const auto step = gram(points, [&](const Signal& a, const Signal& b) {
    return ktilde_step(a, b, templates, weights, group, 1.0);
  });
  const auto sampler = TemplateSampler::gaussian(derive_seed(config.seed, {0x6772, 1}));
  const std::size_t s = std::min<std::size_t>(config.samples, 20000);
  const auto k0 = gram(points, [&](const Signal& a, const Signal& b) { return k0_mc(a, b, sampler, s).value; });
  auto relative = [](const GramReport& r) { return r.min_eigenvalue / std::max(std::abs(r.max_eigenvalue), 1.0); };
  return {make_row("gram.step_kernel_psd", relative(step), "ge", -1e-8, "DERIVED", "5 points d=4 cyclic"),
          make_row("gram.k0_shared_stream_psd", relative(k0), "ge", -1e-8, "TRIVIAL", "5 points d=4")};
}

// ---------------------------------------------------------------------------
// ramps

Rows ramps_identities(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x726d}));
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-30, 30);
  double abs_err = 0.0;
  for (int k = 0; k < 1000000; ++k) {
    const double s = std::ldexp(mant(rng), expo(rng));
    abs_err = std::max(abs_err, std::abs(ramp::abs_identity(s) - std::abs(s)));
  }
  const double step_examples = std::max({std::abs(ramp::step_approx(-0.1, 100.0) - 0.0),
                                         std::abs(ramp::step_approx(0.005, 100.0) - 0.5),
                                         std::abs(ramp::step_approx(0.05, 100.0) - 1.0)});
  double step_ramp_err = 0.0;
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int k = 0; k < 10000; ++k) {
    const double s = unif(rng), alpha = std::pow(10.0, 1.0 + k % 4);
    const double literal = alpha * (ramp::relu(s) - ramp::relu(s - 1.0 / alpha));
    step_ramp_err = std::max(step_ramp_err, std::abs(ramp::step_approx(s, alpha) - literal));
  }
  // Pointwise convergence to the Heaviside step as alpha grows.
  std::size_t non_monotone = 0;
  double final_err = 0.0;
  for (double s : {-0.5, -0.1, -0.01, 0.01, 0.1, 0.5}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {10.0, 1e2, 1e4, 1e6}) {
      const double err = std::abs(ramp::step_approx(s, alpha) - (s > 0 ? 1.0 : 0.0));
      if (err > prev) ++non_monotone;
      prev = err;
    }
    final_err = std::max(final_err, prev);
  }

  const double w = 0.7;
  const double hat_points =
      std::max({std::abs(ramp::hat_via_ramps(0.0, 1.0) - 1.0), std::abs(ramp::hat_via_ramps(1.0, 1.0)),
                std::abs(ramp::hat_via_ramps(-1.0, 1.0)), std::abs(ramp::hat_via_ramps(0.5, 1.0) - 0.5),
                std::abs(ramp::hat_via_ramps(2.0, 1.0))});
  double hat_sym = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double s = unif(rng);
    hat_sym = std::max(hat_sym, std::abs(ramp::hat_via_ramps(s, w) - ramp::hat_via_ramps(-s, w)));
  }
  constexpr int grid = 200001;
  const double h = 4.0 * w / (grid - 1);
  double integral = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double weight = (k == 0 || k == grid - 1) ? 0.5 : 1.0;
    integral += weight * ramp::hat_via_ramps(-2.0 * w + k * h, w);
  }
  integral *= h;

  return {make_row("ramp.abs_identity", abs_err, "eq", 0.0, "TRIVIAL", "1e6 draws over 60 binades"),
          make_row("ramp.step_examples", step_examples, "eq", 0.0, "TRIVIAL", "alpha=100"),
          make_row("ramp.step_is_ramp_difference", step_ramp_err, "le", 1e-10, "TRIVIAL", "alpha 10..1e4"),
          make_row("ramp.step_convergence", final_err, "eq", 0.0, "TRIVIAL",
                   count_note("non_monotone", non_monotone, 18)),
          make_row("ramp.step_convergence_monotone", static_cast<double>(non_monotone), "eq", 0.0, "TRIVIAL"),
          make_row("ramp.hat_peak_edges", hat_points, "eq", 0.0, "TRIVIAL", "w=1"),
          make_row("ramp.hat_symmetry", hat_sym, "eq", 0.0, "TRIVIAL"),
          make_row("ramp.hat_integral", std::abs(integral - w), "le", 1e-6, "TRIVIAL", "trapezoid, 2e5 intervals")};
}

Rows ramps_fits(const SuiteConfig&) {
  const auto gauss = [](double s) { return std::exp(-0.5 * s * s); };
  const auto relu_fit = ramp::fit_ramp_combination(ramp::relu, -1.0, 1.0, 200, 1);
  const auto abs_fit = ramp::fit_ramp_combination([](double s) { return std::abs(s); }, -1.0, 1.0, 200, 2);
  const auto g20 = ramp::fit_ramp_combination(gauss, -3.0, 3.0, 601, 20);
  std::size_t increases = 0;
  double prev = std::numeric_limits<double>::infinity();
  std::string sups;
  for (std::size_t k : {5u, 10u, 20u, 40u}) {
    const double e = ramp::fit_ramp_combination(gauss, -3.0, 3.0, 601, k).sup_error;
    if (e > prev) ++increases;
    prev = e;
    sups += (sups.empty() ? "" : " ") + format_double(e);
  }
  return {make_row("ramp.fit_relu_k1", relu_fit.sup_error, "le", 1e-10, "TRIVIAL"),
          make_row("ramp.fit_abs_k2", abs_fit.sup_error, "le", 1e-10, "TRIVIAL"),
          make_row("ramp.fit_gaussian_k20", g20.sup_error, "le", 0.05, "DERIVED", "exp(-s^2/2) on 601 points in [-3,3]"),
          make_row("ramp.fit_gaussian_monotone_k", static_cast<double>(increases), "eq", 0.0, "DERIVED",
                   "sup errors k=5,10,20,40: " + sups)};
}

// ---------------------------------------------------------------------------
// hbf

Rows hbf_gradients(const SuiteConfig& config) {
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    Rng rng(derive_seed(config.seed, {0x6764, inst}));
    std::uniform_int_distribution<int> n_dist(1, 5), d_dist(1, 3), big_n(1, 20);
    std::normal_distribution<double> normal;
    const int n = n_dist(rng), d = d_dist(rng), N = big_n(rng);
    hbf::HBFModel model;
    model.centers = Eigen::MatrixXd::NullaryExpr(n, d, [&] { return normal(rng); });
    model.coeffs = Eigen::VectorXd::NullaryExpr(n, [&] { return normal(rng); });
    model.sigma = 0.5 + std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    hbf::TrainingSet data;
    data.inputs = Eigen::MatrixXd::NullaryExpr(N, d, [&] { return normal(rng); });
    data.targets = Eigen::VectorXd::NullaryExpr(N, [&] { return normal(rng); });

    const Eigen::VectorXd gc = hbf::grad_coeffs(model, data);
    const Eigen::MatrixXd gt = hbf::grad_centers(model, data);
    auto central = [&](double& param) {
      const double saved = param, h = 1e-6 * std::max(1.0, std::abs(saved));
      param = saved + h;
      const double up = hbf::objective(model, data);
      param = saved - h;
      const double down = hbf::objective(model, data);
      param = saved;
      return (up - down) / (2.0 * h);
    };
    Eigen::VectorXd fc(n);
    Eigen::MatrixXd ft(n, d);
    for (int a = 0; a < n; ++a) {
      fc(a) = central(model.coeffs(a));
      for (int j = 0; j < d; ++j) ft(a, j) = central(model.centers(a, j));
    }
    const double scale_c = std::max({gc.lpNorm<Eigen::Infinity>(), fc.lpNorm<Eigen::Infinity>(), 1e-10});
    const double scale_t = std::max({gt.lpNorm<Eigen::Infinity>(), ft.lpNorm<Eigen::Infinity>(), 1e-10});
    worst = std::max({worst, (gc - fc).lpNorm<Eigen::Infinity>() / scale_c,
                      (gt - ft).lpNorm<Eigen::Infinity>() / scale_t});
  }
  return {make_row("hbf.gradient_fd_100", worst, "lt", 1e-5, "DERIVED", "central differences, n<=5 d<=3 N<=20")};
}

Rows hbf_solves(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x6970}));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  hbf::TrainingSet data;
  data.inputs = Eigen::MatrixXd::NullaryExpr(20, 2, [&] { return unif(rng); });
  data.targets = Eigen::VectorXd::NullaryExpr(20, [&] { return unif(rng); });
  hbf::HBFModel model;
  model.centers = data.inputs;
  model.coeffs = Eigen::VectorXd::Zero(20);
  model.sigma = hbf::min_pairwise_distance(data.inputs);
  model.lambda = 1e-12;
  const auto interp = hbf::solve_coeffs(model, data);

  hbf::HBFModel one;
  one.centers = Eigen::MatrixXd::Zero(1, 1);
  one.coeffs = Eigen::VectorXd::Zero(1);
  one.sigma = 1.0;
  hbf::TrainingSet pair;
  pair.inputs = Eigen::Vector2d(0.0, 1.0);
  pair.targets = Eigen::Vector2d(1.0, 0.0);
  const double c = hbf::solve_coeffs(one, pair).coeffs(0);

  std::size_t capacity_mismatch = 0;
  const struct { std::size_t N, n, d; bool pass; } cases[] = {{100, 5, 3, true}, {20, 5, 3, false}, {1000, 10, 9, true}};
  for (const auto& cs : cases)
    if (hbf::check_capacity(cs.N, cs.n, cs.d).pass != cs.pass) ++capacity_mismatch;

  return {make_row("hbf.interpolation_n20", interp.max_residual, "le", 1e-6, "TRIVIAL",
                   "n=N=20 d=2 lambda=1e-12, sigma=min spacing"),
          make_row("hbf.solve_1x1_example", std::abs(c - 1.0 / (1.0 + std::exp(-1.0))), "le", 1e-9, "DERIVED",
                   "n=1 N=2 d=1 sigma=1"),
          make_row("hbf.capacity_examples", static_cast<double>(capacity_mismatch), "eq", 0.0, "TRIVIAL")};
}

Rows hbf_kmeans(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x6b6d}));
  std::normal_distribution<double> normal(0.0, 0.1);
  hbf::TrainingSet data;
  data.inputs.resize(40, 2);
  for (int i = 0; i < 40; ++i) {
    const double off = i < 20 ? -5.0 : 5.0;
    data.inputs(i, 0) = off + normal(rng);
    data.inputs(i, 1) = off + normal(rng);
  }
  data.targets = Eigen::VectorXd::Zero(40);
  const auto centers = hbf::init_centers(data, 2, config.seed);
  auto inside = [&](int row, int first) {
    const auto block = data.inputs.middleRows(first, 20);
    for (int j = 0; j < 2; ++j)
      if (centers(row, j) < block.col(j).minCoeff() || centers(row, j) > block.col(j).maxCoeff()) return false;
    return true;
  };
  const bool ok = (inside(0, 0) && inside(1, 20)) || (inside(0, 20) && inside(1, 0));
  return {make_row("hbf.kmeans_two_blobs", ok ? 1.0 : 0.0, "eq", 1.0, "DERIVED")};
}

Rows hbf_sin_task(const SuiteConfig& config) {
  constexpr int N = 200, n = 10;
  hbf::TrainingSet data;
  data.inputs = Eigen::VectorXd::LinSpaced(N, 0.0, 2.0 * std::numbers::pi);
  data.targets = data.inputs.col(0).array().sin();
  hbf::HBFModel init;
  init.centers = hbf::init_centers(data, n, config.seed);
  init.coeffs = Eigen::VectorXd::Zero(n);
  init.sigma = 0.5;
  init.coeffs = hbf::solve_coeffs(init, data).coeffs;

  hbf::TrainConfig tc;
  tc.omega = 1e-3;
  tc.max_iters = 5000;
  tc.grad_tol = 1e-12;
  tc.seed = config.seed;
  const auto moving = hbf::train(init, data, tc);
  tc.move_centers = false;
  const auto fixed = hbf::train(init, data, tc);
  const double h_moving = moving.trace.back().objective, h_fixed = fixed.trace.back().objective;

  // Continue the moving arm towards a stationary point before testing the
  // weighted-sum fixed point of the centers.
  tc.move_centers = true;
  tc.grad_tol = 1e-10;
  tc.max_iters = 100000;
  const auto cont = hbf::train(moving.model, data, tc);
  const auto fp = hbf::center_fixed_point_residual(cont.model, data);
  const std::string fp_note = std::string("converged=") + (cont.converged ? "true" : "false") +
                              " grad_inf=" + format_double(cont.trace.back().grad_inf_norm) +
                              " updates=" + std::to_string(5000 + cont.trace.back().iteration) + " " +
                              count_note("skipped", fp.skipped_count(), n);
  Rows rows;
  rows.push_back(make_row("hbf.sin_moving_beats_fixed", h_moving - h_fixed, "lt", 0.0, "DERIVED",
                          "moving=" + format_double(h_moving) + " fixed=" + format_double(h_fixed)));
  if (fp.skipped_count() == static_cast<std::size_t>(n)) {
    rows.push_back({"hbf.sin_center_fixed_point", Status::Skip, 0.0, 1e-6, "le", "DERIVED", fp_note});
  } else {
    auto row = make_row("hbf.sin_center_fixed_point", fp.residual, "le", 1e-6, "DERIVED", fp_note);
    if (!cont.converged) row.status = Status::Fail;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// hvq

Rows hvq_costs(const SuiteConfig&) {
  const auto fam16 = hvq::two_part_family(8);
  const auto vq16 = hvq::memory_cost(hvq::build_vq(fam16));
  const auto hvq16 = hvq::memory_cost(hvq::build_hvq(fam16));
  const auto fam4 = hvq::two_part_family(2);
  std::size_t mismatches = 0;
  for (std::size_t full = 2; full <= 64; full += 2) {
    const auto fam = hvq::two_part_family(full / 2);
    if (hvq::memory_cost(hvq::build_vq(fam)) != 4 * full) ++mismatches;
    if (hvq::memory_cost(hvq::build_hvq(fam)) != full + 8) ++mismatches;
  }
  // Two halves of length N/2 store N scalars in total, so the count also
  // holds for odd N.
  std::size_t crossover = 0, late_violations = 0;
  for (std::size_t full = 1; full <= 64; ++full) {
    const bool smaller = hvq::hvq_cost(1, full, 4) < hvq::vq_cost(4, full);
    if (smaller && crossover == 0) crossover = full;
    if (crossover != 0 && !smaller) ++late_violations;
  }
  return {make_row("hvq.memory_vq_n16", static_cast<double>(vq16), "eq", 64.0, "PAPER"),
          make_row("hvq.memory_hvq_n16", static_cast<double>(hvq16), "eq", 24.0, "PAPER"),
          make_row("hvq.memory_vq_n4", static_cast<double>(hvq::memory_cost(hvq::build_vq(fam4))), "eq", 16.0,
                   "PAPER"),
          make_row("hvq.memory_hvq_n4", static_cast<double>(hvq::memory_cost(hvq::build_hvq(fam4))), "eq", 12.0,
                   "PAPER"),
          make_row("hvq.formula_even_2_64", static_cast<double>(mismatches), "eq", 0.0, "PAPER", "4N vs N+8"),
          make_row("hvq.crossover_n", static_cast<double>(crossover), "eq", 3.0, "DERIVED",
                   count_note("later_violations", late_violations, 62))};
}

std::size_t classification_mismatches(const hvq::PatternFamily& family, Rng& rng) {
  const auto vq = hvq::build_vq(family);
  const auto h = hvq::build_hvq(family);
  std::size_t bad = 0;
  auto probe = [&](const hvq::Pattern& x) {
    if (hvq::classify(vq, x) != hvq::classify(h, x)) ++bad;
  };
  for (std::size_t a = 0; a < family.parts.size(); ++a)
    for (std::size_t b = 0; b < family.parts.size(); ++b) {
      hvq::Pattern x = family.parts[a];
      x.insert(x.end(), family.parts[b].begin(), family.parts[b].end());
      probe(x);
    }
  std::uniform_int_distribution<std::int64_t> sym(0, 4);
  for (int k = 0; k < 50; ++k) {
    hvq::Pattern x(family.full_length());
    for (auto& v : x) v = sym(rng);
    probe(x);
  }
  probe(hvq::Pattern(family.full_length() + 1, 0));
  return bad;
}

Rows hvq_equivalence(const SuiteConfig& config) {
  Rng rng(derive_seed(config.seed, {0x6871}));
  const std::size_t two_part = classification_mismatches(hvq::two_part_family(2), rng);
  std::size_t random_bad = 0, families = 0;
  for (std::size_t parts = 1; parts <= 4; ++parts)
    for (std::size_t len = 1; len <= 8; ++len) {
      auto fam = hvq::random_family(parts, len, derive_seed(config.seed, {0x6871, parts, len}));
      // Keep a seeded subset of compositions so lookups can miss the table.
      std::vector<hvq::Composition> kept;
      for (const auto& c : fam.compositions)
        if (kept.empty() || std::bernoulli_distribution(0.6)(rng)) kept.push_back(c);
      fam.compositions = kept;
      random_bad += classification_mismatches(fam, rng);
      ++families;
    }

  std::size_t ratio_increases = 0;
  for (std::size_t parts : {2u, 3u, 4u}) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t len = 1; len <= 32; ++len) {
      const auto fam = hvq::random_family(parts, len, derive_seed(config.seed, {0x7377, parts, len}));
      const double ratio = hvq::sweep_row("p" + std::to_string(parts), fam).ratio;
      if (ratio > prev) ++ratio_increases;
      prev = ratio;
    }
  }
  return {make_row("hvq.equivalence_two_part", static_cast<double>(two_part), "eq", 0.0, "DERIVED",
                   "all compositions plus random probes"),
          make_row("hvq.equivalence_random_families", static_cast<double>(random_bad), "eq", 0.0, "DERIVED",
                   std::to_string(families) + " families"),
          make_row("hvq.ratio_monotone_in_n", static_cast<double>(ratio_increases), "eq", 0.0, "DERIVED",
                   "parts 2..4, part length 1..32")};
}

std::vector<std::pair<Suite, CheckTask>> all_tasks() {
  return {{Suite::Mex, mex_limits},
          {Suite::Mex, mex_properties},
          {Suite::Mex, mex_scan},
          {Suite::Invariance, invariance_groups},
          {Suite::Invariance, invariance_ktilde},
          {Suite::Invariance, invariance_layers},
          {Suite::Invariance, invariance_selectivity},
          {Suite::Kernels, kernels_arccos},
          {Suite::Kernels, kernels_k0_properties},
          {Suite::Kernels, kernels_step},
          {Suite::Kernels, kernels_gram},
          {Suite::Ramps, ramps_identities},
          {Suite::Ramps, ramps_fits},
          {Suite::Hbf, hbf_gradients},
          {Suite::Hbf, hbf_solves},
          {Suite::Hbf, hbf_kmeans},
          {Suite::Hbf, hbf_sin_task},
          {Suite::Hvq, hvq_costs},
          {Suite::Hvq, hvq_equivalence}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string_view to_string(Suite suite) noexcept {
  for (const auto& [s, name] : kSuiteNames)
    if (s == suite) return name;
  return "unknown";
}

Suite suite_from_string(std::string_view name) {
  for (const auto& [s, n] : kSuiteNames)
    if (n == name) return s;
  throw Error(ErrorCode::InvalidConfig, "unknown suite '" + std::string(name) + "'");
}

std::string_view to_string(Status status) noexcept {
  switch (status) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skip: return "skip";
  }
  return "unknown";
}

bool SuiteConfig::uses_monte_carlo() const noexcept {
  return suite == Suite::Invariance || suite == Suite::Kernels || suite == Suite::All;
}

void SuiteConfig::validate() const {
  if (uses_monte_carlo() && samples < 2)
    throw Error(ErrorCode::InvalidConfig, "samples must be >= 2 for Monte-Carlo suites");
  if (workers == 0) throw Error(ErrorCode::InvalidConfig, "workers must be >= 1");
  if (output_path.empty()) throw Error(ErrorCode::InvalidConfig, "empty output path");
}

SuiteConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"ihw run"};
  std::string suite, format, out, config_file;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  unsigned workers = 0;
  auto* o_suite = app.add_option("--suite", suite);
  auto* o_seed = app.add_option("--seed", seed);
  auto* o_samples = app.add_option("--samples", samples);
  auto* o_out = app.add_option("--out", out);
  auto* o_format = app.add_option("--format", format);
  auto* o_workers = app.add_option("--workers", workers);
  auto* o_config = app.add_option("--config", config_file);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ExtrasError& e) {
    throw Error(ErrorCode::UnknownFlag, e.what());
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }

  SuiteConfig config;
  if (*o_config) {
    std::ifstream in(config_file);
    if (!in) throw Error(ErrorCode::MalformedFile, "cannot open config file " + config_file);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
      if (!doc.is_object()) throw Error(ErrorCode::MalformedFile, "config file must hold a JSON object");
      for (const auto& [key, value] : doc.items()) {
        if (key == "suite") config.suite = suite_from_string(value.get<std::string>());
        else if (key == "seed") config.seed = value.get<std::uint64_t>();
        else if (key == "samples") config.samples = value.get<std::size_t>();
        else if (key == "output_path") config.output_path = value.get<std::string>();
        else if (key == "format") config.format = format_from_string(value.get<std::string>());
        else if (key == "workers") config.workers = value.get<unsigned>();
        else throw Error(ErrorCode::MalformedFile, "unknown key '" + key + "' in " + config_file);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedFile, config_file + ": " + e.what());
    }
  }
  if (*o_suite) config.suite = suite_from_string(suite);
  if (*o_seed) config.seed = seed;
  if (*o_samples) config.samples = samples;
  if (*o_out) config.output_path = out;
  if (*o_format) config.format = format_from_string(format);
  if (*o_workers) config.workers = workers;
  config.validate();
  return config;
}

bool SuiteReport::all_passed() const noexcept {
  return std::none_of(checks.begin(), checks.end(), [](const CheckRow& r) { return r.status == Status::Fail; });
}

SuiteReport run_suite(const SuiteConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<CheckTask> tasks;
  for (auto& [suite, task] : all_tasks())
    if (config.suite == Suite::All || config.suite == suite) tasks.push_back(std::move(task));

  std::vector<Rows> results(tasks.size());
  parallel_for(tasks.size(), config.workers, [&](std::size_t i) { results[i] = tasks[i](config); });

  SuiteReport report;
  report.suite = std::string(to_string(config.suite));
  report.seed = config.seed;
  report.samples = config.samples;
  for (auto& rows : results)
    for (auto& row : rows) report.checks.push_back(std::move(row));
  std::sort(report.checks.begin(), report.checks.end(),
            [](const CheckRow& a, const CheckRow& b) { return a.check_id < b.check_id; });
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string report_to_json(const SuiteReport& report) {
  auto rows = nlohmann::json::array();
  for (const auto& r : report.checks)
    rows.push_back({{"check_id", r.check_id},
                    {"status", to_string(r.status)},
                    {"value", r.value},
                    {"tolerance", r.tolerance},
                    {"relation", r.relation},
                    {"provenance", r.provenance},
                    {"note", r.note}});
  nlohmann::ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["suite"] = report.suite;
  doc["seed"] = report.seed;
  doc["samples"] = report.samples;
  doc["passed"] = report.all_passed();
  doc["checks"] = rows;
  doc["wall_time"] = report.wall_time;
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const SuiteReport& report) {
  std::ostringstream out;
  out << "check_id,status,value,tolerance,relation,provenance,note\n";
  for (const auto& r : report.checks)
    out << csv_field(r.check_id) << ',' << to_string(r.status) << ',' << format_double(r.value) << ','
        << format_double(r.tolerance) << ',' << r.relation << ',' << r.provenance << ',' << csv_field(r.note) << '\n';
  return out.str();
}

void write_report(const SuiteReport& report, const SuiteConfig& config) {
  const std::string text = config.format == Format::Json ? report_to_json(report) : report_to_csv(report);
  if (config.output_path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush())
    throw Error(ErrorCode::OutputUnwritable, "cannot write " + config.output_path);
}

}  // namespace ihw::cli
