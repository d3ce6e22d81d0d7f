// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "ihw/error.hpp"
#include "ihw/format.hpp"
#include "ihw/hbf.hpp"
#include "ihw/hvq.hpp"
#include "ihw/hw_module.hpp"
#include "ihw/kernels.hpp"
#include "ihw/oracles.hpp"
#include "ihw/ramp_approx.hpp"
#include "ihw/rng.hpp"
#include "ihw/suite.hpp"

using namespace ihw;

namespace {

constexpr std::uint64_t kSeed = 20240917;

struct Outcome {
  bool pass = false;
  std::string detail;
};

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

std::string fmt(double v) { return format_double(v); }

Outcome mex_limits() {
  const std::vector<double> v{1, 2, 3, 4};
  const double hi = std::abs(pool(v, PoolingSpec::mex(100)) - 4.0);
  const double mid = std::abs(pool(v, PoolingSpec::mex(1e-6)) - 2.5);
  const double lo = std::abs(pool(v, PoolingSpec::mex(-100)) - 1.0);
  return {hi <= 0.05 && mid <= 1e-4 && lo <= 0.05, "errors " + fmt(hi) + " " + fmt(mid) + " " + fmt(lo)};
}

Outcome mex_non_psd() {
  const auto scan = mex_psd_scan(kSeed, 1000, -1e-6);
  return {scan.min_eigenvalue < -1e-6, std::to_string(scan.violations) + "/1000 instances non-PSD, min eigenvalue " +
                                           fmt(scan.min_eigenvalue)};
}

Outcome step_kernel() {
  Rng rng(derive_seed(kSeed, {3}));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double numeric = 0.0, identity = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double a = unif(rng), b = unif(rng);
    numeric = std::max(numeric, std::abs(step_kernel_exact(a, b, 1.0) - step_kernel_numeric(a, b, 1.0, 100000)));
  }
  for (int k = 0; k < 10000; ++k) {
    const double a = unif(rng), b = unif(rng);
    identity = std::max(identity, std::abs(step_kernel_exact(a, b, 1.0) - oracles::step_kernel_identity(a, b, 1.0)));
  }
  return {numeric <= 1e-3 && identity <= 1e-12, "numeric " + fmt(numeric) + ", identity " + fmt(identity)};
}

Outcome arc_cosine() {
  Rng rng(derive_seed(kSeed, {4}));
  double worst = 0.0;
  for (std::uint64_t pair = 0; pair < 20; ++pair) {
    const auto x = random_unit(rng, 3), x2 = random_unit(rng, 3);
    const auto est = k0_mc(x, x2, TemplateSampler::gaussian(derive_seed(kSeed, {4, pair})), 1'000'000);
    worst = std::max(worst, std::abs(est.value - oracles::k0_gaussian(x, x2)) / est.std_error);
  }
  return {worst <= 3.0, "max deviation " + fmt(worst) + " standard errors"};
}

Outcome invariance() {
  double kernel_gap = 0.0;
  for (std::size_t d : {2u, 4u, 8u}) {
    Rng rng(derive_seed(kSeed, {5, d}));
    const auto group = cyclic_group(d);
    const auto x = random_unit(rng, d), x2 = random_unit(rng, d);
    const auto sampler = TemplateSampler::gaussian(derive_seed(kSeed, {5, d, 1}));
    const double base = ktilde_mc(x, x2, group, sampler, 100000).value;
    for (const auto& g : group.elements())
      kernel_gap = std::max(kernel_gap, std::abs(ktilde_mc(g.apply(x), x2, group, sampler, 100000).value - base));
  }
  Rng rng(derive_seed(kSeed, {5}));
  const std::vector<Signal> templates{random_unit(rng, 8), random_unit(rng, 8)};
  double layer_gap = 0.0;
  for (const auto& spec : {PoolingSpec::sum(), PoolingSpec::max(), PoolingSpec::mean(), PoolingSpec::softmax(2),
                           PoolingSpec::mex(5.0)}) {
    const HWLayer layer(templates, {-0.2, 0.0, 0.3}, cyclic_group(8), spec);
    for (int k = 0; k < 20; ++k) layer_gap = std::max(layer_gap, invariance_gap(random_unit(rng, 8), layer));
  }
  return {kernel_gap <= 1e-10 && layer_gap <= 1e-12, "kernel gap " + fmt(kernel_gap) + ", layer gap " + fmt(layer_gap)};
}

Outcome selectivity() {
  const auto group = cyclic_group(4);
  const std::vector<Signal> templates{Signal::normalize(std::vector<double>{1, 2, 3, 4})};
  const KernelFn kernel = [&](const Signal& a, const Signal& b) {
    return ktilde_step(a, b, templates, {1.0}, group, 1.0);
  };
  const auto r = selectivity_scan(
      {orbit(group, one_hot(4, 0)), orbit(group, Signal::normalize(std::vector<double>{1, 1, 1, 1}))}, kernel);
  const double margin = r.margin.value_or(0.0);
  return {r.margin && margin >= 1e-3, "margin " + fmt(margin)};
}

Outcome hbf_gradients() {
  // Relative error of each gradient block in the infinity norm.
  double worst = 0.0, componentwise = 0.0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    Rng rng(derive_seed(kSeed, {7, inst}));
    std::normal_distribution<double> normal;
    auto draw = [&] { return normal(rng); };
    const int n = 1 + static_cast<int>(rng() % 5), d = 1 + static_cast<int>(rng() % 3), N = 1 + static_cast<int>(rng() % 20);
    hbf::HBFModel m;
    m.centers = Eigen::MatrixXd::NullaryExpr(n, d, draw);
    m.coeffs = Eigen::VectorXd::NullaryExpr(n, draw);
    m.sigma = 0.8;
    hbf::TrainingSet data;
    data.inputs = Eigen::MatrixXd::NullaryExpr(N, d, draw);
    data.targets = Eigen::VectorXd::NullaryExpr(N, draw);
    const Eigen::VectorXd gc = hbf::grad_coeffs(m, data);
    const Eigen::MatrixXd gt = hbf::grad_centers(m, data);
    auto central = [&](double& p) {
      const double saved = p, h = 1e-6 * std::max(1.0, std::abs(p));
      p = saved + h;
      const double up = hbf::objective(m, data);
      p = saved - h;
      const double down = hbf::objective(m, data);
      p = saved;
      return (up - down) / (2 * h);
    };
    Eigen::VectorXd fc(n);
    Eigen::MatrixXd ft(n, d);
    for (int a = 0; a < n; ++a) {
      fc(a) = central(m.coeffs(a));
      for (int k = 0; k < d; ++k) ft(a, k) = central(m.centers(a, k));
    }
    auto rel = [](const auto& g, const auto& f) {
      return (g - f).template lpNorm<Eigen::Infinity>() /
             std::max({g.template lpNorm<Eigen::Infinity>(), f.template lpNorm<Eigen::Infinity>(), 1e-10});
    };
    worst = std::max({worst, rel(gc, fc), rel(gt, ft)});
    for (int a = 0; a < n; ++a)
      for (int k = 0; k < d; ++k)
        componentwise = std::max(componentwise, std::abs(gt(a, k) - ft(a, k)) / std::max(std::abs(ft(a, k)), 1e-8));
  }
  return {worst < 1e-5,
          "max relative error " + fmt(worst) + " (per-component, informational: " + fmt(componentwise) + ")"};
}

Outcome interpolation() {
  Rng rng(derive_seed(kSeed, {8}));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto draw = [&] { return unif(rng); };
  hbf::TrainingSet data;
  data.inputs = Eigen::MatrixXd::NullaryExpr(20, 2, draw);
  data.targets = Eigen::VectorXd::NullaryExpr(20, draw);
  hbf::HBFModel m;
  m.centers = data.inputs;
  m.coeffs = Eigen::VectorXd::Zero(20);
  m.sigma = hbf::min_pairwise_distance(data.inputs);
  m.lambda = 1e-12;
  const auto r = hbf::solve_coeffs(m, data);
  return {r.max_residual <= 1e-6, "max residual " + fmt(r.max_residual)};
}

Outcome moving_centers() {
  hbf::TrainingSet data;
  data.inputs = Eigen::VectorXd::LinSpaced(200, 0.0, 2.0 * std::numbers::pi);
  data.targets = data.inputs.col(0).array().sin();
  hbf::HBFModel init;
  init.centers = hbf::init_centers(data, 10, kSeed);
  init.coeffs = Eigen::VectorXd::Zero(10);
  init.sigma = 0.5;
  init.coeffs = hbf::solve_coeffs(init, data).coeffs;

  hbf::TrainConfig cfg;
  cfg.omega = 1e-3;
  cfg.max_iters = 5000;
  cfg.grad_tol = 1e-12;
  cfg.seed = kSeed;
  const auto moving = hbf::train(init, data, cfg);
  cfg.move_centers = false;
  const auto fixed = hbf::train(init, data, cfg);
  const double hm = moving.trace.back().objective, hf = fixed.trace.back().objective;

  // Run on towards a stationary point, then test the center fixed point.
  cfg.move_centers = true;
  cfg.grad_tol = 1e-10;
  cfg.max_iters = 1'000'000;
  const auto cont = hbf::train(moving.model, data, cfg);
  const auto fp = hbf::center_fixed_point_residual(cont.model, data);
  const bool fp_ok = cont.converged && fp.residual <= 1e-6;
  return {hm < hf && fp_ok, "objective moving " + fmt(hm) + " vs fixed " + fmt(hf) + "; after " +
                                std::to_string(5000 + cont.trace.back().iteration) + " updates converged=" +
                                (cont.converged ? "yes" : "no") + " grad_inf " + fmt(cont.trace.back().grad_inf_norm) +
                                " fixed-point residual " + fmt(fp.residual) + " (" +
                                std::to_string(fp.skipped_count()) + " skipped)"};
}

Outcome hvq_memory() {
  bool ok = hvq::memory_cost(hvq::build_vq(hvq::two_part_family(8))) == 64 &&
            hvq::memory_cost(hvq::build_hvq(hvq::two_part_family(8))) == 24;
  for (std::size_t n = 2; n <= 64; n += 2) {
    const auto fam = hvq::two_part_family(n / 2);
    ok = ok && hvq::memory_cost(hvq::build_vq(fam)) == 4 * n && hvq::memory_cost(hvq::build_hvq(fam)) == n + 8;
  }
  for (std::size_t n = 1; n <= 64; ++n) ok = ok && ((hvq::hvq_cost(1, n, 4) < hvq::vq_cost(4, n)) == (n >= 3));
  const auto fam = hvq::two_part_family(4);
  const auto vq = hvq::build_vq(fam);
  const auto h = hvq::build_hvq(fam);
  for (std::size_t k = 0; k < 4; ++k) ok = ok && hvq::classify(vq, fam.pattern(k)) == hvq::classify(h, fam.pattern(k));
  Rng rng(derive_seed(kSeed, {10}));
  for (int k = 0; k < 1000; ++k) {
    hvq::Pattern x(fam.full_length());
    for (auto& v : x) v = static_cast<std::int64_t>(rng() % 4);
    ok = ok && hvq::classify(vq, x) == hvq::classify(h, x);
  }
  return {ok, "costs 64/24 at N=16, formulas for even N in [2,64], crossover N>=3, equivalent on 4 members + 1000 "
              "random inputs"};
}

Outcome ramps() {
  Rng rng(derive_seed(kSeed, {11}));
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-60, 60);
  bool abs_ok = true;
  for (int k = 0; k < 1'000'000; ++k) {
    const double s = std::ldexp(mant(rng), expo(rng));
    abs_ok = abs_ok && ramp::abs_identity(s) == std::abs(s);
  }
  const bool hat_ok = ramp::hat_via_ramps(0.0, 1.0) == 1.0 && ramp::hat_via_ramps(1.0, 1.0) == 0.0 &&
                      ramp::hat_via_ramps(-1.0, 1.0) == 0.0 && ramp::hat_via_ramps(0.5, 1.0) == 0.5;
  const auto fit = ramp::fit_ramp_combination([](double s) { return std::exp(-0.5 * s * s); }, -3.0, 3.0, 601, 20);
  return {abs_ok && hat_ok && fit.sup_error <= 0.05,
          std::string("abs ") + (abs_ok ? "exact" : "inexact") + ", hat " + (hat_ok ? "exact" : "inexact") +
              ", Gaussian sup error " + fmt(fit.sup_error)};
}

Outcome reproducibility() {
  cli::SuiteConfig cfg;
  cfg.suite = cli::Suite::All;
  cfg.seed = kSeed;
  cfg.samples = 20000;
  const std::regex wall("\"wall_time\": [^\\n]*");
  auto run = [&](unsigned workers) {
    cfg.workers = workers;
    return std::regex_replace(cli::report_to_json(cli::run_suite(cfg)), wall, "");
  };
  const auto first = run(1), second = run(1), parallel = run(8);
  return {first == second && first == parallel,
          std::string("two runs ") + (first == second ? "identical" : "differ") + ", 1 vs 8 workers " +
              (first == parallel ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"mex limits", mex_limits},
      {"mex similarity not PSD", mex_non_psd},
      {"step kernel closed form", step_kernel},
      {"arc-cosine oracle", arc_cosine},
      {"invariance", invariance},
      {"selectivity margin", selectivity},
      {"hbf gradients", hbf_gradients},
      {"interpolation recovery", interpolation},
      {"moving centers", moving_centers},
      {"hvq memory", hvq_memory},
      {"ramp approximation", ramps},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failed;
    std::printf("%s %2zu %s: %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
