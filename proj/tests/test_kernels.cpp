#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "json.hpp"

#include "ihw/error.hpp"
#include "ihw/kernels.hpp"
#include "ihw/oracles.hpp"
#include "ihw/rng.hpp"

using namespace ihw;

namespace {

Signal sig(std::vector<double> v) { return Signal::normalize(v); }

Signal random_signal(Rng& rng, std::size_t d) {
  std::normal_distribution<double> normal;
  std::vector<double> v(d);
  for (auto& a : v) a = normal(rng);
  return Signal::normalize(v);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ihw::Error");
  return ErrorCode::InvalidArgument;
}

// E[|w.u|_+ |w.v|_+] for w ~ N(0, I) by quadrature over the angle in the
// plane spanned by u and v: an oracle independent of the closed form.
double arc_cosine_quadrature(double nu, double nv, double theta) {
  constexpr int steps = 200000;
  double acc = 0.0;
  const double h = 2.0 * std::numbers::pi / steps;
  for (int k = 0; k < steps; ++k) {
    const double phi = (k + 0.5) * h;
    acc += std::max(std::cos(phi), 0.0) * std::max(std::cos(phi - theta), 0.0);
  }
  // E[r^2] = 2 for the radial part of a 2-D standard normal.
  return nu * nv * 2.0 * acc * h / (2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("arc-cosine closed form agrees with quadrature") {
  for (double theta : {0.0, 0.3, 1.0, std::numbers::pi / 2, 2.5, std::numbers::pi}) {
    const std::vector<double> u{1.0, 0.0}, v{std::cos(theta), std::sin(theta)};
    CHECK(oracles::arc_cosine_order1(u, v) == doctest::Approx(arc_cosine_quadrature(1, 1, theta)).epsilon(1e-8));
  }
  // angle pi/2 between the augmented vectors: 1/pi
  const auto x = sig({1, 0}), x2 = sig({-1, 0});
  CHECK(oracles::k0_gaussian(x, x2) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("k0_mc examples") {
  const auto sampler = TemplateSampler::gaussian(3);
  Rng rng(1);
  const auto x = random_signal(rng, 3), y = random_signal(rng, 3);
  CHECK(k0_mc(x, x, sampler, 1000).value >= 0.0);
  CHECK(k0_mc(x, y, sampler, 5000).value == k0_mc(y, x, sampler, 5000).value);

  const auto est = k0_mc(sig({1, 0}), sig({-1, 0}), sampler, 1'000'000);
  CHECK(std::abs(est.value - 1.0 / std::numbers::pi) <= 3.0 * est.std_error);
}

TEST_CASE("k0_mc is independent of the worker count") {
  Rng rng(2);
  const auto x = random_signal(rng, 5), y = random_signal(rng, 5);
  const auto sampler = TemplateSampler::gaussian(99);
  const auto one = k0_mc(x, y, sampler, 50000, 1);
  for (unsigned w : {2u, 3u, 8u}) {
    const auto many = k0_mc(x, y, sampler, 50000, w);
    CHECK(many.value == one.value);
    CHECK(many.std_error == one.std_error);
  }
}

TEST_CASE("k0_mc preconditions") {
  const auto sampler = TemplateSampler::gaussian(0);
  CHECK(code_of([&] { k0_mc(sig({1, 0}), sig({1, 0}), sampler, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { k0_mc(sig({1, 0}), sig({1, 0, 0}), sampler, 10); }) == ErrorCode::DimensionMismatch);
  TemplateSampler bad{TemplateLaw::UniformSphere, BiasLaw::Uniform, 0.0, 1};
  CHECK(code_of([&] { k0_mc(sig({1, 0}), sig({1, 0}), bad, 10); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("uniform laws keep the estimate within its natural bounds") {
  const TemplateSampler sampler{TemplateLaw::UniformSphere, BiasLaw::Uniform, 0.5, 4};
  Rng rng(3);
  const auto x = random_signal(rng, 4), y = random_signal(rng, 4);
  const auto est = k0_mc(x, y, sampler, 20000);
  CHECK(est.value >= 0.0);
  CHECK(est.value <= 1.5 * 1.5);
}

TEST_CASE("ktilde_mc examples") {
  const auto sampler = TemplateSampler::gaussian(17);
  Rng rng(4);
  const auto x = random_signal(rng, 3), y = random_signal(rng, 3);
  CHECK(ktilde_mc(x, y, trivial_group(3), sampler, 8192).value == k0_mc(x, y, sampler, 8192).value);

  const auto group = cyclic_group(2);
  const auto e1 = sig({1, 0}), e2 = sig({0, 1});
  CHECK(ktilde_mc(e1, e2, group, sampler, 10000).value ==
        doctest::Approx(ktilde_mc(e1, e1, group, sampler, 10000).value).epsilon(1e-12));
}

TEST_CASE("ktilde_mc is invariant in both arguments at equal seeds") {
  Rng rng(5);
  for (std::size_t d : {2u, 4u, 8u}) {
    const auto group = cyclic_group(d);
    const auto x = random_signal(rng, d), y = random_signal(rng, d);
    const auto sampler = TemplateSampler::gaussian(d);
    const double base = ktilde_mc(x, y, group, sampler, 20000).value;
    for (const auto& g : group.elements())
      for (const auto& g2 : group.elements())
        CHECK(std::abs(ktilde_mc(g.apply(x), g2.apply(y), group, sampler, 20000).value - base) <= 1e-10);
  }
}

TEST_CASE("k0_mc standard error shrinks as one over root S") {
  Rng rng(6);
  const auto x = random_signal(rng, 3), y = random_signal(rng, 3);
  double ratio = 0.0;
  for (std::uint64_t t = 0; t < 5; ++t) {
    const auto a = k0_mc(x, y, TemplateSampler::gaussian(100 + t), 20000);
    const auto b = k0_mc(x, y, TemplateSampler::gaussian(200 + t), 80000);
    ratio += a.std_error / b.std_error / 5.0;
  }
  CHECK(ratio >= 2.0 / 1.5);
  CHECK(ratio <= 2.0 * 1.5);
}

TEST_CASE("step kernel examples") {
  CHECK(step_kernel_exact(0.2, 0.5, 1.0) == 0.5);
  CHECK(step_kernel_exact(1.0, 1.0, 1.0) == 0.0);
  CHECK(step_kernel_exact(-2.0, -2.0, 2.0) == 4.0);
  CHECK(std::abs(step_kernel_numeric(0.2, 0.5, 1.0, 100000) - 0.5) <= 1e-3);
  CHECK(std::abs(step_kernel_numeric(0.0, 0.0, 1.0, 100000) - 1.0) <= 1e-3);
}

TEST_CASE("step kernel error paths") {
  CHECK(code_of([] { step_kernel_exact(1.5, 0.0, 1.0); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { step_kernel_exact(0.0, 0.0, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { step_kernel_numeric(0.0, -1.1, 1.0, 1000); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { step_kernel_numeric(0.0, 0.0, 1.0, 999); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("step kernel equals the max identity and the numeric oracle") {
  Rng rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const double p = 0.5 + 3.0 * (unif(rng) + 1.0);
    const double a = p * unif(rng), b = p * unif(rng);
    CHECK(std::abs(step_kernel_exact(a, b, p) - oracles::step_kernel_identity(a, b, p)) <= 1e-12);
  }
  for (int k = 0; k < 20; ++k) {
    const double a = unif(rng), b = unif(rng);
    CHECK(std::abs(step_kernel_exact(a, b, 1.0) - step_kernel_numeric(a, b, 1.0, 100000)) <= 1e-3);
  }
}

TEST_CASE("numeric step kernel converges as alpha and the grid grow") {
  const double exact = step_kernel_exact(0.2, -0.4, 1.0);
  const double coarse = std::abs(step_kernel_numeric(0.2, -0.4, 1.0, 1000, 100.0) - exact);
  const double fine = std::abs(step_kernel_numeric(0.2, -0.4, 1.0, 200000, 1e4) - exact);
  CHECK(fine < coarse);
  CHECK(fine <= 1e-3);
}

TEST_CASE("ktilde_step examples") {
  const auto t = sig({1, 2, 2});
  const auto a = sig({0.3, 0.1, -0.5}), b = sig({-1, 0.2, 0.4});
  CHECK(ktilde_step(a, b, {t}, {1.0}, trivial_group(3), 1.0) ==
        doctest::Approx(1.0 - std::max(dot(b.values(), t.values()), dot(a.values(), t.values()))).epsilon(1e-15));

  const auto group = cyclic_group(3);
  const std::vector<Signal> templates{t, sig({0, 1, 0})};
  const std::vector<double> w{0.4, 0.6};
  CHECK(ktilde_step(a, b, templates, w, group, 1.0) == ktilde_step(b, a, templates, w, group, 1.0));

  CHECK(ktilde_step(sig({1, 0}), sig({0, 1}), {sig({1, 0})}, {1.0}, cyclic_group(2), 1.0) == 0.25);
}

TEST_CASE("ktilde_step error paths") {
  const auto x = sig({1, 0});
  CHECK(code_of([&] { ktilde_step(x, x, {x}, {0.5}, cyclic_group(2), 1.0); }) == ErrorCode::WeightsNotNormalized);
  CHECK(code_of([&] { ktilde_step(x, x, {x, x}, {1.5, -0.5}, cyclic_group(2), 1.0); }) ==
        ErrorCode::WeightsNotNormalized);
  CHECK(code_of([&] { ktilde_step(x, x, {x}, {1.0}, cyclic_group(2), 0.5); }) == ErrorCode::OutOfRange);
}

TEST_CASE("gram matrices of feature-expansion kernels are PSD") {
  Rng rng(8);
  std::vector<Signal> points;
  for (int k = 0; k < 5; ++k) points.push_back(random_signal(rng, 4));
  const auto group = cyclic_group(4);
  const std::vector<Signal> templates{random_signal(rng, 4), random_signal(rng, 4)};
  const auto step = gram(points, [&](const Signal& a, const Signal& b) {
    return ktilde_step(a, b, templates, {0.5, 0.5}, group, 1.0);
  });
  CHECK(step.psd_pass);

  const auto sampler = TemplateSampler::gaussian(8);
  const auto k0 = gram(points, [&](const Signal& a, const Signal& b) { return k0_mc(a, b, sampler, 4096).value; }, 3);
  CHECK(k0.psd_pass);
  const auto kt =
      gram(points, [&](const Signal& a, const Signal& b) { return ktilde_mc(a, b, group, sampler, 4096).value; });
  CHECK(kt.psd_pass);
  CHECK(kt.matrix == kt.matrix.transpose());
}

TEST_CASE("gram rejects asymmetric kernels and tiny point sets") {
  const std::vector<Signal> pts{sig({1, 0}), sig({0, 1})};
  CHECK(code_of([&] { gram(pts, [](const Signal& a, const Signal& b) { return a[0] - b[0]; }); }) ==
        ErrorCode::KernelAsymmetric);
  CHECK(code_of([&] { gram({pts[0]}, [](const Signal&, const Signal&) { return 1.0; }); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("gram reports eigenvalue extremes") {
  const std::vector<Signal> pts{sig({1, 0}), sig({0, 1})};
  // Matrix [[1, 2], [2, 1]] has eigenvalues -1 and 3.
  const auto r = gram(pts, [](const Signal& a, const Signal& b) { return a == b ? 1.0 : 2.0; });
  CHECK(r.min_eigenvalue == doctest::Approx(-1.0));
  CHECK(r.max_eigenvalue == doctest::Approx(3.0));
  CHECK_FALSE(r.psd_pass);
}

TEST_CASE("Mex similarity is symmetric and reduces to an average or max") {
  Rng rng(9);
  const auto group = cyclic_group(4);
  const auto x = random_signal(rng, 4), y = random_signal(rng, 4);
  for (double xi : {-5.0, 0.0, 1.0, 25.0}) CHECK(mex_similarity(x, y, group, xi) == mex_similarity(y, x, group, xi));
  double best = -INFINITY, mean = 0.0;
  for (const auto& g : group.elements()) {
    const double v = dot(x.values(), g.apply(y.values()));
    best = std::max(best, v);
    mean += v / 4.0;
  }
  CHECK(mex_similarity(x, y, group, 1e9) == best);
  CHECK(mex_similarity(x, y, group, 0.0) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("Mex similarity scan finds non-PSD matrices") {
  const auto scan = mex_psd_scan(12345, 1000);
  CHECK(scan.instances == 1000);
  CHECK(scan.violations > 0);
  CHECK(scan.min_eigenvalue < -1e-6);
  REQUIRE(scan.first_violation.has_value());
  CHECK(mex_psd_scan(12345, 1000).min_eigenvalue == scan.min_eigenvalue);
}

TEST_CASE("selectivity examples") {
  const auto group = cyclic_group(4);
  const std::vector<Signal> templates{sig({1, 2, 3, 4})};
  const KernelFn kernel = [&](const Signal& a, const Signal& b) {
    return ktilde_step(a, b, templates, {1.0}, group, 1.0);
  };
  const auto one_hot = orbit(group, sig({1, 0, 0, 0}));
  const auto ones = orbit(group, sig({1, 1, 1, 1}));

  const auto same = selectivity_scan({one_hot, one_hot}, kernel);
  CHECK(same.same_orbit_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_FALSE(same.distinct_orbit_max.has_value());
  CHECK(same.pass);

  const auto shifted = selectivity_scan({one_hot, orbit(group, sig({0, 0, 1, 0}))}, kernel);
  CHECK_FALSE(shifted.margin.has_value());

  const auto pair = selectivity_scan({one_hot, ones}, kernel);
  REQUIRE(pair.margin.has_value());
  CHECK(*pair.margin >= 1e-3);
  CHECK(pair.pass);
  CHECK(pair.max_abs_normalized <= 1.0 + 1e-9);
}

TEST_CASE("gram exports") {
  const std::vector<Signal> pts{sig({1, 0}), sig({0, 1})};
  const auto r = gram(pts, [](const Signal& a, const Signal& b) { return dot(a.values(), b.values()) + 1.0; });
  const auto csv = gram_to_csv(r);
  CHECK(csv.rfind("row,col,value\n", 0) == 0);
  CHECK(csv.find("0,1,1\n") != std::string::npos);
  const auto doc = nlohmann::json::parse(gram_summary_json(r, "linear", 7));
  CHECK(doc.at("n_points") == 2);
  CHECK(doc.at("kernel_id") == "linear");
  CHECK(doc.at("seed") == 7);
  CHECK(doc.at("psd_pass") == true);
  CHECK(doc.at("min_eig").get<double>() == doctest::Approx(1.0));
  CHECK(doc.at("max_eig").get<double>() == doctest::Approx(3.0));
}
