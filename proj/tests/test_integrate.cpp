#include <catch2/catch_amalgamated.hpp>

#include "roughfbm/roughfbm.hpp"
#include "testing_util.hpp"

using namespace roughfbm;

namespace {

FbmPath sampled(double hurst, std::size_t n, std::uint64_t seed) {
  return sample_path(FbmModel(hurst, 1), Grid(0.0, 1.0, n), seed, 0);
}

} // namespace

TEST_CASE("young integral of smooth functions") {
  const auto f = [](double t) { return t; };
  const auto g = [](double t) { return t * t; };
  const YoungResult r = young_integral(f, g, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(2.0 / 3.0).epsilon(1e-9));

  // constant integrand is exact on any partition
  const YoungResult c =
      young_integral([](double) { return 3.5; }, [](double t) { return std::cos(t); }, 0.2, 1.4);
  CHECK(c.converged);
  CHECK(c.doublings <= 1);
  CHECK(c.value == Catch::Approx(3.5 * (std::cos(1.4) - std::cos(0.2))).margin(1e-12));
}

TEST_CASE("young integral of a sampled path against u^{2H}") {
  const double hurst = 0.4;
  const FbmPath p = sampled(hurst, 512, 3);
  const auto b = linear_interpolant(p.grid, [&] {
    std::vector<double> v(p.grid.n + 1);
    for (std::size_t k = 0; k <= p.grid.n; ++k) v[k] = p.values[k][0];
    return v;
  }());
  const auto tau = [hurst](double t) { return std::pow(t, 2.0 * hurst); };

  YoungOptions opt;
  opt.rel_tol = 1e-7;
  opt.max_doublings = 24;
  const YoungResult r = young_integral(b, tau, 0.0, 1.0, opt);

  // trapezoid oracle at high resolution on the same interpolant
  const std::size_t m = 1 << 22;
  double oracle = 0.0;
  double g_prev = tau(0.0);
  double f_prev = b(0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(m);
    const double g_next = tau(t);
    const double f_next = b(t);
    oracle += 0.5 * (f_prev + f_next) * (g_next - g_prev);
    g_prev = g_next;
    f_prev = f_next;
  }
  CHECK(r.value == Catch::Approx(oracle).margin(1e-6));
}

TEST_CASE("young non-convergence raises with diagnostics") {
  YoungOptions opt;
  opt.rel_tol = 1e-16;
  opt.max_doublings = 3;
  CHECK_THROWS_AS(young_integral([](double t) { return std::sin(7.0 * t); },
                                 [](double t) { return std::cos(11.0 * t); }, 0.0, 1.0, opt),
                  NumericalError);
  opt.require_convergence = false;
  const YoungResult r = young_integral([](double t) { return std::sin(7.0 * t); },
                                       [](double t) { return std::cos(11.0 * t); }, 0.0, 1.0, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.last_gap > 0.0);
}

TEST_CASE("constant one-forms integrate exactly on any partition") {
  const FbmPath p = sampled(0.42, 256, 5);
  const OneForm F = constant_form(2.5);
  for (const Level2Path& lift : {lift_stratonovich(p), lift_ito(p)})
    for (std::size_t stride : {1u, 4u, 64u, 256u}) {
      IntegrateOptions opt;
      opt.stride = stride;
      const Level2Path y = integrate_one_form(F, lift, opt);
      auto [lvl1, lvl2] = chen_reconstruct(y, 0, y.grid.n);
      CHECK(lvl1[0] == Catch::Approx(2.5 * p.values[256][0]).margin(1e-13));
    }
}

TEST_CASE("telescoping identities in one dimension") {
  const double hurst = 0.45;
  const FbmPath p = sampled(hurst, 512, 6);
  const OneForm F = identity_form();
  const double bT = p.values[512][0];
  const double tau = std::pow(1.0, 2.0 * hurst);

  const Level2Path ys = integrate_one_form(F, lift_stratonovich(p));
  const Level2Path yi = integrate_one_form(F, lift_ito(p));

  for (std::size_t stride : {1u, 2u, 8u, 128u, 512u}) {
    IntegrateOptions opt;
    opt.stride = stride;
    const Level2Path s = integrate_one_form(F, lift_stratonovich(p), opt);
    const Level2Path i = integrate_one_form(F, lift_ito(p), opt);
    auto [s1, s2] = chen_reconstruct(s, 0, s.grid.n);
    auto [i1, i2] = chen_reconstruct(i, 0, i.grid.n);
    CHECK(s1[0] == Catch::Approx(0.5 * bT * bT).margin(1e-13));
    CHECK(i1[0] == Catch::Approx(0.5 * bT * bT - 0.5 * tau).margin(1e-13));
  }

  // sub-intervals telescope too
  for (std::size_t i : {0u, 64u, 200u})
    for (std::size_t j : {256u, 512u}) {
      auto [s1, s2] = chen_reconstruct(ys, i, j);
      auto [i1, i2] = chen_reconstruct(yi, i, j);
      const double bs = p.values[i][0], bt = p.values[j][0];
      const double dtau = std::pow(p.grid.time(j), 2.0 * hurst) -
                          std::pow(p.grid.time(i), 2.0 * hurst);
      CHECK(s1[0] == Catch::Approx(0.5 * (bt * bt - bs * bs)).margin(1e-13));
      CHECK(i1[0] == Catch::Approx(0.5 * (bt * bt - bs * bs) - 0.5 * dtau).margin(1e-13));
    }
}

TEST_CASE("user-supplied derivatives match finite differences") {
  CHECK(testing::gradient_check(identity_form(), 1) < 1e-5);
  CHECK(testing::gradient_check(square_form(), 2) < 1e-5);
  CHECK(testing::gradient_check(sine_form(), 3) < 1e-5);
  CHECK(testing::gradient_check(poly_form({0.5, -1.0, 0.0, 2.0}), 4) < 1e-5);
  CHECK(testing::gradient_check(xt_form(), 5) < 1e-5);
  CHECK(testing::gradient_check(swirl_form_2d(), 6) < 1e-5);
}

TEST_CASE("non-finite callbacks are reported") {
  const FbmPath p = sampled(0.4, 16, 7);
  OneForm bad = identity_form();
  bad.value = [](const Vec&, double) {
    Mat m(1, 1);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    return m;
  };
  CHECK_THROWS_AS(integrate_one_form(bad, lift_ito(p)), NumericalError);
}

TEST_CASE("stratonovich to ito translation") {
  const double hurst = 0.45;
  const FbmPath p = sampled(hurst, 1024, 8);
  const Level2Path ls = lift_stratonovich(p);
  const Level2Path li = lift_ito(p);

  SECTION("constant form translates to itself") {
    const OneForm F = constant_form(1.5);
    const Level2Path ys = integrate_one_form(F, ls);
    const Level2Path yt = ito_strat_translate(F, ys, ls, hurst);
    for (std::size_t k = 0; k < 1024; ++k)
      CHECK(yt.inc_at(k)[0] == Catch::Approx(ys.inc_at(k)[0]).margin(1e-16));
  }

  SECTION("identity form level-1 correction is half the tau increment") {
    const OneForm F = identity_form();
    const Level2Path ys = integrate_one_form(F, ls);
    const auto corr = strat_ito_corrections(F, ys, ls, hurst, 128, 896);
    const double dtau = std::pow(p.grid.time(896), 2.0 * hurst) -
                        std::pow(p.grid.time(128), 2.0 * hurst);
    CHECK(corr.level1[0] == Catch::Approx(0.5 * dtau).margin(1e-14));
  }

  SECTION("translation equals direct ito integration") {
    for (const OneForm& F : {identity_form(), square_form(), sine_form()}) {
      const Level2Path ys = integrate_one_form(F, ls);
      const Level2Path yi = integrate_one_form(F, li);
      const Level2Path yt = ito_strat_translate(F, ys, ls, hurst);
      auto [t1, t2] = chen_reconstruct(yt, 0, 1024);
      auto [i1, i2] = chen_reconstruct(yi, 0, 1024);
      CHECK(t1[0] == Catch::Approx(i1[0]).margin(1e-12));
      CHECK(t2(0, 0) == Catch::Approx(i2(0, 0)).margin(1e-12));
    }
  }

  SECTION("interval corrections match the flavor difference") {
    const OneForm F = sine_form();
    const Level2Path ys = integrate_one_form(F, ls);
    const Level2Path yi = integrate_one_form(F, li);
    for (auto [i, j] : std::vector<std::pair<std::size_t, std::size_t>>{
             {0, 1024}, {0, 512}, {256, 768}}) {
      const auto corr = strat_ito_corrections(F, ys, ls, hurst, i, j);
      auto [s1, s2] = chen_reconstruct(ys, i, j);
      auto [i1, i2] = chen_reconstruct(yi, i, j);
      CHECK(s1[0] - i1[0] == Catch::Approx(corr.level1[0]).margin(1e-12));
      CHECK(s2(0, 0) - i2(0, 0) == Catch::Approx(corr.level2(0, 0)).margin(1e-12));
    }
  }

  SECTION("both primitive conventions agree") {
    const OneForm F = square_form();
    const Level2Path ys = integrate_one_form(F, ls);
    const auto a =
        strat_ito_corrections(F, ys, ls, hurst, 100, 900, PrimitiveConvention::zero_based);
    const auto b =
        strat_ito_corrections(F, ys, ls, hurst, 100, 900, PrimitiveConvention::interval_based);
    CHECK(a.level1[0] == Catch::Approx(b.level1[0]).margin(1e-15));
    CHECK(a.level2(0, 0) == Catch::Approx(b.level2(0, 0)).margin(1e-12));
  }

  SECTION("round trip restores the stratonovich integral") {
    const OneForm F = sine_form();
    const Level2Path ys = integrate_one_form(F, ls);
    const Level2Path yt = ito_strat_translate(F, ys, ls, hurst);
    const Level2Path back = strat_from_ito(F, yt, ls, hurst);
    auto [b1, b2] = chen_reconstruct(back, 0, 1024);
    auto [s1, s2] = chen_reconstruct(ys, 0, 1024);
    CHECK(b1[0] == Catch::Approx(s1[0]).margin(1e-13));
    CHECK(b2(0, 0) == Catch::Approx(s2(0, 0)).margin(1e-12));
  }

  SECTION("matrix-valued forms translate correctly in two dimensions") {
    const FbmPath q = sample_path(FbmModel(hurst, 2), Grid(0.0, 1.0, 256), 88, 0);
    const Level2Path qs = lift_stratonovich(q);
    const Level2Path qi = lift_ito(q);
    const OneForm F = swirl_form_2d();
    const Level2Path ys = integrate_one_form(F, qs);
    const Level2Path yi = integrate_one_form(F, qi);
    const Level2Path yt = ito_strat_translate(F, ys, qs, hurst);
    auto [t1, t2] = chen_reconstruct(yt, 0, 256);
    auto [i1, i2] = chen_reconstruct(yi, 0, 256);
    for (std::size_t c = 0; c < 2; ++c) CHECK(t1[c] == Catch::Approx(i1[c]).margin(1e-12));
    for (std::size_t quad = 0; quad < 4; ++quad)
      CHECK(t2.a[quad] == Catch::Approx(i2.a[quad]).margin(1e-12));

    const auto corr = strat_ito_corrections(F, ys, qs, hurst, 32, 224);
    auto [sa, s2m] = chen_reconstruct(ys, 32, 224);
    auto [ia, i2m] = chen_reconstruct(yi, 32, 224);
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(sa[c] - ia[c] == Catch::Approx(corr.level1[c]).margin(1e-12));
    for (std::size_t quad = 0; quad < 4; ++quad)
      CHECK(s2m.a[quad] - i2m.a[quad] == Catch::Approx(corr.level2.a[quad]).margin(1e-12));
  }
}

TEST_CASE("calculus identity residuals") {
  const double hurst = 0.45;
  const FbmPath p = sampled(hurst, 1024, 9);
  const Level2Path ls = lift_stratonovich(p);
  const Level2Path li = lift_ito(p);

  SECTION("linear functions close to machine precision") {
    // F(x) = 3x: first derivative constant, second zero
    const OneForm F = poly_form({0.0, 3.0});
    const auto rep = ito_formula_residual(F, ls, li, hurst, {4, 2, 1});
    for (double r : rep.residual1) CHECK(r < 1e-12);
  }

  SECTION("quadratics attain the identity exactly in one dimension") {
    // constant second derivative makes the compensated sums telescope, so
    // the residual sits at the machine floor on every mesh
    const auto rep = ito_formula_residual(square_form(), ls, li, hurst, {16, 8, 4, 2, 1});
    REQUIRE(rep.residual1.size() == 5);
    for (double r : rep.residual1) CHECK(r < 1e-12);
    for (double r : rep.residual2) CHECK(r < 1e-12);
  }

  SECTION("nonlinear second derivatives give decaying residuals") {
    for (const OneForm& F : {poly_form({0.0, 1.0, 0.0, 1.0}), sine_form()}) {
      const auto rep = ito_formula_residual(F, ls, li, hurst, {16, 8, 4, 2, 1});
      CHECK(rep.residual1.back() < rep.residual1.front());
      CHECK(rep.residual2.back() < rep.residual2.front());
      CHECK(rep.decay_rate1 > 0.5);
      CHECK(rep.decay_rate2 > 0.5);
    }
  }

  SECTION("x t residual matches its symbolic expansion") {
    // for F(x, t) = x t the level-1 identity defect collapses to
    // sum db dt over the working partition
    const auto rep = ito_formula_residual(xt_form(), ls, li, hurst, {4});
    const std::size_t stride = 4;
    double defect = 0.0;
    for (std::size_t blk = 0; blk < 1024 / stride; ++blk) {
      const double db =
          p.values[(blk + 1) * stride][0] - p.values[blk * stride][0];
      const double dt = p.grid.time((blk + 1) * stride) - p.grid.time(blk * stride);
      defect += db * dt;
    }
    CHECK(rep.residual1[0] == Catch::Approx(std::abs(defect)).margin(1e-13));
  }
}

TEST_CASE("zero mean property") {
  const Grid grid(0.0, 1.0, 64);

  SECTION("ito integrals pass at modest path counts") {
    const auto rep =
        zero_mean_verify(identity_form(), FbmModel(0.4, 1), grid, 20000, 17, Flavor::ito);
    CHECK(rep.pass);
    CHECK_FALSE(rep.degenerate);
  }

  SECTION("x^2 passes as well") {
    const auto rep =
        zero_mean_verify(square_form(), FbmModel(0.45, 1), grid, 20000, 18, Flavor::ito);
    CHECK(rep.pass);
  }

  SECTION("time-dependent forms pass") {
    const auto rep = zero_mean_verify(xt_form(), FbmModel(0.4, 1), grid, 20000, 19, Flavor::ito);
    CHECK(rep.pass);
  }

  SECTION("two-dimensional forms pass") {
    const auto rep =
        zero_mean_verify(swirl_form_2d(), FbmModel(0.4, 2), grid, 10000, 20, Flavor::ito);
    CHECK(rep.pass);
  }

  SECTION("stratonovich contrast sits at half t^{2H}") {
    const double hurst = 0.4;
    const auto rep = zero_mean_verify(identity_form(), FbmModel(hurst, 1), grid, 20000, 21,
                                      Flavor::stratonovich);
    CHECK_FALSE(rep.pass);
    CHECK(std::abs(rep.mean[0] - 0.5 * std::pow(1.0, 2.0 * hurst)) < 3.0 * rep.se[0]);
  }

  SECTION("worker count does not change the estimate") {
    const auto a =
        zero_mean_verify(identity_form(), FbmModel(0.4, 1), grid, 2000, 17, Flavor::ito, 1);
    const auto b =
        zero_mean_verify(identity_form(), FbmModel(0.4, 1), grid, 2000, 17, Flavor::ito, 4);
    CHECK(a.mean[0] == b.mean[0]);
    CHECK(a.se[0] == b.se[0]);
  }

  SECTION("degenerate integrand is flagged") {
    const std::vector<double> constant_nonzero(16, 2.0);
    const auto rep = zero_mean_report(constant_nonzero, 1);
    CHECK(rep.degenerate);
    CHECK_FALSE(rep.pass);
    const std::vector<double> zeros(16, 0.0);
    const auto ok = zero_mean_report(zeros, 1);
    CHECK(ok.pass);
    CHECK_FALSE(ok.degenerate);
  }
}

TEST_CASE("refinement reports") {
  const FbmPath p = sampled(0.42, 512, 29);
  const Level2Path li = lift_ito(p);

  // constant forms are partition independent, so every gap is zero
  const auto flat = integral_refinement_report(constant_form(2.0), li, {8, 4, 2, 1});
  for (double g : flat.level1_change) CHECK(g < 1e-13);

  const auto rep = integral_refinement_report(sine_form(), li, {16, 4, 1});
  REQUIRE(rep.level1_change.size() == 2);
  CHECK(rep.level1_change.back() < rep.level1_change.front());
  CHECK(rep.final_gap == rep.level1_change.back());
}

TEST_CASE("time cross terms vanish under refinement") {
  const double hurst = 0.42;
  const FbmPath p = sampled(hurst, 1024, 30);
  const Level2Path ext = lift_spacetime(lift_ito(p));
  const OneForm F = xt_form();
  std::vector<double> gap;
  for (std::size_t stride : {16u, 4u, 1u}) {
    IntegrateOptions with, without;
    with.stride = without.stride = stride;
    with.include_time_cross_terms = true;
    const Level2Path a = integrate_one_form(F, ext, with);
    const Level2Path b = integrate_one_form(F, ext, without);
    auto [a1, a2] = chen_reconstruct(a, 0, a.grid.n);
    auto [b1, b2] = chen_reconstruct(b, 0, b.grid.n);
    gap.push_back(std::abs(a1[0] - b1[0]));
  }
  CHECK(gap.back() < gap.front());
}
