#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "roughfbm/roughfbm.hpp"
#include "testing_util.hpp"

using namespace roughfbm;

namespace {

FbmPath sampled(double hurst, std::size_t dim, std::size_t n, std::uint64_t seed) {
  return sample_path(FbmModel(hurst, dim), Grid(0.0, 1.0, n), seed, 0);
}

double levy_area_01(const Level2Path& rp) {
  auto [x1, x2] = chen_reconstruct(rp, 0, rp.grid.n);
  return 0.5 * (x2(0, 1) - x2(1, 0));
}

} // namespace

TEST_CASE("one-dimensional lift is the square identity") {
  const FbmPath p = sampled(0.4, 1, 256, 1);
  const Level2Path rp = lift_stratonovich(p);
  // X^2_{s,t} = (X^1_{s,t})^2 / 2 for every dyadic block
  for (std::size_t len : {1u, 2u, 8u, 64u, 256u})
    for (std::size_t i = 0; i + len <= 256; i += len) {
      auto [x1, x2] = chen_reconstruct(rp, i, i + len);
      CHECK(x2(0, 0) == Catch::Approx(0.5 * x1[0] * x1[0]).margin(1e-13));
    }
}

TEST_CASE("symmetric part identities") {
  for (std::size_t d : {2u, 3u}) {
    const FbmPath p = sampled(0.45, d, 128, 2 + d);
    const Level2Path rs = lift_stratonovich(p);
    const Level2Path ri = lift_ito(p);
    const double h2 = 0.9;
    for (std::size_t i : {0u, 16u, 40u})
      for (std::size_t j : {64u, 128u}) {
        auto [s1, s2] = chen_reconstruct(rs, i, j);
        auto [i1, i2] = chen_reconstruct(ri, i, j);
        const double dtau =
            std::pow(rs.grid.time(j), h2) - std::pow(rs.grid.time(i), h2);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) {
            const double sym_s = 0.5 * (s2(a, b) + s2(b, a));
            CHECK(sym_s == Catch::Approx(0.5 * s1[a] * s1[b]).margin(1e-12));
            const double sym_i = 0.5 * (i2(a, b) + i2(b, a));
            const double expect =
                0.5 * i1[a] * i1[b] - (a == b ? 0.5 * dtau : 0.0);
            CHECK(sym_i == Catch::Approx(expect).margin(1e-12));
          }
        // antisymmetric parts agree between the two flavors
        CHECK(0.5 * (s2(0, 1) - s2(1, 0)) ==
              Catch::Approx(0.5 * (i2(0, 1) - i2(1, 0))).margin(1e-14));
      }
  }
}

TEST_CASE("ito correction at H = 1/2 is the classical one") {
  const FbmPath p = sampled(0.5, 1, 64, 9);
  const Level2Path rs = lift_stratonovich(p);
  const Level2Path ri = lift_ito(p);
  for (std::size_t k = 0; k < 64; ++k) {
    const double dt = p.grid.dt();
    CHECK(rs.lv2_at(k, 0, 0) - ri.lv2_at(k, 0, 0) == Catch::Approx(0.5 * dt).margin(1e-15));
  }
}

TEST_CASE("chen reconstruction") {
  const FbmPath p = sampled(0.4, 2, 64, 4);
  const Level2Path rp = lift_stratonovich(p);

  SECTION("degenerate interval") {
    auto [x1, x2] = chen_reconstruct(rp, 5, 5);
    for (double v : x1) CHECK(v == 0.0);
    for (double v : x2.a) CHECK(v == 0.0);
  }

  SECTION("adjacent step returns stored values") {
    auto [x1, x2] = chen_reconstruct(rp, 7, 8);
    const auto inc = rp.inc_at(7);
    const auto l2 = rp.lv2_at(7);
    for (std::size_t c = 0; c < 2; ++c) CHECK(x1[c] == inc[c]);
    for (std::size_t q = 0; q < 4; ++q) CHECK(x2.a[q] == l2[q]);
  }

  SECTION("composition is association independent") {
    auto [full1, full2] = chen_reconstruct(rp, 0, 64);
    // two-piece composition through the midpoint
    auto [a1, a2] = chen_reconstruct(rp, 0, 32);
    auto [b1, b2] = chen_reconstruct(rp, 32, 64);
    Mat comp = a2;
    comp += b2;
    add_outer(comp, a1, b1);
    const double scale = std::max(1e-30, full2.frobenius());
    for (std::size_t q = 0; q < 4; ++q)
      CHECK(std::abs(comp.a[q] - full2.a[q]) / scale < 1e-10);

    // brute-force double sum oracle
    const Mat direct = testing::direct_second_level(rp, 0, 64);
    for (std::size_t q = 0; q < 4; ++q)
      CHECK(std::abs(direct.a[q] - full2.a[q]) / scale < 1e-10);

    // random association orders via recursive splits
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      const std::function<std::pair<Vec, Mat>(std::size_t, std::size_t)> rec =
          [&](std::size_t i, std::size_t j) -> std::pair<Vec, Mat> {
        if (j - i <= 1) return chen_reconstruct(rp, i, j);
        std::uniform_int_distribution<std::size_t> u(i + 1, j - 1);
        const std::size_t mid = u(rng);
        auto [l1, l2] = rec(i, mid);
        auto [r1, r2] = rec(mid, j);
        Mat m = l2;
        m += r2;
        add_outer(m, l1, r1);
        Vec v = l1;
        axpy(1.0, r1, v);
        return {v, m};
      };
      auto [r1, r2] = rec(0, 64);
      for (std::size_t q = 0; q < 4; ++q)
        CHECK(std::abs(r2.a[q] - full2.a[q]) / scale < 1e-10);
    }
  }

  SECTION("off-grid times rejected") {
    CHECK_THROWS_AS(chen_reconstruct_times(rp, 0.001, 0.5), std::invalid_argument);
    CHECK_NOTHROW(chen_reconstruct_times(rp, 0.25, 0.75));
    CHECK_THROWS_AS(chen_reconstruct(rp, 10, 5), std::invalid_argument);
  }
}

TEST_CASE("perturbation") {
  const FbmPath p = sampled(0.45, 2, 64, 6);
  const Level2Path rs = lift_stratonovich(p);

  SECTION("zero perturbation is the identity") {
    const Level2Path out = perturb(rs, Perturbation{[](double) { return 0.0; }});
    CHECK(out.lv2 == rs.lv2);
    CHECK(out.inc == rs.inc);
  }

  SECTION("half t^{2H} perturbation equals the ito lift bitwise") {
    const Level2Path via_perturb = perturb(rs, pow2h_perturbation(0.45));
    const Level2Path direct = lift_ito(p);
    CHECK(via_perturb.lv2 == direct.lv2);
    CHECK(via_perturb.inc == direct.inc);
  }

  SECTION("phi then -phi round-trips") {
    const Perturbation phi = pow2h_perturbation(0.45);
    const Perturbation neg{[phi](double t) { return -phi.phi(t); }};
    const Level2Path rt = perturb(perturb(rs, phi), neg);
    for (std::size_t q = 0; q < rs.lv2.size(); ++q)
      CHECK(rt.lv2[q] == Catch::Approx(rs.lv2[q]).margin(1e-14));
  }

  SECTION("phi = t^{2H}/2 has the expected q-variation scale") {
    // q-variation of t^{2H}/2 with q = 1/(2H) is finite; the coarsest
    // partition already attains the supremum by concavity
    const double h2 = 0.9;
    double total = 0.0;
    for (std::size_t k = 0; k < 64; ++k)
      total += std::pow(0.5 * (std::pow(rs.grid.time(k + 1), h2) - std::pow(rs.grid.time(k), h2)),
                        1.0 / h2);
    CHECK(total <= std::pow(0.5 * std::pow(rs.grid.t1, h2), 1.0 / h2) + 1e-12);
  }
}

TEST_CASE("levy area refinement is Cauchy") {
  // the area increments per dyadic level shrink like 2^{-m(2H - 1/2)}, which
  // is slow; averaging over an ensemble makes the decay monotone
  const FbmModel model(0.45, 2);
  const Grid grid(0.0, 1.0, 1024);
  const int paths = 48;
  std::vector<double> mean_diff;
  for (std::size_t m = 4; m <= 9; ++m) {
    double acc = 0.0;
    for (int p = 0; p < paths; ++p) {
      const FbmPath path = sample_path(model, grid, 555, p);
      acc += std::abs(levy_area_01(lift_stratonovich(path, m + 1)) -
                      levy_area_01(lift_stratonovich(path, m)));
    }
    mean_diff.push_back(acc / paths);
  }
  for (std::size_t i = 1; i < mean_diff.size(); ++i) CHECK(mean_diff[i] < mean_diff[i - 1]);
}

TEST_CASE("pvar diagnostics") {
  SECTION("constant path") {
    FbmPath p;
    p.model = FbmModel(0.4, 1);
    p.grid = Grid(0.0, 1.0, 16);
    p.values.assign(17, Vec(1, 3.0));
    const auto d = pvar_diagnostics(lift_stratonovich(p), 2.7, 0.4);
    CHECK(d.level1_pvar == 0.0);
    CHECK(d.level2_pvar2 == 0.0);
  }

  SECTION("linear path attains the supremum on the coarsest partition") {
    FbmPath p;
    p.model = FbmModel(0.4, 1);
    p.grid = Grid(0.0, 1.0, 16);
    p.values.assign(17, Vec(1, 0.0));
    for (std::size_t k = 0; k <= 16; ++k) p.values[k][0] = p.grid.time(k);
    const auto d = pvar_diagnostics(lift_stratonovich(p), 2.7, 0.4);
    CHECK(d.level1_pvar == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("exhaustive oracle at small n") {
    const FbmPath p = sampled(0.4, 1, 8, 21);
    const Level2Path rp = lift_stratonovich(p);
    const double pexp = default_pvar_exponent(0.4);
    const auto d = pvar_diagnostics(rp, pexp, 0.4);

    // enumerate every partition of {0..8} containing 0 and 8
    double best1 = 0.0, best2 = 0.0;
    for (unsigned mask = 0; mask < 128; ++mask) {
      std::vector<std::size_t> pts{0};
      for (unsigned b = 0; b < 7; ++b)
        if (mask & (1u << b)) pts.push_back(b + 1);
      pts.push_back(8);
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto [x1, x2] = chen_reconstruct(rp, pts[i], pts[i + 1]);
        s1 += std::pow(std::abs(x1[0]), pexp);
        s2 += std::pow(x2.frobenius(), pexp / 2.0);
      }
      best1 = std::max(best1, s1);
      best2 = std::max(best2, s2);
    }
    CHECK(d.level1_pvar == Catch::Approx(best1).epsilon(1e-12));
    CHECK(d.level2_pvar2 == Catch::Approx(best2).epsilon(1e-12));
  }

  SECTION("stable under refinement") {
    const FbmPath p = sampled(0.4, 1, 512, 22);
    const double pexp = default_pvar_exponent(0.4);
    const auto fine = pvar_diagnostics(lift_stratonovich(p), pexp, 0.4);
    const auto coarse = pvar_diagnostics(lift_stratonovich(p.subsample(2)), pexp, 0.4);
    CHECK(fine.level1_pvar >= coarse.level1_pvar - 1e-12); // refinement cannot lose
    CHECK(std::abs(fine.level1_pvar - coarse.level1_pvar) / fine.level1_pvar < 0.10);
  }

  SECTION("exponent validation") {
    const FbmPath p = sampled(0.4, 1, 8, 23);
    CHECK_THROWS_AS(pvar_diagnostics(lift_stratonovich(p), 2.0, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(pvar_diagnostics(lift_stratonovich(p), 3.2, 0.4), std::invalid_argument);
  }
}

TEST_CASE("space-time extension") {
  SECTION("constant path") {
    FbmPath p;
    p.model = FbmModel(0.4, 1);
    p.grid = Grid(0.0, 1.0, 8);
    p.values.assign(9, Vec(1, 2.0));
    const Level2Path ext = lift_spacetime(lift_stratonovich(p));
    const double dt = 0.125;
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(spacetime_cross_xu(ext, k, 0) == 0.0);
      CHECK(spacetime_cross_ux(ext, k, 0) == 0.0);
      CHECK(spacetime_time2(ext, k) == Catch::Approx(0.5 * dt * dt).margin(1e-16));
    }
  }

  SECTION("linear path cross integral over the full interval") {
    FbmPath p;
    p.model = FbmModel(0.4, 1);
    p.grid = Grid(0.0, 1.0, 16);
    p.values.assign(17, Vec(1, 0.0));
    for (std::size_t k = 0; k <= 16; ++k) p.values[k][0] = p.grid.time(k);
    const Level2Path ext = lift_spacetime(lift_stratonovich(p));
    auto [x1, x2] = chen_reconstruct(ext, 0, 16);
    // int_0^1 X^1_{0,u} du = 1/2 for X_u = u
    CHECK(x2(0, 1) == Catch::Approx(0.5).margin(1e-12));
    CHECK(x2(1, 0) == Catch::Approx(0.5).margin(1e-12));
    CHECK(x2(1, 1) == Catch::Approx(0.5).margin(1e-12));
  }

  SECTION("integration by parts per step") {
    const FbmPath p = sampled(0.42, 2, 64, 31);
    const Level2Path ext = lift_spacetime(lift_stratonovich(p));
    for (std::size_t k = 0; k < 64; ++k) {
      const double dt = p.grid.dt();
      for (std::size_t j = 0; j < 2; ++j) {
        const double lhs = spacetime_cross_xu(ext, k, j) + spacetime_cross_ux(ext, k, j);
        CHECK(lhs == Catch::Approx(ext.inc_at(k)[j] * dt).margin(1e-12));
      }
    }
  }

  SECTION("pow2h extension matches exact antiderivative") {
    const FbmPath p = sampled(0.4, 1, 32, 33);
    const Level2Path ext = augment_with_time(lift_stratonovich(p), pow2h_time(0.4));
    const double h2 = 0.8;
    for (std::size_t k = 0; k < 32; ++k) {
      const double s = p.grid.time(k), t = p.grid.time(k + 1);
      const double dpsi = std::pow(t, h2) - std::pow(s, h2);
      CHECK(ext.inc_at(k)[1] == Catch::Approx(dpsi).margin(1e-15));
      const double mean_psi =
          (std::pow(t, h2 + 1.0) - std::pow(s, h2 + 1.0)) / ((h2 + 1.0) * (t - s)) -
          std::pow(s, h2);
      CHECK(spacetime_cross_ux(ext, k, 0) ==
            Catch::Approx(ext.inc_at(k)[0] * mean_psi).margin(1e-14));
      CHECK(spacetime_cross_xu(ext, k, 0) + spacetime_cross_ux(ext, k, 0) ==
            Catch::Approx(ext.inc_at(k)[0] * dpsi).margin(1e-14));
      CHECK(spacetime_time2(ext, k) == Catch::Approx(0.5 * dpsi * dpsi).margin(1e-15));
    }
  }
}

TEST_CASE("lift level validation") {
  const FbmPath p = sampled(0.4, 1, 16, 41);
  CHECK_THROWS_AS(lift_stratonovich(p, 5), std::invalid_argument);
  const Level2Path l2 = lift_stratonovich(p, 2);
  CHECK(l2.grid.n == 4);
  auto [x1, x2] = chen_reconstruct(l2, 0, 4);
  CHECK(x1[0] == Catch::Approx(p.values[16][0] - p.values[0][0]).margin(1e-15));
}
