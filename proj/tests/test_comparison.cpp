#include <doctest.h>

#include <cmath>

#include "curvtorus/comparison.hpp"
#include "curvtorus/continuation.hpp"
#include "oracles.hpp"

using namespace curvtorus;
using oracle::kPi;

namespace {

ErrorCode error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("comparison") {
  TEST_CASE("radial profile") {
    const double lam = 0.1, L = 2 * kPi;
    const double inner = std::pow(lam, 1.5) / L, outer = std::sqrt(lam) / L;
    CHECK(phi_profile(lam, L, 0) == doctest::Approx(std::log(10.0)));
    CHECK(phi_profile(lam, L, 0.5 * inner) == doctest::Approx(std::log(10.0)));
    CHECK(phi_profile(lam, L, outer) == doctest::Approx(0.0));
    CHECK(phi_profile(lam, L, 2 * outer) == 0.0);
    const double r = std::sqrt(inner * outer);
    CHECK(phi_profile(lam, L, r) == doctest::Approx(std::log(outer / r)).epsilon(1e-14));
  }

  TEST_CASE("sampled comparison function") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(256));
    const double lam = 0.1;
    const ComparisonFn c = build_phi(p, lam);
    CHECK(c.L == doctest::Approx(2 * kPi));
    CHECK(c.energy_analytic == doctest::Approx(2 * kPi * std::log(10.0)).epsilon(1e-14));
    CHECK(c.energy_analytic == doctest::Approx(14.4677).epsilon(1e-5));
    CHECK(c.field(0, 0) == doctest::Approx(std::log(10.0)).epsilon(1e-14));
    CHECK(c.field.min() >= 0);
    const Grid& g = p.grid();
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j) {
        const double r = periodic_distance(g.point(i, j), c.center);
        if (r >= c.outer_radius) CHECK(c.field(i, j) == 0.0);
        if (c.field(i, j) > 0) CHECK(f_lambda(p, lam)(i, j) > 0);
      }
    CHECK(c.support_min_f > 0);
    CHECK(std::abs(c.energy - c.energy_analytic) < 0.02 * c.energy_analytic);
  }

  TEST_CASE("energy anchor across lambda") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(256));
    for (double lam : {0.02, 0.05, 0.1, 0.2}) {
      const ComparisonFn c = build_phi(p, lam);
      CHECK(std::abs(c.energy / (2 * kPi * std::log(1 / lam)) - 1) < 0.02);
    }
  }

  TEST_CASE("core resolution and chart guards") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(128));
    CHECK(error_code([&] { build_phi(p, 0.02, {.auto_refine = false, .max_chart_n = 2048}); }) ==
          ErrorCode::UnresolvedCore);
    const ComparisonFn c = build_phi(p, 0.02);
    CHECK(c.refined);
    CHECK(c.chart_n >= 64);

    const Problem wide = build_problem(CosineFamily{0.05}, Grid(64));
    CHECK(error_code([&] { build_phi(wide, 0.3); }) == ErrorCode::ChartTooLarge);
    CHECK(error_code([&] { build_phi(p, 1.2); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("alpha puts alpha*phi on the constraint") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(128));
    for (double lam : {0.2, 0.1, 0.05}) {
      const ComparisonFn c = build_phi(p, lam);
      CHECK(constraint_value(p, lam, Field(p.grid())) < 0);
      const AlphaResult a = solve_alpha(p, lam, c);
      CHECK(a.alpha > 0);
      CHECK(a.constraint_residual <= 1e-10);
      if (!a.chart_quadrature) {
        const Field ap(p.grid(), a.alpha * c.field.values());
        CHECK(std::abs(constraint_value(p, lam, ap)) <= 1e-10);
      }
    }
    CHECK(closed_form_lambda_sigma(p) == doctest::Approx(std::pow(2 * 4 * kPi * kPi * 2 / kPi, -0.5)));
  }

  TEST_CASE("alpha bound and energy comparison") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(128));
    const double lsig = closed_form_lambda_sigma(p);
    for (double lam : {0.1, 0.05}) {
      REQUIRE(lam < lsig);
      const AlphaResult a = solve_alpha(p, lam, build_phi(p, lam));
      CHECK(a.alpha <= 3);
    }
    const MinimizeResult r = solve_by_continuation(p, 0.1);
    REQUIRE(r.converged);
    const ComparisonFn c = build_phi(p, 0.1);
    const AlphaResult a = solve_alpha(p, 0.1, c);
    CHECK(a.alpha * a.alpha * c.energy >= r.beta);
  }

  TEST_CASE("I map") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(64));
    CHECK(I_map(p, Field(p.grid())) == doctest::Approx(p.lambda_max()).epsilon(1e-14));
    const Field u = oracle::TrigPoly::random(17, 3, 5, 0.8).sample(p.grid());
    Field shifted = u;
    shifted.values() += 2.5;
    CHECK(I_map(p, shifted) == doctest::Approx(I_map(p, u)).epsilon(1e-13));
    const double lam = I_map(p, u);
    CHECK(lam > 0);
    CHECK(lam < -p.f0_min());
    CHECK(std::abs(constraint_value(p, lam, u)) < 1e-12);
    const MinimizeResult r = minimize(p, 0.3);
    CHECK(std::abs(I_map(p, r.u) - 0.3) < 1e-8);
  }

  TEST_CASE("eps* trivial cases") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(128));
    const ComparisonFn c = build_phi(p, 0.1);
    const EpsilonStar same = epsilon_star(c.field, c);
    CHECK(same.value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(same.in_window);

    const Field g = Field::from_function(p.grid(), [](double x, double) { return std::cos(2 * kPi * x); });
    Field orth = g;
    orth.values() -= inner_grad(g, c.field) / inner_grad(c.field, c.field) * c.field.values();
    const EpsilonStar zero = epsilon_star(orth, c);
    CHECK(std::abs(zero.value) < 1e-12);
    CHECK_FALSE(zero.in_window);
  }

  TEST_CASE("h machinery") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(128));
    const double lam = 0.05;
    const MinimizeResult r = solve_by_continuation(p, lam);
    REQUIRE(r.converged);
    const ComparisonFn c = build_phi(p, lam);
    const EpsilonStar e = epsilon_star(r.u, c);
    CHECK(e.in_window);
    const MonotonicityProbe pr = probe_h(p, lam, r.u, c, e.value, 10);
    REQUIRE(pr.h_samples.size() == 11);
    CHECK(std::abs(pr.h_samples[0].h - lam) < 1e-10);
    CHECK(pr.h_samples[0].h_prime > 0);
    CHECK(pr.min_h_prime > 0);
    CHECK(pr.max_fd_rel_error < 1e-5);
    CHECK(pr.max_identity_error < 1e-12);
    CHECK(pr.ell == pr.h_samples.back().h);
    CHECK(pr.ell > lam);
    for (std::size_t k = 1; k < pr.h_samples.size(); ++k) CHECK(pr.h_samples[k].h > pr.h_samples[k - 1].h);
  }

  TEST_CASE("empirical lambda_sigma") {
    CHECK(empirical_lambda_sigma({{0.3, 3.5}, {0.2, 2.9}, {0.1, 2.5}, {0.05, 2.4}}) == 0.2);
    CHECK(empirical_lambda_sigma({{0.3, 3.5}, {0.2, 3.1}, {0.1, 2.5}}) == 0.1);
    CHECK(empirical_lambda_sigma({{0.1, 3.5}, {0.05, 2.0}}) == 0.05);
    CHECK(empirical_lambda_sigma({{0.1, 2.0}, {0.05, 3.5}}) == 0.0);
    CHECK(empirical_lambda_sigma({{0.1, 2.0}, {0.2, 2.1}}, 0.05) == 0.1);
  }
}
