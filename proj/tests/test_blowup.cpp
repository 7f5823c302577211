#include <doctest.h>

#include <cmath>

#include "curvtorus/blowup.hpp"
#include "curvtorus/continuation.hpp"
#include "oracles.hpp"

using namespace curvtorus;
using oracle::kPi;

namespace {

double radius_of(const Point& q) { return periodic_distance(q, {0, 0}); }

// profile(rho) pasted around the origin, constant beyond `outer`.
Field pasted(const Grid& g, const std::function<double(double)>& profile, double inner, double outer) {
  const double far = profile(outer);
  return Field::from_function(g, [&](double x, double y) {
    const double rho = radius_of({x, y});
    const double chi = 1 - oracle::smooth_step((rho - inner) / (outer - inner));
    return chi * (rho < outer ? profile(rho) : far) + (1 - chi) * far;
  });
}

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

TEST_SUITE("blowup") {
  TEST_CASE("model identity") {
    // w = log(2/(1+r^2)): w' = -2r/(1+r^2), w'' = (2r^2-2)/(1+r^2)^2
    for (double r : {0.1, 0.5, 1.0, 1.7, 3.0, 10.0}) {
      const double d = 1 + r * r;
      const double lap = (2 * r * r - 2) / (d * d) + (-2 * r / d) / r;
      CHECK(std::abs(-lap - std::exp(2 * bubble_model(r))) < 1e-10);
    }
    CHECK(bubble_model(0) == std::log(2.0));
  }

  TEST_CASE("radial profile reproduces the bubble") {
    std::vector<double> radii;
    for (int k = 0; k <= 40; ++k) radii.push_back(0.1 * k);
    const auto w = radial_profile(std::log(2.0), 0.0, radii);
    for (std::size_t k = 0; k < radii.size(); ++k) CHECK(std::abs(w[k] - bubble_model(radii[k])) < 1e-9);
    // against the independent radial table with a curvature gradient
    const auto table = oracle::radial_solve(-0.5, -3.0, 2.0);
    const auto v = radial_profile(-0.5, -3.0, radii);
    for (std::size_t k = 0; k <= 20; ++k) CHECK(std::abs(v[k] - table.at(radii[k])) < 1e-9);
  }

  TEST_CASE("peak detection") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(64));
    const Field hump = Field::from_function(p.grid(), [](double x, double y) { return std::cos(2 * kPi * x) + std::cos(2 * kPi * y); });
    const auto one = locate_peaks(hump, p);
    REQUIRE(one.size() == 1);
    CHECK(radius_of(one[0].p) < 1e-12);
    CHECK(one[0].value == doctest::Approx(2.0));
    CHECK(one[0].dist_to_f0max < 1e-12);

    const Field two = Field::from_function(p.grid(), [](double x, double y) {
      const double a = radius_of({x, y}), b = periodic_distance({x, y}, {0.5, 0.5});
      return 3 * std::exp(-a * a / 0.01) + 2.5 * std::exp(-b * b / 0.01);
    });
    const auto pk = locate_peaks(two, p);
    REQUIRE(pk.size() == 2);
    CHECK(pk[0].value > pk[1].value);
    CHECK(periodic_distance(pk[1].p, {0.5, 0.5}) < 1e-3);
    CHECK(pk[1].dist_to_f0max == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
    CHECK(locate_peaks(Field::constant(p.grid(), 5.0), p).empty());
  }

  TEST_CASE("synthetic exact bubble") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(256));
    const double s = 0.02, lam = 1.0;
    const Field u = pasted(p.grid(), [s](double rho) { return std::log(2 * s / (s * s + rho * rho)); }, 0.15, 0.4);
    const Peak peak{{0, 0}, u(0, 0), 0, std::nan("")};
    const BubbleReport b = classify_and_rescale(p, u, lam, peak);
    CHECK(b.regime == 1);
    CHECK(b.r_n == doctest::Approx(s).epsilon(1e-12));
    CHECK(b.sup_dev < 1e-3);
    CHECK(b.rescaled_residual < 1e-3);
    CHECK(b.profile.front().radius == 0);
    CHECK(b.profile.front().w_n == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(b.mass_radius == doctest::Approx(10 * s));
    // bubble area over B(10 s) is 4 pi (1 - 1/101), weighted by f_lambda <= 1
    CHECK(b.local_mass > 0.9 * 4 * kPi * (1 - 1.0 / 101));
    CHECK(b.local_mass < 4 * kPi);
  }

  TEST_CASE("local mass grows with the radius") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(128));
    const Field u = pasted(p.grid(), [](double rho) { return std::log(0.1 / (0.0025 + rho * rho)); }, 0.15, 0.4);
    double last = 0;
    for (double r : {0.01, 0.02, 0.05, 0.1, 0.2, 0.24}) {
      const double m = local_mass(p, u, 0.3, {0, 0}, r);
      CHECK(m >= last);
      last = m;
    }
    CHECK(error_code([&] { local_mass(p, u, 0.3, {0, 0}, 0.3); }) == ErrorCode::ChartTooLarge);
  }

  TEST_CASE("regime 2 on a synthetic limit profile") {
    // a flat datum keeps K = 1 + (Ax,x) positive out to |x| ~ 1, so the limit
    // profile exists far enough to be pasted smoothly
    const Problem p = build_problem(CosineFamily{0.05}, Grid(256));
    const double lam = 0.01, r = 0.1, w0 = -2.0;
    const double k = -2 * kPi * kPi * 0.05;  // Hess f0 = -4 pi^2 a I, A = Hess / 2, k = tr(A) / 2
    const auto table = oracle::radial_solve(w0, k, 4.6);
    const Field u = pasted(p.grid(), [&](double rho) { return table.at(rho / r) - std::log(lam); }, 0.22, 0.45);
    const Peak peak{{0, 0}, u(0, 0), 0, std::nan("")};
    BubbleOptions opts;
    opts.R = 2.0;
    const BubbleReport b = classify_and_rescale(p, u, lam, peak, opts);
    CHECK(b.regime == 2);
    CHECK(b.r_n == doctest::Approx(r).epsilon(1e-14));
    CHECK(std::abs(b.c_fit) < 1e-4);
    CHECK(b.rescaled_residual < 1e-3);
    CHECK(b.sup_dev < 1e-3);
  }

  TEST_CASE("classification guards") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(64));
    const Field flat = Field::constant(p.grid(), 1.0);
    CHECK(error_code([&] { classify_and_rescale(p, flat, 0.1, {{0, 0}, 1.0, 0, 0}); }) == ErrorCode::PeakTooWeak);
    const Field high = Field::constant(p.grid(), 3.0);
    BubbleOptions wide;
    wide.R = 10;
    // regime 2 radius sqrt(0.5) times R is far beyond a chart
    CHECK(error_code([&] { classify_and_rescale(p, high, 0.5, {{0, 0}, 3.0, 0, 0}, wide); }) == ErrorCode::ChartTooLarge);
  }

  TEST_CASE("dichotomy on synthetic trends") {
    std::vector<DichotomySample> down, level, wobble;
    for (double lam : {0.2, 0.1, 0.05, 0.02}) {
      down.push_back({lam, std::log(lam)});
      level.push_back({lam, -1.0 + 1e-3 * lam});
    }
    const DichotomyResult a = dichotomy_detect(down);
    CHECK(a.verdict == DichotomyCase::case_i);
    for (double sl : a.slopes) CHECK(sl == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(dichotomy_detect(level).verdict == DichotomyCase::case_ii);
    wobble = {{0.2, 0.0}, {0.1, -1.0}, {0.05, 0.5}};
    CHECK(dichotomy_detect(wobble).verdict == DichotomyCase::inconclusive);
    CHECK_THROWS_AS(dichotomy_detect({{0.2, 0.0}, {0.1, 1.0}}), Error);
    CHECK(to_string(DichotomyCase::case_ii) == "case_ii");
  }

  TEST_CASE("minimum away from the maxima") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(64));
    const Field hump = Field::from_function(p.grid(), [](double x, double y) { return std::cos(2 * kPi * x) + std::cos(2 * kPi * y); });
    CHECK(omega_min(hump, p) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(omega_min(hump, p, 0.9), Error);
  }

  TEST_CASE("peaks of a computed solution sit where f_lambda is nonnegative") {
    const Problem p = build_problem(CosineFamily{0.5}, Grid(128));
    const double lam = 0.05;
    const MinimizeResult r = solve_by_continuation(p, lam);
    REQUIRE(r.converged);
    const auto peaks = locate_peaks(r.u, p);
    REQUIRE_FALSE(peaks.empty());
    for (const auto& pk : peaks) {
      CHECK(p.f0_at(pk.p) + lam >= -p.grid().spacing());
      CHECK(pk.dist_to_f0max <= 3 * std::sqrt(lam));
    }
  }
}
