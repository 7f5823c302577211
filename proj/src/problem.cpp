#include "curvtorus/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace curvtorus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Jet {
  double value;
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
};

Jet cosine_jet(double a, const Point& p) {
  const double cx = std::cos(kTwoPi * p.x()), cy = std::cos(kTwoPi * p.y());
  const double sx = std::sin(kTwoPi * p.x()), sy = std::sin(kTwoPi * p.y());
  Jet j;
  j.value = a * (cx + cy - 2.0);
  j.grad = -kTwoPi * a * Eigen::Vector2d(sx, sy);
  j.hess = Eigen::Matrix2d::Zero();
  j.hess(0, 0) = -kTwoPi * kTwoPi * a * cx;
  j.hess(1, 1) = -kTwoPi * kTwoPi * a * cy;
  return j;
}

Jet bump_factor(const Point& center, const Point& p) {
  const double tx = kTwoPi * (p.x() - center.x()), ty = kTwoPi * (p.y() - center.y());
  Jet q;
  q.value = 0.5 * (2.0 - std::cos(tx) - std::cos(ty));
  q.grad = std::numbers::pi * Eigen::Vector2d(std::sin(tx), std::sin(ty));
  q.hess = Eigen::Matrix2d::Zero();
  q.hess(0, 0) = 2.0 * std::numbers::pi * std::numbers::pi * std::cos(tx);
  q.hess(1, 1) = 2.0 * std::numbers::pi * std::numbers::pi * std::cos(ty);
  return q;
}

Jet multibump_jet(const MultiBumpFamily& fam, const Point& p) {
  const std::size_t m = fam.centers.size();
  std::vector<Jet> q;
  q.reserve(m);
  for (const auto& c : fam.centers) q.push_back(bump_factor(c, p));
  auto product_except = [&](std::size_t skip1, std::size_t skip2) {
    double prod = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != skip1 && k != skip2) prod *= q[k].value;
    }
    return prod;
  };
  Jet j;
  j.value = product_except(m, m);
  j.grad = Eigen::Vector2d::Zero();
  j.hess = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const double others = product_except(i, m);
    j.grad += q[i].grad * others;
    j.hess += q[i].hess * others;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != i) j.hess += q[i].grad * q[k].grad.transpose() * product_except(i, k);
    }
  }
  j.value *= -fam.a;
  j.grad *= -fam.a;
  j.hess *= -fam.a;
  return j;
}

// Least-squares quadratic through the 3x3 stencil around (i, j) of a
// tabulated field; returns the jet at the stencil center.
Jet stencil_jet(const Field& f, int i, int j) {
  const int n = f.grid().n();
  const double h = f.grid().spacing();
  auto at = [&](int di, int dj) { return f((i + di + n) % n, (j + dj + n) % n); };
  Jet jet;
  jet.value = at(0, 0);
  jet.grad = Eigen::Vector2d((at(1, 0) - at(-1, 0)) / (2 * h), (at(0, 1) - at(0, -1)) / (2 * h));
  jet.hess(0, 0) = (at(1, 0) - 2 * at(0, 0) + at(-1, 0)) / (h * h);
  jet.hess(1, 1) = (at(0, 1) - 2 * at(0, 0) + at(0, -1)) / (h * h);
  jet.hess(0, 1) = jet.hess(1, 0) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
  return jet;
}

void validate_family(const F0Family& family) {
  if (const auto* c = std::get_if<CosineFamily>(&family)) {
    if (!(c->a > 0) || !std::isfinite(c->a)) {
      throw Error(ErrorCode::InvalidArgument, "cosine amplitude must be positive");
    }
  } else if (const auto* m = std::get_if<MultiBumpFamily>(&family)) {
    if (m->centers.empty()) throw Error(ErrorCode::InvalidArgument, "multi-bump family needs a center");
    if (!(m->a > 0) || !std::isfinite(m->a)) {
      throw Error(ErrorCode::InvalidArgument, "multi-bump amplitude must be positive");
    }
  } else {
    const auto& t = std::get<TabulatedFamily>(family);
    if (!t.values.all_finite()) throw Error(ErrorCode::NonFinite, "tabulated datum has non-finite values");
  }
}

// Grid points that are >= all 8 neighbours and lie near the global maximum.
std::vector<std::pair<int, int>> grid_local_maxima(const Field& f) {
  const int n = f.grid().n();
  const double top = f.max();
  const double spread = std::max(top - f.min(), 1e-300);
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = f(i, j);
      if (v < top - 0.05 * spread) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if ((di || dj) && f((i + di + n) % n, (j + dj + n) % n) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace

std::string describe(const F0Family& family) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* c = std::get_if<CosineFamily>(&family)) {
    os << "cosine:" << c->a;
  } else if (const auto* m = std::get_if<MultiBumpFamily>(&family)) {
    os << "multibump:" << m->a;
    for (const auto& p : m->centers) os << ':' << p.x() << ',' << p.y();
  } else {
    const auto& t = std::get<TabulatedFamily>(family);
    os << "tabulated:" << t.source;
  }
  return os.str();
}

double Problem::f0_at(const Point& p) const {
  if (const auto* c = std::get_if<CosineFamily>(family_.get())) return cosine_jet(c->a, p).value;
  if (const auto* m = std::get_if<MultiBumpFamily>(family_.get())) return multibump_jet(*m, p).value;
  return (*interp_)(wrap_point(p));
}

Eigen::Vector2d Problem::f0_gradient_at(const Point& p) const {
  if (const auto* c = std::get_if<CosineFamily>(family_.get())) return cosine_jet(c->a, p).grad;
  if (const auto* m = std::get_if<MultiBumpFamily>(family_.get())) return multibump_jet(*m, p).grad;
  const Point q = wrap_point(p);
  return {(*derivs_)[0](q), (*derivs_)[1](q)};
}

Eigen::Matrix2d Problem::f0_hessian_at(const Point& p) const {
  if (const auto* c = std::get_if<CosineFamily>(family_.get())) return cosine_jet(c->a, p).hess;
  if (const auto* m = std::get_if<MultiBumpFamily>(family_.get())) return multibump_jet(*m, p).hess;
  const Point q = wrap_point(p);
  Eigen::Matrix2d H;
  H(0, 0) = (*derivs_)[2](q);
  H(0, 1) = H(1, 0) = (*derivs_)[3](q);
  H(1, 1) = (*derivs_)[4](q);
  return H;
}

Problem Problem::on_grid(const Grid& grid) const {
  if (grid == this->grid()) return *this;
  if (const auto* t = std::get_if<TabulatedFamily>(family_.get())) {
    return build_problem(TabulatedFamily{resample(t->values, grid), t->source}, grid, options_);
  }
  return build_problem(*family_, grid, options_);
}

Problem build_problem(const F0Family& family, const Grid& grid, const ProblemOptions& opts) {
  validate_family(family);
  auto shared = std::make_shared<const F0Family>(family);
  Field f0{grid};
  bool tabulated = false;
  if (const auto* c = std::get_if<CosineFamily>(&family)) {
    f0 = Field::from_function(grid, [&](double x, double y) { return cosine_jet(c->a, {x, y}).value; });
  } else if (const auto* m = std::get_if<MultiBumpFamily>(&family)) {
    f0 = Field::from_function(grid, [&](double x, double y) { return multibump_jet(*m, {x, y}).value; });
  } else {
    const auto& t = std::get<TabulatedFamily>(family);
    f0 = t.values.grid() == grid ? t.values : resample(t.values, grid);
    tabulated = true;
  }

  Problem prob(shared, f0);
  prob.mode_ = opts.mode;
  prob.options_ = opts;
  prob.f0_bar_ = mean(f0);
  prob.f0_min_ = f0.min();
  if (tabulated) {
    prob.interp_ = std::make_shared<const Interpolant>(f0);
    const auto g1 = gradient(f0);
    const auto gx = gradient(g1[0]);
    const auto gy = gradient(g1[1]);
    prob.derivs_ = std::make_shared<const std::vector<Interpolant>>(
        std::vector<Interpolant>{Interpolant(g1[0]), Interpolant(g1[1]), Interpolant(gx[0]), Interpolant(gx[1]),
                                 Interpolant(gy[1])});
  }

  // Maxima: grid scan, then two Newton steps on the closed form (or a single
  // quadratic-fit step for tabulated data).
  const double h = grid.spacing();
  for (const auto& [i, j] : grid_local_maxima(f0)) {
    Point p = grid.point(i, j);
    Eigen::Matrix2d H;
    if (tabulated) {
      const Jet jet = stencil_jet(f0, i, j);
      H = jet.hess;
      if (std::abs(H.determinant()) > 0) {
        const Eigen::Vector2d step = -(H.inverse() * jet.grad);
        if (step.norm() <= h) p += step;
      }
      p = wrap_point(p);
      H = prob.f0_hessian_at(p);
    } else {
      for (int it = 0; it < 2; ++it) {
        const Eigen::Vector2d g = prob.f0_gradient_at(p);
        H = prob.f0_hessian_at(p);
        if (std::abs(H.determinant()) > 1e-300) {
          const Eigen::Vector2d step = -(H.inverse() * g);
          if (step.norm() <= 2 * h) p += step;
        }
      }
      p = wrap_point(p);
      H = prob.f0_hessian_at(p);
    }
    const double value = prob.f0_at(p);
    bool duplicate = false;
    for (const auto& mx : prob.maxima_) {
      if (periodic_distance(mx.p, p) < 1.5 * h) duplicate = true;
    }
    if (!duplicate) prob.maxima_.push_back({p, value, H});
  }
  // Keep the global maxima only; the rest are lower local bumps.
  if (!prob.maxima_.empty()) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& mx : prob.maxima_) top = std::max(top, mx.value);
    const double tol = std::max(1e-8, 1e-6 * f0.sup_norm());
    std::erase_if(prob.maxima_, [&](const Maximum& mx) { return mx.value < top - tol; });
    std::sort(prob.maxima_.begin(), prob.maxima_.end(), [](const Maximum& a, const Maximum& b) {
      return a.p.x() != b.p.x() ? a.p.x() < b.p.x() : a.p.y() < b.p.y();
    });
  }

  if (opts.mode != ValidationMode::unchecked) {
    const double top = prob.maxima_.empty() ? f0.max() : prob.maxima_.front().value;
    const double slack = tabulated ? std::max(opts.f0_tol, 1e-6 * f0.sup_norm()) : opts.f0_tol;
    if (top > slack || f0.max() > slack) {
      throw Error(ErrorCode::NotNonpositive, "max f0 = " + std::to_string(std::max(top, f0.max())) +
                                                 " exceeds tolerance; the datum must be <= 0");
    }
    if (std::abs(top) > std::max(slack, 1e-6 * f0.sup_norm())) {
      throw Error(ErrorCode::NotNonpositive,
                  "max f0 = " + std::to_string(top) + " is not zero; the datum must attain 0");
    }
    if (!(prob.f0_bar_ < 0)) throw Error(ErrorCode::InvalidArgument, "f0 must have negative mean");
    if (opts.mode == ValidationMode::strict) {
      for (const auto& mx : prob.maxima_) {
        const Eigen::Vector2d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(mx.hessian).eigenvalues();
        if (eig.maxCoeff() > -opts.hess_tol) {
          std::ostringstream os;
          os << "maximum at (" << mx.p.x() << ", " << mx.p.y() << ") has Hessian eigenvalues " << eig(0) << ", "
             << eig(1);
          throw Error(ErrorCode::DegenerateMaximum, os.str());
        }
      }
    }
  }

  prob.L_ = std::numeric_limits<double>::quiet_NaN();
  if (!prob.maxima_.empty() && prob.f0_min_ < 0) {
    if (opts.mode == ValidationMode::strict) {
      prob.L_ = compute_L(prob).L;
    } else {
      try {
        prob.L_ = compute_L(prob).L;
      } catch (const Error&) {
      }
    }
  }
  return prob;
}

Field f_lambda(const Problem& p, double lambda) {
  Field f = p.f0();
  f.values() += lambda;
  return f;
}

LConstant compute_L(const Problem& p) {
  if (p.maxima().empty()) throw Error(ErrorCode::InvalidArgument, "no maxima to build L from");
  double c1 = 0, c2 = 0;
  constexpr int kAngles = 64, kRadii = 50;
  for (const auto& mx : p.maxima()) {
    const Eigen::Vector2d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(mx.hessian).eigenvalues();
    c1 = std::max(c1, 0.5 * std::abs(eig.minCoeff()));
    // Remainder below the quadratic model, per |x|^3, on the punctured unit disc.
    double worst = 0;
    for (int k = 1; k <= kRadii; ++k) {
      const double r = static_cast<double>(k) / kRadii;
      for (int a = 0; a < kAngles; ++a) {
        const double th = kTwoPi * a / kAngles;
        const Eigen::Vector2d x(r * std::cos(th), r * std::sin(th));
        const double quad = 0.5 * x.dot(mx.hessian * x);
        const double deficit = quad - (p.f0_at(mx.p + x) - mx.value);
        worst = std::max(worst, deficit / (r * r * r));
      }
    }
    c2 = std::max(c2, 1.5 * worst);
  }
  const double c = std::max(c1, c2);
  const double L = std::max(2.0 * std::sqrt(c), std::sqrt(-p.f0_min()) * (1.0 + 1e-3));

  // Sampled check of f0 > -lambda/2 on B(p, sqrt(lambda)/L).
  const double lam_hi = -p.f0_min();
  for (double frac : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 0.9, 0.999}) {
    const double lam = frac * lam_hi;
    const double rad = std::sqrt(lam) / L;
    if (!(rad < 1.0)) throw Error(ErrorCode::VerificationFailed, "sqrt(lambda)/L >= 1");
    for (const auto& mx : p.maxima()) {
      for (int k = 0; k <= 16; ++k) {
        const double r = rad * k / 16.0;
        for (int a = 0; a < 32; ++a) {
          const double th = kTwoPi * a / 32;
          const double v = p.f0_at(mx.p + Eigen::Vector2d(r * std::cos(th), r * std::sin(th)));
          if (!(v > -lam / 2)) {
            std::ostringstream os;
            os << "f0 = " << v << " <= -lambda/2 at distance " << r << " for lambda = " << lam << " with L = " << L;
            throw Error(ErrorCode::VerificationFailed, os.str());
          }
        }
      }
    }
  }
  return {L, c1, c2};
}

ExpIntegral constraint_value_checked(const Problem& p, double lambda, const Field& u) {
  return integrate_exp_checked(u, f_lambda(p, lambda));
}

double constraint_value(const Problem& p, double lambda, const Field& u) {
  return constraint_value_checked(p, lambda, u).value;
}

bool admissible_lambda(const Problem& p, double lambda) {
  return std::isfinite(lambda) && p.f0_bar() + lambda < 0 && p.f0().max() + lambda > 0;
}

}  // namespace curvtorus
