#include "curvtorus/spectral.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include <unsupported/Eigen/FFT>

namespace curvtorus {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::MeanNotZero: return "MeanNotZero";
    case ErrorCode::ChartTooLarge: return "ChartTooLarge";
    case ErrorCode::DegenerateMaximum: return "DegenerateMaximum";
    case ErrorCode::NotNonpositive: return "NotNonpositive";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::MaxIters: return "MaxIters";
    case ErrorCode::MultiplierNonpositive: return "MultiplierNonpositive";
    case ErrorCode::DivisionDegenerate: return "DivisionDegenerate";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::UnresolvedCore: return "UnresolvedCore";
    case ErrorCode::PeakTooWeak: return "PeakTooWeak";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Grid::Grid(int n) : n_(n) {
  if (n < 16 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "grid size must be a power of two >= 16, got " + std::to_string(n));
  }
}

Point periodic_delta(const Point& from, const Point& to) {
  Point d = to - from;
  for (int a = 0; a < 2; ++a) d[a] -= std::floor(d[a] + 0.5);
  return d;
}

double periodic_distance(const Point& a, const Point& b) { return periodic_delta(a, b).norm(); }

Point wrap_point(const Point& p) {
  Point q = p;
  for (int a = 0; a < 2; ++a) q[a] -= std::floor(q[a]);
  return q;
}

template <typename Scalar>
int BasicSpectralCoeffs<Scalar>::storage_index(int k) const {
  const int n = grid_.n();
  if (k < -n / 2 || k > n / 2) {
    throw Error(ErrorCode::InvalidArgument, "frequency out of range");
  }
  return (k + n) % n;
}

namespace {

template <typename Scalar>
using ComplexMatrix = typename BasicSpectralCoeffs<Scalar>::Matrix;

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine = [] {
    Eigen::FFT<Scalar> e;
    e.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    return e;
  }();
  return engine;
}

// In-place unnormalized 2D DFT of a square matrix.
template <typename Scalar>
void fft2(ComplexMatrix<Scalar>& data, bool backward) {
  using Complex = std::complex<Scalar>;
  auto& engine = fft_engine<Scalar>();
  const Eigen::Index n = data.rows();
  std::vector<Complex> in(n), out(n);
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index line = 0; line < n; ++line) {
      for (Eigen::Index t = 0; t < n; ++t) in[t] = pass == 0 ? data(t, line) : data(line, t);
      if (backward) {
        engine.inv(out, in);
      } else {
        engine.fwd(out, in);
      }
      for (Eigen::Index t = 0; t < n; ++t) {
        if (pass == 0) {
          data(t, line) = out[t];
        } else {
          data(line, t) = out[t];
        }
      }
    }
  }
}

template <typename Scalar>
ComplexMatrix<Scalar> forward_coeffs(const typename BasicField<Scalar>::Array& values) {
  const Eigen::Index n = values.rows();
  ComplexMatrix<Scalar> data = values.matrix().template cast<std::complex<Scalar>>();
  fft2<Scalar>(data, false);
  data /= static_cast<Scalar>(n * n);
  return data;
}

template <typename Scalar>
typename BasicField<Scalar>::Array backward_values(ComplexMatrix<Scalar> data) {
  fft2<Scalar>(data, true);
  return data.real().array();
}

int signed_frequency(int index, int n) { return index < n / 2 ? index : index - n; }

// For each source storage index, the (target index, weight) pairs it feeds when
// moving from n to m modes per axis. Nyquist modes are split on padding and
// folded on truncation so real fields stay real.
std::vector<std::vector<std::pair<int, double>>> axis_map(int n, int m) {
  std::vector<std::vector<std::pair<int, double>>> map(n);
  auto target = [m](int k) { return (k % m + m) % m; };
  for (int idx = 0; idx < n; ++idx) {
    const int k = signed_frequency(idx, n);
    if (m > n) {
      if (k == -n / 2) {
        map[idx] = {{target(-n / 2), 0.5}, {target(n / 2), 0.5}};
      } else {
        map[idx] = {{target(k), 1.0}};
      }
    } else if (m == n) {
      map[idx] = {{idx, 1.0}};
    } else {
      if (std::abs(k) < m / 2) {
        map[idx] = {{target(k), 1.0}};
      } else if (std::abs(k) == m / 2) {
        map[idx] = {{target(-m / 2), 1.0}};
      }
    }
  }
  return map;
}

template <typename Scalar>
ComplexMatrix<Scalar> change_modes(const ComplexMatrix<Scalar>& src, int m) {
  const int n = static_cast<int>(src.rows());
  const auto map = axis_map(n, m);
  ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Zero(m, m);
  for (int b = 0; b < n; ++b) {
    for (const auto& [tb, wb] : map[b]) {
      for (int a = 0; a < n; ++a) {
        for (const auto& [ta, wa] : map[a]) {
          out(ta, tb) += static_cast<Scalar>(wa * wb) * src(a, b);
        }
      }
    }
  }
  return out;
}

template <typename Scalar>
void require_finite(const BasicField<Scalar>& f, const char* what) {
  if (!f.all_finite()) throw Error(ErrorCode::NonFinite, std::string(what) + " has non-finite values");
}

template <typename Scalar>
void require_same_grid(const BasicField<Scalar>& f, const BasicField<Scalar>& g) {
  if (!(f.grid() == g.grid())) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

// |k|^2 * 4 pi^2 for storage indices (a, b).
template <typename Scalar>
Scalar laplace_symbol(int a, int b, int n) {
  const double k1 = signed_frequency(a, n);
  const double k2 = signed_frequency(b, n);
  return static_cast<Scalar>(4.0 * std::numbers::pi * std::numbers::pi * (k1 * k1 + k2 * k2));
}

template <typename Scalar>
Scalar clamped_exponent(Scalar arg, bool& capped) {
  if (arg > static_cast<Scalar>(kExpCap)) {
    capped = true;
    return static_cast<Scalar>(kExpCap);
  }
  return arg;
}

}  // namespace

template <typename Scalar>
BasicSpectralCoeffs<Scalar> transform(const BasicField<Scalar>& f) {
  require_finite(f, "transform input");
  return BasicSpectralCoeffs<Scalar>(f.grid(), forward_coeffs<Scalar>(f.values()));
}

template <typename Scalar>
BasicField<Scalar> inverse(const BasicSpectralCoeffs<Scalar>& c) {
  return BasicField<Scalar>(c.grid(), backward_values<Scalar>(c.data()));
}

template <typename Scalar>
BasicField<Scalar> laplacian(const BasicField<Scalar>& f) {
  auto c = transform(f);
  const int n = f.grid().n();
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) c.data()(a, b) *= -laplace_symbol<Scalar>(a, b, n);
  }
  return inverse(c);
}

template <typename Scalar>
BasicField<Scalar> solve_poisson(const BasicField<Scalar>& rhs, const PoissonOptions& opts) {
  auto c = transform(rhs);
  const Scalar m = c.data()(0, 0).real();
  if (opts.strict && std::abs(static_cast<double>(m)) > opts.mean_tol) {
    throw Error(ErrorCode::MeanNotZero, "right-hand side mean " + std::to_string(m) +
                                            " exceeds tolerance; the torus Poisson problem is not solvable");
  }
  const int n = rhs.grid().n();
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      if (a == 0 && b == 0) {
        c.data()(a, b) = 0;
      } else {
        c.data()(a, b) /= laplace_symbol<Scalar>(a, b, n);
      }
    }
  }
  return inverse(c);
}

template <typename Scalar>
std::array<BasicField<Scalar>, 2> gradient(const BasicField<Scalar>& f) {
  using Complex = std::complex<Scalar>;
  const auto c = transform(f);
  const int n = f.grid().n();
  auto dx = c.data();
  auto dy = c.data();
  const Scalar two_pi = static_cast<Scalar>(2.0 * std::numbers::pi);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const int k1 = signed_frequency(a, n);
      const int k2 = signed_frequency(b, n);
      dx(a, b) *= (a == n / 2) ? Complex(0) : Complex(0, two_pi * static_cast<Scalar>(k1));
      dy(a, b) *= (b == n / 2) ? Complex(0) : Complex(0, two_pi * static_cast<Scalar>(k2));
    }
  }
  return {inverse(BasicSpectralCoeffs<Scalar>(f.grid(), std::move(dx))),
          inverse(BasicSpectralCoeffs<Scalar>(f.grid(), std::move(dy)))};
}

template <typename Scalar>
Scalar inner_grad(const BasicField<Scalar>& f, const BasicField<Scalar>& g) {
  require_same_grid(f, g);
  const auto cf = transform(f);
  const auto cg = transform(g);
  const int n = f.grid().n();
  Scalar sum = 0;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      sum += laplace_symbol<Scalar>(a, b, n) * std::real(cf.data()(a, b) * std::conj(cg.data()(a, b)));
    }
  }
  return sum;
}

template <typename Scalar>
Scalar dirichlet_energy(const BasicField<Scalar>& f) {
  const auto c = transform(f);
  const int n = f.grid().n();
  Scalar sum = 0;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) sum += laplace_symbol<Scalar>(a, b, n) * std::norm(c.data()(a, b));
  }
  return sum;
}

template <typename Scalar>
Scalar mean(const BasicField<Scalar>& f) {
  return f.values().sum() / static_cast<Scalar>(f.grid().size());
}

template <typename Scalar>
Scalar integrate(const BasicField<Scalar>& f) {
  return mean(f);
}

template <typename Scalar>
Scalar inner(const BasicField<Scalar>& f, const BasicField<Scalar>& g) {
  require_same_grid(f, g);
  return (f.values() * g.values()).sum() / static_cast<Scalar>(f.grid().size());
}

template <typename Scalar>
Scalar h1_norm(const BasicField<Scalar>& f) {
  return std::sqrt(inner(f, f) + dirichlet_energy(f));
}

template <typename Scalar>
BasicExpIntegral<Scalar> integrate_exp_checked(const BasicField<Scalar>& f,
                                               const BasicField<Scalar>& weight) {
  require_same_grid(f, weight);
  bool capped = false;
  Scalar sum = 0;
  const auto& v = f.values();
  const auto& w = weight.values();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    sum += w(k) * std::exp(clamped_exponent<Scalar>(2 * v(k), capped));
  }
  return {sum / static_cast<Scalar>(f.grid().size()), capped};
}

template <typename Scalar>
Scalar integrate_exp(const BasicField<Scalar>& f, const BasicField<Scalar>& weight) {
  return integrate_exp_checked(f, weight).value;
}

template <typename Scalar>
BasicField<Scalar> exp2(const BasicField<Scalar>& f, Dealias mode, bool* capped) {
  bool hit = false;
  auto pointwise = [&hit](const typename BasicField<Scalar>::Array& v) {
    typename BasicField<Scalar>::Array out(v.rows(), v.cols());
    for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = std::exp(clamped_exponent<Scalar>(2 * v(k), hit));
    return out;
  };
  BasicField<Scalar> result(f.grid());
  if (mode == Dealias::none) {
    result.values() = pointwise(f.values());
  } else {
    const int n = f.grid().n();
    const int m = 3 * n / 2;
    const auto coarse = forward_coeffs<Scalar>(f.values());
    const auto fine_values = backward_values<Scalar>(change_modes<Scalar>(coarse, m));
    const auto fine_exp = forward_coeffs<Scalar>(pointwise(fine_values));
    result.values() = backward_values<Scalar>(change_modes<Scalar>(fine_exp, n));
  }
  if (capped != nullptr) *capped = hit;
  return result;
}

template <typename Scalar>
BasicField<Scalar> resample(const BasicField<Scalar>& f, const Grid& target) {
  if (f.grid() == target) return f;
  const auto c = forward_coeffs<Scalar>(f.values());
  return BasicField<Scalar>(target, backward_values<Scalar>(change_modes<Scalar>(c, target.n())));
}

template <typename Scalar>
BasicInterpolant<Scalar>::BasicInterpolant(const BasicField<Scalar>& f)
    : grid_(f.grid()), coeffs_(transform(f).data()) {}

template <typename Scalar>
Scalar BasicInterpolant<Scalar>::operator()(const Point& p) const {
  using Complex = std::complex<Scalar>;
  const int n = grid_.n();
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> ex(n), ey(n);
  for (int a = 0; a < n; ++a) {
    if (a == n / 2) {
      // symmetric Nyquist interpolant: cos(pi n x)
      ex(a) = Complex(static_cast<Scalar>(std::cos(std::numbers::pi * n * p.x())), 0);
      ey(a) = Complex(static_cast<Scalar>(std::cos(std::numbers::pi * n * p.y())), 0);
    } else {
      const double k = signed_frequency(a, n);
      const double tx = 2.0 * std::numbers::pi * k * p.x();
      const double ty = 2.0 * std::numbers::pi * k * p.y();
      ex(a) = Complex(static_cast<Scalar>(std::cos(tx)), static_cast<Scalar>(std::sin(tx)));
      ey(a) = Complex(static_cast<Scalar>(std::cos(ty)), static_cast<Scalar>(std::sin(ty)));
    }
  }
  const Complex value = ex.transpose() * (coeffs_ * ey);
  return value.real();
}

template <typename Scalar>
std::vector<Scalar> sample_rescaled(const BasicField<Scalar>& u, const Point& center, double r,
                                    std::span<const Point> offsets) {
  double reach = 0;
  for (const auto& x : offsets) reach = std::max(reach, x.norm());
  if (!(r > 0) || r * reach >= 0.25) {
    throw Error(ErrorCode::ChartTooLarge, "rescaled chart of radius " + std::to_string(r * reach) +
                                              " does not fit inside a fundamental domain (limit 0.25)");
  }
  const BasicInterpolant<Scalar> interp(u);
  std::vector<Scalar> out;
  out.reserve(offsets.size());
  for (const auto& x : offsets) out.push_back(interp(center + r * x));
  return out;
}

#define CURVTORUS_INSTANTIATE(S)                                                                    \
  template class BasicSpectralCoeffs<S>;                                                            \
  template class BasicInterpolant<S>;                                                               \
  template BasicSpectralCoeffs<S> transform(const BasicField<S>&);                                  \
  template BasicField<S> inverse(const BasicSpectralCoeffs<S>&);                                    \
  template BasicField<S> laplacian(const BasicField<S>&);                                           \
  template BasicField<S> solve_poisson(const BasicField<S>&, const PoissonOptions&);                \
  template std::array<BasicField<S>, 2> gradient(const BasicField<S>&);                             \
  template S dirichlet_energy(const BasicField<S>&);                                                \
  template S inner_grad(const BasicField<S>&, const BasicField<S>&);                                \
  template S mean(const BasicField<S>&);                                                            \
  template S integrate(const BasicField<S>&);                                                       \
  template S inner(const BasicField<S>&, const BasicField<S>&);                                     \
  template S h1_norm(const BasicField<S>&);                                                         \
  template S integrate_exp(const BasicField<S>&, const BasicField<S>&);                             \
  template BasicExpIntegral<S> integrate_exp_checked(const BasicField<S>&, const BasicField<S>&);   \
  template BasicField<S> exp2(const BasicField<S>&, Dealias, bool*);                                \
  template BasicField<S> resample(const BasicField<S>&, const Grid&);                               \
  template std::vector<S> sample_rescaled(const BasicField<S>&, const Point&, double,               \
                                          std::span<const Point>);

CURVTORUS_INSTANTIATE(float)
CURVTORUS_INSTANTIATE(double)

#undef CURVTORUS_INSTANTIATE

}  // namespace curvtorus
