#pragma once

// Concentration analysis of solutions as lambda -> 0: peak detection,
// rescaling at the bubble scale (regime 1) or at sqrt(lambda) (regime 2),
// comparison with the model profiles, local curvature mass, and the
// local-lower-bound / minus-infinity dichotomy away from the maxima of f0.

#include <vector>

#include "curvtorus/problem.hpp"

namespace curvtorus {

struct Peak {
  Point p;
  double value;
  double dist_to_f0max;
  double f_lambda_at_peak;  // filled by classify; NaN from locate_peaks
};

struct PeakOptions {
  double prominence = 1.0;  // u(peak) - mean(u) threshold
  int max_peaks = 8;
};

std::vector<Peak> locate_peaks(const Field& u, const Problem& p, const PeakOptions& opts = {});

struct BubbleOptions {
  double regime_ratio = 0.2;
  double peak_min = 2.0;
  double R = 4.0;       // profile sampling radius in rescaled units
  double dev_R = 2.0;   // sup_dev and rescaled residual measured on |x| <= dev_R
  int rays = 8;
  int radii = 64;
  double mass_factor = 10.0;
};

struct ProfileSample {
  int ray;
  double radius;
  double w_n;
  double w_model;
};

struct BubbleReport {
  double lambda;
  Point p_n;
  double dist_to_f0max;
  double u_peak;
  double f_lambda_at_peak;
  int regime;
  double r_n;
  double scale_ratio;  // candidate bubble radius / sqrt(lambda)
  double c_fit;        // additive constant of the regime-2 rescaling, 0 in regime 1
  std::vector<ProfileSample> profile;
  double sup_dev;
  double local_mass;
  double mass_radius;
  double rescaled_residual;
};

// Regime 1: r = 2 e^{-u(p)} / sqrt(f_lambda(p)), w_n(x) = u(p + r x) - u(p) + log 2,
// model log(2/(1+|x|^2)), residual |lap w_n + e^{2 w_n}|.
// Regime 2: r = sqrt(lambda), w_n(x) = u(p + r x) + log(lambda) + c with c fitted
// by least squares against -lap w = (1 + (Ax,x)) e^{2w}, A = Hess f0(p)/2.
BubbleReport classify_and_rescale(const Problem& p, const Field& u, double lambda, const Peak& peak,
                                  const BubbleOptions& opts = {});

// int over B(center, radius) of f_lambda^+ e^{2u}; radius < 1/4.
double local_mass(const Problem& p, const Field& u, double lambda, const Point& center, double radius);

// Radial solution of -w'' - w'/rho = (1 + k rho^2) e^{2w}, w(0) = w0, w'(0) = 0,
// evaluated at the requested radii (ascending) with RK4.
std::vector<double> radial_profile(double w0, double k, const std::vector<double>& radii, int steps_per_unit = 2000);

// Bubble model log(2/(1+|x|^2)).
double bubble_model(double radius);

struct DichotomySample {
  double lambda;
  double min_omega;  // min of u over the set kept away from the maxima
};

enum class DichotomyCase { case_i, case_ii, inconclusive };
std::string_view to_string(DichotomyCase c);

struct DichotomyResult {
  DichotomyCase verdict;
  std::vector<double> slopes;  // d(min u) / d log(1/lambda) between consecutive samples
  double last_slope;
};

// min of u over grid points at periodic distance >= `distance` from every maximum.
double omega_min(const Field& u, const Problem& p, double distance = 0.25);

// case i: min u keeps decreasing with slope <= -0.1 in log(1/lambda);
// case ii: the last slope has magnitude below 0.1; otherwise inconclusive.
DichotomyResult dichotomy_detect(std::vector<DichotomySample> samples);

}  // namespace curvtorus
