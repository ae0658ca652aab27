#pragma once

#include <array>
#include <complex>

#include "pta/core.hpp"
#include "pta/springs.hpp"

namespace pta {

// Exact fast-time solution of the rotating-planes system on the unit sphere.
Vec rotating_planes_exact(const Vec& x0, double sigma);

struct SpringICs {
  double x1 = 0.0;
  double x2 = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
};

struct Case2Coefficients {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
  double p1 = 0.0, p2 = 0.0;  // decay rates per unit dimensional time
  double alpha = 0.0;         // k1/m1 = k2/m2
};

// State (x1, y1, x2, y2) plus walls (w1, w2); tau is slow time since the IC.
struct SpringsState {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0, w1 = 0.0, w2 = 0.0;
};

Case2Coefficients case2_coefficients(const SpringParams& p, const SpringICs& ic);
SpringsState springs_case2_exact(const SpringParams& p, const SpringICs& ic, double tau);
// slow-time derivatives of (x1, y1, x2, y2)
std::array<double, 4> springs_case2_rates(const SpringParams& p, const SpringICs& ic, double tau);

struct SpringAverages {
  double K = 0.0;
  double U = 0.0;
  double R2 = 0.0;
};

// Window means over [tau - delta, tau] by composite Simpson. The point count
// is raised above n_quad when needed to resolve the spring oscillation.
SpringAverages springs_case2_averages(const SpringParams& p, const SpringICs& ic, double tau,
                                      double delta, std::size_t n_quad = 20000,
                                      bool nondimensionalize = true);
std::size_t case2_quadrature_points(const SpringParams& p, double delta, std::size_t n_quad);

SpringsState tikhonov_limit(const SpringParams& p, double t);
SpringsState quasistatic_solution(const SpringParams& p, double alpha0, double t);

struct Eigenmodes {
  std::array<std::complex<double>, 4> values;  // ordered as the real modes
  // real modes at t = 0 as rows; mode j at time t is built by real_mode()
  std::array<std::array<double, 4>, 4> modes0;
  std::array<std::array<std::complex<double>, 4>, 4> vectors;
  std::array<bool, 4> decaying{};
  std::array<bool, 4> neutral{};
  std::array<bool, 4> undeformed{};
};

Eigenmodes unforced_eigenmodes(const SpringParams& p);
// j-th real mode without its exponential envelope, at slow time t
std::array<double, 4> real_mode(const Eigenmodes& e, int j, double t);
// x0 = sum kappa_j M_j(0)
std::array<double, 4> modal_coefficients(const Eigenmodes& e, const std::array<double, 4>& x0);

}  // namespace pta
