#include "pta/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pta/observables.hpp"

namespace pta {

Vec rotating_planes_exact(const Vec& x0, double sigma) {
  if (x0.size() != 4) throw ContractError("rotating planes state has four components");
  if (std::abs(norm(x0) - 1.0) > 1e-9) throw ContractError("initial point must lie on the unit sphere");
  const Vec g{x0[2], x0[3], -x0[0], -x0[1]};
  return std::cos(sigma) * x0 + std::sin(sigma) * g;
}

namespace {

void require_case2(const SpringParams& p) {
  const double a1 = p.k1 / p.m1, a2 = p.k2 / p.m2;
  if (std::abs(a1 - a2) > 1e-12 * a1) throw ContractError("closed form needs k1/m1 == k2/m2");
  if (p.c1 != 0.0) throw ContractError("closed form assumes a fixed left wall");
}

}  // namespace

Case2Coefficients case2_coefficients(const SpringParams& p, const SpringICs& ic) {
  require_case2(p);
  Case2Coefficients c;
  const double m1 = p.m1, m2 = p.m2, eta = p.eta, c2 = p.c2;
  c.alpha = p.k1 / p.m1;
  const double disc = eta * eta * (m1 + m2) * (m1 + m2) - 4.0 * c.alpha * m1 * m1 * m2 * m2;
  if (disc <= 0.0) throw ContractError("closed form needs over-damped relative motion");
  c.p1 = (eta * (m1 + m2) + std::sqrt(disc)) / (2.0 * m1 * m2);
  c.p2 = (eta * (m1 + m2) - std::sqrt(disc)) / (2.0 * m1 * m2);
  const double sa = std::sqrt(c.alpha);
  c.C1 = (m1 * ic.x1 + m2 * ic.x2) / (m1 + m2);
  c.C2 = (m1 * ic.y1 + m2 * ic.y2 - c2 * m2) / (sa * (m1 + m2));
  // remaining pair from x2(0) and y2(0)
  const double S = ic.x2 - c.C1 + eta * c2 / p.k2;
  const double Q = c.C2 * sa + c2 - ic.y2;
  c.C3 = (Q - c.p2 * S) / (c.p1 - c.p2);
  c.C4 = (c.p1 * S - Q) / (c.p1 - c.p2);
  return c;
}

SpringsState springs_case2_exact(const SpringParams& p, const SpringICs& ic, double tau) {
  const Case2Coefficients c = case2_coefficients(p, ic);
  const double Ts = p.T_s, sa = std::sqrt(c.alpha), r = p.m2 / p.m1;
  const double cs = std::cos(sa * Ts * tau), sn = std::sin(sa * Ts * tau);
  const double e1 = std::exp(-c.p1 * Ts * tau), e2 = std::exp(-c.p2 * Ts * tau);
  const double osc = c.C1 * cs + c.C2 * sn;
  const double dosc = sa * (-c.C1 * sn + c.C2 * cs);
  SpringsState s;
  s.x1 = osc - r * (c.C3 * e1 + c.C4 * e2) + p.eta * p.c2 / p.k1;
  s.x2 = osc + c.C3 * e1 + c.C4 * e2 + p.c2 * Ts * tau - p.eta * p.c2 / p.k2;
  s.y1 = dosc + r * (c.p1 * c.C3 * e1 + c.p2 * c.C4 * e2);
  s.y2 = dosc - c.p1 * c.C3 * e1 - c.p2 * c.C4 * e2 + p.c2;
  s.w1 = 0.0;
  s.w2 = p.c2 * Ts * tau;
  return s;
}

std::array<double, 4> springs_case2_rates(const SpringParams& p, const SpringICs& ic, double tau) {
  const Case2Coefficients c = case2_coefficients(p, ic);
  const SpringsState s = springs_case2_exact(p, ic, tau);
  const double Ts = p.T_s, sa = std::sqrt(c.alpha), r = p.m2 / p.m1;
  const double cs = std::cos(sa * Ts * tau), sn = std::sin(sa * Ts * tau);
  const double e1 = std::exp(-c.p1 * Ts * tau), e2 = std::exp(-c.p2 * Ts * tau);
  const double ddosc = -c.alpha * (c.C1 * cs + c.C2 * sn);
  const double a1 = ddosc - r * (c.p1 * c.p1 * c.C3 * e1 + c.p2 * c.p2 * c.C4 * e2);
  const double a2 = ddosc + c.p1 * c.p1 * c.C3 * e1 + c.p2 * c.p2 * c.C4 * e2;
  return {Ts * s.y1, Ts * a1, Ts * s.y2, Ts * a2};
}

std::size_t case2_quadrature_points(const SpringParams& p, double delta, std::size_t n_quad) {
  const double periods = delta * std::sqrt(p.k1 / p.m1) * p.T_s / (2.0 * std::numbers::pi);
  auto n = std::max<std::size_t>(n_quad, static_cast<std::size_t>(std::ceil(64.0 * periods)));
  if (n % 2) ++n;
  return n;
}

SpringAverages springs_case2_averages(const SpringParams& p, const SpringICs& ic, double tau,
                                      double delta, std::size_t n_quad, bool nondimensionalize) {
  if (n_quad == 0 || n_quad % 2) throw ContractError("quadrature point count must be even");
  if (!(delta > 0.0)) throw ContractError("window must be positive");
  const Case2Coefficients c = case2_coefficients(p, ic);
  double kn = 1.0, rn = 1.0;
  if (nondimensionalize) {
    if (std::abs(c.C1) < 1e-300)
      throw NormalizationUndefined("C1 vanishes; nondimensional averages are undefined");
    kn = 0.5 * c.C1 * c.C1 * (p.k1 + p.k2);
    rn = c.C1 * p.k2;
  }
  const std::size_t n = case2_quadrature_points(p, delta, n_quad);
  const double dt = delta / static_cast<double>(n);
  std::vector<double> K(n + 1), U(n + 1), R(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const SpringsState s = springs_case2_exact(p, ic, tau - delta + static_cast<double>(i) * dt);
    K[i] = 0.5 * (p.m1 * s.y1 * s.y1 + p.m2 * s.y2 * s.y2);
    const double d1 = s.x1 - s.w1, d2 = s.x2 - s.w2;
    U[i] = 0.5 * p.k1 * d1 * d1 + 0.5 * p.k2 * d2 * d2;
    R[i] = -p.k2 * d2;
  }
  SpringAverages a;
  a.K = simpson_integrate(K, dt) / delta / kn;
  a.U = simpson_integrate(U, dt) / delta / kn;
  a.R2 = simpson_integrate(R, dt) / delta / rn;
  return a;
}

SpringsState tikhonov_limit(const SpringParams& p, double t) {
  SpringsState s;
  s.x2 = s.w2 = p.c2 * p.T_s * t;
  return s;
}

SpringsState quasistatic_solution(const SpringParams& p, double alpha0, double t) {
  const double beta = p.k1 / (p.eta * (1.0 + p.k1 / p.k2));
  const double e = std::exp(-beta * p.T_s * t);
  SpringsState s;
  s.x1 = p.c2 * p.eta / p.k1 + alpha0 * e;
  s.y1 = -alpha0 * beta * e;
  s.x2 = p.c2 * p.T_s * t - p.c2 * p.eta / p.k2 - (p.k1 / p.k2) * alpha0 * e;
  s.y2 = p.c2 - (p.k1 / p.k2) * alpha0 * beta * e;
  s.w2 = p.c2 * p.T_s * t;
  return s;
}

namespace {

enum class ModeKind { Real, RePart, ImPart };

struct ModeInfo {
  ModeKind kind;
  std::complex<double> lambda;
  std::array<std::complex<double>, 4> v;
};

std::array<std::complex<double>, 4> unit(const Eigen::Vector4cd& v) {
  const double n = v.norm();
  std::array<std::complex<double>, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = v(i) / n;
  return out;
}

}  // namespace

Eigenmodes unforced_eigenmodes(const SpringParams& p) {
  p.validate();
  Eigen::Matrix4d B;
  B << 0, 1, 0, 0,
      -p.k1 / p.m1, -p.eta / p.m1, 0, p.eta / p.m1,
      0, 0, 0, 1,
      0, p.eta / p.m2, -p.k2 / p.m2, -p.eta / p.m2;
  B *= p.T_s;
  Eigen::EigenSolver<Eigen::Matrix4d> es(B);
  if (es.info() != Eigen::Success) throw NumericError("eigen-decomposition failed");

  double scale = 0.0;
  for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(es.eigenvalues()(i)));
  const double tiny = 1e-9 * scale;

  std::vector<ModeInfo> reals, pairs;
  for (int i = 0; i < 4; ++i) {
    const auto lam = es.eigenvalues()(i);
    auto v = unit(es.eigenvectors().col(i));
    if (std::abs(lam.imag()) <= tiny) {
      double sgn = v[1].real() > 0.0 ? -1.0 : 1.0;
      for (auto& c : v) c = std::complex<double>(sgn * c.real(), 0.0);
      reals.push_back({ModeKind::Real, {lam.real(), 0.0}, v});
    } else if (lam.imag() > 0.0) {
      const std::complex<double> ph = std::abs(v[1]) > 0.0 ? std::conj(v[1]) / std::abs(v[1]) : 1.0;
      for (auto& c : v) c *= ph;
      pairs.push_back({ModeKind::RePart, lam, v});
    }
  }
  auto by_real = [](const ModeInfo& a, const ModeInfo& b) { return a.lambda.real() < b.lambda.real(); };
  std::sort(reals.begin(), reals.end(), by_real);
  std::sort(pairs.begin(), pairs.end(), by_real);

  std::vector<ModeInfo> order = reals;
  for (const auto& m : pairs) {
    order.push_back(m);
    ModeInfo im = m;
    im.kind = ModeKind::ImPart;
    im.lambda = std::conj(m.lambda);
    order.push_back(im);
  }
  if (order.size() != 4) throw NumericError("unexpected eigenvalue structure");

  Eigenmodes e;
  for (int j = 0; j < 4; ++j) {
    const auto& m = order[j];
    e.values[j] = m.lambda;
    e.vectors[j] = m.v;
    e.decaying[j] = m.lambda.real() < -tiny;
    e.neutral[j] = std::abs(m.lambda.real()) <= tiny;
    for (int i = 0; i < 4; ++i)
      e.modes0[j][i] = m.kind == ModeKind::ImPart ? m.v[i].imag() : m.v[i].real();
    e.undeformed[j] = std::abs(m.v[0] - m.v[2]) <= 1e-3 && std::abs(m.v[1] - m.v[3]) <= 1e-3;
  }
  return e;
}

std::array<double, 4> real_mode(const Eigenmodes& e, int j, double t) {
  if (j < 0 || j > 3) throw ContractError("mode index out of range");
  const double w = std::abs(e.values[j].imag());
  std::array<double, 4> out{};
  if (w == 0.0) {
    for (int i = 0; i < 4; ++i) out[i] = e.vectors[j][i].real();
    return out;
  }
  const bool im = e.values[j].imag() < 0.0;
  const std::complex<double> rot(std::cos(w * t), std::sin(w * t));
  for (int i = 0; i < 4; ++i) {
    const auto z = e.vectors[j][i] * rot;
    out[i] = im ? z.imag() : z.real();
  }
  return out;
}

std::array<double, 4> modal_coefficients(const Eigenmodes& e, const std::array<double, 4>& x0) {
  Eigen::Matrix4d M;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) M(i, j) = e.modes0[j][i];
  Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
  if (!lu.isInvertible()) throw NumericError("real modes are linearly dependent");
  const Eigen::Vector4d k = lu.solve(Eigen::Vector4d(x0[0], x0[1], x0[2], x0[3]));
  return {k(0), k(1), k(2), k(3)};
}

}  // namespace pta
