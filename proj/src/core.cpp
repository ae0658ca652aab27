#include "pta/core.hpp"

#include <cmath>
#include <sstream>

namespace pta {

Vec::Vec(std::size_t n, double fill) : n_(n) {
  if (n > kMaxDim) throw ConfigError("vector dimension " + std::to_string(n) + " exceeds capacity");
  for (std::size_t i = 0; i < n; ++i) v_[i] = fill;
}

Vec::Vec(std::initializer_list<double> xs) : n_(xs.size()) {
  if (n_ > kMaxDim) throw ConfigError("vector dimension exceeds capacity");
  std::size_t i = 0;
  for (double x : xs) v_[i++] = x;
}

Vec Vec::from(std::span<const double> xs) {
  Vec v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = xs[i];
  return v;
}

Vec& Vec::operator+=(const Vec& o) {
  if (o.n_ != n_) throw ContractError("vector size mismatch");
  for (std::size_t i = 0; i < n_; ++i) v_[i] += o.v_[i];
  return *this;
}

Vec& Vec::operator-=(const Vec& o) {
  if (o.n_ != n_) throw ContractError("vector size mismatch");
  for (std::size_t i = 0; i < n_; ++i) v_[i] -= o.v_[i];
  return *this;
}

Vec& Vec::operator*=(double s) {
  for (std::size_t i = 0; i < n_; ++i) v_[i] *= s;
  return *this;
}

bool operator==(const Vec& a, const Vec& b) {
  if (a.n_ != b.n_) return false;
  for (std::size_t i = 0; i < a.n_; ++i)
    if (a.v_[i] != b.v_[i]) return false;
  return true;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ContractError("vector size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ContractError("vector size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

void validate(const Trajectory& tr, double rel_tol) {
  if (tr.samples.empty()) throw ContractError("empty trajectory");
  if (!(tr.dsigma > 0.0)) throw ContractError("trajectory step must be positive");
  const auto& first = tr.samples.front();
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const auto& s = tr.samples[i];
    if (s.x.size() != first.x.size() || s.l.size() != first.l.size())
      throw ContractError("trajectory dimension changes at sample " + std::to_string(i));
    const double gap = s.sigma - tr.samples[i - 1].sigma;
    if (std::abs(gap - tr.dsigma) > rel_tol * std::max(1.0, std::abs(s.sigma)))
      throw ContractError("non-uniform spacing at sample " + std::to_string(i));
  }
}

TimeScales TimeScales::make(double T_f, double T_s) {
  if (!(T_f > 0.0) || !(T_s > 0.0) || !std::isfinite(T_f) || !std::isfinite(T_s))
    throw ConfigError("time scales must be positive and finite");
  if (!(T_f < T_s)) throw ConfigError("fast time scale must be smaller than slow time scale");
  return {T_f, T_s};
}

SlowFastSystem::SlowFastSystem(std::string label, std::size_t n, std::size_t m, double epsilon)
    : label_(std::move(label)), n_(n), m_(m), eps_(epsilon) {
  if (n == 0 || n > kMaxDim || m > kMaxDim) throw ConfigError("bad system dimensions");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
}

void SlowFastSystem::drift(const Vec&, const Vec&, Vec& out) const { out = Vec(n_); }
void SlowFastSystem::load_rate(const Vec&, const Vec&, Vec& out) const { out = Vec(m_); }

void SlowFastSystem::fine_rhs(const Vec& x, const Vec& l, double eps, bool frozen_load, Vec& dx,
                              Vec& dl) const {
  fast(x, l, dx);
  if (eps != 0.0) {
    Vec g;
    drift(x, l, g);
    for (std::size_t i = 0; i < n_; ++i) dx[i] += eps * g[i];
  }
  if (frozen_load || eps == 0.0 || m_ == 0) {
    dl = Vec(m_);
  } else {
    load_rate(x, l, dl);
    dl *= eps;
  }
}

std::vector<std::string> SlowFastSystem::fast_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n_; ++i) out.push_back("x" + std::to_string(i + 1));
  return out;
}

std::vector<std::string> SlowFastSystem::load_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m_; ++i) out.push_back("l" + std::to_string(i + 1));
  return out;
}

FunctionSystem::FunctionSystem(std::string label, std::size_t n, std::size_t m, double epsilon,
                               VecMap F, VecMap G, VecMap L)
    : SlowFastSystem(std::move(label), n, m, epsilon),
      F_(std::move(F)),
      G_(std::move(G)),
      L_(std::move(L)) {
  if (!F_) throw ConfigError("fast map is required");
}

void FunctionSystem::fast(const Vec& x, const Vec& l, Vec& out) const { out = F_(x, l); }

void FunctionSystem::drift(const Vec& x, const Vec& l, Vec& out) const {
  if (G_)
    out = G_(x, l);
  else
    out = Vec(n());
}

void FunctionSystem::load_rate(const Vec& x, const Vec& l, Vec& out) const {
  if (L_)
    out = L_(x, l);
  else
    out = Vec(m());
}

namespace {

void check_dims(const SlowFastSystem& sys, const FineState& s) {
  if (s.x.size() != sys.n() || s.l.size() != sys.m()) {
    std::ostringstream os;
    os << "state dimension (" << s.x.size() << "," << s.l.size() << ") does not match system ("
       << sys.n() << "," << sys.m() << ")";
    throw ConfigError(os.str());
  }
}

void check_finite(const FineDerivative& d) {
  for (std::size_t i = 0; i < d.dx.size(); ++i)
    if (!std::isfinite(d.dx[i])) throw NumericError("non-finite derivative in dx[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < d.dl.size(); ++i)
    if (!std::isfinite(d.dl[i])) throw NumericError("non-finite derivative in dl[" + std::to_string(i) + "]");
}

FineDerivative eval(const SlowFastSystem& sys, const FineState& s, bool frozen) {
  check_dims(sys, s);
  FineDerivative d;
  sys.fine_rhs(s.x, s.l, sys.epsilon(), frozen, d.dx, d.dl);
  if (d.dx.size() != sys.n() || d.dl.size() != sys.m())
    throw ConfigError("system map returned wrong dimension");
  check_finite(d);
  return d;
}

}  // namespace

FineDerivative eval_fine_rhs(const SlowFastSystem& sys, const FineState& s) {
  return eval(sys, s, false);
}

FineDerivative eval_fine_rhs_frozen_load(const SlowFastSystem& sys, const FineState& s) {
  return eval(sys, s, true);
}

}  // namespace pta
