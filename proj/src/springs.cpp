#include "pta/springs.hpp"

namespace pta {

void SpringParams::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  pos(k1, "k1");
  pos(k2, "k2");
  pos(m1, "m1");
  pos(m2, "m2");
  pos(T_s, "T_s");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be non-negative");
  if (!std::isfinite(c1) || !std::isfinite(c2)) throw ConfigError("wall speeds must be finite");
  if (!(T_f() < T_s)) throw ConfigError("T_s must exceed the fast period");
}

SpringsSystem::SpringsSystem(const SpringParams& p)
    : SlowFastSystem("springs", 4, 2, (p.validate(), p.epsilon())),
      p_(p),
      tf_(p.T_f()),
      r1_(p.k1 / p.m1),
      r2_(p.k2 / p.m2),
      e1_(p.eta / p.m1),
      e2_(p.eta / p.m2) {}

Vec SpringsSystem::distance_weights() const {
  const double w = 1.0 / std::sqrt(r1_);
  return Vec{1.0, w, 1.0, w};
}

void SpringsSystem::fast(const Vec& x, const Vec& l, Vec& out) const {
  out = Vec(4);
  out[0] = tf_ * x[1];
  out[1] = a1(x[0], x[1], x[3], l[0]);
  out[2] = tf_ * x[3];
  out[3] = a2(x[2], x[1], x[3], l[1]);
}

void SpringsSystem::load_rate(const Vec&, const Vec&, Vec& out) const {
  out = Vec{p_.T_s * p_.c1, p_.T_s * p_.c2};
}

void SpringsSystem::fine_rhs(const Vec& x, const Vec& l, double eps, bool frozen_load, Vec& dx,
                             Vec& dl) const {
  fast(x, l, dx);
  if (frozen_load || eps == 0.0)
    dl = Vec(2);
  else
    dl = Vec{eps * p_.T_s * p_.c1, eps * p_.T_s * p_.c2};
}

}  // namespace pta
