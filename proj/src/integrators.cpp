#include "pta/integrators.hpp"

#include <cmath>
#include <deque>

namespace pta {

IntegratorKind parse_integrator(const std::string& name) {
  if (name == "rk4") return IntegratorKind::RK4;
  if (name == "verlet" || name == "verlet_damped") return IntegratorKind::VerletDamped;
  throw ConfigError("unknown integrator '" + name + "'");
}

std::string to_string(IntegratorKind k) { return k == IntegratorKind::RK4 ? "rk4" : "verlet"; }

FineState rk4_step(const RhsFunction& rhs, const FineState& s, double dsigma) {
  Vec k1x, k1l, k2x, k2l, k3x, k3l, k4x, k4l;
  const double h2 = 0.5 * dsigma;
  rhs(s, k1x, k1l);
  FineState t{s.x + h2 * k1x, s.l + h2 * k1l, s.sigma + h2};
  rhs(t, k2x, k2l);
  t.x = s.x + h2 * k2x;
  t.l = s.l + h2 * k2l;
  rhs(t, k3x, k3l);
  t.x = s.x + dsigma * k3x;
  t.l = s.l + dsigma * k3l;
  t.sigma = s.sigma + dsigma;
  rhs(t, k4x, k4l);
  const double w = dsigma / 6.0;
  FineState out = s;
  for (std::size_t i = 0; i < s.x.size(); ++i)
    out.x[i] += w * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
  for (std::size_t i = 0; i < s.l.size(); ++i)
    out.l[i] += w * (k1l[i] + 2.0 * k2l[i] + 2.0 * k3l[i] + k4l[i]);
  out.sigma = s.sigma + dsigma;
  return out;
}

FineState verlet_damped_step(const SpringsSystem& sys, const FineState& s, double dsigma,
                             bool frozen_load) {
  const double tf = sys.T_f();
  const double x1 = s.x[0], y1 = s.x[1], x2 = s.x[2], y2 = s.x[3];
  const double w1 = s.l[0], w2 = s.l[1];
  const double d = dsigma, hd2 = 0.5 * dsigma * dsigma;

  const double a1 = sys.a1(x1, y1, y2, w1);
  const double a2 = sys.a2(x2, y1, y2, w2);
  const double nx1 = x1 + d * tf * y1 + hd2 * tf * a1;
  const double nx2 = x2 + d * tf * y2 + hd2 * tf * a2;
  const double py1 = y1 + d * a1, py2 = y2 + d * a2;
  const double hy1 = y1 + 0.5 * d * (a1 + sys.a1(nx1, py1, py2, w1));
  const double hy2 = y2 + 0.5 * d * (a2 + sys.a2(nx2, py1, py2, w2));
  const double ny1 = y1 + 0.5 * d * (a1 + sys.a1(nx1, hy1, hy2, w1));
  const double ny2 = y2 + 0.5 * d * (a2 + sys.a2(nx2, hy1, hy2, w2));

  FineState out = s;
  out.x[0] = nx1;
  out.x[1] = ny1;
  out.x[2] = nx2;
  out.x[3] = ny2;
  if (!frozen_load) {
    const auto& p = sys.params();
    out.l[0] = w1 + d * tf * p.c1;
    out.l[1] = w2 + d * tf * p.c2;
  }
  out.sigma = s.sigma + dsigma;
  return out;
}

Stepper::Stepper(IntegratorKind kind, const SlowFastSystem& sys, double dsigma, BurstOptions opts)
    : kind_(kind), sys_(&sys), dsigma_(dsigma), eps_(opts.zero_epsilon ? 0.0 : sys.epsilon()),
      opts_(opts) {
  if (!(dsigma > 0.0) || !std::isfinite(dsigma)) throw ConfigError("fine step must be positive");
  if (kind == IntegratorKind::VerletDamped) {
    springs_ = dynamic_cast<const SpringsSystem*>(&sys);
    if (!springs_) throw ConfigError("damped Verlet requires the two-spring system");
  }
}

void Stepper::rk4(FineState& s) const {
  const bool frozen = opts_.frozen_load;
  const double eps = eps_;
  const SlowFastSystem& sys = *sys_;
  const double h = dsigma_, h2 = 0.5 * dsigma_;
  Vec k1x, k1l, k2x, k2l, k3x, k3l, k4x, k4l;
  sys.fine_rhs(s.x, s.l, eps, frozen, k1x, k1l);
  Vec tx = s.x, tl = s.l;
  for (std::size_t i = 0; i < tx.size(); ++i) tx[i] += h2 * k1x[i];
  for (std::size_t i = 0; i < tl.size(); ++i) tl[i] += h2 * k1l[i];
  sys.fine_rhs(tx, tl, eps, frozen, k2x, k2l);
  for (std::size_t i = 0; i < tx.size(); ++i) tx[i] = s.x[i] + h2 * k2x[i];
  for (std::size_t i = 0; i < tl.size(); ++i) tl[i] = s.l[i] + h2 * k2l[i];
  sys.fine_rhs(tx, tl, eps, frozen, k3x, k3l);
  for (std::size_t i = 0; i < tx.size(); ++i) tx[i] = s.x[i] + h * k3x[i];
  for (std::size_t i = 0; i < tl.size(); ++i) tl[i] = s.l[i] + h * k3l[i];
  sys.fine_rhs(tx, tl, eps, frozen, k4x, k4l);
  const double w = h / 6.0;
  for (std::size_t i = 0; i < s.x.size(); ++i)
    s.x[i] += w * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
  for (std::size_t i = 0; i < s.l.size(); ++i)
    s.l[i] += w * (k1l[i] + 2.0 * k2l[i] + 2.0 * k3l[i] + k4l[i]);
  s.sigma += h;
}

void Stepper::verlet(FineState& s) const {
  s = verlet_damped_step(*springs_, s, dsigma_, opts_.frozen_load || opts_.zero_epsilon);
}

void Stepper::step(FineState& s) const {
  if (kind_ == IntegratorKind::RK4)
    rk4(s);
  else
    verlet(s);
  // decaying runs would otherwise crawl through subnormal arithmetic
  for (std::size_t i = 0; i < s.x.size(); ++i)
    if (std::abs(s.x[i]) < 1e-250) s.x[i] = 0.0;
  if (!all_finite(s.x) || !all_finite(s.l)) throw NumericError("non-finite state after fine step");
}

Trajectory integrate(IntegratorKind kind, const SlowFastSystem& sys, const FineState& s0,
                     double dsigma, std::size_t n_steps, const Sink& sink, BurstOptions opts) {
  if (s0.x.size() != sys.n() || s0.l.size() != sys.m())
    throw ConfigError("initial state dimension does not match system");
  if (sink.policy == SinkPolicy::KeepTail && sink.tail == 0)
    throw ConfigError("tail sink needs a positive length");
  Stepper stepper(kind, sys, dsigma, opts);
  Trajectory tr;
  tr.dsigma = dsigma;
  std::deque<FineState> tail;
  if (sink.policy == SinkPolicy::KeepAll) {
    tr.samples.reserve(n_steps + 1);
    tr.samples.push_back(s0);
  }
  FineState s = s0;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    try {
      stepper.step(s);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at step " + std::to_string(i));
    }
    s.sigma = s0.sigma + static_cast<double>(i) * dsigma;
    if (sink.on_sample) sink.on_sample(i, s);
    if (sink.policy == SinkPolicy::KeepAll) {
      tr.samples.push_back(s);
    } else if (sink.policy == SinkPolicy::KeepTail) {
      tail.push_back(s);
      if (tail.size() > sink.tail) tail.pop_front();
    }
  }
  if (sink.policy == SinkPolicy::KeepTail) {
    if (tail.empty()) tail.push_back(s0);
    tr.samples.assign(tail.begin(), tail.end());
  } else if (sink.policy == SinkPolicy::KeepNone) {
    tr.samples.push_back(s);
  }
  return tr;
}

}  // namespace pta
