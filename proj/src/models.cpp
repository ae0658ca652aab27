#include "pta/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pta {

RotatingPlanes::RotatingPlanes(double eps) : SlowFastSystem("rotating_planes", 4, 0, eps) {}

Vec gamma_map(const Vec& x) { return Vec{x[2], x[3], -x[0], -x[1]}; }

void RotatingPlanes::fast(const Vec& x, const Vec&, Vec& out) const {
  const double r = 1.0 - std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
  out = Vec{r * x[0] + x[2], r * x[1] + x[3], r * x[2] - x[0], r * x[3] - x[1]};
}

void RotatingPlanes::drift(const Vec& x, const Vec&, Vec& out) const {
  out = Vec{-x[1], x[0], 0.0, 0.0};
}

void RotatingPlanes::fine_rhs(const Vec& x, const Vec& l, double eps, bool, Vec& dx,
                              Vec& dl) const {
  fast(x, l, dx);
  dx[0] -= eps * x[1];
  dx[1] += eps * x[0];
  dl = Vec(0);
}

RelaxationOscillator::RelaxationOscillator(double eps) : SlowFastSystem("relaxation", 3, 1, eps) {}

void RelaxationOscillator::fast(const Vec& s, const Vec& l, Vec& out) const {
  const double y = s[0], z = s[1], w = s[2], x = l[0];
  const double u = z - y;
  const double q = 0.125 - w * w - u * u;
  out = Vec{-x + y - y * y * y, w + u * q, -u + w * q};
}

void RelaxationOscillator::load_rate(const Vec& s, const Vec&, Vec& out) const { out = Vec{s[1]}; }

void RelaxationOscillator::fine_rhs(const Vec& s, const Vec& l, double eps, bool frozen_load,
                                    Vec& dx, Vec& dl) const {
  fast(s, l, dx);
  dl = Vec{(frozen_load || eps == 0.0) ? 0.0 : eps * s[1]};
}

std::shared_ptr<SlowFastSystem> rotating_planes(double eps) {
  return std::make_shared<RotatingPlanes>(eps);
}

std::shared_ptr<SlowFastSystem> springs(const SpringParams& p) {
  return std::make_shared<SpringsSystem>(p);
}

std::shared_ptr<SlowFastSystem> relaxation_oscillator(double eps) {
  return std::make_shared<RelaxationOscillator>(eps);
}

std::vector<Measurement> rotating_planes_measurements() {
  std::vector<Measurement> ms;
  for (int i = 0; i < 4; ++i) {
    Measurement m;
    m.name = "x" + std::to_string(i + 1);
    m.f = [i](const Vec& x, const Vec&) { return x[i]; };
    m.match_floor = 1.0;
    m.abs_tol = 2e-2;
    ms.push_back(m);
  }
  for (int i = 0; i < 4; ++i) {
    Measurement m;
    m.name = "w" + std::to_string(i + 1);
    m.f = [i](const Vec& x, const Vec&) { return x[i] * x[i]; };
    m.match_floor = 0.1;
    ms.push_back(m);
  }
  return ms;
}

std::vector<Measurement> relaxation_measurements() {
  std::vector<Measurement> ms(3);
  ms[0].name = "y";
  ms[0].f = [](const Vec& x, const Vec&) { return x[0]; };
  ms[0].match_floor = 0.1;
  ms[1].name = "z";
  ms[1].f = [](const Vec& x, const Vec&) { return x[1]; };
  ms[1].match_floor = 0.1;
  ms[2].name = "w";
  ms[2].f = [](const Vec& x, const Vec&) { return x[2]; };
  ms[2].match_floor = 0.35;
  ms[2].abs_tol = 1e-2;
  return ms;
}

double kinetic_energy(const SpringParams& p, const Vec& x) {
  return 0.5 * (p.m1 * x[1] * x[1] + p.m2 * x[3] * x[3]);
}

double potential_energy(const SpringParams& p, const Vec& x, const Vec& l) {
  const double d1 = x[0] - l[0], d2 = x[2] - l[1];
  return 0.5 * p.k1 * d1 * d1 + 0.5 * p.k2 * d2 * d2;
}

double reaction_r2(const SpringParams& p, const Vec& x, const Vec& l) { return -p.k2 * (x[2] - l[1]); }

double dissipation(const SpringParams& p, const Vec& x) {
  const double d = x[3] - x[1];
  return p.eta * d * d;
}

double input_power(const SpringParams& p, const Vec& x, const Vec& l) {
  return -p.k1 * (x[0] - l[0]) * p.c1 + reaction_r2(p, x, l) * p.c2;
}

SpringScales spring_scales(const SpringParams& p, double x1_0, double x2_0) {
  SpringScales s;
  s.C1 = (p.m1 * x1_0 + p.m2 * x2_0) / (p.m1 + p.m2);
  s.K_max = 0.5 * s.C1 * s.C1 * (p.k1 + p.k2);
  s.R2_max = s.C1 * p.k2;
  return s;
}

std::vector<Measurement> springs_measurements(const SpringParams& p, double x1_0, double x2_0,
                                              bool nondimensionalize) {
  double kn = 1.0, rn = 1.0, efloor = 1e-2, rfloor = 1e-2;
  if (nondimensionalize) {
    const SpringScales s = spring_scales(p, x1_0, x2_0);
    if (std::abs(s.C1) < 1e-300)
      throw NormalizationUndefined("mass-weighted initial displacement is zero; "
                                   "set nondimensionalize = false");
    kn = s.K_max;
    rn = std::abs(s.R2_max);
  } else {
    const double e0 = 0.5 * p.k1 * x1_0 * x1_0 + 0.5 * p.k2 * x2_0 * x2_0;
    if (e0 > 0.0) {
      efloor = 1e-2 * e0;
      rfloor = 1e-2 * std::sqrt(2.0 * e0 * p.k2);
    }
  }
  std::vector<Measurement> ms(3);
  ms[0].name = "K";
  ms[0].f = [p](const Vec& x, const Vec&) { return kinetic_energy(p, x); };
  ms[0].normalization = kn;
  ms[0].match_floor = efloor;
  ms[1].name = "U";
  ms[1].f = [p](const Vec& x, const Vec& l) { return potential_energy(p, x, l); };
  ms[1].normalization = kn;
  ms[1].match_floor = efloor;
  ms[2].name = "R2";
  ms[2].f = [p](const Vec& x, const Vec& l) { return reaction_r2(p, x, l); };
  ms[2].normalization = rn;
  ms[2].match_floor = rfloor;
  return ms;
}

double power_balance_residual(const SpringParams& p, std::span<const FineState> window,
                              double dsigma) {
  if (window.size() < 3) throw ContractError("power balance needs at least three samples");
  const double dt = p.T_f() * dsigma;
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < window.size(); ++i) {
    const auto& a = window[i - 1];
    const auto& b = window[i + 1];
    const auto& s = window[i];
    const double ea = kinetic_energy(p, a.x) + potential_energy(p, a.x, a.l);
    const double eb = kinetic_energy(p, b.x) + potential_energy(p, b.x, b.l);
    const double dE = (eb - ea) / (2.0 * dt);
    acc += dE - (input_power(p, s.x, s.l) - dissipation(p, s.x));
  }
  return acc / static_cast<double>(window.size() - 2);
}

// ---------------------------------------------------------------- registry

std::vector<std::string> model_names() {
  return {"rotating_planes", "springs_case1", "springs_case2", "relaxation"};
}

PtaConfig apply_pta_config(const Config& cfg, PtaConfig c) {
  c.h = cfg.get_double("h", c.h);
  c.delta = cfg.get_double("delta", c.delta);
  c.dsigma = cfg.get_double("dsigma", c.dsigma);
  c.t_end = cfg.get_double("t_end", c.t_end);
  c.fast_period = cfg.get_double("fast_period", c.fast_period);
  c.samples_per_period = static_cast<std::size_t>(cfg.get_int("samples_per_period", static_cast<long>(c.samples_per_period)));
  c.max_rate_samples = static_cast<std::size_t>(cfg.get_int("max_rate_samples", static_cast<long>(c.max_rate_samples)));
  c.criterion.tol1 = cfg.get_double("tol1", c.criterion.tol1);
  c.criterion.tol2 = cfg.get_double("tol2", c.criterion.tol2);
  c.criterion.k = static_cast<std::size_t>(cfg.get_int("stride_k", static_cast<long>(c.criterion.k)));
  c.criterion.p = static_cast<std::size_t>(cfg.get_int("window_p", static_cast<long>(c.criterion.p)));
  c.criterion.n_min = static_cast<std::size_t>(cfg.get_int("n_min", static_cast<long>(c.criterion.n_min)));
  c.jump_factor = cfg.get_double("jump_factor", c.jump_factor);
  c.jump_abs_floor = cfg.get_double("jump_abs_floor", c.jump_abs_floor);
  c.jump_history = static_cast<std::size_t>(cfg.get_int("jump_history", static_cast<long>(c.jump_history)));
  c.match_rtol = cfg.get_double("match_rtol", c.match_rtol);
  c.max_retries = static_cast<int>(cfg.get_int("max_retries", c.max_retries));
  c.rule = parse_rule(cfg.get_string("slow_value_rule", to_string(c.rule)));
  c.frozen_load_in_bursts = cfg.get_bool("frozen_load_in_bursts", c.frozen_load_in_bursts);
  c.zero_eps_in_rate_bursts = cfg.get_bool("zero_eps_in_rate_bursts", c.zero_eps_in_rate_bursts);
  c.on_jump = parse_on_jump(cfg.get_string("on_jump", to_string(c.on_jump)));
  c.reanchor_after_jump = cfg.get_bool("reanchor_after_jump", c.reanchor_after_jump);
  c.integrator = parse_integrator(cfg.get_string("integrator", to_string(c.integrator)));
  c.threads = static_cast<std::size_t>(cfg.get_int("threads", static_cast<long>(c.threads)));
  for (long v : {static_cast<long>(c.samples_per_period), static_cast<long>(c.criterion.p)})
    if (v <= 0) throw ConfigError("counts must be positive");
  return c;
}

std::vector<std::pair<std::string, std::string>> echo(const PtaConfig& c) {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"h", num(c.h)},
      {"delta", num(c.delta)},
      {"dsigma", num(c.fine_step())},
      {"t_end", num(c.t_end)},
      {"fast_period", num(c.fast_period)},
      {"integrator", to_string(c.integrator)},
      {"tol1", num(c.criterion.tol1)},
      {"tol2", num(c.criterion.tol2)},
      {"stride_k", std::to_string(c.criterion.k)},
      {"window_p", std::to_string(c.criterion.p)},
      {"n_min", std::to_string(c.criterion.n_min)},
      {"max_rate_samples", std::to_string(c.max_rate_samples)},
      {"jump_factor", num(c.jump_factor)},
      {"jump_abs_floor", num(c.jump_abs_floor)},
      {"jump_history", std::to_string(c.jump_history)},
      {"match_rtol", num(c.match_rtol)},
      {"max_retries", std::to_string(c.max_retries)},
      {"slow_value_rule", to_string(c.rule)},
      {"frozen_load_in_bursts", b(c.frozen_load_in_bursts)},
      {"zero_eps_in_rate_bursts", b(c.zero_eps_in_rate_bursts)},
      {"on_jump", to_string(c.on_jump)},
      {"reanchor_after_jump", b(c.reanchor_after_jump)},
  };
}

namespace {

void apply_measurement_overrides(const Config& cfg, std::vector<Measurement>& ms) {
  for (auto& m : ms) {
    if (auto v = cfg.maybe_double("match_floor_" + m.name)) m.match_floor = *v;
    if (auto v = cfg.maybe_double("abs_tol_" + m.name)) m.abs_tol = *v;
  }
}

Vec vec_key(const Config& cfg, const std::string& key, const Vec& fallback) {
  auto v = cfg.maybe_list(key);
  if (!v) return fallback;
  if (v->size() != fallback.size())
    throw ConfigError(key + ": expected " + std::to_string(fallback.size()) + " components");
  return Vec::from(*v);
}

ModelSetup make_rotating_planes(const Config& cfg) {
  ModelSetup m;
  m.name = "rotating_planes";
  const double eps = cfg.get_double("epsilon", 1e-5);
  m.system = rotating_planes(eps);
  m.measurements = rotating_planes_measurements();
  PtaConfig c;
  c.h = 0.002;
  c.delta = 0.001;
  c.t_end = 0.02;
  c.fast_period = 2.0 * std::numbers::pi;
  c.integrator = IntegratorKind::RK4;
  // x averages are zero-mean circles: whole-period checkpoints keep their
  // running means clean, and the drift is left to the extrapolation
  c.criterion.k = c.samples_per_period;
  c.zero_eps_in_rate_bursts = true;
  m.config = c;
  m.initial.x = vec_key(cfg, "x0", Vec{0.5, 0.5, 0.5, 0.5});
  m.initial.l = Vec(0);
  return m;
}

ModelSetup make_relaxation(const Config& cfg) {
  ModelSetup m;
  m.name = "relaxation";
  const double eps = cfg.get_double("epsilon", 1e-5);
  m.system = relaxation_oscillator(eps);
  m.measurements = relaxation_measurements();
  PtaConfig c;
  c.h = 0.05;
  c.delta = 0.01;
  c.t_end = 2.0;
  c.fast_period = 2.0 * std::numbers::pi;
  c.integrator = IntegratorKind::RK4;
  m.config = c;
  m.initial.x = vec_key(cfg, "x0", Vec{1.0, 1.0 + 1.0 / std::sqrt(8.0), 0.0});
  m.initial.l = vec_key(cfg, "l0", Vec{0.0});
  return m;
}

ModelSetup make_springs(const Config& cfg, bool case2) {
  ModelSetup m;
  m.name = case2 ? "springs_case2" : "springs_case1";
  SpringParams p;
  p.k1 = cfg.get_double("k1", p.k1);
  p.k2 = cfg.get_double("k2", case2 ? 2e7 : 1e7);
  p.m1 = cfg.get_double("m1", p.m1);
  p.m2 = cfg.get_double("m2", p.m2);
  p.eta = cfg.get_double("eta", p.eta);
  p.c1 = cfg.get_double("c1", 0.0);
  p.T_s = cfg.get_double("T_s", 1e4);
  if (auto eps = cfg.maybe_double("epsilon")) {
    if (cfg.has("T_s")) throw ConfigError("set either epsilon or T_s for the springs, not both");
    if (!(*eps > 0.0)) throw ConfigError("epsilon must be positive");
    p.T_s = p.T_f() / *eps;
  }
  const double travel = cfg.get_double("wall_travel", 0.01);
  p.c2 = cfg.get_double("c2", travel / p.T_s);
  p.validate();
  m.spring = p;
  m.system = springs(p);

  const double x1 = cfg.get_double("x1_0", 0.5);
  const double x2 = cfg.get_double("x2_0", -0.1);
  const double y1 = cfg.get_double("y1_0", 0.0);
  const double y2 = cfg.get_double("y2_0", 0.0);
  const double w1 = cfg.get_double("w1_0", 0.0);
  const double w2 = cfg.get_double("w2_0", 0.0);
  const bool nondim = cfg.get_bool("nondimensionalize", true);
  m.measurements = springs_measurements(p, x1, x2, nondim);
  m.initial.x = Vec{x1, y1, x2, y2};
  m.initial.l = Vec{w1, w2};

  PtaConfig c;
  c.h = 0.25;
  c.delta = 0.05;
  c.t_end = 1.0;
  c.fast_period = 1.0;  // sigma is scaled by the first spring's period
  c.integrator = IntegratorKind::VerletDamped;
  c.rule = SlowValueRule::Simpson;
  c.frozen_load_in_bursts = true;
  c.criterion.tol1 = 1e-3;
  // the slowest damped mode needs about 80 periods to fade below 1e-8 of the start
  c.criterion.n_min = 100 * c.samples_per_period;
  m.config = c;
  return m;
}

}  // namespace

ModelSetup make_model(const std::string& name, const Config& cfg) {
  ModelSetup m;
  if (name == "rotating_planes")
    m = make_rotating_planes(cfg);
  else if (name == "springs_case1")
    m = make_springs(cfg, false);
  else if (name == "springs_case2")
    m = make_springs(cfg, true);
  else if (name == "relaxation")
    m = make_relaxation(cfg);
  else
    throw ConfigError("unknown model '" + name + "'");
  apply_measurement_overrides(cfg, m.measurements);
  m.config = apply_pta_config(cfg, m.config);
  m.config.validate();
  m.initial.sigma = -m.config.delta / m.system->epsilon();
  return m;
}

}  // namespace pta
