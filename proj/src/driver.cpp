#include "pta/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

namespace pta {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<double> tol_list(const std::vector<Measurement>& ms, const ConvergenceCriterion& c) {
  std::vector<double> out;
  for (const auto& m : ms) out.push_back(m.abs_tol.value_or(c.tol2));
  return out;
}

std::string fmt_vec(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(10) << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

std::string to_string(SlowValueRule r) { return r == SlowValueRule::Window ? "window" : "simpson"; }
std::string to_string(OnJump j) { return j == OnJump::Declare ? "declare" : "resolve_fine"; }

SlowValueRule parse_rule(const std::string& s) {
  if (s == "window") return SlowValueRule::Window;
  if (s == "simpson") return SlowValueRule::Simpson;
  throw ConfigError("slow_value_rule must be window or simpson, got '" + s + "'");
}

OnJump parse_on_jump(const std::string& s) {
  if (s == "declare") return OnJump::Declare;
  if (s == "resolve_fine") return OnJump::ResolveFine;
  throw ConfigError("on_jump must be declare or resolve_fine, got '" + s + "'");
}

void PtaConfig::validate() const {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(delta < h)) throw ConfigError("delta must be smaller than h");
  if (!(h <= t_end * (1.0 + 1e-12))) throw ConfigError("h must not exceed t_end");
  const double steps = t_end / h;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("t_end must be an integer multiple of h");
  if (dsigma < 0.0 || !std::isfinite(dsigma)) throw ConfigError("dsigma must be positive");
  if (!(fast_period > 0.0)) throw ConfigError("fast_period must be positive");
  if (samples_per_period == 0) throw ConfigError("samples_per_period must be positive");
  if (!(jump_factor > 1.0)) throw ConfigError("jump_factor must exceed 1");
  if (!(match_rtol > 0.0)) throw ConfigError("match_rtol must be positive");
  if (max_retries < 1) throw ConfigError("max_retries must be at least 1");
  if (jump_history == 0) throw ConfigError("jump_history must be positive");
  if (threads == 0) throw ConfigError("threads must be positive");
  if (!(criterion.tol1 > 0.0) || !(criterion.tol2 > 0.0)) throw ConfigError("tolerances must be positive");
  if (criterion.p == 0) throw ConfigError("p must be positive");
}

double PtaConfig::fine_step() const {
  return dsigma > 0.0 ? dsigma : fast_period / static_cast<double>(samples_per_period);
}

std::size_t PtaConfig::window_samples(double eps) const {
  const double n = delta / (eps * fine_step());
  if (!(n >= 2.0) || !std::isfinite(n)) throw ConfigError("averaging window shorter than two fine steps");
  return static_cast<std::size_t>(std::llround(n));
}

std::size_t PtaConfig::coarse_steps() const {
  return static_cast<std::size_t>(std::llround(t_end / h));
}

ConvergenceCriterion PtaConfig::resolved_criterion(double eps) const {
  ConvergenceCriterion c = criterion;
  const auto per = static_cast<std::size_t>(std::max(1.0, std::round(fast_period / fine_step())));
  if (c.k == 0) {
    const std::size_t w = window_samples(eps);
    c.k = std::max<std::size_t>(1, std::min((w + 49) / 50, per));
  }
  if (c.n_min == 0) c.n_min = per;
  c.validate();
  return c;
}

std::size_t PtaConfig::rate_cap(double eps) const {
  if (max_rate_samples > 0) return max_rate_samples;
  const auto per = static_cast<std::size_t>(std::max(1.0, std::round(fast_period / fine_step())));
  return std::max(window_samples(eps), 100 * per);
}

FineState closest_point_projection(const FineState& x_ref, const FineState& start,
                                   std::size_t max_steps, const Stepper& stepper) {
  if (max_steps < 1) throw ContractError("closest point search needs at least one step");
  if (x_ref.x.size() != start.x.size()) throw ContractError("closest point dimension mismatch");
  const Vec wts = stepper.system().distance_weights();
  auto d2 = [&](const FineState& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double d = (s.x[i] - x_ref.x[i]) * (wts.size() ? wts[i] : 1.0);
      acc += d * d;
    }
    return acc;
  };
  FineState s = start, best = start;
  double bd = d2(s);
  for (std::size_t i = 0; i < max_steps; ++i) {
    stepper.step(s);
    const double d = d2(s);
    if (d < bd) {
      bd = d;
      best = s;
    }
  }
  return best;
}

Vec guess_next_support(const Vec& x_arb, const Vec& x_cp) { return 2.0 * x_arb - x_cp; }

Vec guess_retry(const Vec& guess, const Vec& anchor, int r, int max_retries) {
  if (r == 0) return guess;
  const double a = static_cast<double>(r) / static_cast<double>(max_retries);
  return guess + a * (anchor - guess);
}

Vec guess_rate_ic(const Vec& x_arb, const Vec& x_cp, double h, double delta) {
  if (!(h > delta)) throw ConfigError("h must exceed delta");
  return x_arb + (delta / (h - delta)) * (x_arb - x_cp);
}

Vec guess_initial(const Vec& x_arb0, const Vec& x_cp_md, double h, double delta) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  return x_arb0 + ((h - delta) / delta) * (x_arb0 - x_cp_md);
}

double relative_change(double R_new, double R_old, double floor) {
  const double den = std::max(std::abs(R_old), floor);
  const double num = std::abs(R_new - R_old);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

bool detect_jump(double R_new, double R_old, const std::deque<double>& history,
                 double jump_factor, double floor, double abs_floor) {
  if (history.empty()) return false;
  double mean = 0.0;
  for (double h : history) mean += std::abs(h);
  mean /= static_cast<double>(history.size());
  const double rc = relative_change(R_new, R_old, floor);
  return rc > jump_factor * mean && rc > abs_floor;
}

RateRun converge_run(const Stepper& stepper, const FineState& start,
                     const std::vector<Measurement>& ms, const ConvergenceCriterion& crit,
                     std::size_t max_samples) {
  const SlowFastSystem& sys = stepper.system();
  RunningAverage avg(ms.size(), crit, tol_list(ms, crit));
  std::vector<double> vals(ms.size());
  FineState s = start;
  Vec lsum(sys.m()), lr;
  std::size_t cap = std::max<std::size_t>(max_samples, 1);
  bool extended = false;
  while (true) {
    stepper.step(s);
    for (std::size_t i = 0; i < ms.size(); ++i) vals[i] = ms[i](s);
    if (sys.m() > 0) {
      sys.load_rate(s.x, s.l, lr);
      lsum += lr;
    }
    if (avg.push(vals)) break;
    if (avg.seen() >= cap) {
      if (extended)
        throw NoConvergence("running average did not converge within " + std::to_string(cap) +
                                " samples",
                            avg.means(), avg.seen());
      cap *= 2;
      extended = true;
    }
  }
  RateRun out;
  out.R = avg.means();
  out.N = avg.seen();
  out.end = s;
  out.load_rate = lsum * (1.0 / static_cast<double>(out.N));
  return out;
}

namespace {

struct Context {
  const SlowFastSystem& sys;
  const std::vector<Measurement>& ms;
  const PtaConfig& cfg;
  double eps;
  double dsig;
  std::size_t Np;
  ConvergenceCriterion crit;
  std::size_t cap;
  Stepper full;
  Stepper rate;

  Context(const Problem& prob, const PtaConfig& c)
      : sys(*prob.system),
        ms(prob.measurements),
        cfg(c),
        eps(prob.system->epsilon()),
        dsig(c.fine_step()),
        Np(c.window_samples(prob.system->epsilon())),
        crit(c.resolved_criterion(prob.system->epsilon())),
        cap(c.rate_cap(prob.system->epsilon())),
        full(c.integrator, *prob.system, c.fine_step(), {}),
        rate(c.integrator, *prob.system, c.fine_step(),
             {c.frozen_load_in_bursts, c.zero_eps_in_rate_bursts}) {}

  RateRun run(const FineState& s) const { return converge_run(rate, s, ms, crit, cap); }

  FineState at(const Vec& x, const Vec& l, double t) const { return {x, l, t / eps}; }
};

struct BurstResult {
  std::vector<double> v;
  FineState end;
  FineState at_back;  // state `back` samples before the end
};

BurstResult burst(const Context& c, const FineState& start, std::size_t n, std::size_t back = 0) {
  std::vector<double> sums(c.ms.size(), 0.0);
  FineState s = start;
  BurstResult out;
  const std::size_t from = n >= c.Np ? n - c.Np : 0;
  if (back == n) out.at_back = s;
  for (std::size_t i = 1; i <= n; ++i) {
    c.full.step(s);
    if (i > from)
      for (std::size_t j = 0; j < c.ms.size(); ++j) sums[j] += c.ms[j](s);
    if (back > 0 && i == n - back) out.at_back = s;
  }
  const double cnt = static_cast<double>(n - from);
  for (auto& v : sums) v /= cnt;
  out.v = std::move(sums);
  out.end = s;
  return out;
}

struct Candidate {
  int r = 0;
  std::vector<double> v_new;
  RateRun a;  // run started at T' - delta
  RateRun b;  // run started at T'
  Vec load_T;
  FineState fine_T;
};

Candidate evaluate(const Context& c, const CoarseStepMemory& mem, const Vec& g_fast,
                   const Vec& load_g, int r) {
  const auto& cfg = c.cfg;
  const double Tn = mem.t + cfg.h;
  Candidate out;
  out.r = r;
  const Vec gx = guess_retry(g_fast, mem.retry_anchor.x, r, cfg.max_retries);
  const FineState g = c.at(gx, load_g, Tn - cfg.delta);

  std::optional<BurstResult> win;
  if (cfg.rule == SlowValueRule::Window) win = burst(c, g, c.Np);

  out.a = c.run(g);
  const FineState cp_t = closest_point_projection(out.a.end, mem.conv_t, 2 * mem.N_t, c.rate);
  const Vec gb = guess_rate_ic(out.a.end.x, cp_t.x, cfg.h, cfg.delta);
  out.load_T = win ? win->end.l : load_g + cfg.delta * out.a.load_rate;
  const FineState gbs = c.at(gb, out.load_T, Tn);
  out.b = c.run(gbs);

  if (win) {
    out.v_new = win->v;
    out.fine_T = win->end;
  } else {
    const Vec gm = out.a.end.x + (0.5 * cfg.delta / (cfg.h - cfg.delta)) * (out.a.end.x - cp_t.x);
    const Vec lm = load_g + (0.5 * cfg.delta) * out.a.load_rate;
    const RateRun mid = c.run(c.at(gm, lm, Tn - 0.5 * cfg.delta));
    out.v_new.resize(c.ms.size());
    for (std::size_t i = 0; i < c.ms.size(); ++i)
      out.v_new[i] = simpson_observable({out.a.R[i], mid.R[i], out.b.R[i]});
    out.fine_T = gbs;
  }
  return out;
}

bool matches(const Context& c, const std::vector<double>& v_new, const std::vector<double>& v_pred) {
  for (std::size_t i = 0; i < v_new.size(); ++i) {
    const double tol = c.cfg.match_rtol * std::max(std::abs(v_pred[i]), c.ms[i].match_floor);
    if (!(std::abs(v_new[i] - v_pred[i]) <= tol)) return false;
  }
  return true;
}

// Fine run over [t, t+h] from the stored fine state; used by on_jump = resolve_fine.
Candidate resolve_fine(const Context& c, const CoarseStepMemory& mem) {
  const auto M = static_cast<std::size_t>(std::llround(c.cfg.h / (c.eps * c.dsig)));
  BurstResult br = burst(c, mem.fine_t, M, c.Np);
  Candidate out;
  out.v_new = br.v;
  out.a = c.run(br.at_back);
  out.b = c.run(br.end);
  out.load_T = br.end.l;
  out.fine_T = br.end;
  return out;
}

std::string diagnostics(const CoarseStepMemory& mem, const std::vector<double>& v_pred,
                        const std::vector<Candidate>& cands) {
  std::ostringstream os;
  os << "t=" << mem.t << " v(t)=" << fmt_vec(mem.v) << " v_pred=" << fmt_vec(v_pred) << "\n";
  os << "R_t=" << fmt_vec(mem.R_t) << " R_t-delta=" << fmt_vec(mem.R_tmd) << "\n";
  for (const auto& cd : cands) {
    os << "  candidate r=" << cd.r << " v=" << fmt_vec(cd.v_new) << " R_T=" << fmt_vec(cd.b.R)
       << "\n";
  }
  return os.str();
}

}  // namespace

InitResult initialize(const Problem& prob, const PtaConfig& cfg) {
  cfg.validate();
  if (!prob.system) throw ConfigError("problem has no system");
  if (prob.measurements.empty()) throw ConfigError("at least one measurement is required");
  const Context c(prob, cfg);
  if (prob.initial.x.size() != c.sys.n() || prob.initial.l.size() != c.sys.m())
    throw ConfigError("initial state dimension does not match system");

  FineState x0 = prob.initial;
  x0.sigma = -cfg.delta / c.eps;
  BurstResult fine = burst(c, x0, c.Np, c.Np - c.Np / 2);

  InitResult res;
  auto& mem = res.memory;
  RateRun md, r0;
  try {
    md = c.run(x0);
    r0 = c.run(fine.end);
  } catch (const NoConvergence& e) {
    throw NoConvergence(std::string("initial rate run: ") + e.what(), e.last_means, e.samples);
  }

  std::vector<double> v0 = fine.v;
  if (cfg.rule == SlowValueRule::Simpson) {
    const RateRun mid = c.run(fine.at_back);
    for (std::size_t i = 0; i < v0.size(); ++i)
      v0[i] = simpson_observable({md.R[i], mid.R[i], r0.R[i]});
  }

  const FineState cp = closest_point_projection(r0.end, md.end, 2 * md.N, c.rate);
  FineState g = c.at(guess_initial(r0.end.x, cp.x, cfg.h, cfg.delta), fine.end.l,
                     cfg.h - cfg.delta);

  mem.t = 0.0;
  mem.v = v0;
  mem.v_base = v0;
  mem.R_t = r0.R;
  mem.R_tmd = md.R;
  mem.conv_t = r0.end;
  mem.N_t = r0.N;
  mem.x_arb_prev = md.end;
  mem.N_arb_prev = md.N;
  mem.retry_anchor = r0.end;
  mem.first_guess = g;
  mem.load_t = fine.end.l;
  mem.load_rate_t = r0.load_rate;
  mem.fine_t = fine.end;
  mem.history.assign(c.ms.size(), {});

  auto& o = res.outcome;
  o.t = 0.0;
  o.v_pred = v0;
  o.v_acc = v0;
  o.status = StepStatus::Initial;
  o.N_t = r0.N;
  o.load = fine.end.l.to_vector();
  return res;
}

StepOutcome coarse_step(const Problem& prob, CoarseStepMemory& mem, const PtaConfig& cfg) {
  const auto t0 = Clock::now();
  const Context c(prob, cfg);
  const std::size_t nobs = c.ms.size();
  double burst_ms = 0.0;

  std::vector<double> v_pred(nobs);
  for (std::size_t i = 0; i < nobs; ++i)
    v_pred[i] = extrapolate(mem.v_base[i], rate_of_change(mem.R_t[i], mem.R_tmd[i], cfg.delta), cfg.h);

  auto tb = Clock::now();
  Vec g_fast;
  if (mem.first_guess) {
    g_fast = mem.first_guess->x;
  } else {
    const FineState cp = closest_point_projection(mem.x_arb_prev, *mem.x_conv_prev, 2 * mem.N_prev, c.rate);
    g_fast = guess_next_support(mem.x_arb_prev.x, cp.x);
  }
  const Vec load_g = mem.load_t + (cfg.h - cfg.delta) * mem.load_rate_t;
  std::vector<Candidate> tried;
  tried.push_back(evaluate(c, mem, g_fast, load_g, 0));
  burst_ms += ms_since(tb);

  Candidate chosen = tried.front();
  StepStatus status = StepStatus::Accepted;
  int retries = 0;

  if (!matches(c, chosen.v_new, v_pred)) {
    bool jump = false;
    for (std::size_t i = 0; i < nobs; ++i)
      jump = jump || detect_jump(chosen.b.R[i], mem.R_t[i], mem.history[i], cfg.jump_factor,
                                 c.ms[i].match_floor, cfg.jump_abs_floor);
    if (jump) {
      status = StepStatus::JumpDetected;
      tb = Clock::now();
      if (cfg.on_jump == OnJump::ResolveFine) chosen = resolve_fine(c, mem);
      burst_ms += ms_since(tb);
    } else {
      tb = Clock::now();
      std::optional<Candidate> found;
      int r = 1;
      while (!found && r <= cfg.max_retries) {
        const int batch = std::min<int>(static_cast<int>(cfg.threads), cfg.max_retries - r + 1);
        std::vector<Candidate> got;
        if (batch <= 1) {
          got.push_back(evaluate(c, mem, g_fast, load_g, r));
        } else {
          std::vector<std::future<Candidate>> fs;
          for (int j = 0; j < batch; ++j)
            fs.push_back(std::async(std::launch::async, [&, rr = r + j] {
              return evaluate(c, mem, g_fast, load_g, rr);
            }));
          for (auto& f : fs) got.push_back(f.get());
        }
        for (auto& cd : got) {
          tried.push_back(cd);
          if (!found && matches(c, cd.v_new, v_pred)) found = cd;
        }
        r += batch;
      }
      burst_ms += ms_since(tb);
      if (!found) {
        std::ostringstream os;
        os << "no candidate guess matched the prediction at t=" << mem.t + cfg.h;
        throw StepFailed(os.str(), diagnostics(mem, v_pred, tried));
      }
      chosen = *found;
      status = StepStatus::RetriedThenAccepted;
      retries = chosen.r;
    }
  }

  std::vector<double> v_base = chosen.v_new;
  if (status == StepStatus::JumpDetected && cfg.reanchor_after_jump) {
    // Both rate runs may still sit on the pre-jump support. Restart them from
    // the fine state at T' (the window end when there is one) so the next rate
    // estimate does not straddle the discontinuity.
    tb = Clock::now();
    const FineState& base = cfg.rule == SlowValueRule::Window ? chosen.fine_T : chosen.b.end;
    FineState s = base;
    s.l = cfg.on_jump == OnJump::ResolveFine ? chosen.a.end.l : load_g;
    s.sigma = (mem.t + cfg.h - cfg.delta) / c.eps;
    chosen.a = c.run(s);
    FineState e = base;
    e.l = chosen.load_T;
    e.sigma = (mem.t + cfg.h) / c.eps;
    chosen.b = c.run(e);
    burst_ms += ms_since(tb);
    for (std::size_t i = 0; i < nobs; ++i) v_base[i] = 0.5 * (chosen.a.R[i] + chosen.b.R[i]);
  }

  if (status == StepStatus::JumpDetected) {
    for (auto& h : mem.history) h.clear();
  } else {
    for (std::size_t i = 0; i < nobs; ++i) {
      auto& h = mem.history[i];
      h.push_back(relative_change(chosen.b.R[i], mem.R_t[i], c.ms[i].match_floor));
      while (h.size() > cfg.jump_history) h.pop_front();
    }
  }

  StepOutcome o;
  o.t = mem.t + cfg.h;
  o.v_pred = v_pred;
  o.v_acc = chosen.v_new;
  o.status = status;
  o.retries = retries;
  o.N_t = chosen.b.N;
  o.load = chosen.load_T.to_vector();

  mem.t = o.t;
  mem.v = chosen.v_new;
  mem.v_base = v_base;
  mem.after_jump = status == StepStatus::JumpDetected;
  if (status == StepStatus::JumpDetected && cfg.reanchor_after_jump) {
    // the pre-jump support says nothing about the new one; next guess starts at rest
    mem.x_conv_prev = chosen.a.end;
    mem.N_prev = chosen.a.N;
  } else {
    mem.x_conv_prev = mem.x_arb_prev;
    mem.N_prev = mem.N_arb_prev;
  }
  mem.x_arb_prev = chosen.a.end;
  mem.N_arb_prev = chosen.a.N;
  mem.R_tmd = chosen.a.R;
  mem.conv_t = chosen.b.end;
  mem.N_t = chosen.b.N;
  mem.R_t = chosen.b.R;
  mem.retry_anchor = chosen.a.end;
  mem.first_guess.reset();
  mem.load_t = chosen.load_T;
  mem.load_rate_t = chosen.b.load_rate;
  mem.fine_t = chosen.fine_T;

  const double total = ms_since(t0);
  o.burst_ms = std::min(burst_ms, total);
  o.overhead_ms = total - o.burst_ms;
  return o;
}

namespace {

RunReport empty_report(const Problem& prob, const PtaConfig& cfg) {
  RunReport rep;
  rep.model = prob.model;
  for (const auto& m : prob.measurements) rep.observables.push_back(m.name);
  rep.loads = prob.system->load_names();
  const std::size_t n = cfg.coarse_steps();
  for (std::size_t k = 0; k <= n; ++k) rep.times.push_back(static_cast<double>(k) * cfg.h);
  return rep;
}

}  // namespace

RunReport run_pta(const Problem& prob, const PtaConfig& cfg) {
  cfg.validate();
  RunReport rep = empty_report(prob, cfg);
  const std::size_t nobs = rep.observables.size();
  rep.pta.assign(nobs, {});
  rep.pta_load.assign(rep.loads.size(), {});
  auto record = [&](const StepOutcome& o) {
    for (std::size_t i = 0; i < nobs; ++i) rep.pta[i].push_back(o.v_acc[i]);
    for (std::size_t j = 0; j < rep.loads.size(); ++j) rep.pta_load[j].push_back(o.load[j]);
    rep.steps.push_back(o);
  };

  const auto t0 = Clock::now();
  InitResult init = initialize(prob, cfg);
  rep.timings.pta_init_ms = ms_since(t0);
  init.outcome.overhead_ms = rep.timings.pta_init_ms;
  record(init.outcome);
  rep.timings.pta_step_ms.push_back(0.0);

  for (std::size_t k = 1; k < rep.times.size(); ++k) {
    const auto ts = Clock::now();
    try {
      StepOutcome o = coarse_step(prob, init.memory, cfg);
      o.t = rep.times[k];
      record(o);
    } catch (StepFailed& e) {
      rep.times.resize(rep.steps.size());
      rep.timings.pta_total_ms = ms_since(t0);
      e.partial = rep;
      throw;
    }
    rep.timings.pta_step_ms.push_back(ms_since(ts));
  }
  rep.timings.pta_total_ms = ms_since(t0);
  return rep;
}

RunReport run_fine_reference(const Problem& prob, const PtaConfig& cfg) {
  cfg.validate();
  RunReport rep = empty_report(prob, cfg);
  const SlowFastSystem& sys = *prob.system;
  const double eps = sys.epsilon();
  const double dsig = cfg.fine_step();
  const std::size_t Np = cfg.window_samples(eps);
  const std::size_t nobs = prob.measurements.size();
  if (prob.initial.x.size() != sys.n() || prob.initial.l.size() != sys.m())
    throw ConfigError("initial state dimension does not match system");

  std::vector<std::size_t> ends;
  for (double t : rep.times)
    ends.push_back(static_cast<std::size_t>(std::llround((t + cfg.delta) / (eps * dsig))));

  rep.fine.assign(nobs, {});
  rep.fine_load.assign(rep.loads.size(), {});
  const Stepper stepper(cfg.integrator, sys, dsig, {});
  FineState s = prob.initial;
  s.sigma = -cfg.delta / eps;
  const double sigma0 = s.sigma;
  std::vector<double> sums(nobs, 0.0);

  const auto t0 = Clock::now();
  auto tk = t0;
  std::size_t k = 0;
  std::size_t i = 0;
  while (k < ends.size()) {
    const std::size_t end = ends[k];
    const std::size_t from = end - Np;  // samples from+1..end form the window
    while (i < from) {
      stepper.step(s);
      ++i;
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    while (i < end) {
      stepper.step(s);
      ++i;
      for (std::size_t j = 0; j < nobs; ++j) sums[j] += prob.measurements[j](s);
    }
    for (std::size_t j = 0; j < nobs; ++j) rep.fine[j].push_back(sums[j] / static_cast<double>(Np));
    for (std::size_t j = 0; j < rep.loads.size(); ++j) rep.fine_load[j].push_back(s.l[j]);
    s.sigma = sigma0 + static_cast<double>(i) * dsig;
    const auto now = Clock::now();
    rep.timings.fine_step_ms.push_back(std::chrono::duration<double, std::milli>(now - tk).count());
    tk = now;
    ++k;
  }
  rep.timings.fine_total_ms = ms_since(t0);
  return rep;
}

}  // namespace pta
