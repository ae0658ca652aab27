#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "pta/core.hpp"
#include "pta/integrators.hpp"
#include "pta/observables.hpp"
#include "pta/report.hpp"

namespace pta {

enum class SlowValueRule { Window, Simpson };
enum class OnJump { Declare, ResolveFine };

struct PtaConfig {
  double h = 0.002;
  double delta = 0.001;
  double dsigma = 0.0;  // 0: fast period / 500
  double t_end = 0.02;
  IntegratorKind integrator = IntegratorKind::RK4;

  ConvergenceCriterion criterion{1e-2, 1e-5, 0, 5, 0};  // k = 0 and n_min = 0 mean "derive"
  double fast_period = 6.283185307179586;  // in sigma, used for derived defaults
  std::size_t samples_per_period = 500;
  std::size_t max_rate_samples = 0;  // 0: derived from the window length

  double jump_factor = 10.0;
  double jump_abs_floor = 1e-3;
  std::size_t jump_history = 8;
  double match_rtol = 5e-2;
  int max_retries = 4;
  SlowValueRule rule = SlowValueRule::Window;
  bool frozen_load_in_bursts = false;
  bool zero_eps_in_rate_bursts = false;
  OnJump on_jump = OnJump::Declare;
  bool reanchor_after_jump = true;
  std::size_t threads = 1;

  void validate() const;
  double fine_step() const;
  std::size_t window_samples(double eps) const;
  std::size_t coarse_steps() const;
  ConvergenceCriterion resolved_criterion(double eps) const;
  std::size_t rate_cap(double eps) const;
};

std::string to_string(SlowValueRule r);
std::string to_string(OnJump j);
SlowValueRule parse_rule(const std::string& s);
OnJump parse_on_jump(const std::string& s);

struct RateRun {
  std::vector<double> R;
  std::size_t N = 0;
  FineState end;
  Vec load_rate;  // mean of L over the run, slow-time units
};

struct CoarseStepMemory {
  double t = 0.0;
  std::vector<double> v;       // accepted values at t
  std::vector<double> v_base;  // prediction origin; differs from v only right after a jump
  bool after_jump = false;
  std::vector<double> R_t;     // running averages started at t
  std::vector<double> R_tmd;   // started at t - delta
  FineState conv_t;            // end of the run at t
  std::size_t N_t = 0;
  FineState x_arb_prev;        // end of the run at t - delta
  std::size_t N_arb_prev = 0;
  std::optional<FineState> x_conv_prev;  // end of the run at t - h - delta
  std::size_t N_prev = 0;
  FineState retry_anchor;      // support point the retries shrink toward
  std::optional<FineState> first_guess;  // t = 0 only
  Vec load_t;                  // load at t
  Vec load_rate_t;             // averaged load rate at t
  FineState fine_t;            // a fine state at slow time t
  std::vector<std::deque<double>> history;  // relative R changes per observable
};

class StepFailed : public Error {
 public:
  StepFailed(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics(std::move(diagnostics)) {}
  std::string diagnostics;
  RunReport partial;
};

struct Problem {
  const SlowFastSystem* system = nullptr;
  std::vector<Measurement> measurements;
  FineState initial;  // state at slow time -delta
  std::string model = "custom";
};

// Samples nearest x_ref over the run of max_steps from start (start included);
// distance uses fast components only, ties go to the earliest sample.
FineState closest_point_projection(const FineState& x_ref, const FineState& start,
                                   std::size_t max_steps, const Stepper& stepper);

Vec guess_next_support(const Vec& x_arb, const Vec& x_cp);
Vec guess_retry(const Vec& guess, const Vec& anchor, int r, int max_retries);
Vec guess_rate_ic(const Vec& x_arb, const Vec& x_cp, double h, double delta);
Vec guess_initial(const Vec& x_arb0, const Vec& x_cp_md, double h, double delta);

bool detect_jump(double R_new, double R_old, const std::deque<double>& history,
                 double jump_factor, double floor = 0.0, double abs_floor = 1e-3);
double relative_change(double R_new, double R_old, double floor = 0.0);

RateRun converge_run(const Stepper& stepper, const FineState& start,
                     const std::vector<Measurement>& ms, const ConvergenceCriterion& crit,
                     std::size_t max_samples);

struct InitResult {
  CoarseStepMemory memory;
  StepOutcome outcome;
};

InitResult initialize(const Problem& prob, const PtaConfig& cfg);
StepOutcome coarse_step(const Problem& prob, CoarseStepMemory& mem, const PtaConfig& cfg);

RunReport run_pta(const Problem& prob, const PtaConfig& cfg);
RunReport run_fine_reference(const Problem& prob, const PtaConfig& cfg);

}  // namespace pta
