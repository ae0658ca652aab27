#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pta/core.hpp"

namespace pta {

enum class StepStatus { Initial, Accepted, JumpDetected, RetriedThenAccepted };

std::string to_string(StepStatus s);
StepStatus parse_status(const std::string& s);

struct StepOutcome {
  double t = 0.0;  // slow time of the accepted value
  std::vector<double> v_pred;
  std::vector<double> v_acc;
  StepStatus status = StepStatus::Accepted;
  int retries = 0;
  std::size_t N_t = 0;  // samples in the converged rate run at t
  double burst_ms = 0.0;
  double overhead_ms = 0.0;
  std::vector<double> load;
};

struct Timings {
  double pta_init_ms = 0.0;            // initialization overhead
  std::vector<double> pta_step_ms;     // one per coarse step
  std::vector<double> fine_step_ms;    // one per coarse interval
  double pta_total_ms = 0.0;
  double fine_total_ms = 0.0;
};

struct RunReport {
  std::string model;
  std::vector<std::string> observables;
  std::vector<std::string> loads;
  std::vector<double> times;
  // series[obs][k] aligned with times; empty when that run was not performed
  std::vector<std::vector<double>> pta;
  std::vector<std::vector<double>> fine;
  std::vector<std::vector<double>> pta_load;
  std::vector<std::vector<double>> fine_load;
  std::vector<StepOutcome> steps;
  Timings timings;
  std::vector<std::pair<std::string, std::string>> config_echo;

  bool has_pta() const { return !pta.empty(); }
  bool has_fine() const { return !fine.empty(); }
  void check() const;
};

// Merge a fine-only report into a PTA report with the same grid.
RunReport merge_reports(const RunReport& pta_run, const RunReport& fine_run);

}  // namespace pta
