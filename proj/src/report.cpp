#include "pta/report.hpp"

namespace pta {

std::string to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Initial: return "initial";
    case StepStatus::Accepted: return "accepted";
    case StepStatus::JumpDetected: return "jump";
    case StepStatus::RetriedThenAccepted: return "retried";
  }
  return "?";
}

StepStatus parse_status(const std::string& s) {
  if (s == "initial") return StepStatus::Initial;
  if (s == "accepted") return StepStatus::Accepted;
  if (s == "jump") return StepStatus::JumpDetected;
  if (s == "retried") return StepStatus::RetriedThenAccepted;
  throw ConfigError("unknown step status '" + s + "'");
}

void RunReport::check() const {
  auto series_ok = [&](const std::vector<std::vector<double>>& s, std::size_t width) {
    if (s.empty()) return;
    if (s.size() != width) throw ContractError("series count does not match names");
    for (const auto& col : s)
      if (col.size() != times.size()) throw ContractError("series length differs from grid");
  };
  series_ok(pta, observables.size());
  series_ok(fine, observables.size());
  series_ok(pta_load, loads.size());
  series_ok(fine_load, loads.size());
  if (!steps.empty() && steps.size() != times.size())
    throw ContractError("one step record per grid point expected");
  auto nonneg = [](double v) {
    if (v < 0.0) throw ContractError("negative timing");
  };
  nonneg(timings.pta_init_ms);
  nonneg(timings.pta_total_ms);
  nonneg(timings.fine_total_ms);
  for (double v : timings.pta_step_ms) nonneg(v);
  for (double v : timings.fine_step_ms) nonneg(v);
}

RunReport merge_reports(const RunReport& pta_run, const RunReport& fine_run) {
  if (pta_run.times != fine_run.times) throw ContractError("PTA and fine grids differ");
  if (pta_run.observables != fine_run.observables) throw ContractError("observable sets differ");
  RunReport out = pta_run;
  out.fine = fine_run.fine;
  out.fine_load = fine_run.fine_load;
  out.timings.fine_step_ms = fine_run.timings.fine_step_ms;
  out.timings.fine_total_ms = fine_run.timings.fine_total_ms;
  return out;
}

}  // namespace pta
