#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "pta/config.hpp"
#include "pta/models.hpp"
#include "pta/report.hpp"

namespace pta {

// ------------------------------------------------------------------ csv

std::string format_double(double v);  // 17 significant digits

// Main table: t, per-observable columns, loads, jump_flag, status, retries,
// N_t. Wall-clock data lives in the timing table so that the main table is
// reproducible byte for byte.
void write_csv(const RunReport& r, std::ostream& os);
void write_timing_csv(const RunReport& r, std::ostream& os);
RunReport read_csv(std::istream& is);
void read_timing_csv(std::istream& is, RunReport& r);

struct SavedPaths {
  std::string csv;
  std::string timing;
  std::string config;
};
// Writes <dir>/<stem>.csv, <stem>_timing.csv and <stem>_config.txt.
SavedPaths save_report(const RunReport& r, const std::string& dir, const std::string& stem);
RunReport load_report(const std::string& csv_path);

// -------------------------------------------------------------- metrics

struct ErrorValue {
  double value = 0.0;
  bool is_absolute = false;  // reference was zero; value is v_pta - v_f
};
ErrorValue error_percent(double v_pta, double v_f);

struct Speedup {
  double exact = 0.0;       // total fine time over total PTA time
  double asymptotic = 0.0;  // mean fine interval over mean PTA step, init excluded
};
Speedup speedup(const RunReport& fine, const RunReport& pta);

struct CubicFit {
  std::array<double, 4> coeffs{};  // lowest degree first
  double intercept() const { return coeffs[0]; }
  double operator()(double x) const;
};
CubicFit fit_cubic(const std::vector<double>& x, const std::vector<double>& y);

// Largest relative error in percent of observable j over accepted steps
// (grid points past the first); absolute fallbacks are skipped.
double max_error_percent(const RunReport& r, std::size_t j);

// --------------------------------------------------------------- sweeps

struct SweepPoint {
  double value = 0.0;  // epsilon or h
  Speedup speedup;
  std::vector<double> max_err_pct;  // per observable
  RunReport report;                 // merged PTA + fine
};

// Each point runs fine then PTA serially with one candidate thread.
std::vector<SweepPoint> sweep_eps(const std::string& model, const Config& base,
                                  const std::vector<double>& eps);
std::vector<SweepPoint> sweep_h(const std::string& model, const Config& base,
                                const std::vector<double>& h);

// ---------------------------------------------------------- power balance

struct PowerBalance {
  double dissipation = 0.0;  // window mean of eta (y2 - y1)^2
  double input_power = 0.0;  // window mean of R1 w1' + R2 w2'
  double residual = 0.0;     // window mean of the balance defect
  double target = 0.0;       // eta c2^2
};

// Full fine run of a springs model from its initial state: settle for the
// given number of fast periods, then average over the next measure periods.
PowerBalance power_balance(const ModelSetup& m, std::size_t settle_periods,
                           std::size_t measure_periods);

// Model parameters followed by the PTA settings, for the config echo.
std::vector<std::pair<std::string, std::string>> describe(const ModelSetup& m);

// ------------------------------------------------------------------ cli

int run_cli(int argc, char** argv);

}  // namespace pta
