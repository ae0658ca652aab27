#include "pta/harness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pta/driver.hpp"
#include "pta/integrators.hpp"

namespace pta {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double cell_double(const std::string& s, const std::string& col) {
  if (s.empty()) throw ConfigError("empty cell in column " + col);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("bad number '" + s + "' in column " + col);
  return v;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

bool has_pred(const RunReport& r) {
  return std::any_of(r.steps.begin(), r.steps.end(), [](const StepOutcome& s) { return !s.v_pred.empty(); });
}

}  // namespace

void write_csv(const RunReport& r, std::ostream& os) {
  r.check();
  const bool pta = r.has_pta(), fine = r.has_fine(), steps = !r.steps.empty();
  const bool pred = has_pred(r);
  std::vector<std::string> head{"t"};
  for (const auto& o : r.observables) {
    if (pta) head.push_back(o + "_pta");
    if (pred) head.push_back(o + "_pred");
    if (fine) head.push_back(o + "_fine");
    if (pta && fine) {
      head.push_back(o + "_err_pct");
      head.push_back(o + "_err_is_abs");
    }
  }
  for (const auto& l : r.loads) {
    if (pta) head.push_back("load_" + l + "_pta");
    if (fine) head.push_back("load_" + l + "_fine");
  }
  if (steps) {
    head.push_back("jump_flag");
    head.push_back("status");
    head.push_back("retries");
    head.push_back("N_t");
  }
  os << join(head) << '\n';
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    std::vector<std::string> row{format_double(r.times[k])};
    for (std::size_t j = 0; j < r.observables.size(); ++j) {
      if (pta) row.push_back(format_double(r.pta[j][k]));
      if (pred) {
        const auto& vp = r.steps[k].v_pred;
        row.push_back(vp.empty() ? std::string() : format_double(vp[j]));
      }
      if (fine) row.push_back(format_double(r.fine[j][k]));
      if (pta && fine) {
        const ErrorValue e = error_percent(r.pta[j][k], r.fine[j][k]);
        row.push_back(format_double(e.value));
        row.push_back(e.is_absolute ? "1" : "0");
      }
    }
    for (std::size_t j = 0; j < r.loads.size(); ++j) {
      if (pta) row.push_back(format_double(r.pta_load[j][k]));
      if (fine) row.push_back(format_double(r.fine_load[j][k]));
    }
    if (steps) {
      const auto& s = r.steps[k];
      row.push_back(s.status == StepStatus::JumpDetected ? "1" : "0");
      row.push_back(to_string(s.status));
      row.push_back(std::to_string(s.retries));
      row.push_back(std::to_string(s.N_t));
    }
    os << join(row) << '\n';
  }
}

void write_timing_csv(const RunReport& r, std::ostream& os) {
  os << "t,pta_step_ms,burst_ms,overhead_ms,fine_step_ms\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    std::vector<std::string> row{format_double(r.times[k])};
    row.push_back(k < r.timings.pta_step_ms.size() ? format_double(r.timings.pta_step_ms[k]) : "");
    row.push_back(k < r.steps.size() ? format_double(r.steps[k].burst_ms) : "");
    row.push_back(k < r.steps.size() ? format_double(r.steps[k].overhead_ms) : "");
    row.push_back(k < r.timings.fine_step_ms.size() ? format_double(r.timings.fine_step_ms[k]) : "");
    os << join(row) << '\n';
  }
  os << "\npta_init_ms,pta_total_ms,fine_total_ms\n";
  os << format_double(r.timings.pta_init_ms) << ',' << format_double(r.timings.pta_total_ms) << ','
     << format_double(r.timings.fine_total_ms) << '\n';
}

RunReport read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV");
  const auto head = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < head.size(); ++i) col[head[i]] = i;
  if (head.empty() || head[0] != "t") throw ConfigError("CSV must start with a t column");

  RunReport r;
  std::set<std::string> seen;
  auto suffix_of = [](const std::string& h, const std::string& suf) {
    return h.size() > suf.size() && h.compare(h.size() - suf.size(), suf.size(), suf) == 0;
  };
  for (const auto& h : head) {
    if (h.rfind("load_", 0) == 0) {
      for (const char* suf : {"_pta", "_fine"}) {
        if (suffix_of(h, suf)) {
          const std::string name = h.substr(5, h.size() - 5 - std::string(suf).size());
          if (seen.insert("load:" + name).second) r.loads.push_back(name);
        }
      }
      continue;
    }
    for (const char* suf : {"_pta", "_fine", "_pred"}) {
      if (suffix_of(h, suf)) {
        const std::string name = h.substr(0, h.size() - std::string(suf).size());
        if (seen.insert("obs:" + name).second) r.observables.push_back(name);
      }
    }
  }
  const bool pta = !r.observables.empty() && col.count(r.observables[0] + "_pta");
  const bool fine = !r.observables.empty() && col.count(r.observables[0] + "_fine");
  const bool pred = !r.observables.empty() && col.count(r.observables[0] + "_pred");
  const bool steps = col.count("status") != 0;
  if (pta) r.pta.assign(r.observables.size(), {});
  if (fine) r.fine.assign(r.observables.size(), {});
  if (pta) r.pta_load.assign(r.loads.size(), {});
  if (fine) r.fine_load.assign(r.loads.size(), {});

  auto at = [&](const std::vector<std::string>& row, const std::string& name) -> const std::string& {
    auto it = col.find(name);
    if (it == col.end() || it->second >= row.size()) throw ConfigError("missing column " + name);
    return row[it->second];
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto row = split(line);
    if (row.size() != head.size()) throw ConfigError("CSV row width differs from header");
    r.times.push_back(cell_double(row[0], "t"));
    StepOutcome s;
    for (std::size_t j = 0; j < r.observables.size(); ++j) {
      const auto& o = r.observables[j];
      if (pta) {
        r.pta[j].push_back(cell_double(at(row, o + "_pta"), o + "_pta"));
        s.v_acc.push_back(r.pta[j].back());
      }
      if (fine) r.fine[j].push_back(cell_double(at(row, o + "_fine"), o + "_fine"));
      if (pred && !at(row, o + "_pred").empty()) s.v_pred.push_back(cell_double(at(row, o + "_pred"), o));
    }
    for (std::size_t j = 0; j < r.loads.size(); ++j) {
      const auto& l = r.loads[j];
      if (pta) {
        r.pta_load[j].push_back(cell_double(at(row, "load_" + l + "_pta"), l));
        s.load.push_back(r.pta_load[j].back());
      }
      if (fine) r.fine_load[j].push_back(cell_double(at(row, "load_" + l + "_fine"), l));
    }
    if (steps) {
      s.t = r.times.back();
      s.status = parse_status(at(row, "status"));
      s.retries = static_cast<int>(cell_double(at(row, "retries"), "retries"));
      s.N_t = static_cast<std::size_t>(cell_double(at(row, "N_t"), "N_t"));
      r.steps.push_back(std::move(s));
    }
  }
  r.check();
  return r;
}

void read_timing_csv(std::istream& is, RunReport& r) {
  std::string line;
  std::getline(is, line);
  std::size_t k = 0;
  r.timings.pta_step_ms.clear();
  r.timings.fine_step_ms.clear();
  while (std::getline(is, line) && !line.empty()) {
    const auto row = split(line);
    if (row.size() != 5) throw ConfigError("timing row must have five cells");
    if (!row[1].empty()) r.timings.pta_step_ms.push_back(cell_double(row[1], "pta_step_ms"));
    if (k < r.steps.size()) {
      if (!row[2].empty()) r.steps[k].burst_ms = cell_double(row[2], "burst_ms");
      if (!row[3].empty()) r.steps[k].overhead_ms = cell_double(row[3], "overhead_ms");
    }
    if (!row[4].empty()) r.timings.fine_step_ms.push_back(cell_double(row[4], "fine_step_ms"));
    ++k;
  }
  std::getline(is, line);
  if (std::getline(is, line)) {
    const auto row = split(line);
    if (row.size() != 3) throw ConfigError("timing totals row must have three cells");
    r.timings.pta_init_ms = cell_double(row[0], "pta_init_ms");
    r.timings.pta_total_ms = cell_double(row[1], "pta_total_ms");
    r.timings.fine_total_ms = cell_double(row[2], "fine_total_ms");
  }
}

SavedPaths save_report(const RunReport& r, const std::string& dir, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  SavedPaths p;
  p.csv = (fs::path(dir) / (stem + ".csv")).string();
  p.timing = (fs::path(dir) / (stem + "_timing.csv")).string();
  p.config = (fs::path(dir) / (stem + "_config.txt")).string();
  auto open = [](const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    return f;
  };
  {
    auto f = open(p.csv);
    write_csv(r, f);
  }
  {
    auto f = open(p.timing);
    write_timing_csv(r, f);
  }
  {
    auto f = open(p.config);
    f << "model = " << r.model << '\n';
    for (const auto& [k, v] : r.config_echo) f << k << " = " << v << '\n';
  }
  return p;
}

RunReport load_report(const std::string& csv_path) {
  std::ifstream f(csv_path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + csv_path);
  RunReport r = read_csv(f);
  const std::string base = csv_path.substr(0, csv_path.size() - 4);
  if (std::ifstream t(base + "_timing.csv", std::ios::binary); t) read_timing_csv(t, r);
  if (std::ifstream c(base + "_config.txt", std::ios::binary); c) {
    std::string line;
    while (std::getline(c, line)) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      const std::string k = line.substr(0, eq), v = line.substr(eq + 3);
      if (k == "model")
        r.model = v;
      else
        r.config_echo.emplace_back(k, v);
    }
  }
  return r;
}

// ---------------------------------------------------------------- metrics

ErrorValue error_percent(double v_pta, double v_f) {
  if (v_f == 0.0) return {v_pta - v_f, true};
  return {(v_pta - v_f) / v_f * 100.0, false};
}

Speedup speedup(const RunReport& fine, const RunReport& pta) {
  if (!(pta.timings.pta_total_ms > 0.0)) throw ContractError("PTA run has no recorded time");
  Speedup s;
  s.exact = fine.timings.fine_total_ms / pta.timings.pta_total_ms;
  auto tail_mean = [](const std::vector<double>& v) {
    if (v.size() < 2) throw ContractError("speedup needs at least one coarse step");
    double sum = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) sum += v[i];
    return sum / static_cast<double>(v.size() - 1);
  };
  const double p = tail_mean(pta.timings.pta_step_ms);
  if (!(p > 0.0)) throw ContractError("PTA steps have no recorded time");
  s.asymptotic = tail_mean(fine.timings.fine_step_ms) / p;
  return s;
}

double CubicFit::operator()(double x) const {
  return coeffs[0] + x * (coeffs[1] + x * (coeffs[2] + x * coeffs[3]));
}

CubicFit fit_cubic(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw FitError("x and y lengths differ");
  std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() < 4) throw FitError("cubic fit needs at least four distinct abscissae");
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = x[static_cast<std::size_t>(i)] / scale;
    A(i, 0) = 1.0;
    A(i, 1) = u;
    A(i, 2) = u * u;
    A(i, 3) = u * u * u;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < 4) throw FitError("cubic fit is rank deficient");
  const Eigen::VectorXd c = qr.solve(b);
  CubicFit f;
  double s = 1.0;
  for (int k = 0; k < 4; ++k) {
    f.coeffs[static_cast<std::size_t>(k)] = c(k) / s;
    s *= scale;
  }
  return f;
}

double max_error_percent(const RunReport& r, std::size_t j) {
  if (!r.has_pta() || !r.has_fine()) throw ContractError("error needs both runs");
  double m = 0.0;
  for (std::size_t k = 1; k < r.times.size(); ++k) {
    const ErrorValue e = error_percent(r.pta[j][k], r.fine[j][k]);
    if (!e.is_absolute) m = std::max(m, std::abs(e.value));
  }
  return m;
}

// ----------------------------------------------------------------- sweeps

namespace {

SweepPoint sweep_point(const std::string& model, const Config& cfg, double value) {
  ModelSetup m = make_model(model, cfg);
  m.config.threads = 1;
  const Problem prob = m.problem();
  const RunReport fine = run_fine_reference(prob, m.config);
  const RunReport pta = run_pta(prob, m.config);
  SweepPoint p;
  p.value = value;
  p.report = merge_reports(pta, fine);
  p.report.config_echo = describe(m);
  p.speedup = speedup(fine, pta);
  for (std::size_t j = 0; j < p.report.observables.size(); ++j)
    p.max_err_pct.push_back(max_error_percent(p.report, j));
  return p;
}

}  // namespace

std::vector<SweepPoint> sweep_eps(const std::string& model, const Config& base,
                                  const std::vector<double>& eps) {
  std::vector<SweepPoint> out;
  for (double e : eps) {
    Config c = base;
    c.set("epsilon", format_double(e));
    out.push_back(sweep_point(model, c, e));
  }
  return out;
}

std::vector<SweepPoint> sweep_h(const std::string& model, const Config& base,
                                const std::vector<double>& h) {
  std::vector<SweepPoint> out;
  for (double v : h) {
    Config c = base;
    c.set("h", format_double(v));
    out.push_back(sweep_point(model, c, v));
  }
  return out;
}

// ---------------------------------------------------------- power balance

PowerBalance power_balance(const ModelSetup& m, std::size_t settle_periods,
                           std::size_t measure_periods) {
  if (!m.spring) throw ConfigError("power balance applies to the springs models only");
  if (measure_periods == 0) throw ConfigError("measure_periods must be positive");
  const SpringParams& p = *m.spring;
  const PtaConfig& c = m.config;
  const double dsig = c.fine_step();
  const auto per = static_cast<std::size_t>(std::llround(c.fast_period / dsig));
  const Stepper stepper(c.integrator, *m.system, dsig, {});
  FineState s = m.initial;
  for (std::size_t i = 0; i < settle_periods * per; ++i) stepper.step(s);

  const std::size_t n = measure_periods * per;
  std::vector<FineState> win;
  win.reserve(n + 2);
  win.push_back(s);
  for (std::size_t i = 0; i < n + 1; ++i) {
    stepper.step(s);
    win.push_back(s);
  }
  PowerBalance b;
  double d = 0.0, in = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    d += dissipation(p, win[i].x);
    in += input_power(p, win[i].x, win[i].l);
  }
  b.dissipation = d / static_cast<double>(n);
  b.input_power = in / static_cast<double>(n);
  b.residual = power_balance_residual(p, win, dsig);
  b.target = p.eta * p.c2 * p.c2;
  return b;
}

std::vector<std::pair<std::string, std::string>> describe(const ModelSetup& m) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("epsilon", format_double(m.system->epsilon()));
  if (m.spring) {
    const SpringParams& p = *m.spring;
    for (auto [k, v] : std::initializer_list<std::pair<const char*, double>>{
             {"k1", p.k1}, {"k2", p.k2}, {"m1", p.m1}, {"m2", p.m2}, {"eta", p.eta},
             {"c1", p.c1}, {"c2", p.c2}, {"T_s", p.T_s}})
      out.emplace_back(k, format_double(v));
  }
  std::string x0, l0;
  for (std::size_t i = 0; i < m.initial.x.size(); ++i) x0 += (i ? "," : "") + format_double(m.initial.x[i]);
  for (std::size_t i = 0; i < m.initial.l.size(); ++i) l0 += (i ? "," : "") + format_double(m.initial.l[i]);
  out.emplace_back("initial_fast", x0);
  out.emplace_back("initial_load", l0);
  for (auto& kv : echo(m.config)) out.push_back(kv);
  return out;
}

}  // namespace pta
