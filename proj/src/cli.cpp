#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "pta/driver.hpp"
#include "pta/harness.hpp"
#include "pta/oracles.hpp"

namespace pta {

namespace {

struct Job {
  std::string model;
  std::string config_path;
  std::string out = ".";
  std::string eps_list;
  std::string h_list;
};

Config load_config(const Job& j) {
  return j.config_path.empty() ? Config{} : Config::load_file(j.config_path);
}

void reject_unused(const Config& cfg) {
  const auto left = cfg.unused();
  if (left.empty()) return;
  std::string msg = "unknown config keys:";
  for (const auto& k : left) msg += " " + k;
  throw ConfigError(msg);
}

void apply_thread_env(const Config& cfg, ModelSetup& m) {
  const char* env = std::getenv("PTA_THREADS");
  if (!env || !*env) return;
  const double v = parse_double(env, "PTA_THREADS");
  if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("PTA_THREADS must be a positive integer");
  const auto n = static_cast<std::size_t>(v);
  m.config.threads = cfg.has("threads") ? std::min(m.config.threads, n) : n;
}

ModelSetup setup(const Job& j, Config& cfg) {
  ModelSetup m = make_model(j.model, cfg);
  apply_thread_env(cfg, m);
  return m;
}

std::size_t count_jumps(const RunReport& r) {
  std::size_t n = 0;
  for (const auto& s : r.steps) n += s.status == StepStatus::JumpDetected;
  return n;
}

int cmd_run(const Job& j, bool pta) {
  Config cfg = load_config(j);
  ModelSetup m = setup(j, cfg);
  reject_unused(cfg);
  const Problem prob = m.problem();
  RunReport r;
  try {
    r = pta ? run_pta(prob, m.config) : run_fine_reference(prob, m.config);
  } catch (StepFailed& e) {
    e.partial.config_echo = describe(m);
    save_report(e.partial, j.out, j.model + "_pta_partial");
    std::cerr << e.diagnostics << '\n';
    throw;
  }
  r.config_echo = describe(m);
  const auto paths = save_report(r, j.out, j.model + (pta ? "_pta" : "_fine"));
  std::cout << paths.csv << '\n';
  if (pta) std::cout << "jumps: " << count_jumps(r) << '\n';
  return 0;
}

int cmd_compare(const Job& j) {
  Config cfg = load_config(j);
  ModelSetup m = setup(j, cfg);
  reject_unused(cfg);
  const Problem prob = m.problem();
  const RunReport fine = run_fine_reference(prob, m.config);
  const RunReport pta = run_pta(prob, m.config);
  RunReport r = merge_reports(pta, fine);
  r.config_echo = describe(m);
  const auto paths = save_report(r, j.out, j.model + "_compare");
  std::cout << paths.csv << '\n';
  std::cout << "observable,max_err_pct\n";
  for (std::size_t i = 0; i < r.observables.size(); ++i)
    std::cout << r.observables[i] << ',' << format_double(max_error_percent(r, i)) << '\n';
  const Speedup s = speedup(fine, pta);
  std::cout << "speedup_exact," << format_double(s.exact) << "\nspeedup_asymptotic,"
            << format_double(s.asymptotic) << '\n';
  return 0;
}

int cmd_sweep(const Job& j, bool eps) {
  Config cfg = load_config(j);
  const auto values = parse_list(eps ? j.eps_list : j.h_list, eps ? "--eps" : "--h");
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  {
    // validate keys once before the timed runs
    Config probe = cfg;
    probe.set(eps ? "epsilon" : "h", format_double(values.front()));
    make_model(j.model, probe);
    reject_unused(probe);
  }
  const auto pts = eps ? sweep_eps(j.model, cfg, values) : sweep_h(j.model, cfg, values);
  std::filesystem::create_directories(j.out);
  const std::string path =
      (std::filesystem::path(j.out) / (j.model + (eps ? "_sweep_eps.csv" : "_sweep_h.csv"))).string();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  std::ostringstream head;
  head << (eps ? "epsilon" : "h") << ",S_exact,S_asymptotic";
  for (const auto& o : pts.front().report.observables) head << ',' << o << "_max_err_pct";
  f << head.str() << '\n';
  std::cout << head.str() << '\n';
  std::vector<double> xs, ss;
  for (const auto& p : pts) {
    std::ostringstream row;
    row << format_double(p.value) << ',' << format_double(p.speedup.exact) << ','
        << format_double(p.speedup.asymptotic);
    for (double e : p.max_err_pct) row << ',' << format_double(e);
    f << row.str() << '\n';
    std::cout << row.str() << '\n';
    xs.push_back(p.value);
    ss.push_back(p.speedup.asymptotic);
  }
  if (eps && xs.size() >= 4) {
    const CubicFit fit = fit_cubic(xs, ss);
    std::cout << "cubic_fit," << format_double(fit.coeffs[0]) << ',' << format_double(fit.coeffs[1])
              << ',' << format_double(fit.coeffs[2]) << ',' << format_double(fit.coeffs[3]) << '\n';
    std::cout << "asymptotic_speedup," << format_double(fit.intercept()) << '\n';
  }
  return 0;
}

void emit(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  std::cout << "# " << path << '\n' << text;
}

double branch_root(double x, double lo, double hi) {
  // y - y^3 = x on a monotone bracket
  auto g = [x](double y) { return y - y * y * y - x; };
  double glo = g(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

int cmd_oracle(const Job& j) {
  Config cfg = load_config(j);
  ModelSetup m = make_model(j.model, cfg);
  reject_unused(cfg);
  std::ostringstream os;
  if (j.model == "rotating_planes") {
    Vec x0 = m.initial.x;
    x0 = (1.0 / norm(x0)) * x0;
    os << "sigma,x1,x2,x3,x4\n";
    const int n = 16;
    for (int i = 0; i <= n; ++i) {
      const double s = 2.0 * std::numbers::pi * i / n;
      const Vec x = rotating_planes_exact(x0, s);
      os << format_double(s);
      for (std::size_t k = 0; k < 4; ++k) os << ',' << format_double(x[k]);
      os << '\n';
    }
    emit(j.out, j.model + "_oracle.csv", os.str());
    return 0;
  }
  if (j.model == "relaxation") {
    const double fold = 2.0 / (3.0 * std::sqrt(3.0));
    const double knee = 1.0 / std::sqrt(3.0);
    os << "x,y_lower,y_upper\n";
    for (int i = -12; i <= 12; ++i) {
      const double x = 0.05 * i;
      const double lower = x >= -fold ? branch_root(x, -3.0, -knee) : std::nan("");
      const double upper = x <= fold ? branch_root(x, knee, 3.0) : std::nan("");
      os << format_double(x) << ',' << format_double(lower) << ',' << format_double(upper) << '\n';
    }
    os << "fold_x," << format_double(fold) << '\n';
    emit(j.out, j.model + "_oracle.csv", os.str());
    return 0;
  }

  const SpringParams& p = *m.spring;
  const Eigenmodes e = unforced_eigenmodes(p);
  const std::array<double, 4> x0{m.initial.x[0], m.initial.x[1], m.initial.x[2], m.initial.x[3]};
  const auto kappa = modal_coefficients(e, x0);
  std::ostringstream modes;
  modes << "mode,re,im,decaying,neutral,undeformed,x1,y1,x2,y2,kappa\n";
  for (int i = 0; i < 4; ++i) {
    modes << i + 1 << ',' << format_double(e.values[i].real()) << ',' << format_double(e.values[i].imag())
          << ',' << e.decaying[i] << ',' << e.neutral[i] << ',' << e.undeformed[i];
    for (double v : e.modes0[i]) modes << ',' << format_double(v);
    modes << ',' << format_double(kappa[i]) << '\n';
  }
  emit(j.out, j.model + "_modes.csv", modes.str());

  const double delta = m.config.delta;
  const std::size_t steps = m.config.coarse_steps();
  if (j.model == "springs_case1") {
    const double alpha0 = x0[0] - p.c2 * p.eta / p.k1;
    os << "t,tikhonov_x1,tikhonov_x2,qs_x1,qs_y1,qs_x2,qs_y2\n";
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * m.config.h;
      const SpringsState tk = tikhonov_limit(p, t);
      const SpringsState qs = quasistatic_solution(p, alpha0, t);
      os << format_double(t) << ',' << format_double(tk.x1) << ',' << format_double(tk.x2) << ','
         << format_double(qs.x1) << ',' << format_double(qs.y1) << ',' << format_double(qs.x2) << ','
         << format_double(qs.y2) << '\n';
    }
  } else {
    const SpringICs ic{x0[0], x0[2], x0[1], x0[3]};
    const Case2Coefficients c = case2_coefficients(p, ic);
    os << "C1,C2,C3,C4,p1,p2\n"
       << format_double(c.C1) << ',' << format_double(c.C2) << ',' << format_double(c.C3) << ','
       << format_double(c.C4) << ',' << format_double(c.p1) << ',' << format_double(c.p2) << '\n';
    os << "t,K_cf,U_cf,R2_cf\n";
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * m.config.h;
      const SpringAverages a = springs_case2_averages(p, ic, t + delta, delta, 20000, std::abs(c.C1) > 0.0);
      os << format_double(t) << ',' << format_double(a.K) << ',' << format_double(a.U) << ','
         << format_double(a.R2) << '\n';
    }
  }
  emit(j.out, j.model + "_oracle.csv", os.str());
  return 0;
}

int cmd_power(const Job& j) {
  Config cfg = load_config(j);
  ModelSetup m = setup(j, cfg);
  const auto settle = static_cast<std::size_t>(cfg.get_int("settle_periods", 200));
  const auto measure = static_cast<std::size_t>(cfg.get_int("measure_periods", 20));
  reject_unused(cfg);
  const PowerBalance b = power_balance(m, settle, measure);
  std::ostringstream os;
  os << "dissipation,input_power,residual,eta_c2_sq\n"
     << format_double(b.dissipation) << ',' << format_double(b.input_power) << ','
     << format_double(b.residual) << ',' << format_double(b.target) << '\n';
  emit(j.out, j.model + "_power.csv", os.str());
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"practical time averaging for slow-fast systems"};
  app.require_subcommand(1);
  Job job;
  std::string which;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("model", job.model, "model name")->required();
    sc->add_option("--config", job.config_path, "key = value configuration file");
    sc->add_option("--out", job.out, "output directory");
    sc->callback([&which, name] { which = name; });
    return sc;
  };
  add("run-pta", "coarse-stepping run");
  add("run-fine", "full fine reference");
  add("compare", "both runs with error table");
  add("sweep-eps", "speedup over epsilon")->add_option("--eps", job.eps_list, "comma separated")->required();
  auto* sh = add("sweep-h", "error over coarse step");
  sh->set_help_flag("--help", "print this help message and exit");
  sh->add_option("--h", job.h_list, "comma separated")->required();
  add("oracle", "closed-form tables");
  add("power-balance", "springs power balance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto names = model_names();
    if (std::find(names.begin(), names.end(), job.model) == names.end())
      throw ConfigError("unknown model '" + job.model + "'");
    if (which == "run-pta") return cmd_run(job, true);
    if (which == "run-fine") return cmd_run(job, false);
    if (which == "compare") return cmd_compare(job);
    if (which == "sweep-eps") return cmd_sweep(job, true);
    if (which == "sweep-h") return cmd_sweep(job, false);
    if (which == "oracle") return cmd_oracle(job);
    if (which == "power-balance") return cmd_power(job);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const NormalizationUndefined& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace pta
