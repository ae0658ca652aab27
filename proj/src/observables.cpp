#include "pta/observables.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace pta {

void ConvergenceCriterion::validate() const {
  if (!(tol1 > 0.0) || !std::isfinite(tol1)) throw ConfigError("tol1 must be positive");
  if (!(tol2 > 0.0) || !std::isfinite(tol2)) throw ConfigError("tol2 must be positive");
  if (k == 0) throw ConfigError("checkpoint stride k must be positive");
  if (p == 0) throw ConfigError("checkpoint count p must be positive");
}

RunningAverage::RunningAverage(std::size_t n_obs, ConvergenceCriterion crit,
                               std::vector<double> abs_tols)
    : n_(n_obs), crit_(crit), abs_tol_(std::move(abs_tols)), sum_(n_obs, 0.0),
      ring_(crit.p + 1, std::vector<double>(n_obs, 0.0)) {
  crit_.validate();
  if (n_obs == 0) throw ConfigError("running average needs at least one measurement");
  if (abs_tol_.empty()) abs_tol_.assign(n_obs, crit.tol2);
  if (abs_tol_.size() != n_obs) throw ConfigError("one absolute tolerance per measurement");
}

void RunningAverage::reset() {
  std::fill(sum_.begin(), sum_.end(), 0.0);
  ring_count_ = 0;
  count_ = 0;
  skipped_ = 0;
  converged_ = false;
}

std::vector<double> RunningAverage::means() const {
  std::vector<double> m(n_, 0.0);
  if (count_ == 0) return m;
  for (std::size_t i = 0; i < n_; ++i) m[i] = sum_[i] / static_cast<double>(count_);
  return m;
}

bool RunningAverage::push(std::span<const double> values) {
  if (values.size() != n_) throw ContractError("sample width does not match measurement count");
  if (skipped_ < crit_.n_min) {
    ++skipped_;
    return converged_ = false;
  }
  for (std::size_t i = 0; i < n_; ++i) sum_[i] += values[i];
  ++count_;
  if (count_ % crit_.k != 0) return converged_ = false;
  auto& slot = ring_[ring_count_ % ring_.size()];
  for (std::size_t i = 0; i < n_; ++i) slot[i] = sum_[i] / static_cast<double>(count_);
  ++ring_count_;
  if (ring_count_ < ring_.size()) return converged_ = false;
  return converged_ = check();
}

bool RunningAverage::check() const {
  const std::size_t slots = ring_.size();
  // oldest checkpoint, m_{I-pk}
  const auto& base = ring_[ring_count_ % slots];
  for (std::size_t i = 0; i < n_; ++i) {
    const double ref = base[i];
    const double tol2 = abs_tol_[i];
    const bool relative = std::abs(ref) >= tol2;
    for (std::size_t j = 0; j < slots; ++j) {
      const double m = ring_[j][i];
      if (relative) {
        if (std::abs(m - ref) > crit_.tol1 * std::abs(ref)) return false;
      } else {
        if (std::abs(m) > tol2) return false;
      }
    }
  }
  return true;
}

RunningAverageResult running_average(const SampleStream& next,
                                     const std::vector<Measurement>& ms,
                                     const ConvergenceCriterion& crit) {
  std::vector<double> tols;
  for (const auto& m : ms) tols.push_back(m.abs_tol.value_or(crit.tol2));
  RunningAverage avg(ms.size(), crit, tols);
  std::vector<double> vals(ms.size());
  RunningAverageResult res;
  while (true) {
    auto s = next();
    if (!s) throw NoConvergence("sample stream ended before convergence", avg.means(), avg.seen());
    for (std::size_t i = 0; i < ms.size(); ++i) vals[i] = ms[i](*s);
    res.last = std::move(*s);
    if (avg.push(vals)) break;
  }
  res.R = avg.means();
  res.N = avg.count();
  return res;
}

double rate_of_change(double R_t, double R_t_minus_delta, double delta) {
  if (!(delta > 0.0)) throw ConfigError("rate window must be positive");
  return (R_t - R_t_minus_delta) / delta;
}

double extrapolate(double v, double rate, double h) { return v + h * rate; }

double window_average(std::span<const FineState> window, const Measurement& m,
                      std::size_t expected_len) {
  if (window.size() != expected_len)
    throw ContractError("window holds " + std::to_string(window.size()) + " samples, expected " +
                        std::to_string(expected_len));
  if (window.empty()) throw ContractError("empty window");
  double s = 0.0;
  for (const auto& st : window) s += m(st);
  return s / static_cast<double>(window.size());
}

double simpson_observable(const std::array<double, 3>& R) {
  return (R[0] + 4.0 * R[1] + R[2]) / 6.0;
}

double simpson_integrate(std::span<const double> f, double dt) {
  if (f.size() < 3 || f.size() % 2 == 0)
    throw ContractError("composite Simpson needs an odd number (>= 3) of samples");
  double s = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * dt / 3.0;
}

double support_max(std::span<const FineState> window, const Vec& e) {
  if (window.empty()) throw ContractError("empty window");
  if (std::abs(norm(e) - 1.0) > 1e-12) throw ContractError("direction must be a unit vector");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : window) best = std::max(best, dot(s.x, e));
  return best;
}

}  // namespace pta
