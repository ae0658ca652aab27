#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pta/core.hpp"

namespace pta {

// Scalar function of the fine state. Values are reported divided by
// `normalization`; everything downstream works in those normalized units.
struct Measurement {
  std::string name;
  std::function<double(const Vec& x, const Vec& l)> f;
  double normalization = 1.0;
  // absolute floor used when comparing predicted and computed slow values
  double match_floor = 1e-6;
  // replaces the criterion's tol2 for this measurement when set
  std::optional<double> abs_tol;

  double operator()(const Vec& x, const Vec& l) const { return f(x, l) / normalization; }
  double operator()(const FineState& s) const { return f(s.x, s.l) / normalization; }
};

struct ConvergenceCriterion {
  double tol1 = 1e-2;     // relative
  double tol2 = 1e-5;     // absolute fallback near zero
  std::size_t k = 1;      // checkpoint stride, samples
  std::size_t p = 5;      // checkpoints compared
  std::size_t n_min = 0;  // leading samples discarded as initial transient

  void validate() const;
};

// Streaming running mean of several measurements with a convergence test on
// checkpointed means m_{I}, m_{I-k}, ..., m_{I-pk}.
class RunningAverage {
 public:
  RunningAverage(std::size_t n_obs, ConvergenceCriterion crit, std::vector<double> abs_tols = {});

  // Returns true once every observable has converged at the current sample.
  bool push(std::span<const double> values);
  bool converged() const { return converged_; }
  std::size_t count() const { return count_; }  // samples in the mean
  std::size_t seen() const { return count_ + skipped_; }
  std::vector<double> means() const;
  void reset();

 private:
  bool check() const;

  std::size_t n_;
  ConvergenceCriterion crit_;
  std::vector<double> abs_tol_;
  std::vector<double> sum_;
  std::vector<std::vector<double>> ring_;  // checkpoint means, p+1 slots
  std::size_t ring_count_ = 0;
  std::size_t count_ = 0;
  std::size_t skipped_ = 0;
  bool converged_ = false;
};

struct RunningAverageResult {
  std::vector<double> R;
  std::size_t N = 0;
  FineState last;
};

using SampleStream = std::function<std::optional<FineState>()>;

// Pulls samples until the criterion holds; throws NoConvergence when the
// stream runs dry first.
RunningAverageResult running_average(const SampleStream& next,
                                     const std::vector<Measurement>& ms,
                                     const ConvergenceCriterion& crit);

double rate_of_change(double R_t, double R_t_minus_delta, double delta);
double extrapolate(double v, double rate, double h);

double window_average(std::span<const FineState> window, const Measurement& m,
                      std::size_t expected_len);

double simpson_observable(const std::array<double, 3>& R);

// Composite Simpson over an odd number of equally spaced samples.
double simpson_integrate(std::span<const double> f, double dt);

// max over the window of x . e; e must be a unit vector in the fast space.
double support_max(std::span<const FineState> window, const Vec& e);

struct HObservable {
  Measurement m;
  double delta;
  std::size_t window_len;
};

}  // namespace pta
