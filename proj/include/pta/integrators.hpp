#pragma once

#include <cstddef>
#include <functional>

#include "pta/core.hpp"
#include "pta/springs.hpp"

namespace pta {

enum class IntegratorKind { RK4, VerletDamped };

IntegratorKind parse_integrator(const std::string& name);
std::string to_string(IntegratorKind k);

struct BurstOptions {
  bool frozen_load = false;   // dl/dsigma = 0
  bool zero_epsilon = false;  // drop every eps-coupled term
};

using RhsFunction = std::function<void(const FineState& s, Vec& dx, Vec& dl)>;

FineState rk4_step(const RhsFunction& rhs, const FineState& s, double dsigma);

// Damped velocity Verlet for the two-spring system. Wall positions in the
// accelerations are those at the start of the step.
FineState verlet_damped_step(const SpringsSystem& sys, const FineState& s, double dsigma,
                             bool frozen_load);

// Reusable single-step advancer bound to a system. step() works in place and
// throws NumericError if the new state is not finite.
class Stepper {
 public:
  Stepper(IntegratorKind kind, const SlowFastSystem& sys, double dsigma, BurstOptions opts = {});

  void step(FineState& s) const;
  double dsigma() const { return dsigma_; }
  const SlowFastSystem& system() const { return *sys_; }
  const BurstOptions& options() const { return opts_; }
  IntegratorKind kind() const { return kind_; }

 private:
  void rk4(FineState& s) const;
  void verlet(FineState& s) const;

  IntegratorKind kind_;
  const SlowFastSystem* sys_;
  const SpringsSystem* springs_ = nullptr;
  double dsigma_;
  double eps_;
  BurstOptions opts_;
};

enum class SinkPolicy { KeepAll, KeepTail, KeepNone };

struct Sink {
  SinkPolicy policy = SinkPolicy::KeepAll;
  std::size_t tail = 0;
  // called for every new sample i = 1..n_steps
  std::function<void(std::size_t i, const FineState& s)> on_sample;
};

// KeepAll returns the initial state followed by all n_steps samples; KeepTail
// returns the last `tail` samples; KeepNone returns only the final state.
Trajectory integrate(IntegratorKind kind, const SlowFastSystem& sys, const FineState& s0,
                     double dsigma, std::size_t n_steps, const Sink& sink = {},
                     BurstOptions opts = {});

}  // namespace pta
