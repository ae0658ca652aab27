#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pta/config.hpp"
#include "pta/core.hpp"
#include "pta/driver.hpp"
#include "pta/observables.hpp"
#include "pta/springs.hpp"

namespace pta {

// Rotation in the (x1,x3) and (x2,x4) planes plus radial attraction to the
// unit sphere; the drift slowly rotates the (x1,x2) plane.
class RotatingPlanes final : public SlowFastSystem {
 public:
  explicit RotatingPlanes(double eps);
  void fast(const Vec& x, const Vec& l, Vec& out) const override;
  void drift(const Vec& x, const Vec& l, Vec& out) const override;
  void fine_rhs(const Vec& x, const Vec& l, double eps, bool frozen_load, Vec& dx,
                Vec& dl) const override;
};

Vec gamma_map(const Vec& x);

// Fast (y, z, w) with the load x; y sits on a branch of 0 = -x + y - y^3 while
// (z - y, w) circles with radius 1/sqrt(8).
class RelaxationOscillator final : public SlowFastSystem {
 public:
  explicit RelaxationOscillator(double eps);
  void fast(const Vec& x, const Vec& l, Vec& out) const override;
  void load_rate(const Vec& x, const Vec& l, Vec& out) const override;
  void fine_rhs(const Vec& x, const Vec& l, double eps, bool frozen_load, Vec& dx,
                Vec& dl) const override;
  std::vector<std::string> fast_names() const override { return {"y", "z", "w"}; }
  std::vector<std::string> load_names() const override { return {"x"}; }
};

std::shared_ptr<SlowFastSystem> rotating_planes(double eps);
std::shared_ptr<SlowFastSystem> springs(const SpringParams& p);
std::shared_ptr<SlowFastSystem> relaxation_oscillator(double eps);

std::vector<Measurement> rotating_planes_measurements();
std::vector<Measurement> relaxation_measurements();

// K, U, R2. With nondimensionalize the scales come from the mass-weighted
// mean initial displacement; throws NormalizationUndefined when it vanishes.
std::vector<Measurement> springs_measurements(const SpringParams& p, double x1_0, double x2_0,
                                              bool nondimensionalize);

struct SpringScales {
  double C1 = 0.0;
  double K_max = 0.0;  // also U_max
  double R2_max = 0.0;
};
SpringScales spring_scales(const SpringParams& p, double x1_0, double x2_0);

double kinetic_energy(const SpringParams& p, const Vec& x);
double potential_energy(const SpringParams& p, const Vec& x, const Vec& l);
double reaction_r2(const SpringParams& p, const Vec& x, const Vec& l);
double dissipation(const SpringParams& p, const Vec& x);
double input_power(const SpringParams& p, const Vec& x, const Vec& l);

// Window mean of d(K+U)/dt - (R1 w1' + R2 w2' - eta (y2-y1)^2) using central
// differences in dimensional time.
double power_balance_residual(const SpringParams& p, std::span<const FineState> window,
                              double dsigma);

struct ModelSetup {
  std::string name;
  std::shared_ptr<SlowFastSystem> system;
  std::vector<Measurement> measurements;
  FineState initial;
  PtaConfig config;
  std::optional<SpringParams> spring;

  Problem problem() const { return {system.get(), measurements, initial, name}; }
};

std::vector<std::string> model_names();

// Builds a registered model; keys in cfg override the defaults. Keys the model
// does not understand are left unconsumed for the caller to reject.
ModelSetup make_model(const std::string& name, const Config& cfg = {});

// Applies PtaConfig keys (h, delta, tol1, ...) on top of `base`.
PtaConfig apply_pta_config(const Config& cfg, PtaConfig base);
std::vector<std::pair<std::string, std::string>> echo(const PtaConfig& c);

}  // namespace pta
