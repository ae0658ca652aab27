#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "pta/core.hpp"

namespace pta {

// Two masses joined by a dashpot, each tied by a spring to a wall that
// translates at constant speed. State x = (x1, y1, x2, y2) with y the
// dimensional velocity, load l = (w1, w2).
struct SpringParams {
  double k1 = 1e7;
  double k2 = 1e7;
  double m1 = 1.0;
  double m2 = 2.0;
  double eta = 5e3;
  double c1 = 0.0;
  double c2 = 1e-6;
  double T_s = 1e4;

  double T_f() const { return 2.0 * std::numbers::pi * std::sqrt(m1 / k1); }
  double epsilon() const { return T_f() / T_s; }
  void validate() const;
};

class SpringsSystem final : public SlowFastSystem {
 public:
  explicit SpringsSystem(const SpringParams& p);

  const SpringParams& params() const { return p_; }

  void fast(const Vec& x, const Vec& l, Vec& out) const override;
  void load_rate(const Vec& x, const Vec& l, Vec& out) const override;
  void fine_rhs(const Vec& x, const Vec& l, double eps, bool frozen_load, Vec& dx,
                Vec& dl) const override;
  std::vector<std::string> fast_names() const override { return {"x1", "y1", "x2", "y2"}; }
  std::vector<std::string> load_names() const override { return {"w1", "w2"}; }
  // velocities divided by the first spring's angular frequency, in length units
  Vec distance_weights() const override;

  // dy/dsigma for each mass
  double a1(double x1, double y1, double y2, double w1) const {
    return -tf_ * (r1_ * (x1 - w1) - e1_ * (y2 - y1));
  }
  double a2(double x2, double y1, double y2, double w2) const {
    return -tf_ * (r2_ * (x2 - w2) + e2_ * (y2 - y1));
  }
  double T_f() const { return tf_; }

 private:
  SpringParams p_;
  double tf_, r1_, r2_, e1_, e2_;
};

}  // namespace pta
