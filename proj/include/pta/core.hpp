#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pta/errors.hpp"

namespace pta {

inline constexpr std::size_t kMaxDim = 8;

// Small fixed-capacity vector. States in this library never exceed a handful
// of components, so keeping them on the stack avoids allocation in the inner
// integration loops.
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n, double fill = 0.0);
  Vec(std::initializer_list<double> xs);
  static Vec from(std::span<const double> xs);

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double* begin() { return v_.data(); }
  double* end() { return v_.data() + n_; }
  const double* begin() const { return v_.data(); }
  const double* end() const { return v_.data() + n_; }
  std::span<const double> span() const { return {v_.data(), n_}; }
  std::vector<double> to_vector() const { return {begin(), end()}; }

  Vec& operator+=(const Vec& o);
  Vec& operator-=(const Vec& o);
  Vec& operator*=(double s);

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend bool operator==(const Vec& a, const Vec& b);

 private:
  std::array<double, kMaxDim> v_{};
  std::size_t n_ = 0;
};

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double distance(const Vec& a, const Vec& b);
bool all_finite(const Vec& a);

struct FineState {
  Vec x;  // fast components
  Vec l;  // slow load
  double sigma = 0.0;
};

struct Trajectory {
  double dsigma = 0.0;
  std::vector<FineState> samples;
};

// Throws ContractError unless the trajectory is non-empty, uniformly spaced
// and of constant dimension.
void validate(const Trajectory& tr, double rel_tol = 1e-9);

struct TimeScales {
  double T_f = 1.0;
  double T_s = 1.0;
  double epsilon() const { return T_f / T_s; }
  static TimeScales make(double T_f, double T_s);
};

// x' = F(x,l) + eps G(x,l),  l' = eps L(x,l)  in fast time sigma.
class SlowFastSystem {
 public:
  SlowFastSystem(std::string label, std::size_t n, std::size_t m, double epsilon);
  virtual ~SlowFastSystem() = default;

  virtual void fast(const Vec& x, const Vec& l, Vec& out) const = 0;
  virtual void drift(const Vec& x, const Vec& l, Vec& out) const;
  virtual void load_rate(const Vec& x, const Vec& l, Vec& out) const;

  // Full fine right-hand side with an effective coupling eps. frozen_load
  // zeroes the load rate. Systems may override for speed.
  virtual void fine_rhs(const Vec& x, const Vec& l, double eps, bool frozen_load, Vec& dx,
                        Vec& dl) const;

  virtual std::vector<std::string> fast_names() const;
  virtual std::vector<std::string> load_names() const;
  // Per-component weights for distances between fast states; empty means 1.
  virtual Vec distance_weights() const { return Vec(0); }

  const std::string& label() const { return label_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  double epsilon() const { return eps_; }

 private:
  std::string label_;
  std::size_t n_;
  std::size_t m_;
  double eps_;
};

using VecMap = std::function<Vec(const Vec& x, const Vec& l)>;

// System assembled from plain callables; G and L may be empty (zero).
class FunctionSystem final : public SlowFastSystem {
 public:
  FunctionSystem(std::string label, std::size_t n, std::size_t m, double epsilon, VecMap F,
                 VecMap G = {}, VecMap L = {});
  void fast(const Vec& x, const Vec& l, Vec& out) const override;
  void drift(const Vec& x, const Vec& l, Vec& out) const override;
  void load_rate(const Vec& x, const Vec& l, Vec& out) const override;

 private:
  VecMap F_, G_, L_;
};

struct FineDerivative {
  Vec dx;
  Vec dl;
};

FineDerivative eval_fine_rhs(const SlowFastSystem& sys, const FineState& s);
FineDerivative eval_fine_rhs_frozen_load(const SlowFastSystem& sys, const FineState& s);

}  // namespace pta
