#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "delaynet/error.hpp"

namespace delaynet {

/// Lipschitz activation f_j with its constant F_j. An optional input scale
/// d turns f(u) into f(d*u) (and F into d*F), which is what a coordinate
/// rescaling y = x/d does to the activations.
class Activation {
 public:
  enum class Kind { Tanh, Saturating, Identity, Tabulated };

  /// f(u) = tanh(gain * u), F = gain.
  static Activation tanh(double gain) {
    if (!(gain > 0.0) || !std::isfinite(gain)) throw InputError("tanh gain must be positive");
    Activation a(Kind::Tanh);
    a.p0_ = gain;
    return a;
  }

  /// f(u) = clamp(slope * u, -cap, cap), F = slope.
  static Activation saturating(double slope, double cap) {
    if (!(slope > 0.0) || !std::isfinite(slope)) throw InputError("saturating slope must be positive");
    if (!(cap > 0.0) || !std::isfinite(cap)) throw InputError("saturating cap must be positive");
    Activation a(Kind::Saturating);
    a.p0_ = slope;
    a.p1_ = cap;
    return a;
  }

  static Activation identity() { return Activation(Kind::Identity); }

  /// Piecewise-linear interpolation through (u_k, f_k), constant beyond the
  /// end points. The declared constant must dominate every segment slope.
  static Activation tabulated(std::vector<double> u, std::vector<double> f, double lipschitz) {
    if (u.size() < 2 || u.size() != f.size())
      throw InputError("tabulated activation needs >= 2 matching (u, f) samples");
    for (std::size_t k = 0; k < u.size(); ++k)
      if (!std::isfinite(u[k]) || !std::isfinite(f[k])) throw InputError("tabulated samples must be finite");
    for (std::size_t k = 1; k < u.size(); ++k)
      if (!(u[k] > u[k - 1])) throw InputError("tabulated u grid must be strictly increasing");
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz))
      throw InputError("tabulated lipschitz constant must be nonnegative");
    double steepest = 0.0;
    for (std::size_t k = 1; k < u.size(); ++k)
      steepest = std::max(steepest, std::abs(f[k] - f[k - 1]) / (u[k] - u[k - 1]));
    if (steepest > lipschitz * (1.0 + 1e-12))
      throw InputError("declared lipschitz constant " + std::to_string(lipschitz) +
                       " is below the table's steepest slope " + std::to_string(steepest));
    Activation a(Kind::Tabulated);
    a.p0_ = lipschitz;
    a.u_ = std::move(u);
    a.f_ = std::move(f);
    return a;
  }

  double operator()(double u) const { return base(scale_ * u); }

  double lipschitz() const { return scale_ * base_lipschitz(); }

  Kind kind() const { return kind_; }
  double input_scale() const { return scale_; }
  double gain() const { return p0_; }
  double slope() const { return p0_; }
  double cap() const { return p1_; }
  const std::vector<double>& table_u() const { return u_; }
  const std::vector<double>& table_f() const { return f_; }

  Activation with_input_scale(double d) const {
    if (!(d > 0.0) || !std::isfinite(d)) throw InputError("input scale must be positive");
    Activation out = *this;
    out.scale_ *= d;
    return out;
  }

 private:
  explicit Activation(Kind k) : kind_(k) {}

  double base(double u) const {
    switch (kind_) {
      case Kind::Tanh: return std::tanh(p0_ * u);
      case Kind::Saturating: return std::clamp(p0_ * u, -p1_, p1_);
      case Kind::Identity: return u;
      case Kind::Tabulated: {
        if (u <= u_.front()) return f_.front();
        if (u >= u_.back()) return f_.back();
        auto hi = static_cast<std::size_t>(std::upper_bound(u_.begin(), u_.end(), u) - u_.begin());
        std::size_t lo = hi - 1;
        double w = (u - u_[lo]) / (u_[hi] - u_[lo]);
        return f_[lo] + w * (f_[hi] - f_[lo]);
      }
    }
    return 0.0;
  }

  double base_lipschitz() const {
    switch (kind_) {
      case Kind::Tanh:
      case Kind::Saturating:
      case Kind::Tabulated: return p0_;
      case Kind::Identity: return 1.0;
    }
    return 0.0;
  }

  Kind kind_;
  double p0_ = 0.0;
  double p1_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> u_;
  std::vector<double> f_;
};

}  // namespace delaynet
