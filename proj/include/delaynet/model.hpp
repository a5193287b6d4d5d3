#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delaynet/activation.hpp"
#include "delaynet/error.hpp"
#include "delaynet/history.hpp"
#include "delaynet/sequence.hpp"

namespace delaynet {

/// (1 - e^{-a h}) / a, with the analytic limit h at a = 0.
inline double theta(double rate, double step) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw InputError("theta: rate must be nonnegative");
  if (!(step > 0.0) || !std::isfinite(step)) throw InputError("theta: step must be positive");
  if (rate == 0.0) return step;
  return -std::expm1(-rate * step) / rate;
}

using TimeSeries = std::function<double(Index)>;
using CouplingFn = std::function<double(Index, double)>;
using DelayFn = std::function<int(Index)>;

/// One interaction term h(m, u) = weight(m) * f(u) + offset(m), with
/// Lipschitz envelope |weight(m)| * F.
struct Interaction {
  Sequence weight;
  Activation activation = Activation::identity();
  Sequence offset;
};

/// The general discrete model
///   x_i(m+1) = c_i(m) x_i(m) + sum_j h_ij(m, x_j(m - tau_ij(m))).
/// Immutable after construction; the callables must be pure.
class HopfieldModel {
 public:
  HopfieldModel(std::size_t neurons, int max_delay, std::vector<TimeSeries> decay,
                std::vector<CouplingFn> coupling, std::vector<TimeSeries> envelope,
                std::vector<DelayFn> delay)
      : neurons_(neurons),
        max_delay_(max_delay),
        decay_(std::move(decay)),
        coupling_(std::move(coupling)),
        envelope_(std::move(envelope)),
        delay_(std::move(delay)) {
    if (neurons_ == 0) throw InputError("model needs at least one neuron");
    if (max_delay_ < 0) throw InputError("delay bound must be nonnegative");
    if (decay_.size() != neurons_) throw InputError("need one decay sequence per neuron");
    const std::size_t nn = neurons_ * neurons_;
    if (coupling_.size() != nn || envelope_.size() != nn || delay_.size() != nn)
      throw InputError("interaction, envelope and delay tables must be N x N");
  }

  /// Build from sequence tables: decay c_i, interactions (row-major N x N),
  /// and integer-valued delay sequences.
  static HopfieldModel from_tables(std::vector<Sequence> decay, std::vector<Interaction> coupling,
                                   std::vector<Sequence> delays, int max_delay) {
    const std::size_t n = decay.size();
    if (coupling.size() != n * n || delays.size() != n * n)
      throw InputError("interaction and delay tables must be N x N");
    std::vector<TimeSeries> c;
    std::vector<CouplingFn> h;
    std::vector<TimeSeries> env;
    std::vector<DelayFn> tau;
    for (auto& s : decay) {
      if (!(s.inf() > 0.0) || !(s.sup() < 1.0)) throw InputError("decay coefficients must lie in (0,1)");
      c.emplace_back([s](Index m) { return s(m); });
    }
    for (auto& it : coupling) {
      h.emplace_back([it](Index m, double u) { return it.weight(m) * it.activation(u) + it.offset(m); });
      env.emplace_back([it](Index m) { return std::abs(it.weight(m)) * it.activation.lipschitz(); });
    }
    for (auto& d : delays) {
      if (!d.is_integer_valued() || d.inf() < 0.0 || d.sup() > max_delay)
        throw InputError("delays must be integers in [0, max_delay]");
      tau.emplace_back([d](Index m) { return static_cast<int>(d(m)); });
    }
    return HopfieldModel(n, max_delay, std::move(c), std::move(h), std::move(env), std::move(tau));
  }

  std::size_t neurons() const { return neurons_; }
  int max_delay() const { return max_delay_; }

  double c(std::size_t i, Index m) const { return decay_[i](m); }
  double h(std::size_t i, std::size_t j, Index m, double u) const { return coupling_[i * neurons_ + j](m, u); }
  double envelope(std::size_t i, std::size_t j, Index m) const { return envelope_[i * neurons_ + j](m); }
  int tau(std::size_t i, std::size_t j, Index m) const { return delay_[i * neurons_ + j](m); }

  double envelope_row_sum(std::size_t i, Index m) const {
    double s = 0.0;
    for (std::size_t j = 0; j < neurons_; ++j) s += envelope(i, j, m);
    return s;
  }

  const CouplingFn& coupling_fn(std::size_t i, std::size_t j) const { return coupling_[i * neurons_ + j]; }
  const TimeSeries& envelope_fn(std::size_t i, std::size_t j) const { return envelope_[i * neurons_ + j]; }

  /// Check the type invariants on m = 0..probe_steps-1.
  void validate(Index probe_steps) const {
    for (Index m = 0; m < probe_steps; ++m) {
      for (std::size_t i = 0; i < neurons_; ++i) {
        double ci = c(i, m);
        if (!(ci > 0.0 && ci < 1.0))
          throw InputError("c_" + std::to_string(i) + "(" + std::to_string(m) + ") = " + std::to_string(ci) +
                           " is outside (0,1)");
        for (std::size_t j = 0; j < neurons_; ++j) {
          int t = tau(i, j, m);
          if (t < 0 || t > max_delay_) throw InputError("delay outside [0, max_delay] at m=" + std::to_string(m));
          if (!(envelope(i, j, m) >= 0.0)) throw InputError("negative Lipschitz envelope");
        }
      }
    }
  }

 private:
  std::size_t neurons_;
  int max_delay_;
  std::vector<TimeSeries> decay_;
  std::vector<CouplingFn> coupling_;
  std::vector<TimeSeries> envelope_;
  std::vector<DelayFn> delay_;
};

/// The specialized model
///   x_i(m+1) = x_i(m) e^{-a_i(m) h} + theta_i(m) [ sum_j b_ij(m) f_j(x_j(m - tau(m))) + I_i(m) ].
struct XuWuModel {
  std::size_t neurons = 0;
  double step = 1.0;
  std::vector<Sequence> rate;           // a_i
  std::vector<Sequence> weight;         // b_ij, row-major
  std::vector<Sequence> input;          // I_i
  std::vector<Activation> activation;   // f_j
  Sequence delay;                       // tau(m), integer valued
  int max_delay = 0;

  const Sequence& b(std::size_t i, std::size_t j) const { return weight[i * neurons + j]; }

  double decay(std::size_t i, Index m) const { return std::exp(-rate[i](m) * step); }
  double theta_at(std::size_t i, Index m) const { return theta(rate[i](m), step); }

  double rate_inf(std::size_t i) const { return rate[i].inf(); }
  double weight_sup(std::size_t i, std::size_t j) const { return b(i, j).sup_abs(); }
  double theta_sup(std::size_t i) const { return theta(rate_inf(i), step); }

  /// sum_j b_ij^+ F_j
  double coupling_bound(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < neurons; ++j) s += weight_sup(i, j) * activation[j].lipschitz();
    return s;
  }

  void validate(double rate_floor = 0.0) const {
    if (neurons == 0) throw InputError("model needs at least one neuron");
    if (!(step > 0.0) || !std::isfinite(step)) throw InputError("step size h must be positive");
    if (rate.size() != neurons || input.size() != neurons || activation.size() != neurons ||
        weight.size() != neurons * neurons)
      throw InputError("a, I, f must have N entries and b must be N x N");
    for (std::size_t i = 0; i < neurons; ++i)
      if (!(rate[i].inf() > rate_floor))
        throw InputError("a_" + std::to_string(i) + " must stay above " + std::to_string(rate_floor));
    if (max_delay < 0) throw InputError("max_delay must be nonnegative");
    if (!delay.is_integer_valued() || delay.inf() < 0.0 || delay.sup() > max_delay)
      throw InputError("tau(m) must be an integer in [0, max_delay]");
  }
};

/// A function of continuous time t >= 0.
class ContinuousFunction {
 public:
  enum class Kind { Constant, Samples, Sinusoid };

  static ContinuousFunction constant(double v) {
    ContinuousFunction f(Kind::Constant);
    f.a_ = v;
    return f;
  }

  /// Linear interpolation through (t_k, v_k); constant outside the grid.
  static ContinuousFunction samples(std::vector<double> t, std::vector<double> v) {
    if (t.empty() || t.size() != v.size()) throw InputError("sampled function needs matching t/value arrays");
    for (std::size_t k = 1; k < t.size(); ++k)
      if (!(t[k] > t[k - 1])) throw InputError("sample times must be strictly increasing");
    ContinuousFunction f(Kind::Samples);
    f.t_ = std::move(t);
    f.v_ = std::move(v);
    return f;
  }

  /// mean + amplitude * sin(2 pi t / period + phase)
  static ContinuousFunction sinusoid(double mean, double amplitude, double period, double phase) {
    if (!(period > 0.0)) throw InputError("sinusoid period must be positive");
    ContinuousFunction f(Kind::Sinusoid);
    f.a_ = mean;
    f.b_ = amplitude;
    f.c_ = period;
    f.d_ = phase;
    return f;
  }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::Constant: return a_;
      case Kind::Samples: {
        if (t <= t_.front()) return v_.front();
        if (t >= t_.back()) return v_.back();
        auto hi = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
        std::size_t lo = hi - 1;
        double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
        return v_[lo] + w * (v_[hi] - v_[lo]);
      }
      case Kind::Sinusoid: return a_ + b_ * std::sin(2.0 * std::numbers::pi * t / c_ + d_);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }

 private:
  explicit ContinuousFunction(Kind k) : kind_(k) {}
  Kind kind_;
  double a_ = 0.0, b_ = 0.0, c_ = 1.0, d_ = 0.0;
  std::vector<double> t_, v_;
};

/// k_ij(t, u) = weight(t) * f(u), envelope K_ij(t) = |weight(t)| * F.
struct ContinuousCoupling {
  ContinuousFunction weight = ContinuousFunction::constant(0.0);
  Activation activation = Activation::identity();
};

/// x_i'(t) = -a_i(t) x_i(t) + sum_j k_ij(t, x_j(t - alpha_ij(t))).
struct ContinuousHopfieldSpec {
  std::size_t neurons = 0;
  std::vector<ContinuousFunction> rate;        // a_i(t) >= 0
  std::vector<ContinuousCoupling> coupling;    // N x N row-major
  std::vector<ContinuousFunction> lag;         // alpha_ij(t), N x N row-major
  double max_lag = 0.0;                        // declared sup of alpha_ij
};

struct DiscretizeOptions {
  /// Samples of a_i(mh) below this floor are rejected. A floor of 0 admits
  /// a = 0 (c = 1, theta = h); raise it to keep c_i(m) strictly below 1.
  double rate_floor = 0.0;
  /// Indices m = 0..probe_steps-1 are sampled eagerly to validate the spec.
  Index probe_steps = 1000;
};

/// Exact one-step integration of the piecewise-constant approximation with
/// step h: c_i(m) = e^{-a_i(mh) h}, tau_ij(m) = floor(alpha_ij(mh)/h),
/// h_ij(m, u) = theta_i(m) k_ij(mh, u), H_ij(m) = theta_i(m) K_ij(mh).
inline HopfieldModel discretize(const ContinuousHopfieldSpec& spec, double step, DiscretizeOptions opts = {}) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InputError("discretize: step must be positive");
  const std::size_t n = spec.neurons;
  if (n == 0 || spec.rate.size() != n || spec.coupling.size() != n * n || spec.lag.size() != n * n)
    throw InputError("continuous spec: rate needs N entries, coupling and lag N x N");
  if (!(spec.max_lag >= 0.0)) throw InputError("continuous spec: max_lag must be nonnegative");

  auto shared = std::make_shared<const ContinuousHopfieldSpec>(spec);
  const double floor_rate = opts.rate_floor;
  auto rate_at = [shared, step, floor_rate](std::size_t i, Index m) {
    double a = shared->rate[i](static_cast<double>(m) * step);
    if (!(a > floor_rate) || !std::isfinite(a))
      throw InputError("a_" + std::to_string(i) + "(" + std::to_string(static_cast<double>(m) * step) +
                       ") = " + std::to_string(a) + " is not above the rate floor");
    return a;
  };
  const int tau = static_cast<int>(std::floor(spec.max_lag / step));

  std::vector<TimeSeries> c;
  std::vector<CouplingFn> h;
  std::vector<TimeSeries> env;
  std::vector<DelayFn> delay;
  for (std::size_t i = 0; i < n; ++i)
    c.emplace_back([rate_at, i, step](Index m) { return std::exp(-rate_at(i, m) * step); });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t ij = i * n + j;
      h.emplace_back([shared, rate_at, i, ij, step](Index m, double u) {
        const auto& k = shared->coupling[ij];
        return theta(rate_at(i, m), step) * k.weight(static_cast<double>(m) * step) * k.activation(u);
      });
      env.emplace_back([shared, rate_at, i, ij, step](Index m) {
        const auto& k = shared->coupling[ij];
        return theta(rate_at(i, m), step) * std::abs(k.weight(static_cast<double>(m) * step)) *
               k.activation.lipschitz();
      });
      delay.emplace_back([shared, ij, step, tau](Index m) {
        double lag = shared->lag[ij](static_cast<double>(m) * step);
        if (!(lag >= 0.0) || lag > shared->max_lag)
          throw InputError("alpha(" + std::to_string(static_cast<double>(m) * step) + ") = " + std::to_string(lag) +
                           " outside [0, max_lag]");
        return std::min(tau, static_cast<int>(std::floor(lag / step)));
      });
    }
  }
  HopfieldModel model(n, tau, std::move(c), std::move(h), std::move(env), std::move(delay));
  for (Index m = 0; m < opts.probe_steps; ++m)
    for (std::size_t i = 0; i < n; ++i) {
      (void)rate_at(i, m);
      for (std::size_t j = 0; j < n; ++j) (void)model.tau(i, j, m);
    }
  return model;
}

/// View the specialized model as a general one. The constant input is split
/// evenly over j: h_ij(m,u) = theta_i(m) (b_ij(m) f_j(u) + I_i(m)/N).
inline HopfieldModel as_general(const XuWuModel& model) {
  model.validate();
  auto shared = std::make_shared<const XuWuModel>(model);
  const std::size_t n = model.neurons;
  std::vector<TimeSeries> c;
  std::vector<CouplingFn> h;
  std::vector<TimeSeries> env;
  std::vector<DelayFn> delay;
  for (std::size_t i = 0; i < n; ++i) c.emplace_back([shared, i](Index m) { return shared->decay(i, m); });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      h.emplace_back([shared, i, j, n](Index m, double u) {
        return shared->theta_at(i, m) *
               (shared->b(i, j)(m) * shared->activation[j](u) + shared->input[i](m) / static_cast<double>(n));
      });
      env.emplace_back([shared, i, j](Index m) {
        return shared->theta_at(i, m) * std::abs(shared->b(i, j)(m)) * shared->activation[j].lipschitz();
      });
      delay.emplace_back([shared](Index m) { return static_cast<int>(shared->delay(m)); });
    }
  }
  return HopfieldModel(n, model.max_delay, std::move(c), std::move(h), std::move(env), std::move(delay));
}

struct ProbeGrid {
  double u_min = -2.0;
  double u_max = 2.0;
  std::size_t u_points = 41;
  Index m_begin = 0;
  Index m_end = 1;  // exclusive
};

struct LipschitzViolation {
  Index m;
  double u;
  double v;
  double ratio;
};

struct LipschitzReport {
  bool pass = true;
  /// max over grid pairs of |f(m,u) - f(m,v)| / (envelope(m) |u - v|); a
  /// nonzero difference against a zero envelope counts as +infinity.
  double worst_ratio = 0.0;
  std::optional<LipschitzViolation> first_violation;
  std::size_t pairs_checked = 0;
};

/// Brute-force check of |f(m,u) - f(m,v)| <= envelope(m) |u - v| over all
/// pairs of a uniform u grid and each m in [m_begin, m_end).
inline LipschitzReport lipschitz_probe(const CouplingFn& f, const TimeSeries& envelope, const ProbeGrid& grid) {
  if (grid.u_points < 2 || !(grid.u_max > grid.u_min)) throw InputError("probe grid needs >= 2 distinct u points");
  if (grid.m_end <= grid.m_begin) throw InputError("probe grid needs >= 1 time point");
  LipschitzReport report;
  std::vector<double> u(grid.u_points), fu(grid.u_points);
  for (std::size_t k = 0; k < grid.u_points; ++k)
    u[k] = grid.u_min + (grid.u_max - grid.u_min) * static_cast<double>(k) / static_cast<double>(grid.u_points - 1);
  for (Index m = grid.m_begin; m < grid.m_end; ++m) {
    const double env = envelope(m);
    for (std::size_t k = 0; k < grid.u_points; ++k) fu[k] = f(m, u[k]);
    for (std::size_t a = 0; a < grid.u_points; ++a) {
      for (std::size_t b = a + 1; b < grid.u_points; ++b) {
        const double diff = std::abs(fu[a] - fu[b]);
        const double gap = std::abs(u[a] - u[b]);
        double ratio;
        if (diff == 0.0) {
          ratio = 0.0;
        } else if (env > 0.0) {
          ratio = diff / (env * gap);
        } else {
          ratio = std::numeric_limits<double>::infinity();
        }
        ++report.pairs_checked;
        report.worst_ratio = std::max(report.worst_ratio, ratio);
        // Relative slack absorbs rounding in f itself.
        if (diff > env * gap * (1.0 + 1e-12) + 1e-15) {
          report.pass = false;
          if (!report.first_violation) report.first_violation = LipschitzViolation{m, u[a], u[b], ratio};
        }
      }
    }
  }
  return report;
}

}  // namespace delaynet
