#pragma once

// Independent reference implementations for the test suites. Everything here
// is written as plain loops over std::vector and shares no code paths with
// the library beyond model evaluation.

#include <cmath>
#include <random>
#include <vector>

#include "delaynet.hpp"

namespace oracles {

using delaynet::Activation;
using delaynet::HistorySegment;
using delaynet::Index;
using delaynet::Sequence;
using delaynet::XuWuModel;

inline XuWuModel scalar_xu_wu(double a, double h, double b, double input, int tau = 0) {
  XuWuModel m;
  m.neurons = 1;
  m.step = h;
  m.rate = {Sequence::constant(a)};
  m.weight = {Sequence::constant(b)};
  m.input = {Sequence::constant(input)};
  m.activation = {Activation::identity()};
  m.delay = Sequence::constant(tau);
  m.max_delay = tau;
  return m;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Sequence random_periodic(std::mt19937_64& rng, double lo, double hi) {
  const int period = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<double> v(static_cast<std::size_t>(period));
  for (auto& x : v) x = uniform(rng, lo, hi);
  return Sequence::periodic(v);
}

/// A random specialized model with periodic coefficients and delays in [0, tau].
inline XuWuModel random_xu_wu(std::mt19937_64& rng, std::size_t n, int tau, double coupling = 0.4) {
  XuWuModel m;
  m.neurons = n;
  m.step = uniform(rng, 0.2, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.rate.push_back(random_periodic(rng, 0.5, 2.0));
    m.input.push_back(random_periodic(rng, -1.0, 1.0));
    m.activation.push_back(Activation::tanh(uniform(rng, 0.5, 1.5)));
  }
  for (std::size_t k = 0; k < n * n; ++k) m.weight.push_back(random_periodic(rng, -coupling, coupling));
  std::vector<double> delays(3);
  for (auto& d : delays) d = std::uniform_int_distribution<int>(0, tau)(rng);
  m.delay = Sequence::periodic(delays);
  m.max_delay = tau;
  return m;
}

inline HistorySegment random_segment(std::mt19937_64& rng, std::size_t n, int depth, double box) {
  HistorySegment s(n, depth);
  for (int j = -depth; j <= 0; ++j)
    for (std::size_t i = 0; i < n; ++i) s(j, i) = uniform(rng, -box, box);
  return s;
}

/// x[k][i] holds x_i(k - tau) for k = 0..horizon + tau.
inline std::vector<std::vector<double>> naive_xu_wu(const XuWuModel& model, const HistorySegment& alpha, Index horizon) {
  const std::size_t n = model.neurons;
  const int tau = model.max_delay;
  std::vector<std::vector<double>> x;
  for (int j = -tau; j <= 0; ++j) {
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = alpha(j, i);
    x.push_back(row);
  }
  for (Index m = 0; m < horizon; ++m) {
    const double h = model.step;
    const auto now = static_cast<std::size_t>(m + tau);
    const auto lag = static_cast<std::size_t>(m + tau - static_cast<Index>(model.delay(m)));
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = model.rate[i](m);
      double drive = model.input[i](m);
      for (std::size_t j = 0; j < n; ++j) drive += model.weight[i * n + j](m) * model.activation[j](x[lag][j]);
      next[i] = x[now][i] * std::exp(-a * h) + (1.0 - std::exp(-a * h)) / a * drive;
    }
    x.push_back(next);
  }
  return x;
}

/// General model with c_i(m), h_ij(m,u) = w_ij(m) tanh(u) + o_ij(m), tau_ij(m).
struct RandomGeneral {
  std::size_t n;
  int tau;
  std::vector<Sequence> c, w, o, d;

  delaynet::HopfieldModel model() const {
    std::vector<delaynet::Interaction> inter;
    for (std::size_t k = 0; k < n * n; ++k) inter.push_back({w[k], Activation::tanh(1.0), o[k]});
    return delaynet::HopfieldModel::from_tables(c, inter, d, tau);
  }

  std::vector<std::vector<double>> naive(const HistorySegment& alpha, Index horizon) const {
    std::vector<std::vector<double>> x;
    for (int j = -tau; j <= 0; ++j) {
      std::vector<double> row(n);
      for (std::size_t i = 0; i < n; ++i) row[i] = alpha(j, i);
      x.push_back(row);
    }
    for (Index m = 0; m < horizon; ++m) {
      std::vector<double> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        double v = c[i](m) * x[static_cast<std::size_t>(m + tau)][i];
        for (std::size_t j = 0; j < n; ++j) {
          const auto lag = static_cast<std::size_t>(m + tau - static_cast<Index>(d[i * n + j](m)));
          v += w[i * n + j](m) * std::tanh(x[lag][j]) + o[i * n + j](m);
        }
        next[i] = v;
      }
      x.push_back(next);
    }
    return x;
  }
};

inline RandomGeneral random_general(std::mt19937_64& rng, std::size_t n, int tau) {
  RandomGeneral g{n, tau, {}, {}, {}, {}};
  for (std::size_t i = 0; i < n; ++i) g.c.push_back(random_periodic(rng, 0.1, 0.9));
  for (std::size_t k = 0; k < n * n; ++k) {
    g.w.push_back(random_periodic(rng, -0.5, 0.5));
    g.o.push_back(random_periodic(rng, -0.2, 0.2));
    std::vector<double> dv(2);
    for (auto& v : dv) v = std::uniform_int_distribution<int>(0, tau)(rng);
    g.d.push_back(Sequence::periodic(dv));
  }
  return g;
}

/// Random abstract system: full random coefficient rows (every offset),
/// perturbation f_m^{(i)}(x) = sum_j s_ij sin(x_j(-k_ij)) with time-varying s.
inline delaynet::AbstractSystem random_abstract(std::uint64_t seed, std::size_t n, int tau, double row_scale = 0.3,
                                                double f_scale = 0.2) {
  struct Data {
    std::size_t n;
    int tau;
    std::vector<double> rows;   // [(i * period + p) * (tau+1) + j]
    std::vector<double> gains;  // [(i * n + j) * period + p]
    std::vector<int> lags;      // [i * n + j]
  };
  constexpr int period = 5;
  std::mt19937_64 rng(seed);
  auto data = std::make_shared<Data>();
  data->n = n;
  data->tau = tau;
  for (std::size_t k = 0; k < n * period * static_cast<std::size_t>(tau + 1); ++k)
    data->rows.push_back(uniform(rng, -row_scale, row_scale));
  for (std::size_t k = 0; k < n * n * period; ++k) data->gains.push_back(uniform(rng, -f_scale, f_scale));
  for (std::size_t k = 0; k < n * n; ++k) data->lags.push_back(std::uniform_int_distribution<int>(0, tau)(rng));

  delaynet::AbstractSystem sys;
  sys.neurons = n;
  sys.depth = tau;
  sys.linear = [data](std::size_t i, Index m) {
    const auto base = (i * period + static_cast<std::size_t>(m % period)) * static_cast<std::size_t>(data->tau + 1);
    return std::vector<double>(data->rows.begin() + static_cast<long>(base),
                               data->rows.begin() + static_cast<long>(base) + data->tau + 1);
  };
  sys.perturbation = [data](std::size_t i, Index m, const HistorySegment& x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < data->n; ++j)
      acc += data->gains[(i * data->n + j) * period + static_cast<std::size_t>(m % period)] *
             std::sin(x(-data->lags[i * data->n + j], j));
    return acc;
  };
  sys.lipschitz = [data](std::size_t i, Index m) {
    double acc = 0.0;
    for (std::size_t j = 0; j < data->n; ++j)
      acc += std::abs(data->gains[(i * data->n + j) * period + static_cast<std::size_t>(m % period)]);
    return acc;
  };
  return sys;
}

/// Straight-loop solver for an abstract system; x[k][i] = x_i(start - tau + k).
inline std::vector<std::vector<double>> naive_abstract(const delaynet::AbstractSystem& sys, Index start,
                                                       const HistorySegment& alpha, Index horizon) {
  const int tau = sys.depth;
  std::vector<std::vector<double>> x;
  for (int j = -tau; j <= 0; ++j) {
    std::vector<double> row(sys.neurons);
    for (std::size_t i = 0; i < sys.neurons; ++i) row[i] = alpha(j, i);
    x.push_back(row);
  }
  for (Index m = start; m < horizon; ++m) {
    HistorySegment window(sys.neurons, tau);
    const auto now = static_cast<std::size_t>(m - start + tau);
    for (int j = -tau; j <= 0; ++j)
      for (std::size_t i = 0; i < sys.neurons; ++i) window(j, i) = x[static_cast<std::size_t>(static_cast<Index>(now) + j)][i];
    std::vector<double> next(sys.neurons);
    for (std::size_t i = 0; i < sys.neurons; ++i) {
      const auto row = sys.linear(i, m);
      double v = 0.0;
      for (int j = -tau; j <= 0; ++j) v += row[static_cast<std::size_t>(j + tau)] * window(j, i);
      next[i] = v + sys.perturbation(i, m, window);
    }
    x.push_back(next);
  }
  return x;
}

/// Direct double sum for lambda with user-supplied operator bounds, O(W^2).
template <class Bound, class Weight, class Envelope>
double brute_lambda(std::size_t neurons, Index n, Index window, Bound a, Weight ap, Envelope H) {
  double best = 0.0;
  for (std::size_t i = 0; i < neurons; ++i)
    for (Index m = n + 1; m <= n + window; ++m) {
      double s = 0.0;
      for (Index k = n; k < m; ++k) s += a(i, m, k + 1) * ap(k, n) * H(i, k);
      best = std::max(best, s / ap(m, n));
    }
  return best;
}

}  // namespace oracles
