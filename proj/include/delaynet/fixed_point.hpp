#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "delaynet/certify.hpp"
#include "delaynet/engine.hpp"
#include "delaynet/rate_bound.hpp"

namespace delaynet {

struct FixedPointOptions {
  Index horizon = 200;  // truncation M
  double tol = 1e-12;
  std::size_t max_iter = 1000;
};

struct FixedPointResult {
  Trajectory solution;
  /// sup_{n <= m <= M} ||x_m|| / (a'_{m,n} ||alpha||)
  double weighted_norm = 0.0;
  /// lambda at this start index with exact operator norms on [n, M].
  double lambda = 0.0;
  /// distances[k] = d(x_k, J x_k) in the weighted metric.
  std::vector<double> distances;
  /// distances[k+1] / distances[k] while both are resolvable.
  std::vector<double> contraction_factors;
  std::size_t iterations = 0;
};

/// Banach iteration of the operator
///   (J x)_m = alpha                                          (m = n)
///   (J x)_m^{(i)} = A_{m,n} alpha_i + sum_{k=n}^{m-1} A_{m,k+1} Gamma f_k^{(i)}(x_k)   (m > n)
/// on [n, M], starting from alpha extended by zeros. The current-time slot of
/// (J x)_m determines the whole segment, so iterates are stored as functions
/// of time and the kernels are the (0,0) entries of the evolution operators.
inline FixedPointResult j_fixed_point(const AbstractSystem& sys, Index start, const HistorySegment& alpha,
                                      const RateBound& weights, FixedPointOptions opts = {}) {
  sys.check();
  if (start < 0) throw InputError("j_fixed_point: start must be nonnegative");
  if (opts.horizon <= start) throw InputError("j_fixed_point: horizon must exceed start");
  if (!(opts.tol > 0.0)) throw InputError("j_fixed_point: tol must be positive");
  if (alpha.neurons() != sys.neurons || alpha.depth() != sys.depth) throw InputError("j_fixed_point: alpha shape");
  const double alpha_norm = alpha.sup_norm();
  if (alpha_norm == 0.0) throw InputError("j_fixed_point: alpha must be nonzero");

  const Index n = start, M = opts.horizon, span = M - n;
  const ExactNormTable norms(sys, n, M);
  for (std::size_t i = 0; i < sys.neurons; ++i)
    for (Index m = n; m <= M; ++m)
      if (norms(i, m, n) > weights(m, n) * (1.0 + 1e-12))
        throw ConditionViolated("a'_{m,n} does not dominate ||A_{m,n}|| at m=" + std::to_string(m));
  LambdaOptions lopts;
  lopts.window = span;
  lopts.first_start = n;
  lopts.starts = 1;
  const double lambda = lambda_abstract(sys, norms.as_bound(), weights, lopts).lambda;
  if (!(lambda < 1.0)) throw ConditionViolated("contraction hypothesis fails: lambda = " + std::to_string(lambda));

  const Eigen::Index size = sys.depth + 1;
  const std::size_t N = sys.neurons;
  // linear[i][t - n] = (A_{t,n} alpha_i)(0); kernel[i][s - n - 1][t - s] = A_{t,s}(0,0)
  std::vector<std::vector<double>> linear(N);
  std::vector<std::vector<std::vector<double>>> kernel(N);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(span));
    for (Index k = n; k < M; ++k) rows[static_cast<std::size_t>(k - n)] = sys.row(i, k);
    const auto a = alpha.component(i);
    Eigen::MatrixXd hist = Eigen::Map<const Eigen::VectorXd>(a.data(), size);
    linear[i].push_back(hist(size - 1, 0));
    for (Index k = n; k < M; ++k) {
      detail::flow_step(rows[static_cast<std::size_t>(k - n)], hist);
      linear[i].push_back(hist(size - 1, 0));
    }
    kernel[i].resize(static_cast<std::size_t>(span));
    for (Index s = n + 1; s <= M; ++s) {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size, 1);
      g(size - 1, 0) = 1.0;
      auto& out = kernel[i][static_cast<std::size_t>(s - n - 1)];
      out.push_back(1.0);
      for (Index k = s; k < M; ++k) {
        detail::flow_step(rows[static_cast<std::size_t>(k - n)], g);
        out.push_back(g(size - 1, 0));
      }
    }
  }

  auto make_traj = [&](const std::vector<std::vector<double>>& values) {
    Trajectory t(N, sys.depth, n, alpha, "j-iterate");
    std::vector<double> row(N);
    for (Index m = n + 1; m <= M; ++m) {
      for (std::size_t i = 0; i < N; ++i) row[i] = values[i][static_cast<std::size_t>(m - n)];
      t.append(row);
    }
    return t;
  };
  auto apply_j = [&](const Trajectory& x) {
    std::vector<std::vector<double>> forcing(N, std::vector<double>(static_cast<std::size_t>(span)));
    for (Index k = n; k < M; ++k) {
      const HistorySegment window = x.history_at(k);
      for (std::size_t i = 0; i < N; ++i) forcing[i][static_cast<std::size_t>(k - n)] = sys.perturbation(i, k, window);
    }
    std::vector<std::vector<double>> y(N, std::vector<double>(static_cast<std::size_t>(span + 1)));
    for (std::size_t i = 0; i < N; ++i) {
      y[i][0] = alpha(0, i);
      for (Index t = n + 1; t <= M; ++t) {
        double acc = linear[i][static_cast<std::size_t>(t - n)];
        for (Index k = n; k < t; ++k)
          acc += kernel[i][static_cast<std::size_t>(k - n)][static_cast<std::size_t>(t - k - 1)] *
                 forcing[i][static_cast<std::size_t>(k - n)];
        y[i][static_cast<std::size_t>(t - n)] = acc;
      }
    }
    return make_traj(y);
  };
  auto weighted = [&](auto&& value_at) {
    double worst = 0.0;
    for (Index m = n; m <= M; ++m) {
      double seg = 0.0;
      for (int j = -sys.depth; j <= 0; ++j)
        for (std::size_t i = 0; i < N; ++i) seg = std::max(seg, std::abs(value_at(m + j, i)));
      worst = std::max(worst, seg / (weights(m, n) * alpha_norm));
    }
    return worst;
  };

  std::vector<std::vector<double>> zeros(N, std::vector<double>(static_cast<std::size_t>(span + 1), 0.0));
  for (std::size_t i = 0; i < N; ++i) zeros[i][0] = alpha(0, i);
  Trajectory x = make_traj(zeros);

  FixedPointResult res{x, 0.0, lambda, {}, {}, 0};
  for (std::size_t it = 0; it <= opts.max_iter; ++it) {
    Trajectory next = apply_j(x);
    const double dist = weighted([&](Index t, std::size_t i) { return x(t, i) - next(t, i); });
    // Below ~1e-9 of the iterate's weighted size the ratio measures rounding, not J.
    const double resolvable = 1e-9 * std::max(1.0, weighted([&](Index t, std::size_t i) { return x(t, i); }));
    if (!res.distances.empty() && res.distances.back() > resolvable && dist > resolvable)
      res.contraction_factors.push_back(dist / res.distances.back());
    res.distances.push_back(dist);
    if (dist <= opts.tol) {
      res.solution = x;
      res.iterations = it;
      res.weighted_norm = weighted([&](Index t, std::size_t i) { return x(t, i); });
      return res;
    }
    x = std::move(next);
  }
  throw NotConverged("J iteration did not reach tol within " + std::to_string(opts.max_iter) + " iterations");
}

}  // namespace delaynet
