#pragma once

#include <cstddef>
#include <functional>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "delaynet/error.hpp"
#include "delaynet/history.hpp"
#include "delaynet/model.hpp"

namespace delaynet {

/// Solution x(m) for m = start - depth .. horizon, stored time-major.
class Trajectory {
 public:
  Trajectory(std::size_t neurons, int depth, Index start, const HistorySegment& initial, std::string source = {})
      : neurons_(neurons), depth_(depth), start_(start), horizon_(start), source_(std::move(source)) {
    if (initial.neurons() != neurons || initial.depth() != depth)
      throw InputError("initial segment shape does not match the model (N, tau)");
    values_.assign(initial.raw().begin(), initial.raw().end());
  }

  std::size_t neurons() const { return neurons_; }
  int depth() const { return depth_; }
  Index start() const { return start_; }
  Index horizon() const { return horizon_; }
  /// First stored index, start + r.
  Index first() const { return start_ - depth_; }
  const std::string& source() const { return source_; }

  double operator()(Index m, std::size_t i) const { return values_[slot(m) * neurons_ + i]; }

  std::span<const double> at(Index m) const { return {values_.data() + slot(m) * neurons_, neurons_}; }

  /// The history segment x_m, with x_m(j) = x(m + j) for j = r..0.
  HistorySegment history_at(Index m) const {
    if (m < start_ || m > horizon_)
      throw InputError("history_at: m=" + std::to_string(m) + " outside [" + std::to_string(start_) + ", " +
                       std::to_string(horizon_) + "]");
    HistorySegment seg(neurons_, depth_);
    for (int j = -depth_; j <= 0; ++j)
      for (std::size_t i = 0; i < neurons_; ++i) seg(j, i) = (*this)(m + j, i);
    return seg;
  }

  void append(std::span<const double> next) {
    if (next.size() != neurons_) throw InputError("appended state has wrong dimension");
    values_.insert(values_.end(), next.begin(), next.end());
    ++horizon_;
  }

 private:
  std::size_t slot(Index m) const {
    if (m < first() || m > horizon_) throw InputError("trajectory index " + std::to_string(m) + " out of range");
    return static_cast<std::size_t>(m - first());
  }

  std::size_t neurons_;
  int depth_;
  Index start_;
  Index horizon_;
  std::string source_;
  std::vector<double> values_;
};

inline HistorySegment history_at(const Trajectory& t, Index m) { return t.history_at(m); }

namespace detail {

// value(offset, j) returns x_j(m + offset).
template <class Lookup>
void hopfield_advance(const HopfieldModel& model, Index m, Lookup&& value, std::span<double> out) {
  const std::size_t n = model.neurons();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = model.c(i, m) * value(0, i);
    for (std::size_t j = 0; j < n; ++j) {
      const int t = model.tau(i, j, m);
      if (t < 0 || t > model.max_delay())
        throw InputError("tau_" + std::to_string(i) + std::to_string(j) + "(" + std::to_string(m) +
                         ") = " + std::to_string(t) + " exceeds the declared bound " +
                         std::to_string(model.max_delay()));
      acc += model.h(i, j, m, value(-t, j));
    }
    out[i] = acc;
  }
}

}  // namespace detail

/// x(m+1) from the window x_m (offsets -tau..0 relative to m).
inline std::vector<double> step(const HopfieldModel& model, Index m, const HistorySegment& window) {
  if (window.neurons() != model.neurons() || window.depth() < model.max_delay())
    throw InputError("step: window must cover N components and offsets [-tau, 0]");
  std::vector<double> out(model.neurons());
  detail::hopfield_advance(model, m, [&](int j, std::size_t i) { return window(j, i); }, out);
  return out;
}

inline Trajectory solve(const HopfieldModel& model, Index start, const HistorySegment& initial, Index horizon) {
  if (start < 0) throw InputError("solve: start index must be nonnegative");
  if (horizon < start) throw InputError("solve: horizon precedes start");
  Trajectory traj(model.neurons(), model.max_delay(), start, initial, "hopfield");
  std::vector<double> next(model.neurons());
  for (Index m = start; m < horizon; ++m) {
    detail::hopfield_advance(model, m, [&](int j, std::size_t i) { return traj(m + j, i); }, next);
    traj.append(next);
  }
  return traj;
}

/// Direct simulation of the specialized model, without going through the
/// general representation.
inline Trajectory solve(const XuWuModel& model, Index start, const HistorySegment& initial, Index horizon) {
  model.validate();
  if (start < 0) throw InputError("solve: start index must be nonnegative");
  if (horizon < start) throw InputError("solve: horizon precedes start");
  const std::size_t n = model.neurons;
  Trajectory traj(n, model.max_delay, start, initial, "xu-wu");
  std::vector<double> next(n), fx(n);
  for (Index m = start; m < horizon; ++m) {
    const Index lagged = m - static_cast<Index>(model.delay(m));
    for (std::size_t j = 0; j < n; ++j) fx[j] = model.activation[j](traj(lagged, j));
    for (std::size_t i = 0; i < n; ++i) {
      double drive = model.input[i](m);
      for (std::size_t j = 0; j < n; ++j) drive += model.b(i, j)(m) * fx[j];
      next[i] = traj(m, i) * model.decay(i, m) + model.theta_at(i, m) * drive;
    }
    traj.append(next);
  }
  return traj;
}

/// Delay system in abstract form
///   x_i(m+1) = L_m^{(i)} x_{i,m} + f_m^{(i)}(x_m)
/// with scalar components. linear(i, m) returns the coefficient row of
/// L_m^{(i)} indexed by offset r..0 (position j - r).
struct AbstractSystem {
  std::size_t neurons = 0;
  int depth = 0;
  std::function<std::vector<double>(std::size_t, Index)> linear;
  std::function<double(std::size_t, Index, const HistorySegment&)> perturbation;
  std::function<double(std::size_t, Index)> lipschitz;

  void check() const {
    if (neurons == 0 || depth < 0) throw InputError("abstract system needs N >= 1 and depth >= 0");
    if (!linear || !perturbation || !lipschitz) throw InputError("abstract system is missing a callable");
  }

  std::vector<double> row(std::size_t i, Index m) const {
    auto r = linear(i, m);
    if (r.size() != static_cast<std::size_t>(depth + 1))
      throw InputError("linear functional row must have depth+1 coefficients");
    return r;
  }
};

/// Largest |f_m(0)| over components and m in [begin, end); zero means the
/// system has the zero solution.
inline double zero_residual(const AbstractSystem& sys, Index begin, Index end) {
  HistorySegment zero(sys.neurons, sys.depth);
  double worst = 0.0;
  for (Index m = begin; m < end; ++m)
    for (std::size_t i = 0; i < sys.neurons; ++i) worst = std::max(worst, std::abs(sys.perturbation(i, m, zero)));
  return worst;
}

inline Trajectory abstract_solve(const AbstractSystem& sys, Index start, const HistorySegment& initial, Index horizon) {
  sys.check();
  if (start < 0) throw InputError("abstract_solve: start index must be nonnegative");
  if (horizon < start) throw InputError("abstract_solve: horizon precedes start");
  Trajectory traj(sys.neurons, sys.depth, start, initial, "abstract");
  std::vector<double> next(sys.neurons);
  for (Index m = start; m < horizon; ++m) {
    const HistorySegment window = traj.history_at(m);
    for (std::size_t i = 0; i < sys.neurons; ++i) {
      const auto row = sys.row(i, m);
      double acc = 0.0;
      for (int j = -sys.depth; j <= 0; ++j) acc += row[static_cast<std::size_t>(j + sys.depth)] * window(j, i);
      next[i] = acc + sys.perturbation(i, m, window);
    }
    traj.append(next);
  }
  return traj;
}

/// The general model as an abstract system: L_m^{(i)} picks c_i(m) x_i(m),
/// the perturbation carries every interaction term and Lip = sum_j H_ij(m).
inline AbstractSystem from_hopfield(const HopfieldModel& model) {
  auto shared = std::make_shared<const HopfieldModel>(model);
  AbstractSystem sys;
  sys.neurons = model.neurons();
  sys.depth = model.max_delay();
  sys.linear = [shared](std::size_t i, Index m) {
    std::vector<double> row(static_cast<std::size_t>(shared->max_delay() + 1), 0.0);
    row.back() = shared->c(i, m);
    return row;
  };
  sys.perturbation = [shared](std::size_t i, Index m, const HistorySegment& x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < shared->neurons(); ++j) acc += shared->h(i, j, m, x(-shared->tau(i, j, m), j));
    return acc;
  };
  sys.lipschitz = [shared](std::size_t i, Index m) { return shared->envelope_row_sum(i, m); };
  return sys;
}

/// Shift a reference solution x* to the zero equilibrium: y = x - x*
/// satisfies the same linear part with perturbation
///   sum_j h_ij(m, y_j(m - tau) + x*_j(m - tau)) - h_ij(m, x*_j(m - tau)),
/// which vanishes at y = 0 and keeps the envelope sum_j H_ij(m).
inline AbstractSystem shifted_to_zero(const HopfieldModel& model, const Trajectory& reference) {
  if (reference.neurons() != model.neurons() || reference.depth() != model.max_delay())
    throw InputError("reference trajectory does not match the model");
  AbstractSystem sys = from_hopfield(model);
  auto shared = std::make_shared<const HopfieldModel>(model);
  auto ref = std::make_shared<const Trajectory>(reference);
  sys.perturbation = [shared, ref](std::size_t i, Index m, const HistorySegment& y) {
    double acc = 0.0;
    for (std::size_t j = 0; j < shared->neurons(); ++j) {
      const int t = shared->tau(i, j, m);
      const double anchor = (*ref)(m - t, j);
      acc += shared->h(i, j, m, y(-t, j) + anchor) - shared->h(i, j, m, anchor);
    }
    return acc;
  };
  return sys;
}

/// Matrix of A^{(i)}_{m,n} acting on component histories ordered r..0.
struct EvolutionMatrix {
  std::size_t component = 0;
  Index m = 0;
  Index n = 0;
  Eigen::MatrixXd matrix;
};

namespace detail {

// One step of the linear flow on a stack of histories (rows = offsets r..0).
inline void flow_step(const std::vector<double>& row, Eigen::MatrixXd& hist) {
  const Eigen::Index size = hist.rows();
  Eigen::RowVectorXd fresh = Eigen::Map<const Eigen::RowVectorXd>(row.data(), size) * hist;
  if (size > 1) hist.topRows(size - 1) = hist.bottomRows(size - 1).eval();
  hist.row(size - 1) = fresh;
}

// Companion matrix S_k with A_{k+1,k} = S_k.
inline Eigen::MatrixXd companion(const std::vector<double>& row) {
  const auto size = static_cast<Eigen::Index>(row.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index r = 0; r + 1 < size; ++r) s(r, r + 1) = 1.0;
  s.row(size - 1) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), size);
  return s;
}

}  // namespace detail

/// Evolution operator of v_i(k+1) = L_k^{(i)} v_{i,k} from n to m, built by
/// flowing the canonical basis histories forward.
inline EvolutionMatrix evolution_matrix(const AbstractSystem& sys, std::size_t i, Index m, Index n) {
  sys.check();
  if (!(m >= n && n >= 0)) throw InputError("evolution_matrix: (m, n) must satisfy m >= n >= 0");
  if (i >= sys.neurons) throw InputError("evolution_matrix: component out of range");
  const Eigen::Index size = sys.depth + 1;
  EvolutionMatrix out{i, m, n, Eigen::MatrixXd::Identity(size, size)};
  for (Index k = n; k < m; ++k) detail::flow_step(sys.row(i, k), out.matrix);
  return out;
}

/// Induced norm for the max-norm on histories: the largest absolute row sum.
inline double operator_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}
inline double operator_norm(const EvolutionMatrix& a) { return operator_norm(a.matrix); }

/// Gamma u: u at offset 0, zero at every earlier offset.
inline HistorySegment gamma_embed(double u, int depth) {
  HistorySegment seg(1, depth);
  seg(0, 0) = u;
  return seg;
}

/// Variation-of-constants reconstruction of x_m:
///   A_{m,n} alpha_i + sum_{k=n}^{m-1} A_{m,k+1} Gamma f_k^{(i)}(x_k).
/// The perturbation is evaluated along the solution; the operators are
/// accumulated backward as A_{m,k} = A_{m,k+1} S_k.
inline HistorySegment voc_reconstruct(const AbstractSystem& sys, Index start, const HistorySegment& initial, Index m) {
  sys.check();
  if (!(m >= start && start >= 0)) throw InputError("voc_reconstruct: (m, n) must satisfy m >= n >= 0");
  const Trajectory traj = abstract_solve(sys, start, initial, m);
  const Eigen::Index size = sys.depth + 1;
  std::vector<HistorySegment> windows;
  windows.reserve(static_cast<std::size_t>(m - start));
  for (Index k = start; k < m; ++k) windows.push_back(traj.history_at(k));

  HistorySegment out(sys.neurons, sys.depth);
  for (std::size_t i = 0; i < sys.neurons; ++i) {
    Eigen::MatrixXd evolve = Eigen::MatrixXd::Identity(size, size);  // A_{m,k+1}
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(size);
    for (Index k = m - 1; k >= start; --k) {
      const double forcing = sys.perturbation(i, k, windows[static_cast<std::size_t>(k - start)]);
      acc += evolve.col(size - 1) * forcing;  // A_{m,k+1} Gamma(forcing)
      evolve = evolve * detail::companion(sys.row(i, k));
    }
    const auto alpha = initial.component(i);
    acc += evolve * Eigen::Map<const Eigen::VectorXd>(alpha.data(), size);
    std::vector<double> col(acc.data(), acc.data() + size);
    out.set_component(i, col);
  }
  return out;
}

/// CSV with header m,x_1,...,x_N and 17 significant digits.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "m";
  for (std::size_t i = 0; i < traj.neurons(); ++i) os << ",x_" << (i + 1);
  os << "\n";
  std::ostringstream cell;
  cell << std::setprecision(17);
  for (Index m = traj.first(); m <= traj.horizon(); ++m) {
    os << m;
    for (std::size_t i = 0; i < traj.neurons(); ++i) {
      cell.str({});
      cell << traj(m, i);
      os << "," << cell.str();
    }
    os << "\n";
  }
}

}  // namespace delaynet
