#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delaynet/engine.hpp"
#include "delaynet/error.hpp"
#include "delaynet/model.hpp"
#include "delaynet/rate_bound.hpp"

namespace delaynet {

/// Which bound stands in for the operator norm of the linear evolution.
///  Paper:  a^{(i)}_{m,n} = prod_{s=n}^{m-1} c_i(s).
///  Strict: a^{(i)}_{m,n} = prod_{s=n}^{max(m+r,n)-1} c_i(s), the exact
///          max-norm of the history operator of x_i(m+1) = c_i(m) x_i(m).
enum class NormMode { Paper, Strict };

inline const char* to_string(NormMode mode) { return mode == NormMode::Paper ? "paper" : "strict"; }

inline NormMode parse_norm_mode(const std::string& s) {
  if (s == "paper") return NormMode::Paper;
  if (s == "strict") return NormMode::Strict;
  throw InputError("mode must be 'paper' or 'strict', got '" + s + "'");
}

inline double product_bound(const HopfieldModel& model, std::size_t i, Index m, Index n, NormMode mode) {
  if (!(m >= n && n >= 0)) throw InputError("product_bound: (m, n) must satisfy m >= n >= 0");
  const Index last = mode == NormMode::Paper ? m : std::max(m - model.max_delay(), n);
  double p = 1.0;
  for (Index s = n; s < last; ++s) p *= model.c(i, s);
  return p;
}

struct LambdaOptions {
  Index window = 500;     // largest m - n scanned
  Index first_start = 0;  // smallest n
  Index starts = 1;       // number of consecutive n values
  NormMode mode = NormMode::Strict;
};

struct LambdaEntry {
  Index m = 0;
  Index n = 0;
  std::size_t component = 0;
  double value = -std::numeric_limits<double>::infinity();  // max over components at this (m, n)
};

struct LambdaReport {
  double lambda = 0.0;
  std::size_t component = 0;
  Index argmax_m = 0;
  Index argmax_n = 0;
  /// True when widening the window over its last quarter moved lambda by < 1e-9.
  bool tail_converged = false;
  /// width_profile[w-1] = max over pairs with m - n <= w.
  std::vector<double> width_profile;
  std::vector<LambdaEntry> table;
  /// max over the scan of a^{(i)}_{m,n} / a'_{m,n}; a' dominates the chosen
  /// operator bound on the window iff this is <= 1.
  double domination = 0.0;
};

namespace detail {

inline void finish_lambda(LambdaReport& rep, std::vector<double>& best_by_width, Index window) {
  double running = 0.0;
  rep.width_profile.resize(static_cast<std::size_t>(window));
  for (Index w = 1; w <= window; ++w) {
    running = std::max(running, best_by_width[static_cast<std::size_t>(w)]);
    rep.width_profile[static_cast<std::size_t>(w - 1)] = running;
  }
  const Index quarter = window - std::max<Index>(1, (3 * window) / 4);
  const double before = quarter > 0 ? rep.width_profile[static_cast<std::size_t>(window - 1 - quarter)] : 0.0;
  rep.tail_converged = window >= 4 && std::abs(rep.lambda - before) < 1e-9;
}

inline void record(LambdaReport& rep, std::vector<double>& best_by_width, std::vector<LambdaEntry>& cells,
                   std::size_t i, Index m, Index n, Index first_start, Index window, double value) {
  auto& cell = cells[static_cast<std::size_t>((n - first_start) * window + (m - n - 1))];
  if (value > cell.value) cell = LambdaEntry{m, n, i, value};
  auto& wbest = best_by_width[static_cast<std::size_t>(m - n)];
  wbest = std::max(wbest, value);
  if (value > rep.lambda) {
    rep.lambda = value;
    rep.component = i;
    rep.argmax_m = m;
    rep.argmax_n = n;
  }
}

}  // namespace detail

/// Truncated supremum
///   max_i max_{(m,n), m-n <= W} (1/a'_{m,n}) sum_{k=n}^{m-1} a^{(i)}_{m,k+1} a'_{k,n} sum_j H_ij(k)
/// using a first-order recursion in m (O(W) per start index and component).
inline LambdaReport lambda_empirical(const HopfieldModel& model, const RateBound& weights, LambdaOptions opts = {}) {
  if (opts.window < 1) throw InputError("lambda: window must be >= 1");
  if (opts.starts < 1 || opts.first_start < 0) throw InputError("lambda: need at least one start index >= 0");
  const Index W = opts.window;
  const Index r = -model.max_delay();
  LambdaReport rep;
  std::vector<double> best_by_width(static_cast<std::size_t>(W + 1), 0.0);
  std::vector<LambdaEntry> cells(static_cast<std::size_t>(opts.starts * W));
  for (std::size_t i = 0; i < model.neurons(); ++i) {
    for (Index n = opts.first_start; n < opts.first_start + opts.starts; ++n) {
      // paper_sum[q - n] = sum_{k=n}^{q-1} prod_{s=k+1}^{q-1} c(s) w_k
      // prod[q - n]      = prod_{s=n}^{q-1} c(s)
      // The strict tail sum_{k=q}^{m-1} w_k has at most tau + 1 terms and is
      // summed directly: a prefix-sum difference cancels once w_k is tiny.
      std::vector<double> paper_sum{0.0}, terms, prod{1.0};
      paper_sum.reserve(static_cast<std::size_t>(W + 1));
      for (Index m = n; m < n + W; ++m) {
        const double w = weights(m, n) * model.envelope_row_sum(i, m);
        const double c = model.c(i, m);
        paper_sum.push_back(c * paper_sum.back() + w);
        terms.push_back(w);
        prod.push_back(prod.back() * c);
        const Index mm = m + 1;
        double sum;
        double bound;
        if (opts.mode == NormMode::Paper) {
          sum = paper_sum.back();
          bound = prod.back();
        } else {
          const Index q = std::max(mm + r, n);
          double tail = 0.0;
          for (Index k = q; k < mm; ++k) tail += terms[static_cast<std::size_t>(k - n)];
          sum = paper_sum[static_cast<std::size_t>(q - n)] + tail;
          bound = prod[static_cast<std::size_t>(q - n)];
        }
        const double scale = weights(mm, n);
        rep.domination = std::max(rep.domination, bound / scale);
        detail::record(rep, best_by_width, cells, i, mm, n, opts.first_start, W, sum / scale);
      }
    }
  }
  rep.table = std::move(cells);
  detail::finish_lambda(rep, best_by_width, W);
  return rep;
}

/// Operator-norm bound a^{(i)}_{m,n} supplied by the caller.
using OperatorBound = std::function<double(std::size_t, Index, Index)>;

/// Exact norms ||A^{(i)}_{m,s}|| for first <= s <= m <= last, tabulated by
/// flowing each start forward once.
class ExactNormTable {
 public:
  ExactNormTable(const AbstractSystem& sys, Index first, Index last) : first_(first), last_(last) {
    sys.check();
    if (!(last >= first && first >= 0)) throw InputError("norm table needs last >= first >= 0");
    const Eigen::Index size = sys.depth + 1;
    const auto span = static_cast<std::size_t>(last - first + 1);
    norms_.resize(sys.neurons);
    for (std::size_t i = 0; i < sys.neurons; ++i) {
      std::vector<std::vector<double>> rows_by_k(span);
      for (Index k = first; k < last; ++k) rows_by_k[static_cast<std::size_t>(k - first)] = sys.row(i, k);
      auto& per_start = norms_[i];
      per_start.resize(span);
      for (Index s = first; s <= last; ++s) {
        auto& out = per_start[static_cast<std::size_t>(s - first)];
        out.reserve(static_cast<std::size_t>(last - s + 1));
        Eigen::MatrixXd hist = Eigen::MatrixXd::Identity(size, size);
        out.push_back(1.0);
        for (Index k = s; k < last; ++k) {
          detail::flow_step(rows_by_k[static_cast<std::size_t>(k - first)], hist);
          out.push_back(operator_norm(hist));
        }
      }
    }
  }

  double operator()(std::size_t i, Index m, Index s) const {
    if (!(s >= first_ && m >= s && m <= last_)) throw InputError("norm table does not cover the requested pair");
    return norms_[i][static_cast<std::size_t>(s - first_)][static_cast<std::size_t>(m - s)];
  }

  OperatorBound as_bound() const {
    return [self = std::make_shared<const ExactNormTable>(*this)](std::size_t i, Index m, Index s) {
      return (*self)(i, m, s);
    };
  }

 private:
  Index first_;
  Index last_;
  std::vector<std::vector<std::vector<double>>> norms_;
};

/// Abstract counterpart of lambda_empirical with Lip(f_k^{(i)}) in place of
/// sum_j H_ij(k). Direct double sum, O(W^2) per start and component.
inline LambdaReport lambda_abstract(const AbstractSystem& sys, const OperatorBound& bound, const RateBound& weights,
                                    LambdaOptions opts = {}) {
  sys.check();
  if (opts.window < 1) throw InputError("lambda: window must be >= 1");
  if (opts.starts < 1 || opts.first_start < 0) throw InputError("lambda: need at least one start index >= 0");
  const Index W = opts.window;
  LambdaReport rep;
  std::vector<double> best_by_width(static_cast<std::size_t>(W + 1), 0.0);
  std::vector<LambdaEntry> cells(static_cast<std::size_t>(opts.starts * W));
  for (std::size_t i = 0; i < sys.neurons; ++i) {
    for (Index n = opts.first_start; n < opts.first_start + opts.starts; ++n) {
      std::vector<double> w(static_cast<std::size_t>(W));
      for (Index k = n; k < n + W; ++k) w[static_cast<std::size_t>(k - n)] = sys.lipschitz(i, k) * weights(k, n);
      for (Index m = n + 1; m <= n + W; ++m) {
        double sum = 0.0;
        for (Index k = n; k < m; ++k) sum += bound(i, m, k + 1) * w[static_cast<std::size_t>(k - n)];
        const double scale = weights(m, n);
        rep.domination = std::max(rep.domination, bound(i, m, n) / scale);
        detail::record(rep, best_by_width, cells, i, m, n, opts.first_start, W, sum / scale);
      }
    }
  }
  rep.table = std::move(cells);
  detail::finish_lambda(rep, best_by_width, W);
  return rep;
}

enum class CertificateKind { EmpiricalLambda, Corollary22, Corollary23 };

inline const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::EmpiricalLambda: return "empirical-lambda";
    case CertificateKind::Corollary22: return "corollary-2.2";
    case CertificateKind::Corollary23: return "corollary-2.3";
  }
  return "?";
}

/// Certified envelope ||x_m(a) - x_m(a*)|| <= C e^{-mu (m-n)} ||a - a*||.
struct Certificate {
  CertificateKind kind = CertificateKind::Corollary22;
  NormMode mode = NormMode::Strict;
  double lambda = 0.0;
  double mu = 0.0;
  double C = 1.0;
  /// K in a'_{m,n} = K e^{-mu (m-n)}; 1 in paper mode, e^{mu tau} in strict
  /// mode so that a' dominates the exact history norms.
  double prefactor = 1.0;
  /// Largest admissible rate (lambda(mu) -> 1 or the rate ceiling).
  double supremal_mu = 0.0;
  double lambda_target = 0.99;
  std::optional<std::vector<double>> d;
  std::vector<double> margins;
  bool converged = true;
  std::optional<std::pair<Index, Index>> argmax_pair;

  double envelope(Index elapsed) const { return C * std::exp(-mu * static_cast<double>(elapsed)); }
};

struct CertifyOptions {
  double lambda_target = 0.99;
  NormMode mode = NormMode::Strict;
  /// Use this rate instead of searching for one.
  std::optional<double> mu;
};

/// a_i^- - sum_j b_ij^+ F_j for every neuron.
inline std::vector<double> corollary22_margins(const XuWuModel& model) {
  std::vector<double> out(model.neurons);
  for (std::size_t i = 0; i < model.neurons; ++i) out[i] = model.rate_inf(i) - model.coupling_bound(i);
  return out;
}

/// Closed-form lambda(mu) for the exponential comparison a' = K e^{-mu(m-n)},
/// summing the geometric series over the whole of Delta.
///  Paper:  max_i (e^{nu_i} - 1)/(e^{nu_i - mu} - 1) * sum_j b_ij^+ F_j / a_i^-
///  Strict: max_i theta_i^+ sum_j b_ij^+ F_j
///            * [e^mu (e^{mu(tau+1)} - 1)/(e^mu - 1) + e^{mu(tau+1)}/(e^{nu_i - mu} - 1)]
/// Rows with zero coupling contribute 0; mu >= nu_i on a coupled row gives +inf.
inline double corollary22_lambda(const XuWuModel& model, double mu, NormMode mode) {
  double worst = 0.0;
  const double tau = model.max_delay;
  for (std::size_t i = 0; i < model.neurons; ++i) {
    const double coupling = model.coupling_bound(i);
    if (coupling == 0.0) continue;
    const double a_inf = model.rate_inf(i);
    const double nu = a_inf * model.step;
    if (mu >= nu) return std::numeric_limits<double>::infinity();
    const double gap = std::expm1(nu - mu);
    double value;
    if (mode == NormMode::Paper) {
      value = std::expm1(nu) / gap * coupling / a_inf;
    } else {
      const double head = mu == 0.0 ? tau + 1.0 : std::exp(mu) * std::expm1(mu * (tau + 1.0)) / std::expm1(mu);
      value = model.theta_sup(i) * coupling * (head + std::exp(mu * (tau + 1.0)) / gap);
    }
    worst = std::max(worst, value);
  }
  return worst;
}

inline Certificate corollary22_certificate(const XuWuModel& model, CertifyOptions opts = {}) {
  model.validate();
  if (!(opts.lambda_target > 0.0 && opts.lambda_target < 1.0))
    throw InputError("lambda_target must lie in (0,1)");
  Certificate cert;
  cert.kind = CertificateKind::Corollary22;
  cert.mode = opts.mode;
  cert.lambda_target = opts.lambda_target;
  cert.margins = corollary22_margins(model);
  for (std::size_t i = 0; i < model.neurons; ++i)
    if (!(cert.margins[i] > 0.0))
      throw ConditionViolated("a_i^- > sum_j b_ij^+ F_j fails for i=" + std::to_string(i + 1) +
                              " (margin " + std::to_string(cert.margins[i]) + ")");

  double nu_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.neurons; ++i) nu_min = std::min(nu_min, model.rate_inf(i) * model.step);
  // Open interval (0, nu_min): stay a hair inside so a' strictly dominates.
  const double ceiling = nu_min * (1.0 - 1e-9);
  auto lam = [&](double mu) { return corollary22_lambda(model, mu, opts.mode); };

  const double at_zero = lam(0.0);
  if (!(at_zero < 1.0))
    throw ConditionViolated(std::string("lambda(mu) >= 1 already as mu -> 0 in ") + to_string(opts.mode) +
                            " mode (lambda(0+) = " + std::to_string(at_zero) + ")");

  // Largest mu in (0, ceiling] with lam(mu) <= level; lam is increasing.
  auto largest_below = [&](double level) {
    if (lam(ceiling) <= level) return ceiling;
    double lo = 0.0, hi = ceiling;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * ceiling; ++it) {
      const double mid = 0.5 * (lo + hi);
      (lam(mid) <= level ? lo : hi) = mid;
    }
    return lo;
  };
  cert.supremal_mu = largest_below(1.0);

  if (opts.mu) {
    if (!(*opts.mu > 0.0)) throw InputError("mu must be positive");
    cert.mu = *opts.mu;
  } else {
    if (!(at_zero <= opts.lambda_target))
      throw ConditionViolated("lambda(0+) = " + std::to_string(at_zero) + " exceeds the target " +
                              std::to_string(opts.lambda_target));
    cert.mu = largest_below(opts.lambda_target);
    if (!(cert.mu > 0.0)) throw ConditionViolated("no positive rate meets the lambda target");
  }
  cert.lambda = lam(cert.mu);
  if (!(cert.lambda < 1.0))
    throw ConditionViolated("lambda(" + std::to_string(cert.mu) + ") = " + std::to_string(cert.lambda) + " >= 1");
  cert.prefactor = opts.mode == NormMode::Paper ? 1.0 : std::exp(cert.mu * model.max_delay);
  cert.C = cert.prefactor / (1.0 - cert.lambda);
  return cert;
}

/// Empirical certificate for a general model: lambda from the truncated scan
/// with a' = e^{-mu(m-n)}; in strict mode the prefactor is the smallest K
/// that makes K a' dominate the exact norms on the window.
inline Certificate empirical_certificate(const HopfieldModel& model, double mu, LambdaOptions opts) {
  const auto weights = RateBound::exponential(mu);
  const LambdaReport rep = lambda_empirical(model, weights, opts);
  if (!(rep.lambda < 1.0))
    throw ConditionViolated("empirical lambda = " + std::to_string(rep.lambda) + " >= 1");
  Certificate cert;
  cert.kind = CertificateKind::EmpiricalLambda;
  cert.mode = opts.mode;
  cert.lambda = rep.lambda;
  cert.mu = mu;
  cert.supremal_mu = mu;
  if (opts.mode == NormMode::Paper) {
    if (rep.domination > 1.0 + 1e-12)
      throw ConditionViolated("a' = e^{-mu(m-n)} does not dominate the coefficient products");
    cert.prefactor = 1.0;
  } else {
    cert.prefactor = std::max(1.0, rep.domination);
  }
  cert.C = cert.prefactor / (1.0 - cert.lambda);
  cert.converged = rep.tail_converged;
  cert.argmax_pair = std::make_pair(rep.argmax_m, rep.argmax_n);
  return cert;
}

/// diag(a_i^-) - [b_ij^+ F_j] with the derived scalars.
struct MMatrix {
  Eigen::MatrixXd matrix;
  std::vector<double> rate_inf;   // a_i^-
  Eigen::MatrixXd weight_sup;     // b_ij^+
  std::vector<double> nu;         // a_i^- h
  std::vector<double> theta_sup;  // theta_i^+
};

inline MMatrix build_M(const XuWuModel& model) {
  model.validate();
  const auto n = static_cast<Eigen::Index>(model.neurons);
  MMatrix out;
  out.matrix = Eigen::MatrixXd::Zero(n, n);
  out.weight_sup = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < model.neurons; ++i) {
    out.rate_inf.push_back(model.rate_inf(i));
    out.nu.push_back(model.rate_inf(i) * model.step);
    out.theta_sup.push_back(model.theta_sup(i));
    for (std::size_t j = 0; j < model.neurons; ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      out.weight_sup(ii, jj) = model.weight_sup(i, j);
      out.matrix(ii, jj) = -model.weight_sup(i, j) * model.activation[j].lipschitz();
    }
    out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += model.rate_inf(i);
  }
  return out;
}

struct WitnessResult {
  bool accepted = false;
  std::optional<std::vector<double>> d;
  std::string reason;
};

struct SpectralResult {
  bool accepted = false;
  double spectral_radius = 0.0;  // rho(B) for B = s I - M
  double shift = 0.0;            // s
  std::size_t iterations = 0;
};

struct MMatrixVerdict {
  bool is_m_matrix = false;
  std::optional<std::vector<double>> d;
  std::string reason;
  SpectralResult spectral;
};

namespace detail {
inline std::optional<std::string> z_matrix_violation(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) > 0.0)
        return "positive off-diagonal entry at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
  return std::nullopt;
}
}  // namespace detail

/// Solve M d = 1; a Z-matrix is an M-matrix iff this d exists and is > 0.
inline WitnessResult witness_test(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InputError("M-matrix test needs a nonempty square matrix");
  WitnessResult out;
  if (auto bad = detail::z_matrix_violation(m)) {
    out.reason = *bad;
    return out;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    out.reason = "singular";
    return out;
  }
  const Eigen::VectorXd d = lu.solve(Eigen::VectorXd::Ones(m.rows()));
  if ((d.array() > 0.0).all()) {
    out.accepted = true;
    out.d = std::vector<double>(d.data(), d.data() + d.size());
    out.reason = "M d = 1 with d > 0";
  } else {
    out.reason = "witness d = M^-1 1 has a nonpositive entry";
  }
  return out;
}

/// Split M = s I - B with B >= 0 and compare rho(B) with s, rho estimated by
/// power iteration on B + I with Collatz-Wielandt brackets.
inline SpectralResult spectral_test(const Eigen::MatrixXd& m, std::size_t max_iter = 200000) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InputError("M-matrix test needs a nonempty square matrix");
  SpectralResult out;
  if (detail::z_matrix_violation(m)) return out;
  const Eigen::Index n = m.rows();
  out.shift = std::max(m.diagonal().maxCoeff(), 0.0) + 1.0;
  const Eigen::MatrixXd shifted = out.shift * Eigen::MatrixXd::Identity(n, n) - m + Eigen::MatrixXd::Identity(n, n);
  const double target = out.shift + 1.0;  // rho(B + I) = rho(B) + 1
  const double slack = 1e-10 * target;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  double upper = std::numeric_limits<double>::infinity();
  double previous = upper;
  std::size_t flat = 0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd y = shifted * x;
    const Eigen::ArrayXd ratio = y.array() / x.array();
    upper = ratio.maxCoeff();
    const double lower = ratio.minCoeff();
    out.iterations = it;
    if (upper < target - slack) break;
    if (lower > target + slack) break;
    if (upper - lower <= 1e-14 * upper) break;
    flat = std::abs(previous - upper) <= 1e-15 * upper ? flat + 1 : 0;
    if (flat >= 50) break;
    previous = upper;
    x = y / y.maxCoeff();
  }
  out.spectral_radius = upper - 1.0;
  out.accepted = upper < target - slack;
  return out;
}

/// M-matrix decision by the d-witness, cross-checked spectrally. A
/// disagreement between the two is an error.
inline MMatrixVerdict m_matrix_witness(const Eigen::MatrixXd& m) {
  const WitnessResult w = witness_test(m);
  MMatrixVerdict v;
  v.spectral = spectral_test(m);
  v.is_m_matrix = w.accepted;
  v.d = w.d;
  v.reason = w.reason;
  if (!detail::z_matrix_violation(m) && w.accepted != v.spectral.accepted)
    throw NotConverged("M-matrix witness (" + std::string(w.accepted ? "accept" : "reject") +
                       ") and spectral test (rho(B) = " + std::to_string(v.spectral.spectral_radius) +
                       ", s = " + std::to_string(v.spectral.shift) + ") disagree");
  return v;
}

/// y_i = x_i / d_i: b_ij -> b_ij / d_i, f_j(u) -> f_j(d_j u), I_i -> I_i / d_i.
inline XuWuModel rescale(const XuWuModel& model, const std::vector<double>& d) {
  model.validate();
  if (d.size() != model.neurons) throw InputError("rescale: d must have N entries");
  for (double di : d)
    if (!(di > 0.0) || !std::isfinite(di)) throw InputError("rescale: d must be positive");
  XuWuModel out = model;
  for (std::size_t i = 0; i < model.neurons; ++i) {
    out.input[i] = model.input[i].scaled(1.0 / d[i]);
    out.activation[i] = model.activation[i].with_input_scale(d[i]);
    for (std::size_t j = 0; j < model.neurons; ++j) out.weight[i * model.neurons + j] = model.b(i, j).scaled(1.0 / d[i]);
  }
  return out;
}

/// M-matrix route: find d > 0 with M d > 0, certify the rescaled model, and
/// carry the bound back with the factor max_i d_i / min_i d_i.
inline Certificate corollary23_certificate(const XuWuModel& model, CertifyOptions opts = {}) {
  const MMatrix mm = build_M(model);
  const MMatrixVerdict verdict = m_matrix_witness(mm.matrix);
  if (!verdict.is_m_matrix) throw ConditionViolated("M is not an M-matrix: " + verdict.reason);
  const auto& d = *verdict.d;
  Certificate cert = corollary22_certificate(rescale(model, d), opts);
  cert.kind = CertificateKind::Corollary23;
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  cert.C *= *hi / *lo;
  cert.d = d;
  const Eigen::VectorXd md = mm.matrix * Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
  cert.margins.assign(md.data(), md.data() + md.size());
  return cert;
}

}  // namespace delaynet

namespace delaynet {

/// Row-wise condition first, then the M-matrix route.
inline Certificate certify_best(const XuWuModel& model, CertifyOptions opts = {}) {
  std::string first_reason;
  try {
    return corollary22_certificate(model, opts);
  } catch (const ConditionViolated& e) {
    first_reason = e.what();
  }
  try {
    return corollary23_certificate(model, opts);
  } catch (const ConditionViolated& e) {
    throw ConditionViolated(first_reason + "; " + e.what());
  }
}

}  // namespace delaynet

namespace delaynet {

struct NormAuditEntry {
  std::size_t component = 0;
  Index m = 0;
  Index n = 0;
  double exact = 0.0;
  double paper = 0.0;
  double strict = 0.0;
};

struct NormAudit {
  std::vector<NormAuditEntry> entries;
  /// Pairs whose exact norm exceeds the paper-literal product (beyond 1e-12 relative).
  std::vector<NormAuditEntry> paper_exceeded;
  /// Pairs whose exact norm exceeds the strict product; empty when the strict bound is sound.
  std::vector<NormAuditEntry> strict_exceeded;
};

/// Compare ||A^{(i)}_{m,n}|| with both coefficient-product bounds for every
/// first <= n <= m <= last.
inline NormAudit norm_audit(const HopfieldModel& model, Index first, Index last) {
  const AbstractSystem sys = from_hopfield(model);
  const ExactNormTable table(sys, first, last);
  NormAudit audit;
  for (std::size_t i = 0; i < model.neurons(); ++i)
    for (Index n = first; n <= last; ++n)
      for (Index m = n; m <= last; ++m) {
        NormAuditEntry e{i, m, n, table(i, m, n), product_bound(model, i, m, n, NormMode::Paper),
                         product_bound(model, i, m, n, NormMode::Strict)};
        audit.entries.push_back(e);
        if (e.exact > e.paper * (1.0 + 1e-12)) audit.paper_exceeded.push_back(e);
        if (e.exact > e.strict * (1.0 + 1e-12)) audit.strict_exceeded.push_back(e);
      }
  return audit;
}

}  // namespace delaynet
