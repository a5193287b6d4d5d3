#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "delaynet/certify.hpp"
#include "delaynet/engine.hpp"
#include "delaynet/model.hpp"
#include "delaynet/parallel.hpp"
#include "delaynet/random.hpp"

namespace delaynet {

struct PeriodicityMismatch {
  std::string field;  // e.g. "a[1]", "b[1][2]", "I[2]", "tau"
  Index m = 0;
  double value = 0.0;
  double shifted_value = 0.0;  // value at m + omega
};

struct PeriodicityReport {
  bool periodic = true;
  std::optional<PeriodicityMismatch> mismatch;
  Index checked = 0;   // indices m = 0..checked-1 were compared with m + omega
  bool capped = false;
};

/// Compare every coefficient sequence at m and m + omega over one common
/// multiple of the declared spans plus omega (capped at max_range).
inline PeriodicityReport check_periodicity(const XuWuModel& model, Index omega, Index max_range = 1'000'000) {
  if (omega < 1) throw InputError("period omega must be >= 1");
  std::vector<std::pair<std::string, const Sequence*>> fields;
  for (std::size_t i = 0; i < model.neurons; ++i) fields.emplace_back("a[" + std::to_string(i + 1) + "]", &model.rate[i]);
  for (std::size_t i = 0; i < model.neurons; ++i)
    for (std::size_t j = 0; j < model.neurons; ++j)
      fields.emplace_back("b[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]", &model.b(i, j));
  for (std::size_t i = 0; i < model.neurons; ++i) fields.emplace_back("I[" + std::to_string(i + 1) + "]", &model.input[i]);
  fields.emplace_back("tau", &model.delay);

  PeriodicityReport rep;
  Index range = 1;
  for (const auto& [name, seq] : fields) {
    range = std::lcm(range, seq->span());
    if (range > max_range) {
      range = max_range;
      rep.capped = true;
      break;
    }
  }
  range = std::min(range + omega, max_range);
  rep.checked = range;
  for (Index m = 0; m < range; ++m) {
    for (const auto& [name, seq] : fields) {
      const double now = (*seq)(m), later = (*seq)(m + omega);
      if (now != later) {
        rep.periodic = false;
        rep.mismatch = PeriodicityMismatch{name, m, now, later};
        return rep;
      }
    }
  }
  return rep;
}

/// P(alpha) = x_{n+omega}(., n, alpha).
inline HistorySegment poincare(const XuWuModel& model, Index start, Index omega, const HistorySegment& alpha) {
  const auto rep = check_periodicity(model, omega);
  if (!rep.periodic)
    throw InputError("model is not " + std::to_string(omega) + "-periodic: " + rep.mismatch->field + " differs at m=" +
                     std::to_string(rep.mismatch->m));
  return solve(model, start, alpha, start + omega).history_at(start + omega);
}

/// Smallest k >= 1 with C e^{-mu k omega} < 1, i.e. mu k omega > ln C.
inline Index choose_k(double C, double mu, Index omega) {
  if (!(mu > 0.0)) throw InputError("choose_k: mu must be positive");
  if (omega < 1) throw InputError("choose_k: omega must be >= 1");
  if (!(C >= 1.0)) throw InputError("choose_k: C must be >= 1");
  const double threshold = std::log(C) / (mu * static_cast<double>(omega));
  Index k = std::max<Index>(1, static_cast<Index>(std::floor(threshold)) + 1);
  // The logarithm can land a rounding step off the boundary; settle on the
  // products themselves.
  auto contracts = [&](Index j) { return C * std::exp(-mu * static_cast<double>(j * omega)) < 1.0; };
  while (!contracts(k)) ++k;
  while (k > 1 && contracts(k - 1)) --k;
  return k;
}

struct PeriodicOptions {
  Index start = 0;
  double tol = 1e-12;
  std::optional<std::size_t> max_iter;
  std::optional<HistorySegment> initial;  // zero segment by default
};

struct PeriodicOrbitResult {
  HistorySegment phi;
  double residual = 0.0;  // ||P(phi) - phi||
  Index omega = 1;
  Index start = 0;
  std::size_t iterations = 0;
  Index k = 1;
  double mu = 0.0;
  double C = 1.0;
  /// max over m in [n, n + 5 omega) of |x(m + omega) - x(m)| along phi's solution.
  double orbit_defect = 0.0;
  bool orbit_ok = false;
};

/// Iterate the Poincare map from the zero segment until successive segments
/// agree within tol. The certificate supplies k (P^k contracts), which only
/// sizes the iteration budget.
inline PeriodicOrbitResult find_periodic(const XuWuModel& model, Index omega, const Certificate& cert,
                                         PeriodicOptions opts = {}) {
  const auto periodic = check_periodicity(model, omega);
  if (!periodic.periodic) throw InputError("model is not " + std::to_string(omega) + "-periodic");
  if (!(cert.lambda < 1.0) || !(cert.mu > 0.0)) throw ConditionViolated("certificate does not establish contraction");
  if (!(opts.tol > 0.0)) throw InputError("tol must be positive");
  PeriodicOrbitResult res;
  res.omega = omega;
  res.start = opts.start;
  res.mu = cert.mu;
  res.C = cert.C;
  res.k = choose_k(cert.C, cert.mu, omega);

  HistorySegment alpha = opts.initial ? *opts.initial : HistorySegment(model.neurons, model.max_delay);
  auto advance = [&](const HistorySegment& a) {
    return solve(model, opts.start, a, opts.start + omega).history_at(opts.start + omega);
  };
  HistorySegment image = advance(alpha);
  double residual = (image - alpha).sup_norm();

  std::size_t budget;
  if (opts.max_iter) {
    budget = *opts.max_iter;
  } else {
    // ||P^j a - phi|| <= C e^{-mu j omega} ||a - phi||, with ||a - phi|| <~ C residual / (1 - e^{-mu k omega}/C).
    const double scale = std::max(1.0, cert.C * residual);
    const double rate = cert.mu * static_cast<double>(omega) * static_cast<double>(res.k);
    const double blocks = std::ceil(std::log(std::max(1.0, cert.C * scale / opts.tol)) / rate);
    budget = static_cast<std::size_t>(res.k) * static_cast<std::size_t>(std::max(1.0, blocks)) +
             static_cast<std::size_t>(res.k) + 16;
  }

  std::size_t it = 0;
  while (residual > opts.tol) {
    if (it >= budget)
      throw NotConverged("Poincare iteration exceeded " + std::to_string(budget) + " iterations (residual " +
                         std::to_string(residual) + ")");
    alpha = std::move(image);
    image = advance(alpha);
    residual = (image - alpha).sup_norm();
    ++it;
  }
  res.phi = alpha;
  res.residual = residual;
  res.iterations = it;

  const Trajectory orbit = solve(model, opts.start, res.phi, opts.start + 6 * omega);
  for (Index m = opts.start; m < opts.start + 5 * omega; ++m)
    for (std::size_t i = 0; i < model.neurons; ++i)
      res.orbit_defect = std::max(res.orbit_defect, std::abs(orbit(m + omega, i) - orbit(m, i)));
  res.orbit_ok = res.orbit_defect <= 10.0 * opts.tol;
  return res;
}

struct EnvelopeViolation {
  std::size_t trial = 0;
  Index m = 0;
  double ratio = 0.0;
};

/// Distances below this are indistinguishable from rounding at the given
/// state magnitude and are not held against an envelope.
inline double resolution_floor(double magnitude) { return 1e-12 * (1.0 + magnitude); }

struct AttractionOptions {
  std::size_t trials = 100;
  Index horizon = 300;
  std::uint64_t seed = 1;
  double box = 1.0;
};

struct AttractionReport {
  bool asserted = false;  // false: measurement only (no certificate)
  bool envelope_ok = true;
  double worst_ratio = 0.0;
  std::optional<EnvelopeViolation> violation;
  /// Geometric-mean per-step contraction toward the orbit, measured from
  /// per-period ratios while distances stay above the rounding floor.
  double asymptotic_step_ratio = 0.0;
  std::vector<double> per_trial_worst;
  std::vector<double> per_trial_step_ratio;
};

/// Random initial segments (entries uniform in [-box, box]) are driven toward
/// the orbit; with a certificate, every m must satisfy
/// ||x_m - phi_m|| <= C e^{-mu (m-n)} ||alpha - phi||.
inline AttractionReport verify_attraction(const XuWuModel& model, const PeriodicOrbitResult& orbit,
                                          const Certificate* cert, AttractionOptions opts = {}) {
  if (opts.horizon <= orbit.start) throw InputError("horizon must exceed the base index");
  if (cert && cert->mode != NormMode::Strict)
    throw InputError("attraction envelopes are asserted only for strict-mode certificates");
  AttractionReport rep;
  rep.asserted = cert != nullptr;
  const Index n = orbit.start, omega = orbit.omega;
  const Trajectory reference = solve(model, n, orbit.phi, opts.horizon);
  rep.per_trial_worst.assign(opts.trials, 0.0);
  rep.per_trial_step_ratio.assign(opts.trials, 0.0);
  std::vector<std::optional<EnvelopeViolation>> first(opts.trials);

  parallel_for(opts.trials, [&](std::size_t t) {
    Stream rng(derive_seed(opts.seed, t));
    HistorySegment alpha(model.neurons, model.max_delay);
    for (int j = -model.max_delay; j <= 0; ++j)
      for (std::size_t i = 0; i < model.neurons; ++i) alpha(j, i) = rng.uniform(-opts.box, opts.box);
    const Trajectory traj = solve(model, n, alpha, opts.horizon);
    const double initial = (alpha - orbit.phi).sup_norm();
    double worst = 0.0;
    std::vector<double> dist(static_cast<std::size_t>(opts.horizon - n + 1));
    for (Index m = n; m <= opts.horizon; ++m) {
      const HistorySegment diff = traj.history_at(m) - reference.history_at(m);
      const double d = diff.sup_norm();
      dist[static_cast<std::size_t>(m - n)] = d;
      if (cert && initial > 0.0) {
        const double floor = resolution_floor(std::max(traj.history_at(m).sup_norm(), reference.history_at(m).sup_norm()));
        const double ratio = std::max(d - floor, 0.0) / (cert->envelope(m - n) * initial);
        worst = std::max(worst, ratio);
        if (ratio > 1.0 && !first[t]) first[t] = EnvelopeViolation{t, m, ratio};
      }
    }
    rep.per_trial_worst[t] = worst;
    std::size_t count = 0;
    const double floor = 1e3 * resolution_floor(reference.history_at(n).sup_norm());
    for (Index j = 0; n + (j + 1) * omega <= opts.horizon; ++j) {
      const double a = dist[static_cast<std::size_t>(j * omega)], b = dist[static_cast<std::size_t>((j + 1) * omega)];
      if (a <= floor || b <= floor) break;
      ++count;
    }
    // Keep only the later half of the resolvable periods as the asymptotic regime.
    if (count > 0) {
      double tail_sum = 0.0;
      std::size_t tail = 0;
      for (Index j = static_cast<Index>(count / 2); j < static_cast<Index>(count); ++j) {
        tail_sum += std::log(dist[static_cast<std::size_t>((j + 1) * omega)] / dist[static_cast<std::size_t>(j * omega)]);
        ++tail;
      }
      rep.per_trial_step_ratio[t] = std::exp(tail_sum / static_cast<double>(tail * static_cast<std::size_t>(omega)));
    }
  });

  for (std::size_t t = 0; t < opts.trials; ++t) {
    rep.worst_ratio = std::max(rep.worst_ratio, rep.per_trial_worst[t]);
    rep.asymptotic_step_ratio = std::max(rep.asymptotic_step_ratio, rep.per_trial_step_ratio[t]);
    if (first[t] && !rep.violation) rep.violation = first[t];
  }
  rep.envelope_ok = !rep.violation;
  return rep;
}

}  // namespace delaynet
