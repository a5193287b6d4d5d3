#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delaynet/certify.hpp"
#include "delaynet/engine.hpp"
#include "delaynet/parallel.hpp"
#include "delaynet/periodic.hpp"
#include "delaynet/random.hpp"

namespace delaynet {

struct ValidateOptions {
  std::size_t trials = 1000;
  Index horizon = 300;
  std::uint64_t seed = 1;
  double box = 1.0;  // initial entries uniform on [-box, box]
  Index start = 0;
};

struct ValidationReport {
  Certificate certificate;
  std::size_t trials = 0;
  Index horizon = 0;
  std::uint64_t seed = 0;
  /// max_m ||x_m(a) - x_m(a*)|| / (C e^{-mu(m-n)} ||a - a*||), distances
  /// first reduced by the rounding floor.
  std::vector<double> per_trial_worst;
  double global_max = 0.0;
  bool pass = true;
  std::optional<EnvelopeViolation> violation;
};

/// Ensemble check of the certified envelope on random pairs of initial
/// segments, evaluated at every m in [n, horizon].
inline ValidationReport run_validate(const HopfieldModel& model, const Certificate& cert, ValidateOptions opts = {}) {
  if (cert.mode != NormMode::Strict)
    throw InputError(
        "validation needs a strict-mode certificate: for m - n <= tau the exact history norms exceed the "
        "coefficient products used in paper mode");
  if (!(cert.lambda < 1.0)) throw InputError("certificate lambda must be < 1");
  if (opts.horizon <= opts.start) throw InputError("horizon must exceed the start index");
  ValidationReport rep;
  rep.certificate = cert;
  rep.trials = opts.trials;
  rep.horizon = opts.horizon;
  rep.seed = opts.seed;
  rep.per_trial_worst.assign(opts.trials, 0.0);
  std::vector<std::optional<EnvelopeViolation>> first(opts.trials);
  const std::size_t n_neurons = model.neurons();
  const int depth = model.max_delay();

  parallel_for(opts.trials, [&](std::size_t t) {
    Stream rng(derive_seed(opts.seed, t));
    HistorySegment a(n_neurons, depth), b(n_neurons, depth);
    for (auto* seg : {&a, &b})
      for (int j = -depth; j <= 0; ++j)
        for (std::size_t i = 0; i < n_neurons; ++i) (*seg)(j, i) = rng.uniform(-opts.box, opts.box);
    const double initial = (a - b).sup_norm();
    if (initial == 0.0) return;
    const Trajectory xa = solve(model, opts.start, a, opts.horizon);
    const Trajectory xb = solve(model, opts.start, b, opts.horizon);
    double worst = 0.0;
    for (Index m = opts.start; m <= opts.horizon; ++m) {
      const HistorySegment ha = xa.history_at(m), hb = xb.history_at(m);
      const double d = (ha - hb).sup_norm();
      const double floor = resolution_floor(std::max(ha.sup_norm(), hb.sup_norm()));
      const double ratio = std::max(d - floor, 0.0) / (cert.envelope(m - opts.start) * initial);
      worst = std::max(worst, ratio);
      if (ratio > 1.0 && !first[t]) first[t] = EnvelopeViolation{t, m, ratio};
    }
    rep.per_trial_worst[t] = worst;
  });

  for (std::size_t t = 0; t < opts.trials; ++t) {
    rep.global_max = std::max(rep.global_max, rep.per_trial_worst[t]);
    if (first[t] && !rep.violation) rep.violation = first[t];
  }
  rep.pass = rep.global_max <= 1.0;
  return rep;
}

inline ValidationReport run_validate(const XuWuModel& model, const Certificate& cert, ValidateOptions opts = {}) {
  return run_validate(as_general(model), cert, opts);
}

/// Replace one scalar parameter of a specialized model by a constant.
/// Names (1-based): "h", "a.i", "b.i.j", "I.i", "gain.j" (tanh gain or
/// saturating slope of f_j), "tau".
inline XuWuModel with_parameter(const XuWuModel& base, const std::string& name, double value) {
  XuWuModel out = base;
  auto index = [&](const std::string& s) -> std::size_t {
    std::size_t k = std::stoul(s);
    if (k < 1 || k > base.neurons) throw InputError("sweep parameter index out of range in '" + name + "'");
    return k - 1;
  };
  auto parts = [&] {
    std::vector<std::string> p;
    std::size_t pos = 0, dot;
    while ((dot = name.find('.', pos)) != std::string::npos) {
      p.push_back(name.substr(pos, dot - pos));
      pos = dot + 1;
    }
    p.push_back(name.substr(pos));
    return p;
  }();
  try {
    if (parts[0] == "h" && parts.size() == 1) {
      out.step = value;
    } else if (parts[0] == "tau" && parts.size() == 1) {
      out.delay = Sequence::constant(value);
      out.max_delay = std::max(out.max_delay, static_cast<int>(value));
    } else if (parts[0] == "a" && parts.size() == 2) {
      out.rate[index(parts[1])] = Sequence::constant(value);
    } else if (parts[0] == "I" && parts.size() == 2) {
      out.input[index(parts[1])] = Sequence::constant(value);
    } else if (parts[0] == "b" && parts.size() == 3) {
      out.weight[index(parts[1]) * base.neurons + index(parts[2])] = Sequence::constant(value);
    } else if (parts[0] == "gain" && parts.size() == 2) {
      const std::size_t j = index(parts[1]);
      const Activation& f = base.activation[j];
      switch (f.kind()) {
        case Activation::Kind::Tanh: out.activation[j] = Activation::tanh(value); break;
        case Activation::Kind::Saturating: out.activation[j] = Activation::saturating(value, f.cap()); break;
        default: throw InputError("gain sweep needs a tanh or saturating activation");
      }
    } else {
      throw InputError("unknown sweep parameter '" + name + "'");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const InputError*>(&e)) throw;
    throw InputError("malformed sweep parameter '" + name + "'");
  }
  return out;
}

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
  bool validate = false;
};

struct SweepRow {
  double value = 0.0;
  std::optional<Certificate> certificate;
  /// "pass", "fail", "skipped", "no-certificate" or "error".
  std::string status;
  std::string detail;
};

/// One row per grid value, in grid order. Failures stay inside their row.
inline std::vector<SweepRow> run_sweep(const XuWuModel& base, const SweepSpec& spec, CertifyOptions copts = {},
                                       ValidateOptions vopts = {}) {
  if (spec.values.empty()) throw InputError("sweep grid is empty");
  std::vector<SweepRow> rows(spec.values.size());
  vopts.trials = spec.validate ? vopts.trials : 0;
  parallel_for(rows.size(), [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.value = spec.values[k];
    try {
      const XuWuModel model = with_parameter(base, spec.parameter, row.value);
      model.validate();
      row.certificate = certify_best(model, copts);
      if (spec.validate) {
        ValidateOptions local = vopts;
        local.seed = derive_seed(vopts.seed, k);
        const auto rep = run_validate(model, *row.certificate, local);
        row.status = rep.pass ? "pass" : "fail";
      } else {
        row.status = "skipped";
      }
    } catch (const ConditionViolated& e) {
      row.status = "no-certificate";
      row.detail = e.what();
    } catch (const std::exception& e) {
      row.status = "error";
      row.detail = e.what();
    }
  }, 1);
  return rows;
}

}  // namespace delaynet
