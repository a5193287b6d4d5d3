#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "delaynet/certify.hpp"
#include "delaynet/fixed_point.hpp"
#include "delaynet/history.hpp"
#include "delaynet/model.hpp"
#include "delaynet/periodic.hpp"
#include "delaynet/validate.hpp"

namespace delaynet {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, where));
  return out;
}

inline std::string kind_of(const json& j, const std::string& where) {
  const json& k = field(j, "kind", where);
  if (!k.is_string()) throw InputError(where + ": 'kind' must be a string");
  return k.get<std::string>();
}

}  // namespace detail

/// A number, or {"kind": "constant"|"periodic"|"table", ...}.
inline Sequence parse_sequence(const json& j, const std::string& where) {
  if (j.is_number()) return Sequence::constant(j.get<double>());
  const std::string kind = detail::kind_of(j, where);
  if (kind == "constant") return Sequence::constant(detail::number(detail::field(j, "value", where), where));
  if (kind == "periodic") return Sequence::periodic(detail::numbers(detail::field(j, "values", where), where));
  if (kind == "table")
    return Sequence::table(detail::numbers(detail::field(j, "values", where), where),
                           detail::number(detail::field(j, "tail", where), where));
  throw InputError(where + ": unknown sequence kind '" + kind + "'");
}

inline json to_json(const Sequence& s) {
  switch (s.kind()) {
    case Sequence::Kind::Constant: return s(0);
    case Sequence::Kind::Periodic: return {{"kind", "periodic"}, {"values", s.values()}};
    case Sequence::Kind::Table: return {{"kind", "table"}, {"values", s.values()}, {"tail", *s.tail()}};
  }
  return nullptr;
}

inline Activation parse_activation(const json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "identity") return Activation::identity();
  const std::string kind = detail::kind_of(j, where);
  if (kind == "identity") return Activation::identity();
  if (kind == "tanh") return Activation::tanh(detail::number(detail::field(j, "gain", where), where));
  if (kind == "saturating")
    return Activation::saturating(detail::number(detail::field(j, "slope", where), where),
                                  detail::number(detail::field(j, "cap", where), where));
  if (kind == "tabulated")
    return Activation::tabulated(detail::numbers(detail::field(j, "u", where), where),
                                 detail::numbers(detail::field(j, "f", where), where),
                                 detail::number(detail::field(j, "lipschitz", where), where));
  throw InputError(where + ": unknown activation kind '" + kind + "'");
}

inline ContinuousFunction parse_continuous(const json& j, const std::string& where) {
  if (j.is_number()) return ContinuousFunction::constant(j.get<double>());
  const std::string kind = detail::kind_of(j, where);
  if (kind == "constant") return ContinuousFunction::constant(detail::number(detail::field(j, "value", where), where));
  if (kind == "samples")
    return ContinuousFunction::samples(detail::numbers(detail::field(j, "t", where), where),
                                       detail::numbers(detail::field(j, "values", where), where));
  if (kind == "sinusoid")
    return ContinuousFunction::sinusoid(
        detail::number(detail::field(j, "mean", where), where), detail::number(detail::field(j, "amplitude", where), where),
        detail::number(detail::field(j, "period", where), where), j.value("phase", 0.0));
  throw InputError(where + ": unknown function kind '" + kind + "'");
}

namespace detail {

template <class T, class F>
std::vector<T> vector_of(const json& j, std::size_t n, const std::string& where, F parse) {
  if (!j.is_array() || j.size() != n) throw InputError(where + ": expected an array of " + std::to_string(n));
  std::vector<T> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(parse(j[i], where + "[" + std::to_string(i + 1) + "]"));
  return out;
}

template <class T, class F>
std::vector<T> matrix_of(const json& j, std::size_t n, const std::string& where, F parse) {
  if (!j.is_array() || j.size() != n) throw InputError(where + ": expected " + std::to_string(n) + " rows");
  std::vector<T> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = vector_of<T>(j[i], n, where + "[" + std::to_string(i + 1) + "]", parse);
    for (auto& v : row) out.push_back(std::move(v));
  }
  return out;
}

inline std::size_t neuron_count(const json& j, const std::string& where) {
  const json& n = field(j, "neurons", where);
  if (!n.is_number_integer() || n.get<long long>() < 1) throw InputError(where + ": neurons must be a positive integer");
  return n.get<std::size_t>();
}

inline int delay_bound(const json& j, const char* key, const std::string& where) {
  const json& r = field(j, key, where);
  if (!r.is_number_integer() || r.get<long long>() < 0)
    throw InputError(where + ": " + key + " must be a nonnegative integer");
  return r.get<int>();
}

}  // namespace detail

/// A parsed model file. Exactly one of the model members is set.
struct ModelDocument {
  std::string type;  // "xu_wu", "hopfield" or "continuous"
  std::optional<XuWuModel> xu_wu;
  std::optional<HopfieldModel> general;
  std::optional<ContinuousHopfieldSpec> continuous;
  std::optional<double> step;       // discretization step of a continuous spec
  std::optional<double> rate_floor;
  std::optional<HistorySegment> initial;
  std::optional<Index> omega;

  std::size_t neurons() const {
    if (xu_wu) return xu_wu->neurons;
    if (general) return general->neurons();
    return continuous->neurons;
  }

  /// The general form, discretizing a continuous spec at step_override or
  /// the file's step.
  HopfieldModel hopfield(std::optional<double> step_override = std::nullopt) const {
    if (xu_wu) return as_general(*xu_wu);
    if (general) return *general;
    const auto h = step_override ? step_override : step;
    if (!h) throw InputError("continuous model needs a step (file field 'step' or --step)");
    DiscretizeOptions opts;
    if (rate_floor) opts.rate_floor = *rate_floor;
    return discretize(*continuous, *h, opts);
  }

  const XuWuModel& require_xu_wu(const std::string& what) const {
    if (!xu_wu) throw InputError(what + " needs a model of type 'xu_wu'");
    return *xu_wu;
  }
};

/// History rows are listed oldest first (offset -r up to 0), one value per
/// neuron; a single number fills the whole segment.
inline HistorySegment parse_history(const json& j, std::size_t neurons, int depth, const std::string& where) {
  if (j.is_number()) return HistorySegment::filled(neurons, depth, j.get<double>());
  if (!j.is_array() || j.size() != static_cast<std::size_t>(depth + 1))
    throw InputError(where + ": expected " + std::to_string(depth + 1) + " rows (offsets -r..0)");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    auto row = detail::numbers(r, where);
    if (row.size() != neurons) throw InputError(where + ": each row needs " + std::to_string(neurons) + " values");
    rows.push_back(std::move(row));
  }
  return HistorySegment::from_rows(rows);
}

inline ModelDocument parse_model(const json& j) {
  if (!j.is_object()) throw InputError("model: expected a JSON object");
  ModelDocument doc;
  doc.type = j.value("type", std::string("xu_wu"));
  const std::size_t n = detail::neuron_count(j, "model");
  int depth = 0;
  auto seq = [](const json& v, const std::string& w) { return parse_sequence(v, w); };
  auto act = [](const json& v, const std::string& w) { return parse_activation(v, w); };
  auto cfun = [](const json& v, const std::string& w) { return parse_continuous(v, w); };
  if (doc.type == "xu_wu") {
    XuWuModel m;
    m.neurons = n;
    m.step = detail::number(detail::field(j, "step", "model"), "model.step");
    m.rate = detail::vector_of<Sequence>(detail::field(j, "a", "model"), n, "a", seq);
    m.weight = detail::matrix_of<Sequence>(detail::field(j, "b", "model"), n, "b", seq);
    m.input = j.contains("input") ? detail::vector_of<Sequence>(j.at("input"), n, "input", seq)
                                  : std::vector<Sequence>(n, Sequence::constant(0.0));
    m.activation = detail::vector_of<Activation>(detail::field(j, "activation", "model"), n, "activation", act);
    m.delay = j.contains("delay") ? parse_sequence(j.at("delay"), "delay") : Sequence::constant(0.0);
    m.max_delay = j.contains("max_delay") ? detail::delay_bound(j, "max_delay", "model")
                                          : static_cast<int>(m.delay.sup());
    m.validate();
    depth = m.max_delay;
    doc.xu_wu = std::move(m);
  } else if (doc.type == "hopfield") {
    const int r = detail::delay_bound(j, "max_delay", "model");
    auto decay = detail::vector_of<Sequence>(detail::field(j, "decay", "model"), n, "decay", seq);
    auto inter = detail::matrix_of<Interaction>(
        detail::field(j, "coupling", "model"), n, "coupling", [](const json& v, const std::string& w) {
          Interaction it;
          it.weight = v.contains("weight") ? parse_sequence(v.at("weight"), w + ".weight") : Sequence::constant(0.0);
          it.activation = v.contains("activation") ? parse_activation(v.at("activation"), w + ".activation")
                                                   : Activation::identity();
          it.offset = v.contains("offset") ? parse_sequence(v.at("offset"), w + ".offset") : Sequence::constant(0.0);
          return it;
        });
    auto delays = j.contains("delays") ? detail::matrix_of<Sequence>(j.at("delays"), n, "delays", seq)
                                       : std::vector<Sequence>(n * n, Sequence::constant(0.0));
    doc.general = HopfieldModel::from_tables(std::move(decay), std::move(inter), std::move(delays), r);
    depth = r;
  } else if (doc.type == "continuous") {
    ContinuousHopfieldSpec spec;
    spec.neurons = n;
    spec.rate = detail::vector_of<ContinuousFunction>(detail::field(j, "rate", "model"), n, "rate", cfun);
    spec.coupling = detail::matrix_of<ContinuousCoupling>(
        detail::field(j, "coupling", "model"), n, "coupling", [](const json& v, const std::string& w) {
          ContinuousCoupling c;
          c.weight = v.contains("weight") ? parse_continuous(v.at("weight"), w + ".weight")
                                          : ContinuousFunction::constant(0.0);
          c.activation = v.contains("activation") ? parse_activation(v.at("activation"), w + ".activation")
                                                  : Activation::identity();
          return c;
        });
    spec.lag = j.contains("lag") ? detail::matrix_of<ContinuousFunction>(j.at("lag"), n, "lag", cfun)
                                 : std::vector<ContinuousFunction>(n * n, ContinuousFunction::constant(0.0));
    spec.max_lag = j.contains("max_lag") ? detail::number(j.at("max_lag"), "max_lag") : 0.0;
    if (j.contains("step")) doc.step = detail::number(j.at("step"), "step");
    if (j.contains("rate_floor")) doc.rate_floor = detail::number(j.at("rate_floor"), "rate_floor");
    doc.continuous = std::move(spec);
    depth = doc.step ? static_cast<int>(std::floor(doc.continuous->max_lag / *doc.step)) : 0;
  } else {
    throw InputError("model: unknown type '" + doc.type + "'");
  }
  if (j.contains("omega")) {
    const json& w = j.at("omega");
    if (!w.is_number_integer() || w.get<long long>() < 1) throw InputError("model.omega must be a positive integer");
    doc.omega = w.get<Index>();
  }
  if (j.contains("initial") && doc.type != "continuous") doc.initial = parse_history(j.at("initial"), n, depth, "initial");
  return doc;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline ModelDocument load_model(const std::filesystem::path& path) {
  try {
    return parse_model(read_json_file(path));
  } catch (const json::exception& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
}

inline json to_json(const HistorySegment& seg) {
  json rows = json::array();
  for (int j = -seg.depth(); j <= 0; ++j) {
    json row = json::array();
    for (std::size_t i = 0; i < seg.neurons(); ++i) row.push_back(seg(j, i));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const Certificate& c) {
  json j{{"kind", to_string(c.kind)},
         {"mode", to_string(c.mode)},
         {"lambda", c.lambda},
         {"mu", c.mu},
         {"C", c.C},
         {"prefactor", c.prefactor},
         {"supremal_mu", c.supremal_mu},
         {"lambda_target", c.lambda_target},
         {"converged", c.converged},
         {"margins", c.margins}};
  if (c.d) j["d"] = *c.d;
  if (c.argmax_pair) j["argmax_pair"] = {c.argmax_pair->first, c.argmax_pair->second};
  return j;
}

inline json to_json(const LambdaReport& r) {
  return {{"lambda", r.lambda},
          {"component", r.component + 1},
          {"argmax_pair", {r.argmax_m, r.argmax_n}},
          {"tail_converged", r.tail_converged},
          {"domination", r.domination}};
}

inline json to_json(const EnvelopeViolation& v) { return {{"trial", v.trial}, {"m", v.m}, {"ratio", v.ratio}}; }

inline json to_json(const PeriodicOrbitResult& orbit, const AttractionReport& att) {
  json j{{"omega", orbit.omega},
         {"start", orbit.start},
         {"residual", orbit.residual},
         {"iterations", orbit.iterations},
         {"k", orbit.k},
         {"orbit_defect", orbit.orbit_defect},
         {"orbit_ok", orbit.orbit_ok},
         {"phi", to_json(orbit.phi)},
         {"envelope_asserted", att.asserted},
         {"envelope_ok", att.envelope_ok},
         {"worst_ratio", att.worst_ratio},
         {"asymptotic_step_ratio", att.asymptotic_step_ratio}};
  if (att.violation) j["violation"] = to_json(*att.violation);
  return j;
}

inline json to_json(const ValidationReport& r) {
  json j{{"certificate", to_json(r.certificate)},
         {"trials", r.trials},
         {"horizon", r.horizon},
         {"seed", r.seed},
         {"sampling", "i.i.d. uniform initial segments; an ensemble surrogate for the bound over all pairs"},
         {"global_max_ratio", r.global_max},
         {"per_trial_worst", r.per_trial_worst},
         {"pass", r.pass}};
  if (r.violation) j["violation"] = to_json(*r.violation);
  return j;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Columns parameter,lambda,mu,C,pass; lambda/mu/C are empty without a certificate.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "parameter,lambda,mu,C,pass\n";
  for (const auto& r : rows) {
    os << format_number(r.value) << ',';
    if (r.certificate)
      os << format_number(r.certificate->lambda) << ',' << format_number(r.certificate->mu) << ','
         << format_number(r.certificate->C);
    else
      os << ",,";
    os << ',' << r.status << '\n';
  }
}

}  // namespace delaynet
