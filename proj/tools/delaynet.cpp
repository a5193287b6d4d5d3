// delaynet: simulate, certify and validate delayed discrete Hopfield networks.
//
//   delaynet <simulate|discretize|certify|periodic|validate|sweep> --model FILE --out DIR [options]
//
// Exit status: 0 success, 1 usage or input error, 2 certificate condition
// violated, 3 validation failed. DELAYNET_LOG=quiet|info|debug sets stderr
// verbosity (default info).

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "delaynet.hpp"

namespace fs = std::filesystem;
using namespace delaynet;

namespace {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

Level log_level() {
  const char* env = std::getenv("DELAYNET_LOG");
  if (!env) return Level::Info;
  const std::string v = env;
  if (v == "quiet" || v == "0") return Level::Quiet;
  if (v == "debug" || v == "2") return Level::Debug;
  return Level::Info;
}

void log(Level level, const std::string& msg) {
  static const Level threshold = log_level();
  if (level <= threshold && threshold != Level::Quiet) std::cerr << "delaynet: " << msg << "\n";
}

struct ValidationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resolved settings: defaults, then --config, then explicit flags.
struct Settings {
  std::string model;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t trials = 1000;
  Index horizon = 300;
  Index window = 500;
  Index starts = 1;
  std::string mode = "strict";
  Index omega = 0;
  double tol = 1e-12;
  double lambda_target = 0.99;
  double box = 1.0;
  std::optional<double> mu;
  std::optional<double> step;
  // sweep
  std::string parameter;
  std::vector<double> values;
  bool sweep_validate = false;
  json inline_model;
};

void apply_config(Settings& s, const json& c) {
  auto get = [&](const char* a, const char* b, auto& dst) {
    for (const char* key : {a, b})
      if (c.contains(key)) dst = c.at(key).get<std::decay_t<decltype(dst)>>();
  };
  if (c.contains("model")) {
    if (c.at("model").is_object())
      s.inline_model = c.at("model");
    else
      s.model = c.at("model").get<std::string>();
  }
  get("out", "out", s.out);
  get("seed", "seed", s.seed);
  get("trials", "trials", s.trials);
  get("horizon", "horizon", s.horizon);
  get("window", "window", s.window);
  get("starts", "starts", s.starts);
  get("mode", "mode", s.mode);
  get("omega", "omega", s.omega);
  get("tol", "tol", s.tol);
  get("lambda_target", "lambda-target", s.lambda_target);
  get("box", "box", s.box);
  if (c.contains("mu")) s.mu = c.at("mu").get<double>();
  if (c.contains("step")) s.step = c.at("step").get<double>();
  if (c.contains("sweep")) {
    const json& w = c.at("sweep");
    s.parameter = w.value("parameter", s.parameter);
    if (w.contains("values")) {
      s.values = w.at("values").get<std::vector<double>>();
    } else if (w.contains("from")) {
      const double a = w.at("from").get<double>(), b = w.at("to").get<double>();
      const auto n = w.at("count").get<std::size_t>();
      s.values.clear();
      for (std::size_t k = 0; k < n; ++k) s.values.push_back(n == 1 ? a : a + (b - a) * k / (n - 1.0));
    }
    s.sweep_validate = w.value("validate", s.sweep_validate);
  }
}

json header(const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"tool", "delaynet"}, {"command", command}, {"timestamp", buf}};
}

json settings_json(const Settings& s) {
  json j{{"seed", s.seed},   {"trials", s.trials}, {"horizon", s.horizon},           {"window", s.window},
         {"starts", s.starts}, {"mode", s.mode},     {"tol", s.tol},                   {"lambda_target", s.lambda_target},
         {"box", s.box}};
  if (s.omega) j["omega"] = s.omega;
  if (s.mu) j["mu"] = *s.mu;
  if (s.step) j["step"] = *s.step;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

void write_report(const Settings& s, const std::string& command, json result) {
  json doc{{"header", header(command)}, {"config", settings_json(s)}, {"result", std::move(result)}};
  write_text(fs::path(s.out) / "report.json", doc.dump(2) + "\n");
}

void write_trajectory(const Settings& s, const Trajectory& t) {
  std::ofstream out(fs::path(s.out) / "trajectory.csv");
  if (!out) throw InputError("cannot write trajectory.csv");
  write_csv(out, t);
}

ModelDocument load(const Settings& s) {
  if (!s.inline_model.is_null()) return parse_model(s.inline_model);
  if (s.model.empty()) throw InputError("--model is required");
  return load_model(s.model);
}

HistorySegment initial_for(const ModelDocument& doc, const HopfieldModel& model) {
  if (doc.initial && doc.initial->depth() == model.max_delay()) return *doc.initial;
  return HistorySegment(model.neurons(), model.max_delay());
}

CertifyOptions certify_options(const Settings& s) {
  CertifyOptions o;
  o.lambda_target = s.lambda_target;
  o.mode = parse_norm_mode(s.mode);
  o.mu = s.mu;
  return o;
}

LambdaOptions lambda_options(const Settings& s) {
  LambdaOptions o;
  o.window = s.window;
  o.starts = s.starts;
  o.mode = parse_norm_mode(s.mode);
  return o;
}

// Closed-form route for the specialized model, empirical scan otherwise.
Certificate certify_doc(const ModelDocument& doc, const Settings& s) {
  if (doc.xu_wu) return certify_best(*doc.xu_wu, certify_options(s));
  if (!s.mu) throw InputError("certifying a general model needs --mu (rate of a' = e^{-mu(m-n)})");
  return empirical_certificate(doc.hopfield(s.step), *s.mu, lambda_options(s));
}

int run_simulate(const Settings& s) {
  const ModelDocument doc = load(s);
  const HopfieldModel model = doc.hopfield(s.step);
  const Trajectory t = solve(model, 0, initial_for(doc, model), s.horizon);
  write_trajectory(s, t);
  std::vector<double> last(t.at(s.horizon).begin(), t.at(s.horizon).end());
  write_report(s, "simulate", {{"model_type", doc.type}, {"neurons", model.neurons()}, {"tau", model.max_delay()},
                               {"final_state", last}});
  return 0;
}

int run_discretize(const Settings& s) {
  const ModelDocument doc = load(s);
  if (!doc.continuous) throw InputError("discretize needs a model of type 'continuous'");
  const HopfieldModel model = doc.hopfield(s.step);
  const std::size_t n = model.neurons();
  json decay = json::array(), envelope = json::array(), probes = json::array();
  bool probes_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    json ci = json::array(), hi = json::array();
    for (Index m = 0; m < s.horizon; ++m) {
      ci.push_back(model.c(i, m));
      hi.push_back(model.envelope_row_sum(i, m));
    }
    decay.push_back(std::move(ci));
    envelope.push_back(std::move(hi));
    for (std::size_t j = 0; j < n; ++j) {
      ProbeGrid grid;
      grid.m_end = std::min<Index>(s.horizon, 50);
      const auto rep = lipschitz_probe([&](Index m, double u) { return model.h(i, j, m, u); },
                                       [&](Index m) { return model.envelope(i, j, m); }, grid);
      probes_ok = probes_ok && rep.pass;
      probes.push_back({{"i", i + 1}, {"j", j + 1}, {"pass", rep.pass}, {"worst_ratio", rep.worst_ratio}});
    }
  }
  write_trajectory(s, solve(model, 0, HistorySegment(n, model.max_delay()), s.horizon));
  write_report(s, "discretize", {{"tau", model.max_delay()}, {"step", *(s.step ? s.step : doc.step)}, {"decay", decay},
                                 {"envelope_row_sum", envelope}, {"lipschitz_probes", probes}});
  if (!probes_ok) throw ConditionViolated("declared envelope fails the Lipschitz probe");
  return 0;
}

int run_certify(const Settings& s) {
  const ModelDocument doc = load(s);
  const Certificate cert = certify_doc(doc, s);
  json result = to_json(cert);
  if (doc.xu_wu) {
    // Cross-check the closed form against the truncated scan with the same a'.
    LambdaOptions lo = lambda_options(s);
    lo.mode = cert.mode;
    XuWuModel work = cert.d ? rescale(*doc.xu_wu, *cert.d) : *doc.xu_wu;
    const auto scan = lambda_empirical(as_general(work), RateBound::exponential(cert.mu), lo);
    result["lambda_scan"] = to_json(scan);
  }
  write_report(s, "certify", std::move(result));
  log(Level::Info, "certificate " + std::string(to_string(cert.kind)) + ": lambda=" + format_number(cert.lambda) +
                       " mu=" + format_number(cert.mu) + " C=" + format_number(cert.C));
  return 0;
}

int run_periodic(const Settings& s) {
  const ModelDocument doc = load(s);
  const XuWuModel& model = doc.require_xu_wu("periodic");
  const Index omega = s.omega ? s.omega : doc.omega.value_or(0);
  if (omega < 1) throw InputError("periodic needs --omega >= 1");
  const Certificate cert = certify_best(model, certify_options(s));
  PeriodicOptions po;
  po.tol = s.tol;
  const auto orbit = find_periodic(model, omega, cert, po);
  AttractionOptions ao;
  ao.trials = s.trials;
  ao.horizon = s.horizon;
  ao.seed = s.seed;
  ao.box = s.box;
  const auto att = verify_attraction(model, orbit, cert.mode == NormMode::Strict ? &cert : nullptr, ao);
  write_trajectory(s, solve(model, 0, orbit.phi, 5 * omega));
  json result = to_json(orbit, att);
  result["certificate"] = to_json(cert);
  write_report(s, "periodic", std::move(result));
  if (!att.envelope_ok) throw ValidationFailed("attraction envelope violated");
  return 0;
}

int run_validate_cmd(const Settings& s) {
  const ModelDocument doc = load(s);
  if (parse_norm_mode(s.mode) != NormMode::Strict)
    throw InputError("validate needs --mode strict: paper-mode products underestimate the exact history norms");
  const Certificate cert = certify_doc(doc, s);
  ValidateOptions vo;
  vo.trials = s.trials;
  vo.horizon = s.horizon;
  vo.seed = s.seed;
  vo.box = s.box;
  const auto rep = run_validate(doc.hopfield(s.step), cert, vo);
  write_report(s, "validate", to_json(rep));
  log(Level::Info, "validation max ratio " + format_number(rep.global_max));
  if (!rep.pass) throw ValidationFailed("envelope violated (max ratio " + format_number(rep.global_max) + ")");
  return 0;
}

int run_sweep_cmd(const Settings& s) {
  const ModelDocument doc = load(s);
  const XuWuModel& model = doc.require_xu_wu("sweep");
  if (s.parameter.empty()) throw InputError("sweep needs --parameter");
  SweepSpec spec{s.parameter, s.values, s.sweep_validate};
  ValidateOptions vo;
  vo.trials = s.trials;
  vo.horizon = s.horizon;
  vo.seed = s.seed;
  vo.box = s.box;
  const auto rows = run_sweep(model, spec, certify_options(s), vo);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_text(fs::path(s.out) / "sweep.csv", csv.str());
  json jrows = json::array();
  for (const auto& r : rows) {
    json row{{"value", r.value}, {"status", r.status}};
    if (r.certificate) row["certificate"] = to_json(*r.certificate);
    if (!r.detail.empty()) row["detail"] = r.detail;
    jrows.push_back(std::move(row));
  }
  write_report(s, "sweep", {{"parameter", s.parameter}, {"rows", jrows}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and certification of delayed discrete Hopfield networks"};
  app.require_subcommand(1);
  Settings cli;
  std::string config;

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Settings&);
  };
  const Sub subs[] = {{"simulate", "integrate a model and export the trajectory", run_simulate},
                      {"discretize", "discretize a continuous spec and probe its envelope", run_discretize},
                      {"certify", "compute a contraction certificate", run_certify},
                      {"periodic", "find the attracting periodic orbit", run_periodic},
                      {"validate", "check a certificate on random trajectory pairs", run_validate_cmd},
                      {"sweep", "certify over a grid of one parameter", run_sweep_cmd}};

  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  std::vector<double> values;
  for (const auto& sub : subs) {
    CLI::App* c = app.add_subcommand(sub.name, sub.help);
    c->add_option("--config", config, "JSON file with any of the options below");
    c->add_option("--model", cli.model, "model JSON file");
    c->add_option("--out", cli.out, "output directory");
    c->add_option("--seed", cli.seed, "master seed");
    c->add_option("--trials", cli.trials, "random trials")->check(CLI::PositiveNumber);
    c->add_option("--horizon", cli.horizon, "last time index")->check(CLI::PositiveNumber);
    c->add_option("--window", cli.window, "lambda scan window W")->check(CLI::PositiveNumber);
    c->add_option("--starts", cli.starts, "number of start indices n in the lambda scan")->check(CLI::PositiveNumber);
    c->add_option("--mode", cli.mode, "norm mode")->check(CLI::IsMember({"paper", "strict"}));
    c->add_option("--omega", cli.omega, "period")->check(CLI::PositiveNumber);
    c->add_option("--tol", cli.tol, "orbit tolerance")->check(CLI::PositiveNumber);
    c->add_option("--lambda-target", cli.lambda_target, "target lambda for the rate search");
    c->add_option("--box", cli.box, "half-width of the random initial box")->check(CLI::PositiveNumber);
    c->add_option("--mu", cli.mu, "fixed rate mu");
    c->add_option("--step", cli.step, "discretization step h");
    c->add_option("--parameter", cli.parameter, "sweep parameter: h, tau, a.i, b.i.j, I.i, gain.j");
    c->add_option("--values", cli.values, "sweep grid values");
    c->add_flag("--validate", cli.sweep_validate, "validate every sweep point");
    registered.emplace_back(c, &sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    for (auto [c, sub] : registered) {
      if (!c->parsed()) continue;
      Settings s;
      if (!config.empty()) apply_config(s, read_json_file(config));
      auto given = [&](const char* flag) { return c->count(flag) > 0; };
      if (given("--model")) {
        s.model = cli.model;
        s.inline_model = nullptr;
      }
      if (given("--out")) s.out = cli.out;
      if (given("--seed")) s.seed = cli.seed;
      if (given("--trials")) s.trials = cli.trials;
      if (given("--horizon")) s.horizon = cli.horizon;
      if (given("--window")) s.window = cli.window;
      if (given("--starts")) s.starts = cli.starts;
      if (given("--mode")) s.mode = cli.mode;
      if (given("--omega")) s.omega = cli.omega;
      if (given("--tol")) s.tol = cli.tol;
      if (given("--lambda-target")) s.lambda_target = cli.lambda_target;
      if (given("--box")) s.box = cli.box;
      if (given("--mu")) s.mu = cli.mu;
      if (given("--step")) s.step = cli.step;
      if (given("--parameter")) s.parameter = cli.parameter;
      if (given("--values")) s.values = cli.values;
      if (given("--validate")) s.sweep_validate = cli.sweep_validate;
      fs::create_directories(s.out);
      log(Level::Debug, std::string("running ") + sub->name + " into " + s.out);
      return sub->run(s);
    }
  } catch (const InputError& e) {
    std::cerr << "delaynet: input error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "delaynet: input error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "delaynet: input error: " << e.what() << "\n";
    return 1;
  } catch (const ConditionViolated& e) {
    std::cerr << "delaynet: condition violated: " << e.what() << "\n";
    return 2;
  } catch (const ValidationFailed& e) {
    std::cerr << "delaynet: validation failed: " << e.what() << "\n";
    return 3;
  } catch (const NotConverged& e) {
    std::cerr << "delaynet: not converged: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
