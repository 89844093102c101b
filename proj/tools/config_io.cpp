#include "config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dsslat/errors.hpp"

namespace dsslat::cli {
namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + " " + what);
}

void check_keys(const ordered_json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known = known || it.key() == key;
    if (!known) fail(path + "." + it.key(), "is not a recognized field");
  }
}

const ordered_json& need_object(const ordered_json& obj,
                                const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "is required");
  const auto& v = obj.at(key);
  if (!v.is_object()) fail(path + "." + key, "must be an object");
  return v;
}

std::string need_string(const ordered_json& obj, const std::string& path,
                        const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "is required");
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "must be a string");
  return v.get<std::string>();
}

double need_number(const ordered_json& obj, const std::string& path,
                   const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "is required");
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "must be a number");
  return v.get<double>();
}

double opt_number(const ordered_json& obj, const std::string& path,
                  const char* key, double fallback) {
  return obj.contains(key) ? need_number(obj, path, key) : fallback;
}

int need_int(const ordered_json& obj, const std::string& path,
             const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "is required");
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(path + "." + key, "must be an integer");
  return v.get<int>();
}

int opt_int(const ordered_json& obj, const std::string& path, const char* key,
            int fallback) {
  return obj.contains(key) ? need_int(obj, path, key) : fallback;
}

std::uint64_t opt_u64(const ordered_json& obj, const std::string& path,
                      const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(path + "." + key, "must be an integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    fail(path + "." + key, "must be nonnegative");
  return v.get<std::uint64_t>();
}

bool opt_bool(const ordered_json& obj, const std::string& path,
              const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "must be a boolean");
  return v.get<bool>();
}

ServiceSpec parse_service(const ordered_json& svc, const std::string& path,
                          int k, double delta) {
  check_keys(svc, path, {"kind", "mean", "file_mean", "scv", "f"});
  ServiceSpec out;
  out.kind = need_string(svc, path, "kind");
  if (out.kind != "exp" && out.kind != "hyperexp")
    fail(path + ".kind", "must be exp or hyperexp");
  const bool has_mean = svc.contains("mean");
  const bool has_file = svc.contains("file_mean");
  if (has_mean == has_file) fail(path, "needs exactly one of mean, file_mean");
  if (has_mean) {
    out.mean = need_number(svc, path, "mean");
  } else {
    // file_mean counts all k fragments, startup included.
    out.mean = need_number(svc, path, "file_mean") / k - delta;
    if (!(out.mean > 0.0))
      fail(path + ".file_mean",
           "leaves no time for the variable part after the startup delta");
  }
  if (out.kind == "hyperexp") {
    out.scv = need_number(svc, path, "scv");
    out.f = opt_number(svc, path, "f", 0.5);
  } else if (svc.contains("scv") || svc.contains("f")) {
    fail(path, "scv and f apply to hyperexp only");
  }
  return out;
}

ClassSpec parse_class(const ordered_json& jc, const std::string& path) {
  if (!jc.is_object()) fail(path, "must be an object");
  check_keys(jc, path, {"label", "p", "d", "k", "delta", "service"});
  ClassSpec c;
  c.label = need_string(jc, path, "label");
  c.p = need_number(jc, path, "p");
  c.d = need_int(jc, path, "d");
  c.k = need_int(jc, path, "k");
  if (c.k < 1) fail(path + ".k", "must be at least 1");
  c.delta = opt_number(jc, path, "delta", 0.0);
  c.service = parse_service(need_object(jc, path, "service"), path + ".service",
                            c.k, c.delta);
  return c;
}

SweepVariable parse_sweep_variable(const std::string& name,
                                   const std::string& path) {
  if (name == "q") return SweepVariable::q;
  if (name == "lambda") return SweepVariable::lambda;
  fail(path, "must be q or lambda");
}

void check_increasing(const std::vector<double>& values,
                      const std::string& path) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1]))
      fail(path, "must be strictly increasing");
}

const char* sweep_variable_name(SweepVariable var) {
  return var == SweepVariable::q ? "q" : "lambda";
}

ServiceSpec hyperexp_spec(double mean, double scv) {
  return ServiceSpec{"hyperexp", mean, scv, 0.5};
}

}  // namespace

ExperimentSpec parse_experiment(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, "config",
             {"lambda", "q", "classes", "sweep", "outputs", "solver",
              "simulator"});

  ExperimentSpec s;
  s.lambda = need_number(j, "config", "lambda");
  s.q = need_number(j, "config", "q");

  if (!j.contains("classes")) fail("config.classes", "is required");
  const auto& classes = j.at("classes");
  if (!classes.is_array() || classes.empty())
    fail("config.classes", "must be a non-empty array");
  for (std::size_t i = 0; i < classes.size(); ++i)
    s.classes.push_back(parse_class(
        classes[i], "config.classes[" + std::to_string(i) + "]"));

  if (j.contains("sweep")) {
    const auto& sweep = need_object(j, "config", "sweep");
    check_keys(sweep, "config.sweep", {"variable", "values"});
    s.sweep_variable = parse_sweep_variable(
        need_string(sweep, "config.sweep", "variable"),
        "config.sweep.variable");
    if (!sweep.contains("values") || !sweep.at("values").is_array())
      fail("config.sweep.values", "must be an array of numbers");
    for (const auto& v : sweep.at("values")) {
      if (!v.is_number()) fail("config.sweep.values", "must contain numbers");
      s.sweep_values.push_back(v.get<double>());
    }
    check_increasing(s.sweep_values, "config.sweep.values");
  }

  if (j.contains("outputs")) {
    const auto& outs = need_object(j, "config", "outputs");
    check_keys(outs, "config.outputs",
               {"workload_curve", "response_curves", "means", "loss_table"});
    s.outputs.workload_curve =
        opt_bool(outs, "config.outputs", "workload_curve", true);
    s.outputs.response_curves =
        opt_bool(outs, "config.outputs", "response_curves", true);
    s.outputs.means = opt_bool(outs, "config.outputs", "means", true);
    s.outputs.loss_table = opt_bool(outs, "config.outputs", "loss_table", true);
  }

  if (j.contains("solver")) {
    const auto& so = need_object(j, "config", "solver");
    check_keys(so, "config.solver", {"method", "step", "eps_tail", "max_points"});
    if (so.contains("method")) {
      s.solver.method = need_string(so, "config.solver", "method");
      if (s.solver.method != "dde" && s.solver.method != "ide")
        fail("config.solver.method", "must be dde or ide");
    }
    s.solver.step = opt_number(so, "config.solver", "step", 0.0);
    s.solver.eps_tail = opt_number(so, "config.solver", "eps_tail", 1e-8);
    s.solver.max_points = static_cast<std::size_t>(
        opt_u64(so, "config.solver", "max_points", 4'000'000));
  }

  if (j.contains("simulator")) {
    const auto& si = need_object(j, "config", "simulator");
    check_keys(si, "config.simulator",
               {"servers", "arrivals", "warmup", "replications", "seed"});
    s.simulator.servers = opt_int(si, "config.simulator", "servers", 300);
    s.simulator.arrivals =
        opt_u64(si, "config.simulator", "arrivals", 1'000'000);
    s.simulator.warmup = opt_number(si, "config.simulator", "warmup", 0.2);
    s.simulator.replications =
        opt_int(si, "config.simulator", "replications", 5);
    s.simulator.seed = opt_u64(si, "config.simulator", "seed", 1);
  }

  return s;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment(text.str());
}

std::string emit_experiment(const ExperimentSpec& s) {
  ordered_json j;
  j["lambda"] = s.lambda;
  j["q"] = s.q;
  auto& classes = j["classes"] = ordered_json::array();
  for (const auto& c : s.classes) {
    ordered_json jc;
    jc["label"] = c.label;
    jc["p"] = c.p;
    jc["d"] = c.d;
    jc["k"] = c.k;
    jc["delta"] = c.delta;
    ordered_json svc;
    svc["kind"] = c.service.kind;
    svc["mean"] = c.service.mean;
    if (c.service.kind == "hyperexp") {
      svc["scv"] = c.service.scv;
      svc["f"] = c.service.f;
    }
    jc["service"] = svc;
    classes.push_back(jc);
  }
  if (s.sweep_variable != SweepVariable::none) {
    j["sweep"]["variable"] = sweep_variable_name(s.sweep_variable);
    j["sweep"]["values"] = s.sweep_values;
  }
  j["outputs"]["workload_curve"] = s.outputs.workload_curve;
  j["outputs"]["response_curves"] = s.outputs.response_curves;
  j["outputs"]["means"] = s.outputs.means;
  j["outputs"]["loss_table"] = s.outputs.loss_table;
  j["solver"]["method"] = s.solver.method;
  j["solver"]["step"] = s.solver.step;
  j["solver"]["eps_tail"] = s.solver.eps_tail;
  j["solver"]["max_points"] = s.solver.max_points;
  j["simulator"]["servers"] = s.simulator.servers;
  j["simulator"]["arrivals"] = s.simulator.arrivals;
  j["simulator"]["warmup"] = s.simulator.warmup;
  j["simulator"]["replications"] = s.simulator.replications;
  j["simulator"]["seed"] = s.simulator.seed;
  return j.dump(2) + "\n";
}

ShiftedPhaseType build_service(const ClassSpec& cls) {
  const ServiceSpec& svc = cls.service;
  if (!(svc.mean > 0.0))
    throw ConfigError("class " + cls.label + ": service.mean must be positive");
  if (cls.delta < 0.0)
    throw ConfigError("class " + cls.label + ": delta must be nonnegative");
  PhaseType body = svc.kind == "exp" ? make_exponential(1.0 / svc.mean)
                                     : make_hyperexp(svc.mean, svc.scv, svc.f);
  return make_shifted(cls.delta, std::move(body));
}

SystemConfig to_system_config(const ExperimentSpec& spec) {
  SystemConfig sys;
  sys.arrival_rate = spec.lambda;
  sys.availability = spec.q;
  sys.classes.reserve(spec.classes.size());
  for (const auto& c : spec.classes)
    sys.classes.push_back(FileClass{c.label, c.p, c.d, c.k, build_service(c)});
  sys.validate();
  return sys;
}

void apply_sweep_value(ExperimentSpec& spec, SweepVariable var, double value) {
  if (var == SweepVariable::q)
    spec.q = value;
  else
    spec.lambda = value;
}

ExperimentSpec preset(const std::string& name, double theta) {
  if (theta != 0.0 && name != "example3-msr" && name != "example3-mbr")
    throw ConfigError("theta applies only to the example3 presets");
  ExperimentSpec s;
  if (name == "example1") {
    s.lambda = 0.7;
    s.q = 1.0;
    s.classes = {
        ClassSpec{"hot", 0.7, 3, 1, 0.2, hyperexp_spec(0.8, 2.0)},
        ClassSpec{"cold", 0.3, 4, 2, 0.2, hyperexp_spec(0.3, 2.0)},
    };
    return s;
  }
  if (name == "example2") {
    s.lambda = 0.7;
    s.q = 0.8;
    s.classes = {
        ClassSpec{"hot", 0.7, 3, 1, 0.1, hyperexp_spec(0.9, 2.0)},
        ClassSpec{"cold", 0.3, 9, 6, 0.1, hyperexp_spec(1.0 / 6.0 - 0.1, 2.0)},
    };
    return s;
  }
  if (name == "example3-msr" || name == "example3-mbr") {
    // Regenerating-code operating points for the cold class: fragment mean
    // theta (startup included), file mean k * theta. msr pins the
    // minimum-storage extreme, mbr the minimum-bandwidth one.
    if (theta < 0.0) throw ConfigError("theta must be positive");
    const double th =
        theta > 0.0 ? theta : (name == "example3-msr" ? 1.0 / 6.0 : 0.2424);
    ExperimentSpec base = preset("example2");
    if (!(th > base.classes[1].delta))
      throw ConfigError("theta must exceed the cold startup delta");
    base.classes[1].service = hyperexp_spec(th - base.classes[1].delta, 2.0);
    return base;
  }
  throw ConfigError("unknown preset: " + name +
                    " (expected example1, example2, example3-msr, example3-mbr)");
}

std::vector<std::string> preset_names() {
  return {"example1", "example2", "example3-msr", "example3-mbr"};
}

}  // namespace dsslat::cli
