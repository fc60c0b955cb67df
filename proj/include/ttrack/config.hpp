#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttrack/analysis.hpp"
#include "ttrack/controller.hpp"
#include "ttrack/errors.hpp"
#include "ttrack/model.hpp"
#include "ttrack/simulator.hpp"
#include "ttrack/trajectory.hpp"

namespace ttrack {

using nlohmann::json;

struct OutputSpec {
  std::optional<std::string> trace_csv;
  std::optional<std::string> plot_svg;
};

/// One complete experiment: plant, controller, reference, run settings.
struct ScenarioConfig {
  MechanismModel model;
  GainSchedule gains;
  TrajectorySpec trajectory;
  SimulationConfig sim;
  OutputSpec outputs;
};

namespace cfg {

/// Unknown keys are rejected, never silently ignored; the message names the
/// offending key and where it sits.
inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw InputError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline const json& get(const json& obj, const std::string& key,
                       const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw InputError("missing key '" + key + "' in " + where);
  }
  return *it;
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + " must be a number");
  return v.get<double>();
}

/// Accepts a single number (broadcast to n) or an array of exactly n numbers.
inline VectorXd vector_n(const json& v, int n, const std::string& where) {
  if (v.is_number()) return VectorXd::Constant(n, v.get<double>());
  if (!v.is_array()) {
    throw InputError(where + " must be a number or an array of numbers");
  }
  if (static_cast<int>(v.size()) != n) {
    throw InputError(where + " has " + std::to_string(v.size()) +
                     " entries, expected " + std::to_string(n));
  }
  VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = number(v[i], where);
  return out;
}

inline VectorXd vector_any(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) {
    throw InputError(where + " must be a nonempty array of numbers");
  }
  VectorXd out(static_cast<int>(v.size()));
  for (int i = 0; i < out.size(); ++i) out[i] = number(v[i], where);
  return out;
}

}  // namespace cfg

inline MechanismModel parse_model(const json& j) {
  cfg::check_keys(j, {"gravity", "links"}, "model");
  MechanismModel model;
  model.gravity = cfg::number(cfg::get(j, "gravity", "model"), "model.gravity");
  const json& links = cfg::get(j, "links", "model");
  if (!links.is_array() || links.empty()) {
    throw InputError("model.links must be a nonempty array");
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string where = "model.links[" + std::to_string(i) + "]";
    const json& lj = links[i];
    cfg::check_keys(
        lj, {"mass", "length", "com_distance", "inertia_com", "damping"},
        where);
    LinkParams lk;
    lk.mass = cfg::number(cfg::get(lj, "mass", where), where + ".mass");
    lk.length = cfg::number(cfg::get(lj, "length", where), where + ".length");
    lk.com_distance = cfg::number(cfg::get(lj, "com_distance", where),
                                  where + ".com_distance");
    lk.inertia_com = lj.contains("inertia_com")
                         ? cfg::number(lj["inertia_com"], where + ".inertia_com")
                         : 0.0;
    lk.damping = lj.contains("damping")
                     ? cfg::number(lj["damping"], where + ".damping")
                     : 0.0;
    model.links.push_back(lk);
  }
  validate_model(model);
  return model;
}

inline GainSchedule parse_controller(const json& j, int n) {
  cfg::check_keys(j, {"ts", "kp", "kv"}, "controller");
  const bool has_ts = j.contains("ts");
  const bool has_gains = j.contains("kp") || j.contains("kv");
  if (has_ts == has_gains) {
    throw InputError(
        "controller must give either 'ts' or the pair 'kp'/'kv'");
  }
  if (has_ts) {
    return tune_gains(cfg::vector_n(j["ts"], n, "controller.ts"));
  }
  if (!j.contains("kp") || !j.contains("kv")) {
    throw InputError("controller needs both 'kp' and 'kv'");
  }
  return gains_from_kp_kv(cfg::vector_n(j["kp"], n, "controller.kp"),
                          cfg::vector_n(j["kv"], n, "controller.kv"));
}

inline TrajectorySpec parse_trajectory(const json& j, int n) {
  if (!j.is_object() || !j.contains("kind")) {
    throw InputError("trajectory must be an object with a 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  TrajectorySpec spec;
  if (kind == "hold") {
    cfg::check_keys(j, {"kind", "at"}, "trajectory");
    spec = HoldSpec{cfg::vector_n(cfg::get(j, "at", "trajectory"), n,
                                  "trajectory.at")};
  } else if (kind == "step_sequence") {
    cfg::check_keys(j, {"kind", "start", "switches"}, "trajectory");
    StepSequenceSpec st;
    st.start = cfg::vector_n(cfg::get(j, "start", "trajectory"), n,
                             "trajectory.start");
    if (j.contains("switches")) {
      const json& sw = j["switches"];
      if (!sw.is_array()) throw InputError("trajectory.switches must be an array");
      for (std::size_t i = 0; i < sw.size(); ++i) {
        const std::string where =
            "trajectory.switches[" + std::to_string(i) + "]";
        cfg::check_keys(sw[i], {"t", "target"}, where);
        st.switches.emplace_back(
            cfg::number(cfg::get(sw[i], "t", where), where + ".t"),
            cfg::vector_n(cfg::get(sw[i], "target", where), n,
                          where + ".target"));
      }
    }
    spec = std::move(st);
  } else if (kind == "quintic") {
    cfg::check_keys(j, {"kind", "from", "to", "duration"}, "trajectory");
    QuinticSpec qn;
    qn.from = cfg::vector_n(cfg::get(j, "from", "trajectory"), n,
                            "trajectory.from");
    qn.to = cfg::vector_n(cfg::get(j, "to", "trajectory"), n, "trajectory.to");
    qn.duration = cfg::number(cfg::get(j, "duration", "trajectory"),
                              "trajectory.duration");
    spec = std::move(qn);
  } else if (kind == "sinusoid") {
    cfg::check_keys(j, {"kind", "offset", "amplitude", "frequency"},
                    "trajectory");
    SinusoidSpec sn;
    sn.offset = cfg::vector_n(cfg::get(j, "offset", "trajectory"), n,
                              "trajectory.offset");
    sn.amplitude = cfg::vector_n(cfg::get(j, "amplitude", "trajectory"), n,
                                 "trajectory.amplitude");
    sn.frequency = cfg::vector_n(cfg::get(j, "frequency", "trajectory"), n,
                                 "trajectory.frequency");
    spec = std::move(sn);
  } else {
    throw InputError("unknown trajectory kind '" + kind + "'");
  }
  validate_trajectory(spec);
  return spec;
}

inline SimulationConfig parse_sim(const json& j, int n) {
  cfg::check_keys(j,
                  {"t_end", "h", "control_period", "initial_state",
                   "torque_limit", "perturbations", "mismatch"},
                  "sim");
  SimulationConfig sim;
  sim.t_end = cfg::number(cfg::get(j, "t_end", "sim"), "sim.t_end");
  sim.h = cfg::number(cfg::get(j, "h", "sim"), "sim.h");
  sim.control_period =
      cfg::number(cfg::get(j, "control_period", "sim"), "sim.control_period");
  const json& init = cfg::get(j, "initial_state", "sim");
  cfg::check_keys(init, {"q", "qdot"}, "sim.initial_state");
  sim.initial_state.q =
      cfg::vector_n(cfg::get(init, "q", "sim.initial_state"), n,
                    "sim.initial_state.q");
  sim.initial_state.qdot =
      cfg::vector_n(cfg::get(init, "qdot", "sim.initial_state"), n,
                    "sim.initial_state.qdot");
  if (j.contains("torque_limit")) {
    sim.torque_limit = cfg::vector_n(j["torque_limit"], n, "sim.torque_limit");
  }
  if (j.contains("perturbations")) {
    const json& ps = j["perturbations"];
    if (!ps.is_array()) throw InputError("sim.perturbations must be an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string where =
          "sim.perturbations[" + std::to_string(i) + "]";
      cfg::check_keys(ps[i], {"joint", "t_start", "duration", "magnitude"},
                      where);
      PulseSpec p;
      const json& joint = cfg::get(ps[i], "joint", where);
      if (!joint.is_number_integer()) {
        throw InputError(where + ".joint must be an integer (0-based)");
      }
      p.joint = joint.get<int>();
      p.t_start =
          cfg::number(cfg::get(ps[i], "t_start", where), where + ".t_start");
      p.duration =
          cfg::number(cfg::get(ps[i], "duration", where), where + ".duration");
      p.magnitude = cfg::number(cfg::get(ps[i], "magnitude", where),
                                where + ".magnitude");
      sim.perturbations.push_back(p);
    }
  }
  if (j.contains("mismatch")) {
    cfg::check_keys(j["mismatch"], {"mass_scale"}, "sim.mismatch");
    sim.mismatch = ModelScaling{cfg::vector_n(
        cfg::get(j["mismatch"], "mass_scale", "sim.mismatch"), n,
        "sim.mismatch.mass_scale")};
  }
  validate_sim_config(sim, n);
  return sim;
}

inline ScenarioConfig parse_scenario(const json& j) {
  cfg::check_keys(j, {"model", "controller", "trajectory", "sim", "outputs"},
                  "scenario");
  ScenarioConfig sc;
  sc.model = parse_model(cfg::get(j, "model", "scenario"));
  const int n = sc.model.n();
  sc.gains = parse_controller(cfg::get(j, "controller", "scenario"), n);
  sc.trajectory = parse_trajectory(cfg::get(j, "trajectory", "scenario"), n);
  sc.sim = parse_sim(cfg::get(j, "sim", "scenario"), n);
  if (j.contains("outputs")) {
    cfg::check_keys(j["outputs"], {"trace_csv", "plot_svg"}, "outputs");
    if (j["outputs"].contains("trace_csv")) {
      sc.outputs.trace_csv = j["outputs"]["trace_csv"].get<std::string>();
    }
    if (j["outputs"].contains("plot_svg")) {
      sc.outputs.plot_svg = j["outputs"]["plot_svg"].get<std::string>();
    }
  }
  return sc;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("JSON parse error in '" + path + "': " + e.what());
  }
  return j;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  return parse_scenario(load_json_file(path));
}

/// Believed model for the scenario: the plant with sim.mismatch applied.
inline ControllerConfig build_controller(const ScenarioConfig& sc) {
  ControllerConfig cc;
  cc.gains = sc.gains;
  cc.control_model = sc.sim.mismatch
                         ? apply_mass_scaling(sc.model, *sc.sim.mismatch)
                         : sc.model;
  return cc;
}

inline SimulationResult run_scenario(const ScenarioConfig& sc) {
  return simulate(sc.model, build_controller(sc), sc.trajectory, sc.sim);
}

// ---- sweep configs ----------------------------------------------------

enum class SweepParameter { Ts, MassScale, TorqueLimit, ControlPeriod };

struct SweepConfig {
  json base;  // scenario object, re-parsed per variant
  SweepParameter parameter = SweepParameter::Ts;
  std::vector<double> values;
};

inline SweepConfig parse_sweep(const json& j) {
  cfg::check_keys(j, {"base", "parameter", "values"}, "sweep");
  SweepConfig sw;
  sw.base = cfg::get(j, "base", "sweep");
  parse_scenario(sw.base);  // validate the base eagerly
  const std::string p = cfg::get(j, "parameter", "sweep").get<std::string>();
  if (p == "ts") sw.parameter = SweepParameter::Ts;
  else if (p == "mass_scale") sw.parameter = SweepParameter::MassScale;
  else if (p == "torque_limit") sw.parameter = SweepParameter::TorqueLimit;
  else if (p == "control_period") sw.parameter = SweepParameter::ControlPeriod;
  else
    throw InputError("unknown sweep parameter '" + p +
                     "' (expected ts, mass_scale, torque_limit or "
                     "control_period)");
  const json& vals = cfg::get(j, "values", "sweep");
  if (!vals.is_array() || vals.empty()) {
    throw InputError("sweep.values must be a nonempty array");
  }
  for (const json& v : vals) sw.values.push_back(cfg::number(v, "sweep.values"));
  return sw;
}

inline const char* sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::Ts: return "ts";
    case SweepParameter::MassScale: return "mass_scale";
    case SweepParameter::TorqueLimit: return "torque_limit";
    case SweepParameter::ControlPeriod: return "control_period";
  }
  return "?";
}

/// The base scenario with one parameter overridden.
inline ScenarioConfig make_variant(const SweepConfig& sw, double value) {
  json j = sw.base;
  switch (sw.parameter) {
    case SweepParameter::Ts:
      j["controller"] = json{{"ts", value}};
      break;
    case SweepParameter::MassScale:
      j["sim"]["mismatch"] = json{{"mass_scale", value}};
      break;
    case SweepParameter::TorqueLimit:
      j["sim"]["torque_limit"] = value;
      break;
    case SweepParameter::ControlPeriod:
      j["sim"]["control_period"] = value;
      break;
  }
  return parse_scenario(j);
}

// ---- summary serialization ---------------------------------------------

inline json summary_to_json(const SummaryReport& rep) {
  json joints = json::array();
  for (std::size_t i = 0; i < rep.joints.size(); ++i) {
    const JointSummary& s = rep.joints[i];
    json row{{"joint", i + 1},
             {"settled", s.settling_time.has_value()},
             {"rms_error", s.rms_error},
             {"peak_torque", s.peak_torque},
             {"saturation_duty", s.saturation_duty}};
    if (s.settling_time) {
      row["settling_time"] = *s.settling_time;
    } else {
      row["settling_time"] = nullptr;
    }
    joints.push_back(std::move(row));
  }
  return json{{"joints", std::move(joints)},
              {"energy_drift", rep.energy_drift}};
}

}  // namespace ttrack
