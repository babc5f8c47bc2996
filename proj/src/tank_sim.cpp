#include "discret2di/tank_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "discret2di/error.hpp"

namespace d2d::tank {

void TankScenario::validate() const {
  if (schedule.empty()) throw Error(ErrorKind::kInvalidArgument, "empty schedule");
  if (samples_per_state < 1) throw Error(ErrorKind::kInvalidArgument, "samples_per_state must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorKind::kInvalidArgument, "noise_sigma must be finite and >= 0");
  }
  for (const auto& [name, act] : states) {
    for (double v : act.as_array()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "actuation of state '" + name + "' outside [0, 1]");
      }
    }
  }
  for (const auto& s : schedule) {
    if (!states.count(s)) throw Error(ErrorKind::kInvalidArgument, "unknown state '" + s + "' in schedule");
  }
}

std::map<std::string, Actuation> default_states() {
  return {
      {"Q1", {.q1 = 0.1}},
      {"V12", {.kv1 = 0.1}},
      {"V23", {.kv2 = 0.1}},
      {"V3", {.kv3 = 0.1}},
      {"V12_faulty", {.kv1 = 0.01}},
      {"V23_faulty", {}},
      {"V3_faulty", {.kv3 = 0.05}},
      {"Q1_faulty", {.q1 = 1.0}},
  };
}

const std::map<std::string, std::string>& fault_components() {
  static const std::map<std::string, std::string> kMap = {
      {"Q1_faulty", "q1"}, {"V12_faulty", "kv1"}, {"V23_faulty", "kv2"}, {"V3_faulty", "kv3"}};
  return kMap;
}

std::vector<std::string> normal_sequence(int cycles) {
  if (cycles < 1) throw Error(ErrorKind::kInvalidArgument, "cycles must be >= 1");
  static const std::vector<std::string> kCycle = {"Q1", "V12", "V23", "Q1", "V12", "V23", "V3"};
  std::vector<std::string> out;
  out.reserve(kCycle.size() * static_cast<std::size_t>(cycles));
  for (int c = 0; c < cycles; ++c) out.insert(out.end(), kCycle.begin(), kCycle.end());
  return out;
}

std::string canonical_fault_name(const std::string& name) {
  std::string lower;
  for (char ch : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower.size() > 7 && lower.substr(lower.size() - 7) == "_faulty") {
    lower = lower.substr(0, lower.size() - 7);
  }
  if (lower == "kv1") lower = "v12";
  if (lower == "kv2") lower = "v23";
  if (lower == "kv3") lower = "v3";
  if (lower == "q1") return "Q1_faulty";
  if (lower == "v12") return "V12_faulty";
  if (lower == "v23") return "V23_faulty";
  if (lower == "v3") return "V3_faulty";
  throw Error(ErrorKind::kInvalidArgument, "unknown fault '" + name + "'");
}

std::vector<std::string> anomaly_sequence(const std::string& fault, int anomalous_cycles) {
  if (!fault_components().count(fault)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid fault '" + fault + "'");
  }
  if (anomalous_cycles != 1 && anomalous_cycles != 3) {
    throw Error(ErrorKind::kInvalidArgument, "anomalous_cycles must be 1 or 3");
  }
  const std::string nominal = fault.substr(0, fault.find('_'));
  std::vector<std::string> out = normal_sequence(kNormalCyclesAroundAnomaly);
  for (auto s : normal_sequence(anomalous_cycles)) {
    out.push_back(s == nominal ? fault : s);
  }
  auto tail = normal_sequence(kNormalCyclesAroundAnomaly);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

namespace {

double signed_sqrt(double d) { return d >= 0.0 ? std::sqrt(d) : -std::sqrt(-d); }

}  // namespace

double euler_step(TankState& s, const Actuation& a, const Dynamics& dyn) {
  const double cq = dyn.inflow_coeff;
  const double cv = dyn.valve_coeff;
  const double f12 = cv * a.kv1 * signed_sqrt(s.h1 - s.h2);
  const double f23 = cv * a.kv2 * signed_sqrt(s.h2 - s.h3);
  double out = cv * a.kv3 * std::sqrt(std::max(s.h3, 0.0));
  // Never drain more than tank 3 holds after its inflows for this step.
  const double h3_next_without_drain = s.h3 + dyn.dt * (f23 + cq * a.q3);
  out = std::min(out, std::max(h3_next_without_drain, 0.0) / dyn.dt);

  s.h1 += dyn.dt * (cq * a.q1 - f12);
  s.h2 += dyn.dt * (f12 - f23);
  s.h3 += dyn.dt * (f23 + cq * a.q3 - out);
  s.h1 = std::max(s.h1, 0.0);
  s.h2 = std::max(s.h2, 0.0);
  s.h3 = std::max(s.h3, 0.0);
  return dyn.dt * out;
}

TimeSeries simulate(const TankScenario& scenario) {
  scenario.validate();
  const std::size_t n_rows =
      scenario.schedule.size() * static_cast<std::size_t>(scenario.samples_per_state);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n_rows), 8);
  TankState state = scenario.initial;
  Eigen::Index row = 0;
  for (const auto& name : scenario.schedule) {
    const Actuation& act = scenario.states.at(name);
    const auto arr = act.as_array();
    for (int k = 0; k < scenario.samples_per_state; ++k) {
      for (int sub = 0; sub < scenario.dynamics.substeps; ++sub) {
        euler_step(state, act, scenario.dynamics);
      }
      values(row, 0) = state.h1;
      values(row, 1) = state.h2;
      values(row, 2) = state.h3;
      for (int j = 0; j < 5; ++j) values(row, 3 + j) = arr[static_cast<std::size_t>(j)];
      ++row;
    }
  }

  if (scenario.noise_sigma > 0.0 && n_rows > 1) {
    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double n = static_cast<double>(n_rows);
    std::array<double, 3> scale{};
    for (int j = 0; j < 3; ++j) {
      const double mean = values.col(j).mean();
      const double var = (values.col(j).array() - mean).square().sum() / (n - 1.0);
      const double sd = std::sqrt(var);
      scale[static_cast<std::size_t>(j)] = scenario.noise_sigma * (sd < 1e-12 ? 1.0 : sd);
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      for (int j = 0; j < 3; ++j) values(i, j) += scale[static_cast<std::size_t>(j)] * normal(rng);
    }
  }

  std::vector<double> timestamps(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) timestamps[i] = static_cast<double>(i);
  std::vector<std::string> channels(kLevelChannels.begin(), kLevelChannels.end());
  channels.insert(channels.end(), kActuationChannels.begin(), kActuationChannels.end());
  return TimeSeries(std::move(timestamps), std::move(channels), std::move(values));
}

TankScenario scenario_from_json(const nlohmann::json& doc) {
  TankScenario sc;
  if (doc.contains("states")) {
    for (const auto& [name, row] : doc.at("states").items()) {
      Actuation a;
      a.q1 = row.value("q1", 0.0);
      a.q3 = row.value("q3", 0.0);
      a.kv1 = row.value("kv1", 0.0);
      a.kv2 = row.value("kv2", 0.0);
      a.kv3 = row.value("kv3", 0.0);
      sc.states[name] = a;
    }
  } else {
    sc.states = default_states();
  }
  if (doc.contains("schedule")) {
    sc.schedule = doc.at("schedule").get<std::vector<std::string>>();
  } else if (doc.contains("fault")) {
    sc.schedule = anomaly_sequence(canonical_fault_name(doc.at("fault").get<std::string>()),
                                   doc.value("anomalous_cycles", 1));
  } else {
    sc.schedule = normal_sequence(doc.value("cycles", 15));
  }
  sc.samples_per_state = doc.value("samples_per_state", 50);
  sc.noise_sigma = doc.value("noise_sigma", 0.0);
  sc.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("initial")) {
    const auto& init = doc.at("initial");
    sc.initial = {init.value("h1", 0.0), init.value("h2", 0.0), init.value("h3", 0.0)};
  }
  sc.validate();
  return sc;
}

nlohmann::json scenario_to_json(const TankScenario& sc) {
  nlohmann::json states = nlohmann::json::object();
  for (const auto& [name, a] : sc.states) {
    states[name] = {{"q1", a.q1}, {"q3", a.q3}, {"kv1", a.kv1}, {"kv2", a.kv2}, {"kv3", a.kv3}};
  }
  return {{"states", states},
          {"schedule", sc.schedule},
          {"samples_per_state", sc.samples_per_state},
          {"noise_sigma", sc.noise_sigma},
          {"seed", sc.seed},
          {"initial", {{"h1", sc.initial.h1}, {"h2", sc.initial.h2}, {"h3", sc.initial.h3}}}};
}

}  // namespace d2d::tank
