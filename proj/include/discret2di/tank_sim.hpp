#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "discret2di/time_series.hpp"

namespace d2d::tank {

// Pump commands and valve openings in [0, 1].
struct Actuation {
  double q1 = 0.0;
  double q3 = 0.0;
  double kv1 = 0.0;
  double kv2 = 0.0;
  double kv3 = 0.0;

  std::array<double, 5> as_array() const { return {q1, q3, kv1, kv2, kv3}; }
  bool operator==(const Actuation&) const = default;
};

inline const std::array<std::string, 3> kLevelChannels = {"h1", "h2", "h3"};
inline const std::array<std::string, 5> kActuationChannels = {"q1", "q3", "kv1", "kv2", "kv3"};

struct TankState {
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
};

struct Dynamics {
  double inflow_coeff = 1.0;   // c_q
  double valve_coeff = 1.0;    // c_v
  double dt = 0.1;
  int substeps = 10;           // Euler steps per recorded sample
};

struct TankScenario {
  std::map<std::string, Actuation> states;
  std::vector<std::string> schedule;
  int samples_per_state = 50;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  TankState initial;
  Dynamics dynamics;

  void validate() const;
};

// The operating modes of the benchmark, normal and faulty.
std::map<std::string, Actuation> default_states();

// Names of the four faulty modes and the component each one breaks.
const std::map<std::string, std::string>& fault_components();

// Normal cycle [Q1, V12, V23, Q1, V12, V23, V3] repeated `cycles` times.
std::vector<std::string> normal_sequence(int cycles);

// Four normal cycles, `anomalous_cycles` cycles with every occurrence of the
// faulty state's nominal counterpart replaced, then four normal cycles.
std::vector<std::string> anomaly_sequence(const std::string& fault, int anomalous_cycles);

// Accepts "Q1_faulty", "q1", "v12", "V12" and similar spellings.
std::string canonical_fault_name(const std::string& name);

inline constexpr int kCycleLength = 7;
inline constexpr int kNormalCyclesAroundAnomaly = 4;

// One Euler substep; levels clamped to >= 0. Returns the volume drained
// through the outlet valve during the step.
double euler_step(TankState& state, const Actuation& act, const Dynamics& dyn);

// Simulates the schedule. Output channels: h1, h2, h3 (with noise) and the
// five actuation channels (clean). Noise on a level channel is
// noise_sigma times the standard deviation of its clean trajectory.
TimeSeries simulate(const TankScenario& scenario);

TankScenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const TankScenario& scenario);

}  // namespace d2d::tank
