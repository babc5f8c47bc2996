#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "discret2di/catvae.hpp"
#include "discret2di/diagnosis.hpp"
#include "discret2di/discretization.hpp"
#include "discret2di/gmm.hpp"
#include "discret2di/knowledge_base.hpp"
#include "discret2di/rule_mining.hpp"
#include "discret2di/tank_sim.hpp"

namespace d2d {

struct PipelineConfig {
  CatVaeConfig catvae = CatVaeConfig::tank_defaults();
  GmmOptions gmm;
  double likelihood_threshold = kDefaultLikelihoodThreshold;
  double min_confidence = kDefaultMinConfidence;
  double min_support = kDefaultMinSupport;
  double train_fraction = 0.7;
  int max_diagnosis_size = 3;
  // A state id inherits an alias when at least this share of its frames
  // carries the alias label.
  double alias_min_share = 0.1;
  std::uint64_t seed = 0;

  // Three-tank evaluation settings.
  double noise_sigma = 0.1;
  int normal_cycles = 15;
  int heldout_cycles = 9;

  std::string data_path;
  std::string model_path;
  std::string rules_path;
  std::string health_map_path;
  std::string output_dir = ".";

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);

// Applies "key=value" overrides on a JSON document; nested keys use dots
// (e.g. "catvae.beta=0.3"). Values parse as JSON, falling back to strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// 64-bit FNV-1a of a byte string, hex encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string config_hash(const PipelineConfig& config);

// Labels each row with the name of the nominal operating mode whose
// actuation vector it carries; "" when none matches.
std::vector<std::string> tank_mode_labels(const TimeSeries& data,
                                          const std::map<std::string, tank::Actuation>& modes);

// For each state id, the labels carried by at least `min_share` of its
// frames, most frequent first.
std::map<int, std::vector<std::string>> state_aliases(const SymbolSequence& seq,
                                                      const std::vector<std::string>& labels,
                                                      double min_share);

// Fraction of samples whose state's majority label equals their own label.
double purity(const std::vector<int>& states, const std::vector<int>& labels);

struct Pre2DiResult {
  CatVaeModel model;
  TrainHistory history;
  SymbolSequence sequence;
  std::vector<CandidateRule> candidates;
  std::map<int, std::vector<std::string>> aliases;
  RuleBase rules;
};

using ProgressFn = std::function<void(const std::string&)>;

// Rule learning: train the model on a shuffled split of normal data,
// discretize the whole run, mine state -> residual rules and attach the
// health components. Aliases come from tank actuation channels when present.
Pre2DiResult pre2di(const PipelineConfig& config, const TimeSeries& normal, const HealthMap& health_map,
                    const ProgressFn& progress = {});

struct Discret2DiResult {
  SymbolSequence sequence;
  std::vector<DiagnosisResult> diagnoses;
};

// Diagnosis of a run against a learned rule base.
Discret2DiResult discret2di(const CatVaeModel& model, const RuleBase& rules, const TimeSeries& data,
                            const PipelineConfig& config);

// Health map used for the simulated benchmark: every nominal mode maps to
// its active actuators.
HealthMap tank_health_map();

struct ScenarioOutcome {
  std::string fault;
  int anomalous_cycles = 0;
  bool detected = false;           // true component in a minimal diagnosis in the window
  std::size_t diagnosed_in_window = 0;
  std::size_t window_length = 0;
  double min_log_likelihood = 0.0;  // within the window
  std::map<Component, std::size_t> implicated;  // within the window
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<ScenarioOutcome> scenarios;
  double normal_consistency = 0.0;  // share of held-out normal samples without a diagnosis
  double heldout_min_log_likelihood = 0.0;
  int states_used = 0;
  int epochs_run = 0;
};

struct Table3Result {
  std::vector<SeedOutcome> seeds;
  // (fault, cycles) -> number of seeds that detected the true component
  std::map<std::pair<std::string, int>, int> detections;

  bool cell(const std::string& fault, int cycles) const;  // majority vote
  std::string markdown() const;
  std::string csv() const;
};

Table3Result eval_table3(const PipelineConfig& config, const std::vector<std::uint64_t>& seeds,
                         const ProgressFn& progress = {});

struct DiscretizationReport {
  std::string dataset;
  std::string model;  // "catvae" or "gmm"
  int states_used = 0;
  double purity = 0.0;
  double mean_log_likelihood = 0.0;
  double not_ok_fraction = 0.0;
  nlohmann::json extra = nlohmann::json::object();
};

struct CompareGmmResult {
  std::vector<DiscretizationReport> reports;
  std::map<std::string, std::string> plots;  // file name -> SVG markup
  std::string markdown() const;
};

CompareGmmResult compare_gmm(const PipelineConfig& config, const ProgressFn& progress = {});

// Stream-specific seed derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

std::string model_hash(const CatVaeModel& model);

}  // namespace d2d
