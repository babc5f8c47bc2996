#include "discret2di/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "discret2di/error.hpp"
#include "discret2di/svg.hpp"
#include "discret2di/synthetic.hpp"

namespace d2d {

namespace {

void require_finite(double v, const std::string& name) {
  if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, name + " must be finite");
}

nlohmann::json gmm_options_json(const GmmOptions& o) {
  return {{"n_components", o.n_components}, {"seed", o.seed},         {"max_iters", o.max_iters},
          {"tol", o.tol},                   {"reg_covar", o.reg_covar}, {"standardize", o.standardize}};
}

GmmOptions gmm_options_from_json(const nlohmann::json& doc, GmmOptions o) {
  for (const auto& [key, value] : doc.items()) {
    if (key == "n_components") o.n_components = value.get<int>();
    else if (key == "seed") o.seed = value.get<std::uint64_t>();
    else if (key == "max_iters") o.max_iters = value.get<int>();
    else if (key == "tol") o.tol = value.get<double>();
    else if (key == "reg_covar") o.reg_covar = value.get<double>();
    else if (key == "standardize") o.standardize = value.get<bool>();
    else throw Error(ErrorKind::kSchema, "unknown gmm config key '" + key + "'");
  }
  return o;
}

std::map<std::string, tank::Actuation> nominal_modes() {
  std::map<std::string, tank::Actuation> out;
  for (const auto& [name, act] : tank::default_states()) {
    if (name.find("_faulty") == std::string::npos) out.emplace(name, act);
  }
  return out;
}

bool has_channels(const TimeSeries& data, const std::array<std::string, 5>& names) {
  for (const auto& n : names) {
    if (!data.channel_index(n)) return false;
  }
  return true;
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

TimeSeries run_scenario(const std::vector<std::string>& schedule, double noise_sigma, std::uint64_t seed) {
  tank::TankScenario sc;
  sc.states = tank::default_states();
  sc.schedule = schedule;
  sc.noise_sigma = noise_sigma;
  sc.seed = seed;
  return tank::simulate(sc);
}

// Points of the 2-sigma ellipse of a 2-D Gaussian.
std::vector<std::pair<double, double>> sigma_ellipse(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d radii = es.eigenvalues().cwiseMax(0.0).cwiseSqrt() * 2.0;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i <= 64; ++i) {
    const double t = 2.0 * std::numbers::pi * i / 64.0;
    const Eigen::Vector2d p = mean + es.eigenvectors() * Eigen::Vector2d(radii(0) * std::cos(t), radii(1) * std::sin(t));
    pts.emplace_back(p(0), p(1));
  }
  return pts;
}

std::vector<int> int_labels(const TimeSeries& data, const std::string& channel) {
  const Eigen::VectorXd col = data.column(channel);
  std::vector<int> out(col.size());
  for (Eigen::Index i = 0; i < col.size(); ++i) out[i] = static_cast<int>(std::lround(col(i)));
  return out;
}

std::vector<int> state_ids(const SymbolSequence& seq) {
  std::vector<int> out;
  out.reserve(seq.size());
  for (const auto& r : seq) out.push_back(r.state.id);
  return out;
}

void fill_residual_stats(DiscretizationReport& rep, const SymbolSequence& seq) {
  double sum = 0.0;
  std::size_t bad = 0;
  for (const auto& r : seq) {
    sum += r.log_likelihood;
    if (!r.residual.ok) ++bad;
  }
  rep.states_used = static_cast<int>(state_histogram(seq).size());
  rep.mean_log_likelihood = seq.empty() ? 0.0 : sum / static_cast<double>(seq.size());
  rep.not_ok_fraction = seq.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(seq.size());
}

}  // namespace

void PipelineConfig::validate() const {
  catvae.validate();
  require_finite(likelihood_threshold, "likelihood_threshold");
  require_finite(min_confidence, "min_confidence");
  require_finite(min_support, "min_support");
  require_finite(alias_min_share, "alias_min_share");
  require_finite(noise_sigma, "noise_sigma");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "train_fraction must lie in (0, 1)");
  }
  if (min_support <= 0.0 || min_support > 1.0) throw Error(ErrorKind::kInvalidArgument, "min_support must lie in (0, 1]");
  if (min_confidence < 0.0 || min_confidence > 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "min_confidence must lie in [0, 1]");
  }
  if (max_diagnosis_size < 1) throw Error(ErrorKind::kInvalidArgument, "max_diagnosis_size must be >= 1");
  if (alias_min_share <= 0.0 || alias_min_share > 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "alias_min_share must lie in (0, 1]");
  }
  if (noise_sigma < 0.0) throw Error(ErrorKind::kInvalidArgument, "noise_sigma must be >= 0");
  if (normal_cycles < 1 || heldout_cycles < 1) throw Error(ErrorKind::kInvalidArgument, "cycle counts must be >= 1");
  if (gmm.n_components < 1) throw Error(ErrorKind::kInvalidArgument, "gmm.n_components must be >= 1");
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {{"catvae", to_json(c.catvae)},
          {"gmm", gmm_options_json(c.gmm)},
          {"likelihood_threshold", c.likelihood_threshold},
          {"min_confidence", c.min_confidence},
          {"min_support", c.min_support},
          {"train_fraction", c.train_fraction},
          {"max_diagnosis_size", c.max_diagnosis_size},
          {"alias_min_share", c.alias_min_share},
          {"seed", c.seed},
          {"noise_sigma", c.noise_sigma},
          {"normal_cycles", c.normal_cycles},
          {"heldout_cycles", c.heldout_cycles},
          {"paths",
           {{"data", c.data_path},
            {"model", c.model_path},
            {"rules", c.rules_path},
            {"health_map", c.health_map_path},
            {"output_dir", c.output_dir}}}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "pipeline config must be a JSON object");
  PipelineConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "catvae") c.catvae = catvae_config_from_json(value, c.catvae);
      else if (key == "gmm") c.gmm = gmm_options_from_json(value, c.gmm);
      else if (key == "likelihood_threshold") c.likelihood_threshold = value.get<double>();
      else if (key == "min_confidence") c.min_confidence = value.get<double>();
      else if (key == "min_support") c.min_support = value.get<double>();
      else if (key == "train_fraction") c.train_fraction = value.get<double>();
      else if (key == "max_diagnosis_size") c.max_diagnosis_size = value.get<int>();
      else if (key == "alias_min_share") c.alias_min_share = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "noise_sigma") c.noise_sigma = value.get<double>();
      else if (key == "normal_cycles") c.normal_cycles = value.get<int>();
      else if (key == "heldout_cycles") c.heldout_cycles = value.get<int>();
      else if (key == "paths") {
        for (const auto& [pk, pv] : value.items()) {
          if (pk == "data") c.data_path = pv.get<std::string>();
          else if (pk == "model") c.model_path = pv.get<std::string>();
          else if (pk == "rules") c.rules_path = pv.get<std::string>();
          else if (pk == "health_map") c.health_map_path = pv.get<std::string>();
          else if (pk == "output_dir") c.output_dir = pv.get<std::string>();
          else throw Error(ErrorKind::kSchema, "unknown paths key '" + pk + "'");
        }
      } else {
        throw Error(ErrorKind::kSchema, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::kInvalidArgument, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::kInvalidArgument, "override key '" + key + "' has an empty segment");
    if (!node->is_object()) *node = nlohmann::json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const PipelineConfig& config) {
  nlohmann::json doc = to_json(config);
  doc.erase("paths");  // where files live does not change results
  return fnv1a_hex(doc.dump());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string model_hash(const CatVaeModel& model) { return fnv1a_hex(to_json(model).dump()); }

std::vector<std::string> tank_mode_labels(const TimeSeries& data, const std::map<std::string, tank::Actuation>& modes) {
  std::vector<Eigen::Index> cols;
  for (const auto& name : tank::kActuationChannels) {
    auto idx = data.channel_index(name);
    if (!idx) throw Error(ErrorKind::kSchema, "mode labels need channel '" + name + "'");
    cols.push_back(static_cast<Eigen::Index>(*idx));
  }
  std::vector<std::string> out(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (const auto& [name, act] : modes) {
      const auto a = act.as_array();
      bool match = true;
      for (std::size_t j = 0; j < a.size() && match; ++j) match = std::abs(data.values()(static_cast<Eigen::Index>(r), cols[j]) - a[j]) < 1e-9;
      if (match) {
        out[r] = name;
        break;
      }
    }
  }
  return out;
}

std::map<int, std::vector<std::string>> state_aliases(const SymbolSequence& seq, const std::vector<std::string>& labels,
                                                      double min_share) {
  if (labels.size() != seq.size()) throw Error(ErrorKind::kInvalidArgument, "label count differs from sequence length");
  std::map<int, std::map<std::string, std::size_t>> counts;
  std::map<int, std::size_t> totals;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    ++totals[seq[i].state.id];
    if (!labels[i].empty()) ++counts[seq[i].state.id][labels[i]];
  }
  std::map<int, std::vector<std::string>> out;
  for (const auto& [id, by_label] : counts) {
    std::vector<std::pair<std::string, std::size_t>> ranked(by_label.begin(), by_label.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [label, n] : ranked) {
      if (static_cast<double>(n) >= min_share * static_cast<double>(totals[id]) - 1e-12) out[id].push_back(label);
    }
  }
  return out;
}

double purity(const std::vector<int>& states, const std::vector<int>& labels) {
  if (states.size() != labels.size()) throw Error(ErrorKind::kInvalidArgument, "purity: size mismatch");
  if (states.empty()) return 0.0;
  std::map<int, std::map<int, std::size_t>> counts;
  for (std::size_t i = 0; i < states.size(); ++i) ++counts[states[i]][labels[i]];
  std::size_t agree = 0;
  for (const auto& [s, by_label] : counts) {
    std::size_t best = 0;
    for (const auto& [l, n] : by_label) best = std::max(best, n);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(states.size());
}

Pre2DiResult pre2di(const PipelineConfig& config, const TimeSeries& normal, const HealthMap& health_map,
                    const ProgressFn& progress) {
  config.validate();
  health_map.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  CatVaeConfig vae = config.catvae;
  vae.seed = config.seed;
  const TrainValSplit split = split_train_val(normal, config.train_fraction, derive_seed(config.seed, 0));
  say("training on " + std::to_string(split.train.rows()) + " / validating on " +
      std::to_string(split.validation.rows()) + " samples");
  EpochCallback on_epoch;
  if (progress) {
    on_epoch = [&](int epoch, double tl, double vl) {
      if ((epoch + 1) % 25 == 0) say("epoch " + std::to_string(epoch + 1) + " train " + fmt(tl) + " val " + fmt(vl));
    };
  }
  TrainResult trained = train_catvae(vae, split.train, split.validation, on_epoch);

  Pre2DiResult out{std::move(trained.model), std::move(trained.history), {}, {}, {}, {}};
  out.sequence = discretize_run(out.model, normal, ResidualDiscretizer(config.likelihood_threshold));
  out.candidates = mine_rules(out.sequence, config.min_support, {config.min_confidence, true});

  if (has_channels(normal, tank::kActuationChannels)) {
    out.aliases = state_aliases(out.sequence, tank_mode_labels(normal, nominal_modes()), config.alias_min_share);
    for (auto& rec : out.sequence) {
      auto it = out.aliases.find(rec.state.id);
      if (it != out.aliases.end() && !it->second.empty()) rec.state.alias = it->second.front();
    }
  }
  out.rules = complete_rules(out.candidates, health_map.resolve(out.aliases), health_map.comps);

  nlohmann::json aliases = nlohmann::json::object();
  for (const auto& [id, names] : out.aliases) aliases[std::to_string(id)] = names;
  out.rules.metadata = {{"seed", config.seed},
                        {"config_hash", config_hash(config)},
                        {"model_hash", model_hash(out.model)},
                        {"likelihood_threshold", config.likelihood_threshold},
                        {"states_used", state_histogram(out.sequence).size()},
                        {"aliases", aliases},
                        {"best_epoch", out.history.best_epoch},
                        {"epochs_run", out.history.epochs_run}};
  return out;
}

Discret2DiResult discret2di(const CatVaeModel& model, const RuleBase& rules, const TimeSeries& data,
                            const PipelineConfig& config) {
  if (rules.metadata.contains("model_hash") && rules.metadata["model_hash"].get<std::string>() != model_hash(model)) {
    throw Error(ErrorKind::kSchema, "rule base was learned with a different model (stale model_hash)");
  }
  Discret2DiResult out;
  out.sequence = discretize_run(model, data, ResidualDiscretizer(config.likelihood_threshold));
  out.diagnoses = diagnose(rules, out.sequence, {config.max_diagnosis_size});
  return out;
}

HealthMap tank_health_map() {
  HealthMap m;
  m.comps = {"q1", "q3", "kv1", "kv2", "kv3"};
  m.by_alias = {{"Q1", {"q1"}}, {"V12", {"kv1"}}, {"V23", {"kv2"}}, {"V3", {"kv3"}}};
  return m;
}

bool Table3Result::cell(const std::string& fault, int cycles) const {
  auto it = detections.find({fault, cycles});
  const int n = it == detections.end() ? 0 : it->second;
  return 2 * n > static_cast<int>(seeds.size());
}

std::string Table3Result::markdown() const {
  static const std::vector<std::string> faults = {"Q1_faulty", "V12_faulty", "V23_faulty", "V3_faulty"};
  std::ostringstream os;
  os << "| cycles | q1 | v12 | v23 | v3 |\n|---|---|---|---|---|\n";
  for (int cycles : {1, 3}) {
    os << "| " << cycles << " |";
    for (const auto& f : faults) {
      auto it = detections.find({f, cycles});
      const int n = it == detections.end() ? 0 : it->second;
      os << " " << (cell(f, cycles) ? "✓" : "✗") << " (" << n << "/" << seeds.size() << ") |";
    }
    os << "\n";
  }
  os << "\n| seed | states | epochs | normal consistency | held-out min log-likelihood |\n|---|---|---|---|---|\n";
  for (const auto& s : seeds) {
    os << "| " << s.seed << " | " << s.states_used << " | " << s.epochs_run << " | " << fmt(s.normal_consistency, 4)
       << " | " << fmt(s.heldout_min_log_likelihood, 2) << " |\n";
  }
  return os.str();
}

std::string Table3Result::csv() const {
  std::ostringstream os;
  os << "seed,fault,anomalous_cycles,detected,diagnosed_in_window,window_length,min_log_likelihood,top_component\n";
  for (const auto& s : seeds) {
    for (const auto& sc : s.scenarios) {
      std::string top;
      std::size_t best = 0;
      for (const auto& [c, n] : sc.implicated) {
        if (n > best) {
          best = n;
          top = c;
        }
      }
      os << s.seed << "," << sc.fault << "," << sc.anomalous_cycles << "," << (sc.detected ? 1 : 0) << ","
         << sc.diagnosed_in_window << "," << sc.window_length << "," << fmt(sc.min_log_likelihood, 2) << ","
         << top << "\n";
    }
  }
  return os.str();
}

Table3Result eval_table3(const PipelineConfig& config, const std::vector<std::uint64_t>& seeds,
                         const ProgressFn& progress) {
  config.validate();
  if (seeds.empty()) throw Error(ErrorKind::kInvalidArgument, "eval_table3 needs at least one seed");
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  static const std::vector<std::string> faults = {"Q1_faulty", "V12_faulty", "V23_faulty", "V3_faulty"};
  const HealthMap health = tank_health_map();
  const std::size_t cycle_rows = 7 * 50;

  Table3Result result;
  for (std::uint64_t seed : seeds) {
    PipelineConfig cfg = config;
    cfg.seed = seed;
    say("seed " + std::to_string(seed) + ": simulating normal run");
    const TimeSeries normal =
        run_scenario(tank::normal_sequence(cfg.normal_cycles), cfg.noise_sigma, derive_seed(seed, 1));
    ProgressFn inner;
    if (progress) inner = [&](const std::string& m) { say("seed " + std::to_string(seed) + ": " + m); };
    const Pre2DiResult pre = pre2di(cfg, normal, health, inner);

    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.states_used = static_cast<int>(state_histogram(pre.sequence).size());
    outcome.epochs_run = pre.history.epochs_run;

    const TimeSeries heldout =
        run_scenario(tank::normal_sequence(cfg.heldout_cycles), cfg.noise_sigma, derive_seed(seed, 2));
    const Discret2DiResult held = discret2di(pre.model, pre.rules, heldout, cfg);
    outcome.normal_consistency =
        1.0 - static_cast<double>(held.diagnoses.size()) / static_cast<double>(heldout.rows());
    outcome.heldout_min_log_likelihood = std::numeric_limits<double>::infinity();
    for (const auto& r : held.sequence) {
      outcome.heldout_min_log_likelihood = std::min(outcome.heldout_min_log_likelihood, r.log_likelihood);
    }

    std::uint64_t stream = 10;
    for (int cycles : {1, 3}) {
      for (const auto& fault : faults) {
        const TimeSeries run =
            run_scenario(tank::anomaly_sequence(fault, cycles), cfg.noise_sigma, derive_seed(seed, stream++));
        const Discret2DiResult res = discret2di(pre.model, pre.rules, run, cfg);
        const double t_begin = run.timestamps()[4 * cycle_rows];
        const double t_end = run.timestamps()[(4 + cycles) * cycle_rows - 1];
        const Component truth = tank::fault_components().at(fault);

        ScenarioOutcome sc;
        sc.fault = fault;
        sc.anomalous_cycles = cycles;
        sc.window_length = static_cast<std::size_t>(cycles) * cycle_rows;
        sc.min_log_likelihood = std::numeric_limits<double>::infinity();
        for (const auto& r : res.sequence) {
          if (r.timestamp >= t_begin && r.timestamp <= t_end) {
            sc.min_log_likelihood = std::min(sc.min_log_likelihood, r.log_likelihood);
          }
        }
        std::vector<DiagnosisResult> in_window;
        for (const auto& d : res.diagnoses) {
          if (d.timestamp >= t_begin && d.timestamp <= t_end) in_window.push_back(d);
        }
        sc.diagnosed_in_window = in_window.size();
        sc.implicated = implicated_counts(in_window);
        sc.detected = sc.implicated.count(truth) > 0;
        if (sc.detected) ++result.detections[{fault, cycles}];
        else result.detections.try_emplace({fault, cycles}, 0);
        say("seed " + std::to_string(seed) + ": " + fault + " x" + std::to_string(cycles) + " -> " +
            (sc.detected ? "detected" : "missed") + " (" + std::to_string(sc.diagnosed_in_window) +
            " diagnosed frames)");
        outcome.scenarios.push_back(std::move(sc));
      }
    }
    say("seed " + std::to_string(seed) + ": normal consistency " + fmt(outcome.normal_consistency, 4));
    result.seeds.push_back(std::move(outcome));
  }
  return result;
}

std::string CompareGmmResult::markdown() const {
  std::ostringstream os;
  os << "| dataset | model | states | purity | mean log-likelihood | not-ok fraction |\n|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    os << "| " << r.dataset << " | " << r.model << " | " << r.states_used << " | " << fmt(r.purity) << " | "
       << fmt(r.mean_log_likelihood) << " | " << fmt(r.not_ok_fraction, 4) << " |\n";
  }
  for (const auto& r : reports) {
    if (!r.extra.empty()) os << "\n" << r.dataset << " / " << r.model << ": " << r.extra.dump() << "\n";
  }
  return os.str();
}

CompareGmmResult compare_gmm(const PipelineConfig& config, const ProgressFn& progress) {
  config.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const ResidualDiscretizer residuals(config.likelihood_threshold);
  CompareGmmResult out;

  auto train_vae = [&](CatVaeConfig vae, const TimeSeries& data) {
    vae.seed = config.seed;
    const TrainValSplit split = split_train_val(data, config.train_fraction, derive_seed(config.seed, 0));
    return train_catvae(vae, split.train, split.validation).model;
  };
  auto fit_gmm = [&](const TimeSeries& data, const std::vector<std::string>& channels, int k) {
    GmmOptions opt = config.gmm;
    opt.n_components = k;
    opt.seed = config.seed;
    opt.standardize = true;
    return fit_em(data.select_channels(channels), opt).model;
  };
  auto vae_contours = [](const CatVaeModel& m, const std::map<int, std::size_t>& hist) {
    std::vector<std::vector<std::pair<double, double>>> cs;
    std::vector<svg::ScatterMarker> markers;
    for (const auto& [k, n] : hist) {
      const DecodedCategory d = decode_category(m, k);
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      cov(0, 0) = d.stddev(0) * d.stddev(0);
      cov(1, 1) = d.stddev(1) * d.stddev(1);
      cs.push_back(sigma_ellipse(d.mean.head<2>(), cov));
      markers.push_back({d.mean(0), d.mean(1), "c" + std::to_string(k)});
    }
    return std::make_pair(cs, markers);
  };
  auto gmm_contours = [](const GmmModel& g) {
    std::vector<std::vector<std::pair<double, double>>> cs;
    std::vector<svg::ScatterMarker> markers;
    const Eigen::Vector2d s = g.standardizer.stddev.head<2>();
    for (int k = 0; k < g.components(); ++k) {
      const Eigen::Vector2d mean = g.standardizer.mean.head<2>() + g.means.row(k).transpose().head<2>().cwiseProduct(s);
      const Eigen::Matrix2d cov = s.asDiagonal() * g.covariances[k].topLeftCorner<2, 2>() * s.asDiagonal();
      cs.push_back(sigma_ellipse(mean, cov));
      markers.push_back({mean(0), mean(1), "g" + std::to_string(k)});
    }
    return std::make_pair(cs, markers);
  };
  auto xy = [](const TimeSeries& data) {
    const Eigen::VectorXd x = data.column("x"), y = data.column("y");
    return std::make_pair(std::vector<double>(x.data(), x.data() + x.size()),
                          std::vector<double>(y.data(), y.data() + y.size()));
  };

  // Property 1: separable mixture.
  {
    say("property 1: three-component mixture");
    const TimeSeries data = synth::generate_property1(3000, derive_seed(config.seed, 3));
    const std::vector<int> labels = int_labels(data, "label");
    const auto [xs, ys] = xy(data);

    const CatVaeModel vae = train_vae(CatVaeConfig::with_shape({"x", "y"}, 3), data);
    const SymbolSequence vs = discretize_run(vae, data, residuals);
    DiscretizationReport vr{"property1", "catvae"};
    fill_residual_stats(vr, vs);
    vr.purity = purity(state_ids(vs), labels);
    auto [vc, vm] = vae_contours(vae, state_histogram(vs));
    out.plots["property1_catvae.svg"] = svg::scatter(xs, ys, state_ids(vs), vm, vc, "Property 1, CatVAE K=3");
    out.reports.push_back(vr);

    const GmmModel gmm = fit_gmm(data, {"x", "y"}, 3);
    const SymbolSequence gs = discretize_run(gmm, data, residuals);
    DiscretizationReport gr{"property1", "gmm"};
    fill_residual_stats(gr, gs);
    gr.purity = purity(state_ids(gs), labels);
    auto [gc, gm] = gmm_contours(gmm);
    out.plots["property1_gmm.svg"] = svg::scatter(xs, ys, state_ids(gs), gm, gc, "Property 1, GMM 3 components");
    out.reports.push_back(gr);
  }

  // Property 2: continuous manifold with two angular modes.
  {
    say("property 2: ellipse manifold");
    const synth::EllipseParams ep;
    const TimeSeries data = synth::generate_property2(3000, derive_seed(config.seed, 4), ep);
    const std::vector<int> labels = int_labels(data, "label");
    const auto [xs, ys] = xy(data);

    const CatVaeModel vae = train_vae(CatVaeConfig::with_shape({"x", "y"}, 10), data);
    const SymbolSequence vs = discretize_run(vae, data, residuals);
    DiscretizationReport vr{"property2", "catvae"};
    fill_residual_stats(vr, vs);
    vr.purity = purity(state_ids(vs), labels);
    double max_dist = 0.0;
    int used = 0;
    for (const auto& [k, n] : state_histogram(vs)) {
      if (static_cast<double>(n) < 0.01 * static_cast<double>(vs.size())) continue;
      ++used;
      const DecodedCategory d = decode_category(vae, k);
      max_dist = std::max(max_dist, synth::distance_to_ellipse(d.mean(0), d.mean(1), ep.a, ep.b));
    }
    vr.extra = {{"categories_over_1pct", used}, {"max_mean_distance_to_ellipse", max_dist},
                {"noise_sigma", ep.noise_sigma}};
    auto [vc, vm] = vae_contours(vae, state_histogram(vs));
    out.plots["property2_catvae.svg"] = svg::scatter(xs, ys, state_ids(vs), vm, vc, "Property 2, CatVAE K=10");
    out.reports.push_back(vr);

    // The mixture baseline gets the true mode count.
    const GmmModel gmm = fit_gmm(data, {"x", "y"}, 2);
    const SymbolSequence gs = discretize_run(gmm, data, residuals);
    DiscretizationReport gr{"property2", "gmm"};
    fill_residual_stats(gr, gs);
    gr.purity = purity(state_ids(gs), labels);
    double gmax = 0.0;
    for (int k = 0; k < gmm.components(); ++k) {
      const Eigen::VectorXd m = gmm.standardizer.mean + gmm.means.row(k).transpose().cwiseProduct(gmm.standardizer.stddev);
      gmax = std::max(gmax, synth::distance_to_ellipse(m(0), m(1), ep.a, ep.b));
    }
    gr.extra = {{"max_mean_distance_to_ellipse", gmax}};
    auto [gc, gm] = gmm_contours(gmm);
    out.plots["property2_gmm.svg"] = svg::scatter(xs, ys, state_ids(gs), gm, gc, "Property 2, GMM 2 components");
    out.reports.push_back(gr);
  }

  // Three-tank: residual separation between held-out normal and a pump fault.
  {
    say("three-tank: normal vs Q1_faulty");
    const TimeSeries normal =
        run_scenario(tank::normal_sequence(config.normal_cycles), config.noise_sigma, derive_seed(config.seed, 1));
    const TimeSeries heldout =
        run_scenario(tank::normal_sequence(config.heldout_cycles), config.noise_sigma, derive_seed(config.seed, 2));
    const TimeSeries faulty =
        run_scenario(tank::anomaly_sequence("Q1_faulty", 3), config.noise_sigma, derive_seed(config.seed, 5));
    const TimeSeries window = faulty.slice(4 * 350, 7 * 350);
    const auto modes = tank_mode_labels(heldout, nominal_modes());
    std::map<std::string, int> mode_ids;
    std::vector<int> labels;
    for (const auto& m : modes) labels.push_back(mode_ids.try_emplace(m, static_cast<int>(mode_ids.size())).first->second);

    auto report = [&](const std::string& name, const SymbolSequence& held, const SymbolSequence& anomalous) {
      DiscretizationReport r{"three-tank", name};
      fill_residual_stats(r, held);
      r.purity = purity(state_ids(held), labels);
      DiscretizationReport a;
      fill_residual_stats(a, anomalous);
      r.extra = {{"fault_window_mean_log_likelihood", a.mean_log_likelihood},
                 {"fault_window_not_ok_fraction", a.not_ok_fraction}};
      return r;
    };

    const CatVaeModel vae = train_vae(config.catvae, normal);
    out.reports.push_back(
        report("catvae", discretize_run(vae, heldout, residuals), discretize_run(vae, window, residuals)));
    const GmmModel gmm = fit_gmm(normal, config.catvae.channels, config.gmm.n_components);
    out.reports.push_back(
        report("gmm", discretize_run(gmm, heldout, residuals), discretize_run(gmm, window, residuals)));
  }
  return out;
}

}  // namespace d2d
