// Command-line front end: simulation, training, rule learning and diagnosis.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "discret2di/error.hpp"
#include "discret2di/pipeline.hpp"
#include "discret2di/svg.hpp"
#include "discret2di/synthetic.hpp"
#include "discret2di/tank_sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw d2d::Error(d2d::ErrorKind::kIo, "cannot open '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw d2d::Error(d2d::ErrorKind::kParse, "'" + path + "' is not valid JSON");
  return doc;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw d2d::Error(d2d::ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw d2d::Error(d2d::ErrorKind::kInvalidArgument, what + " path is required");
  if (!fs::exists(path)) throw d2d::Error(d2d::ErrorKind::kIo, what + " '" + path + "' does not exist");
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  bool quiet = false;

  d2d::PipelineConfig load() const {
    json doc = json::object();
    if (!config_path.empty()) {
      require_file(config_path, "config");
      doc = read_json(config_path);
    }
    if (const char* env = std::getenv("DISCRET2DI_SEED")) d2d::apply_override(doc, std::string("seed=") + env);
    for (const auto& o : overrides) d2d::apply_override(doc, o);
    return d2d::pipeline_config_from_json(doc);
  }

  d2d::ProgressFn progress() const {
    if (quiet) return {};
    return [](const std::string& m) { std::cerr << m << "\n"; };
  }
};

json artifact_metadata(const d2d::PipelineConfig& cfg) {
  return {{"seed", cfg.seed}, {"config_hash", d2d::config_hash(cfg)}};
}

d2d::CatVaeModel load_model(const std::string& path) {
  require_file(path, "model");
  return d2d::catvae_model_from_json(read_json(path));
}

json model_document(const d2d::CatVaeModel& model, const d2d::PipelineConfig& cfg) {
  json doc = d2d::to_json(model);
  doc["metadata"] = artifact_metadata(cfg);
  return doc;
}

std::string state_inventory(const d2d::CatVaeModel& model, const d2d::SymbolSequence& seq,
                            const std::map<int, std::vector<std::string>>& aliases) {
  std::ostringstream os;
  os << "state  share    alias        decoded mean\n";
  const auto hist = d2d::state_histogram(seq);
  for (const auto& [id, n] : hist) {
    const auto dec = d2d::decode_category(model, id);
    char line[96];
    std::snprintf(line, sizeof(line), "%-6d %-8.4f ", id, static_cast<double>(n) / static_cast<double>(seq.size()));
    std::string alias;
    if (auto it = aliases.find(id); it != aliases.end()) {
      for (const auto& a : it->second) alias += (alias.empty() ? "" : ",") + a;
    }
    os << line;
    os << alias << std::string(alias.size() < 13 ? 13 - alias.size() : 1, ' ');
    for (Eigen::Index j = 0; j < dec.mean.size(); ++j) {
      std::snprintf(line, sizeof(line), "%s=%.3f ", model.config.channels[j].c_str(), dec.mean(j));
      os << line;
    }
    os << "\n";
  }
  return os.str();
}

std::string rule_table(const d2d::RuleBase& rules) {
  std::ostringstream os;
  for (const auto& r : rules.rules) {
    std::string health;
    for (const auto& c : r.health.components) health += (health.empty() ? "" : " & ") + ("!AB(" + c + ")");
    char tail[96];
    std::snprintf(tail, sizeof(tail), "  support %.4f confidence %.4f", r.support, r.confidence);
    os << health << " -> (state_" << r.state_id << " -> " << (r.residual_ok ? "r_ok" : "!r_ok") << ")" << tail
       << "\n";
  }
  return os.str();
}

json aliases_json(const std::map<int, std::vector<std::string>>& aliases) {
  json doc = json::object();
  for (const auto& [id, names] : aliases) doc[std::to_string(id)] = names;
  return doc;
}

std::map<int, std::vector<std::string>> aliases_from_json(const json& doc) {
  std::map<int, std::vector<std::string>> out;
  for (const auto& [key, value] : doc.items()) out[std::stoi(key)] = value.get<std::vector<std::string>>();
  return out;
}

std::string diagnosis_summary(const std::vector<d2d::DiagnosisResult>& results, std::size_t rows) {
  std::ostringstream os;
  os << "diagnosed timestamps: " << results.size() << " of " << rows << "\n";
  const auto counts = d2d::implicated_counts(results);
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [c, n] : ranked) os << "  " << c << ": " << n << "\n";
  if (!ranked.empty()) os << "top implicated component: " << ranked.front().first << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discret2di: discretization-based diagnosis of time series"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "pipeline config JSON");
  app.add_option("--set", common.overrides, "override a config key (key=value, dots for nesting)");
  app.add_flag("--quiet", common.quiet, "suppress progress output");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate the three-tank system");
  bool sim_normal = false;
  int sim_cycles = 15, sim_anom = 1;
  std::string sim_fault, sim_scenario, sim_out = "run.csv";
  std::optional<double> sim_noise;
  std::optional<std::uint64_t> sim_seed;
  sim->add_flag("--normal", sim_normal, "normal operation only");
  sim->add_option("--cycles", sim_cycles, "normal cycles");
  sim->add_option("--fault", sim_fault, "fault: q1, v12, v23 or v3");
  sim->add_option("--anom-cycles", sim_anom, "anomalous cycles (1 or 3)");
  sim->add_option("--scenario", sim_scenario, "scenario JSON");
  sim->add_option("--noise", sim_noise, "noise in units of the channel standard deviation");
  sim->add_option("--seed", sim_seed, "noise seed");
  sim->add_option("-o,--out", sim_out, "output CSV");

  // synth
  auto* syn = app.add_subcommand("synth", "generate a synthetic property dataset");
  int syn_property = 1, syn_samples = 3000;
  std::string syn_out = "synth.csv";
  syn->add_option("--property", syn_property, "1 (Gaussian mixture) or 2 (ellipse)")->check(CLI::IsMember({1, 2}));
  syn->add_option("--samples", syn_samples, "sample count");
  syn->add_option("-o,--out", syn_out, "output CSV");

  // train
  auto* trn = app.add_subcommand("train", "train a CatVAE on a CSV");
  std::string trn_data, trn_out = "model.json";
  trn->add_option("--data", trn_data, "training CSV")->required();
  trn->add_option("-o,--out", trn_out, "model JSON");

  // inspect-states
  auto* ins = app.add_subcommand("inspect-states", "state occupancy and decoded profiles");
  std::string ins_model, ins_data, ins_out;
  ins->add_option("--model", ins_model, "model JSON")->required();
  ins->add_option("--data", ins_data, "CSV to discretize")->required();
  ins->add_option("-o,--out", ins_out, "symbol sequence CSV");

  // mine-rules
  auto* mine = app.add_subcommand("mine-rules", "mine state -> residual rules");
  std::string mine_symbols, mine_model, mine_data, mine_out = "partial_rules.json";
  mine->add_option("--symbols", mine_symbols, "symbol sequence CSV");
  mine->add_option("--model", mine_model, "model JSON (with --data)");
  mine->add_option("--data", mine_data, "CSV (with --model)");
  mine->add_option("-o,--out", mine_out, "partial rules JSON");

  // complete-rules
  auto* comp = app.add_subcommand("complete-rules", "attach health components to mined rules");
  std::string comp_partial, comp_map, comp_aliases, comp_out = "rules.json";
  comp->add_option("--partial", comp_partial, "partial rules JSON")->required();
  comp->add_option("--health-map", comp_map, "health map JSON")->required();
  comp->add_option("--aliases", comp_aliases, "state aliases JSON");
  comp->add_option("-o,--out", comp_out, "rule base JSON");

  // pre2di
  auto* pre = app.add_subcommand("pre2di", "learn a rule base from normal data");
  std::string pre_data, pre_map, pre_dir;
  pre->add_option("--data", pre_data, "normal-run CSV");
  pre->add_option("--health-map", pre_map, "health map JSON");
  pre->add_option("--out-dir", pre_dir, "output directory");

  // discret2di
  auto* dd = app.add_subcommand("discret2di", "diagnose a run against a rule base");
  std::string dd_model, dd_rules, dd_data, dd_dir;
  dd->add_option("--model", dd_model, "model JSON");
  dd->add_option("--rules", dd_rules, "rule base JSON");
  dd->add_option("--data", dd_data, "CSV to diagnose");
  dd->add_option("--out-dir", dd_dir, "output directory");

  // eval-table3
  auto* ev = app.add_subcommand("eval-table3", "fault detection table over seeds");
  std::vector<std::uint64_t> ev_seeds = {0, 1, 2, 3, 4};
  std::string ev_dir;
  ev->add_option("--seeds", ev_seeds, "seeds")->delimiter(',');
  ev->add_option("--out-dir", ev_dir, "output directory");

  // compare-gmm
  auto* cg = app.add_subcommand("compare-gmm", "CatVAE vs GMM discretization report");
  std::string cg_dir;
  cg->add_option("--out-dir", cg_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    d2d::PipelineConfig cfg = common.load();
    auto out_dir = [&](const std::string& flag) { return fs::path(flag.empty() ? cfg.output_dir : flag); };

    if (*sim) {
      d2d::tank::TankScenario sc;
      if (!sim_scenario.empty()) {
        require_file(sim_scenario, "scenario");
        sc = d2d::tank::scenario_from_json(read_json(sim_scenario));
      } else {
        sc.states = d2d::tank::default_states();
        sc.noise_sigma = cfg.noise_sigma;
        sc.seed = cfg.seed;
        if (!sim_fault.empty()) {
          sc.schedule = d2d::tank::anomaly_sequence(d2d::tank::canonical_fault_name(sim_fault), sim_anom);
        } else {
          sc.schedule = d2d::tank::normal_sequence(sim_cycles);
        }
      }
      if (sim_noise) sc.noise_sigma = *sim_noise;
      if (sim_seed) sc.seed = *sim_seed;
      const d2d::TimeSeries run = d2d::tank::simulate(sc);
      d2d::save_csv(run, sim_out);
      std::cout << "wrote " << run.rows() << " rows to " << sim_out << "\n";
    } else if (*syn) {
      const d2d::TimeSeries data = syn_property == 1 ? d2d::synth::generate_property1(syn_samples, cfg.seed)
                                                     : d2d::synth::generate_property2(syn_samples, cfg.seed);
      d2d::save_csv(data, syn_out);
      std::cout << "wrote " << data.rows() << " rows to " << syn_out << "\n";
    } else if (*trn) {
      require_file(trn_data, "data");
      const d2d::TimeSeries data = d2d::load_csv(trn_data);
      d2d::CatVaeConfig vae = cfg.catvae;
      vae.seed = cfg.seed;
      const auto split = d2d::split_train_val(data, cfg.train_fraction, d2d::derive_seed(cfg.seed, 0));
      auto progress = common.progress();
      auto result = d2d::train_catvae(vae, split.train, split.validation, [&](int e, double tl, double vl) {
        if (progress && (e + 1) % 25 == 0) {
          progress("epoch " + std::to_string(e + 1) + " train " + std::to_string(tl) + " val " + std::to_string(vl));
        }
      });
      json doc = model_document(result.model, cfg);
      doc["metadata"]["best_epoch"] = result.history.best_epoch;
      doc["metadata"]["epochs_run"] = result.history.epochs_run;
      write_json(trn_out, doc);
      std::cout << "best epoch " << result.history.best_epoch + 1 << " of " << result.history.epochs_run
                << ", validation loss " << result.history.best_val_loss << "\n";
    } else if (*ins) {
      const auto model = load_model(ins_model);
      require_file(ins_data, "data");
      const d2d::TimeSeries data = d2d::load_csv(ins_data);
      const auto seq = d2d::discretize_run(model, data, d2d::ResidualDiscretizer(cfg.likelihood_threshold));
      std::map<int, std::vector<std::string>> aliases;
      bool tank = true;
      for (const auto& c : d2d::tank::kActuationChannels) tank = tank && data.channel_index(c).has_value();
      if (tank) {
        std::map<std::string, d2d::tank::Actuation> modes;
        for (const auto& [n, a] : d2d::tank::default_states()) {
          if (n.find("_faulty") == std::string::npos) modes.emplace(n, a);
        }
        aliases = d2d::state_aliases(seq, d2d::tank_mode_labels(data, modes), cfg.alias_min_share);
      }
      std::cout << state_inventory(model, seq, aliases);
      if (!ins_out.empty()) d2d::save_symbol_sequence(seq, ins_out);
    } else if (*mine) {
      d2d::SymbolSequence seq;
      if (!mine_symbols.empty()) {
        require_file(mine_symbols, "symbols");
        seq = d2d::load_symbol_sequence(mine_symbols);
      } else {
        const auto model = load_model(mine_model);
        require_file(mine_data, "data");
        seq = d2d::discretize_run(model, d2d::load_csv(mine_data), d2d::ResidualDiscretizer(cfg.likelihood_threshold));
      }
      const auto rules = d2d::mine_rules(seq, cfg.min_support, {cfg.min_confidence, true});
      write_json(mine_out, d2d::to_json(rules));
      std::cout << "mined " << rules.size() << " rules\n";
    } else if (*comp) {
      require_file(comp_partial, "partial rules");
      require_file(comp_map, "health map");
      const auto partial = d2d::candidate_rules_from_json(read_json(comp_partial));
      const auto map = d2d::load_health_map(comp_map);
      map.validate();
      std::map<int, std::vector<std::string>> aliases;
      if (!comp_aliases.empty()) {
        require_file(comp_aliases, "aliases");
        aliases = aliases_from_json(read_json(comp_aliases));
      }
      auto rules = d2d::complete_rules(partial, map.resolve(aliases), map.comps);
      rules.metadata = artifact_metadata(cfg);
      write_json(comp_out, d2d::to_json(rules));
      std::cout << rule_table(rules);
    } else if (*pre) {
      const std::string data_path = pre_data.empty() ? cfg.data_path : pre_data;
      const std::string map_path = pre_map.empty() ? cfg.health_map_path : pre_map;
      require_file(data_path, "data");
      require_file(map_path, "health map");
      const d2d::TimeSeries normal = d2d::load_csv(data_path);
      const auto map = d2d::load_health_map(map_path);
      const auto result = d2d::pre2di(cfg, normal, map, common.progress());
      const fs::path dir = out_dir(pre_dir);
      fs::create_directories(dir);
      json model_doc = model_document(result.model, cfg);
      model_doc["metadata"]["best_epoch"] = result.history.best_epoch;
      model_doc["metadata"]["epochs_run"] = result.history.epochs_run;
      write_json(dir / "model.json", model_doc);
      d2d::save_symbol_sequence(result.sequence, dir / "symbols.csv");
      write_json(dir / "partial_rules.json", d2d::to_json(result.candidates));
      write_json(dir / "aliases.json", aliases_json(result.aliases));
      write_json(dir / "rules.json", d2d::to_json(result.rules));
      std::cout << state_inventory(result.model, result.sequence, result.aliases) << "\n"
                << rule_table(result.rules);
    } else if (*dd) {
      const fs::path dir = out_dir(dd_dir);
      const std::string model_path = dd_model.empty() ? cfg.model_path : dd_model;
      const std::string rules_path = dd_rules.empty() ? cfg.rules_path : dd_rules;
      const std::string data_path = dd_data.empty() ? cfg.data_path : dd_data;
      const auto model = load_model(model_path);
      require_file(rules_path, "rule base");
      const auto rules = d2d::rule_base_from_json(read_json(rules_path));
      require_file(data_path, "data");
      const d2d::TimeSeries data = d2d::load_csv(data_path);
      const auto result = d2d::discret2di(model, rules, data, cfg);
      json meta = artifact_metadata(cfg);
      if (rules.metadata.contains("model_hash")) meta["model_hash"] = rules.metadata["model_hash"];
      meta["rows"] = data.rows();
      fs::create_directories(dir);
      write_json(dir / "diagnosis.json", d2d::diagnosis_report_json(result.diagnoses, meta));
      const std::string summary = diagnosis_summary(result.diagnoses, data.rows());
      write_text(dir / "summary.txt", summary);
      d2d::save_symbol_sequence(result.sequence, dir / "symbols.csv");
      write_text(dir / "timeline.svg", d2d::svg::timeline(result.sequence, cfg.likelihood_threshold, result.diagnoses));
      std::cout << summary;
    } else if (*ev) {
      const auto result = d2d::eval_table3(cfg, ev_seeds, common.progress());
      const fs::path dir = out_dir(ev_dir);
      write_text(dir / "table3.md", result.markdown());
      write_text(dir / "table3.csv", result.csv());
      std::cout << result.markdown();
    } else if (*cg) {
      const auto result = d2d::compare_gmm(cfg, common.progress());
      const fs::path dir = out_dir(cg_dir);
      write_text(dir / "compare_gmm.md", result.markdown());
      for (const auto& [name, svg] : result.plots) write_text(dir / name, svg);
      std::cout << result.markdown();
    }
  } catch (const d2d::Error& e) {
    std::cerr << "error: " << d2d::to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
