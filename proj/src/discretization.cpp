#include "discret2di/discretization.hpp"

#include <cmath>
#include <fstream>

#include "discret2di/error.hpp"

namespace d2d {

void ResidualDiscretizer::set_threshold(double threshold) {
  if (!std::isfinite(threshold)) throw Error(ErrorKind::kInvalidArgument, "likelihood threshold must be finite");
  threshold_ = threshold;
}

SymbolSequence discretize_run(const CatVaeModel& model, const TimeSeries& data,
                              const ResidualDiscretizer& residuals) {
  if (data.empty()) return {};
  const TimeSeries sel = data.select_channels(model.config.channels);
  const auto latents = infer_batch(model, sel.values());
  SymbolSequence seq;
  seq.reserve(latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    seq.push_back({data.timestamps()[i],
                   {latents[i].category, StateSource::kCatVae, std::nullopt},
                   residuals(latents[i].log_likelihood),
                   latents[i].log_likelihood});
  }
  return seq;
}

SymbolSequence discretize_run(const GmmModel& model, const TimeSeries& data,
                              const ResidualDiscretizer& residuals) {
  if (data.empty()) return {};
  const TimeSeries sel = data.select_channels(model.channels);
  const auto assigned = gmm_assign_batch(model, sel.values());
  SymbolSequence seq;
  seq.reserve(assigned.size());
  for (std::size_t i = 0; i < assigned.size(); ++i) {
    seq.push_back({data.timestamps()[i],
                   {assigned[i].component, StateSource::kGmm, std::nullopt},
                   residuals(assigned[i].log_likelihood),
                   assigned[i].log_likelihood});
  }
  return seq;
}

std::map<int, std::size_t> state_histogram(const SymbolSequence& seq) {
  std::map<int, std::size_t> counts;
  for (const auto& r : seq) ++counts[r.state.id];
  return counts;
}

std::string symbol_sequence_to_csv(const SymbolSequence& seq) {
  std::string out = "timestamp,state_id,residual_ok,log_likelihood\n";
  for (const auto& r : seq) {
    out += format_double(r.timestamp) + "," + std::to_string(r.state.id) + "," +
           (r.residual.ok ? "1" : "0") + "," + format_double(r.log_likelihood) + "\n";
  }
  return out;
}

void save_symbol_sequence(const SymbolSequence& seq, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  file << symbol_sequence_to_csv(seq);
}

SymbolSequence load_symbol_sequence(const std::filesystem::path& path, StateSource source) {
  const TimeSeries raw = load_csv(path, {"state_id", "residual_ok", "log_likelihood"});
  SymbolSequence seq;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const auto row = raw.values().row(static_cast<Eigen::Index>(i));
    seq.push_back({raw.timestamps()[i],
                   {static_cast<int>(row(0)), source, std::nullopt},
                   {row(1) != 0.0},
                   row(2)});
  }
  return seq;
}

}  // namespace d2d
