#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "discret2di/catvae.hpp"
#include "discret2di/gmm.hpp"
#include "discret2di/time_series.hpp"

namespace d2d {

enum class StateSource { kCatVae, kGmm };

struct ObservationalState {
  int id = 0;
  StateSource source = StateSource::kCatVae;
  std::optional<std::string> alias;  // presentation only

  bool operator==(const ObservationalState& o) const { return id == o.id && source == o.source; }
};

struct ResidualState {
  bool ok = true;
  bool operator==(const ResidualState&) const = default;
};

struct SymbolRecord {
  double timestamp = 0.0;
  ObservationalState state;
  ResidualState residual;
  double log_likelihood = 0.0;
};

using SymbolSequence = std::vector<SymbolRecord>;

inline constexpr double kDefaultLikelihoodThreshold = -50.0;

// Binary residual discretization: ok iff log-likelihood >= threshold.
class ResidualDiscretizer {
 public:
  ResidualDiscretizer() = default;
  explicit ResidualDiscretizer(double threshold) { set_threshold(threshold); }

  void set_threshold(double threshold);
  double threshold() const { return threshold_; }
  ResidualState operator()(double log_likelihood) const { return {log_likelihood >= threshold_}; }

 private:
  double threshold_ = kDefaultLikelihoodThreshold;
};

// One record per row of `data`; the model picks its channels by name.
SymbolSequence discretize_run(const CatVaeModel& model, const TimeSeries& data,
                              const ResidualDiscretizer& residuals = {});
SymbolSequence discretize_run(const GmmModel& model, const TimeSeries& data,
                              const ResidualDiscretizer& residuals = {});

std::map<int, std::size_t> state_histogram(const SymbolSequence& seq);

// CSV columns: timestamp,state_id,residual_ok,log_likelihood
std::string symbol_sequence_to_csv(const SymbolSequence& seq);
void save_symbol_sequence(const SymbolSequence& seq, const std::filesystem::path& path);
SymbolSequence load_symbol_sequence(const std::filesystem::path& path,
                                    StateSource source = StateSource::kCatVae);

}  // namespace d2d
