#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace d2d {

// Timestamped frames of real-valued channels. One row per timestamp, one
// column per channel. Invariants are checked on construction and the object
// is immutable afterwards.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::vector<double> timestamps, std::vector<std::string> channels,
             Eigen::MatrixXd values);

  std::size_t rows() const { return timestamps_.size(); }
  std::size_t cols() const { return channels_.size(); }
  bool empty() const { return timestamps_.empty(); }

  const std::vector<double>& timestamps() const { return timestamps_; }
  const std::vector<std::string>& channels() const { return channels_; }
  const Eigen::MatrixXd& values() const { return values_; }

  // Index of a channel by name, or nullopt.
  std::optional<std::size_t> channel_index(const std::string& name) const;

  // New series restricted to the named channels, in the given order.
  TimeSeries select_channels(const std::vector<std::string>& names) const;

  // New series with the given rows (indices must be strictly increasing).
  TimeSeries select_rows(const std::vector<std::size_t>& indices) const;

  // Contiguous slice [begin, end).
  TimeSeries slice(std::size_t begin, std::size_t end) const;

  Eigen::VectorXd column(const std::string& name) const;

 private:
  std::vector<double> timestamps_;
  std::vector<std::string> channels_;
  Eigen::MatrixXd values_;
};

// Load a CSV file. `schema` lists the expected value channels in order; when
// empty the header is taken as-is. A first column named "time" or
// "timestamp" supplies timestamps, otherwise rows are numbered 0..N-1.
TimeSeries load_csv(const std::filesystem::path& path,
                    const std::vector<std::string>& schema = {});
TimeSeries parse_csv(const std::string& text,
                     const std::vector<std::string>& schema = {},
                     const std::string& source_name = "<memory>");

// Writes a "time" column followed by every channel, 17 significant digits.
void save_csv(const TimeSeries& series, const std::filesystem::path& path);
std::string to_csv(const TimeSeries& series);

// Shortest round-trippable decimal for a double (17 significant digits).
std::string format_double(double value);

struct Standardizer {
  std::vector<std::string> channels;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  TimeSeries apply(const TimeSeries& data) const;
  TimeSeries invert(const TimeSeries& data) const;

  // Row-wise transforms on bare matrices whose columns follow `channels`.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& values) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& values) const;

  static Standardizer identity(const std::vector<std::string>& channels);
};

// Sample mean and standard deviation (denominator N-1). Channels with a
// standard deviation below 1e-12 get 1 so that they are only mean-shifted.
Standardizer fit_standardizer(const TimeSeries& data);

struct TrainValSplit {
  TimeSeries train;
  TimeSeries validation;
};

// Shuffles row indices with `seed`, takes the first floor(fraction * N) as
// training rows and the rest as validation rows. Each part keeps the original
// temporal order.
TrainValSplit split_train_val(const TimeSeries& data, double train_fraction,
                              std::uint64_t seed);

}  // namespace d2d
