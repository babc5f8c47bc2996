#include "discret2di/time_series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "discret2di/error.hpp"

namespace d2d {

TimeSeries::TimeSeries(std::vector<double> timestamps,
                       std::vector<std::string> channels,
                       Eigen::MatrixXd values)
    : timestamps_(std::move(timestamps)),
      channels_(std::move(channels)),
      values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != timestamps_.size()) {
    throw Error(ErrorKind::kSchema, "row count " + std::to_string(values_.rows()) +
                                        " differs from timestamp count " +
                                        std::to_string(timestamps_.size()));
  }
  if (static_cast<std::size_t>(values_.cols()) != channels_.size()) {
    throw Error(ErrorKind::kSchema, "column count " + std::to_string(values_.cols()) +
                                        " differs from channel count " +
                                        std::to_string(channels_.size()));
  }
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    if (!(timestamps_[i] > timestamps_[i - 1])) {
      throw Error(ErrorKind::kSchema, "timestamps not strictly increasing at row " +
                                          std::to_string(i));
    }
  }
  if (!values_.allFinite()) {
    throw Error(ErrorKind::kNumeric, "time series contains non-finite values");
  }
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    for (std::size_t j = i + 1; j < channels_.size(); ++j) {
      if (channels_[i] == channels_[j]) {
        throw Error(ErrorKind::kSchema, "duplicate channel '" + channels_[i] + "'");
      }
    }
  }
}

std::optional<std::size_t> TimeSeries::channel_index(const std::string& name) const {
  auto it = std::find(channels_.begin(), channels_.end(), name);
  if (it == channels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - channels_.begin());
}

TimeSeries TimeSeries::select_channels(const std::vector<std::string>& names) const {
  Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto idx = channel_index(names[j]);
    if (!idx) throw Error(ErrorKind::kSchema, "missing channel '" + names[j] + "'");
    out.col(static_cast<Eigen::Index>(j)) = values_.col(static_cast<Eigen::Index>(*idx));
  }
  return TimeSeries(timestamps_, names, std::move(out));
}

TimeSeries TimeSeries::select_rows(const std::vector<std::size_t>& indices) const {
  std::vector<double> ts;
  ts.reserve(indices.size());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), values_.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows()) throw Error(ErrorKind::kInvalidArgument, "row index out of range");
    ts.push_back(timestamps_[indices[i]]);
    out.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(indices[i]));
  }
  return TimeSeries(std::move(ts), channels_, std::move(out));
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw Error(ErrorKind::kInvalidArgument, "bad slice bounds");
  std::vector<double> ts(timestamps_.begin() + static_cast<std::ptrdiff_t>(begin),
                         timestamps_.begin() + static_cast<std::ptrdiff_t>(end));
  Eigen::MatrixXd out = values_.middleRows(static_cast<Eigen::Index>(begin),
                                           static_cast<Eigen::Index>(end - begin));
  return TimeSeries(std::move(ts), channels_, std::move(out));
}

Eigen::VectorXd TimeSeries::column(const std::string& name) const {
  auto idx = channel_index(name);
  if (!idx) throw Error(ErrorKind::kSchema, "missing channel '" + name + "'");
  return values_.col(static_cast<Eigen::Index>(*idx));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& source) {
  std::string t = trim(cell);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorKind::kParse, source + ":" + std::to_string(line_no) +
                                       ": non-numeric cell '" + t + "'");
  }
  return value;
}

}  // namespace

TimeSeries parse_csv(const std::string& text, const std::vector<std::string>& schema,
                     const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kParse, source_name + ": missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  bool has_time = !header.empty() && (header[0] == "time" || header[0] == "timestamp");
  std::vector<std::string> channels(header.begin() + (has_time ? 1 : 0), header.end());
  if (!schema.empty() && channels != schema) {
    throw Error(ErrorKind::kSchema, source_name + ": header does not match expected channels");
  }

  std::vector<double> timestamps;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::kParse, source_name + ":" + std::to_string(line_no) +
                                         ": expected " + std::to_string(header.size()) +
                                         " cells, got " + std::to_string(cells.size()));
    }
    std::size_t offset = 0;
    if (has_time) {
      double t = parse_cell(cells[0], line_no, source_name);
      if (!timestamps.empty() && !(t > timestamps.back())) {
        throw Error(ErrorKind::kSchema, source_name + ":" + std::to_string(line_no) +
                                            ": duplicate or decreasing timestamp");
      }
      timestamps.push_back(t);
      offset = 1;
    } else {
      timestamps.push_back(static_cast<double>(timestamps.size()));
    }
    for (std::size_t j = offset; j < cells.size(); ++j) {
      flat.push_back(parse_cell(cells[j], line_no, source_name));
    }
  }

  const auto n_rows = static_cast<Eigen::Index>(timestamps.size());
  const auto n_cols = static_cast<Eigen::Index>(channels.size());
  Eigen::MatrixXd values(n_rows, n_cols);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      values(i, j) = flat[static_cast<std::size_t>(i * n_cols + j)];
    }
  }
  return TimeSeries(std::move(timestamps), std::move(channels), std::move(values));
}

TimeSeries load_csv(const std::filesystem::path& path, const std::vector<std::string>& schema) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_csv(buffer.str(), schema, path.string());
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string to_csv(const TimeSeries& series) {
  std::string out = "time";
  for (const auto& c : series.channels()) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < series.rows(); ++i) {
    out += format_double(series.timestamps()[i]);
    for (std::size_t j = 0; j < series.cols(); ++j) {
      out += ",";
      out += format_double(series.values()(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(j)));
    }
    out += "\n";
  }
  return out;
}

void save_csv(const TimeSeries& series, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  file << to_csv(series);
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& values) const {
  if (values.cols() != mean.size()) throw Error(ErrorKind::kSchema, "standardizer width mismatch");
  return (values.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& values) const {
  if (values.cols() != mean.size()) throw Error(ErrorKind::kSchema, "standardizer width mismatch");
  Eigen::MatrixXd scaled = values.array().rowwise() * stddev.transpose().array();
  return scaled.rowwise() + mean.transpose();
}

TimeSeries Standardizer::apply(const TimeSeries& data) const {
  if (data.channels() != channels) throw Error(ErrorKind::kSchema, "standardizer channel mismatch");
  return TimeSeries(data.timestamps(), data.channels(), apply(data.values()));
}

TimeSeries Standardizer::invert(const TimeSeries& data) const {
  if (data.channels() != channels) throw Error(ErrorKind::kSchema, "standardizer channel mismatch");
  return TimeSeries(data.timestamps(), data.channels(), invert(data.values()));
}

Standardizer Standardizer::identity(const std::vector<std::string>& channels) {
  const auto n = static_cast<Eigen::Index>(channels.size());
  return Standardizer{channels, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

Standardizer fit_standardizer(const TimeSeries& data) {
  if (data.rows() < 2) throw Error(ErrorKind::kInvalidArgument, "standardizer needs at least 2 rows");
  const auto& v = data.values();
  const double n = static_cast<double>(v.rows());
  Eigen::VectorXd mean = v.colwise().mean().transpose();
  Eigen::VectorXd sd(v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    double ss = (v.col(j).array() - mean(j)).square().sum();
    double s = std::sqrt(ss / (n - 1.0));
    sd(j) = s < 1e-12 ? 1.0 : s;
  }
  return Standardizer{data.channels(), std::move(mean), std::move(sd)};
}

TrainValSplit split_train_val(const TimeSeries& data, double train_fraction, std::uint64_t seed) {
  if (data.rows() < 2) throw Error(ErrorKind::kInvalidArgument, "split needs at least 2 rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(data.rows()) + 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, data.rows() - 1);

  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {data.select_rows(train), data.select_rows(val)};
}

}  // namespace d2d
