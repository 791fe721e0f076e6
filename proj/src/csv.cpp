#include "aosr/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "aosr/error.hpp"

namespace aosr {

std::string format_double(double value) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double parse_real(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    parse_fail(line, "malformed number '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) parse_fail(line, "non-finite number '" + std::string(field) + "'");
  return value;
}

int parse_label(std::string_view field, std::size_t line) {
  int value = 0;
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    parse_fail(line, "label '" + std::string(field) + "' is not an integer");
  }
  if (value < 0) parse_fail(line, "negative label " + std::to_string(value));
  return value;
}

std::string header(Eigen::Index dim, std::string_view tail) {
  std::string h;
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (k) h += ',';
    h += 'f' + std::to_string(k);
  }
  if (!tail.empty()) {
    h += ',';
    h += tail;
  }
  return h;
}

// Parses the shared numeric body. `extra_column` is the name of a trailing
// non-feature column (or empty); the raw field is returned per row.
Eigen::MatrixXd parse_table(std::string_view text, std::string_view extra_column,
                            std::vector<std::pair<std::string_view, std::size_t>>* extra) {
  const auto lines = split_lines(text);
  if (lines.empty()) parse_fail(1, "empty file");
  const auto head = split_commas(lines[0]);
  const std::size_t extra_cols = extra_column.empty() ? 0 : 1;
  if (head.size() < 1 + extra_cols) parse_fail(1, "header has too few columns");
  const auto dim = static_cast<Eigen::Index>(head.size() - extra_cols);
  if (lines[0] != header(dim, extra_column)) {
    parse_fail(1, "header mismatch: expected '" + header(dim, extra_column) + "'");
  }
  if (lines.size() < 2) parse_fail(2, "no data rows");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1), dim);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_commas(lines[i]);
    if (fields.size() != head.size()) {
      parse_fail(i + 1, "expected " + std::to_string(head.size()) + " fields, found " + std::to_string(fields.size()));
    }
    for (Eigen::Index k = 0; k < dim; ++k) {
      values(static_cast<Eigen::Index>(i - 1), k) = parse_real(fields[static_cast<std::size_t>(k)], i + 1);
    }
    if (extra) extra->emplace_back(fields.back(), i + 1);
  }
  return values;
}

}  // namespace

Dataset parse_dataset(std::string_view text, std::optional<int> num_known_classes, LabelPolicy policy) {
  std::vector<std::pair<std::string_view, std::size_t>> raw_labels;
  Eigen::MatrixXd values = parse_table(text, "label", &raw_labels);
  std::vector<int> labels;
  labels.reserve(raw_labels.size());
  int max_label = 0;
  for (const auto& [field, line] : raw_labels) {
    labels.push_back(parse_label(field, line));
    max_label = std::max(max_label, labels.back());
  }
  int classes = 0;
  if (num_known_classes) {
    classes = *num_known_classes;
  } else {
    classes = policy == LabelPolicy::training ? max_label + 1 : std::max(max_label, 1);
  }
  if (classes < 1) throw Error(ErrorKind::parse, "number of known classes must be positive");
  const int limit = policy == LabelPolicy::training ? classes - 1 : classes;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > limit) {
      parse_fail(raw_labels[i].second, "label " + std::to_string(labels[i]) + " out of range {0.." +
                                           std::to_string(limit) + "}");
    }
  }
  return Dataset(std::move(values), std::move(labels), classes);
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<int> num_known_classes, LabelPolicy policy) {
  try {
    return parse_dataset(read_file(path), num_known_classes, policy);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::string format_dataset(const Dataset& dataset) {
  std::string out = header(dataset.dim(), "label") + '\n';
  const auto& x = dataset.features();
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    for (Eigen::Index k = 0; k < dataset.dim(); ++k) {
      out += format_double(x(i, k));
      out += ',';
    }
    out += std::to_string(dataset.labels()[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, format_dataset(dataset));
}

FeatureMatrix parse_features(std::string_view text) { return FeatureMatrix(parse_table(text, "", nullptr)); }

FeatureMatrix load_features(const std::filesystem::path& path) {
  try {
    return parse_features(read_file(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::string format_features(const FeatureMatrix& features) {
  std::string out = header(features.dim(), "") + '\n';
  const auto& x = features.values();
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    for (Eigen::Index k = 0; k < features.dim(); ++k) {
      if (k) out += ',';
      out += format_double(x(i, k));
    }
    out += '\n';
  }
  return out;
}

void save_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  write_file_atomic(path, format_features(features));
}

std::string format_weighted_features(const FeatureMatrix& features, const Eigen::VectorXd& weights) {
  require(weights.size() == features.size(), "weight count does not match sample count");
  std::string out = header(features.dim(), "weight") + '\n';
  const auto& x = features.values();
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    for (Eigen::Index k = 0; k < features.dim(); ++k) {
      out += format_double(x(i, k));
      out += ',';
    }
    out += format_double(weights[i]);
    out += '\n';
  }
  return out;
}

}  // namespace aosr
