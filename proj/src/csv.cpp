#include "kpivae/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string_view>
#include <system_error>

namespace kpivae {

namespace {

[[noreturn]] void fail_line(const std::string& path, std::size_t line,
                            const std::string& what) {
  throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::int64_t parse_int(std::string_view f, const std::string& path,
                       std::size_t line, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    fail_line(path, line, std::string("bad ") + what + " field '" +
                              std::string(f) + "'");
  }
  return v;
}

double parse_value(std::string_view f, const std::string& path,
                   std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    fail_line(path, line, "bad value field '" + std::string(f) + "'");
  }
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("double formatting failed");
  return std::string(buf, ptr);
}

RawSeries load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++lineno;
  line = strip_cr(line);
  const bool has_label = line == "timestamp,value,label";
  if (!has_label && line != "timestamp,value") {
    fail_line(path, lineno, "expected header 'timestamp,value,label'");
  }

  std::vector<std::int64_t> timestamps;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> missing;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::size_t expected = has_label ? 3 : 2;
    if (fields.size() != expected) {
      fail_line(path, lineno, "expected " + std::to_string(expected) +
                                  " fields, got " +
                                  std::to_string(fields.size()));
    }
    const std::int64_t ts = parse_int(fields[0], path, lineno, "timestamp");
    if (!timestamps.empty() && ts <= timestamps.back()) {
      fail_line(path, lineno, "timestamps must be strictly increasing");
    }
    bool is_missing = fields[1].empty();
    double value = std::numeric_limits<double>::quiet_NaN();
    if (!is_missing) {
      value = parse_value(fields[1], path, lineno);
      if (std::isnan(value)) is_missing = true;
    }
    std::uint8_t label = 0;
    if (has_label) {
      const std::int64_t l = parse_int(fields[2], path, lineno, "label");
      if (l != 0 && l != 1) fail_line(path, lineno, "label must be 0 or 1");
      label = static_cast<std::uint8_t>(l);
    }
    timestamps.push_back(ts);
    values.push_back(value);
    labels.push_back(label);
    missing.push_back(is_missing ? 1 : 0);
  }
  if (timestamps.empty()) throw DataError(path + ": no data rows");

  std::int64_t interval = 0;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    interval = std::gcd(interval, timestamps[i] - timestamps[i - 1]);
  }
  if (interval == 0) interval = 1;  // single point

  RawSeries raw;
  raw.start_timestamp = timestamps[0];
  raw.interval = interval;
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    if (i > 0) {
      const std::int64_t gap = (timestamps[i] - timestamps[i - 1]) / interval;
      for (std::int64_t g = 1; g < gap; ++g) {
        raw.values.push_back(std::numeric_limits<double>::quiet_NaN());
        raw.labels.push_back(0);
        raw.missing.push_back(1);
      }
    }
    raw.values.push_back(values[i]);
    raw.labels.push_back(labels[i]);
    raw.missing.push_back(missing[i]);
  }
  return raw;
}

void save_series(const std::string& path, const RawSeries& raw) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "timestamp,value,label\n";
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::int64_t ts =
        raw.start_timestamp + static_cast<std::int64_t>(i) * raw.interval;
    out << ts << ',';
    if (!raw.missing[i]) out << format_double(raw.values[i]);
    out << ',' << static_cast<int>(raw.labels[i]) << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

void save_scores(const std::string& path, const ScoreSeries& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "timestamp,score\n";
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    const std::int64_t ts =
        s.start_timestamp + static_cast<std::int64_t>(i) * s.interval;
    out << ts << ',';
    if (s.scored[i]) out << format_double(s.scores[i]);
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

ScoreSeries load_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++lineno;
  if (strip_cr(line) != "timestamp,score") {
    fail_line(path, lineno, "expected header 'timestamp,score'");
  }
  std::vector<std::int64_t> timestamps;
  ScoreSeries s;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) fail_line(path, lineno, "expected 2 fields");
    const std::int64_t ts = parse_int(fields[0], path, lineno, "timestamp");
    if (!timestamps.empty() && ts <= timestamps.back()) {
      fail_line(path, lineno, "timestamps must be strictly increasing");
    }
    timestamps.push_back(ts);
    if (fields[1].empty()) {
      s.scores.push_back(0.0);
      s.scored.push_back(0);
    } else {
      s.scores.push_back(parse_value(fields[1], path, lineno));
      s.scored.push_back(1);
    }
  }
  if (timestamps.empty()) throw DataError(path + ": no data rows");
  s.start_timestamp = timestamps[0];
  s.interval = timestamps.size() > 1 ? timestamps[1] - timestamps[0] : 1;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] - timestamps[i - 1] != s.interval) {
      fail_line(path, i + 2, "score rows must be evenly spaced");
    }
  }
  return s;
}

}  // namespace kpivae
