#include "kpivae/model_io.hpp"

#include "kpivae/csv.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string_view>

namespace kpivae {

namespace {

constexpr std::string_view kMagic = "kpivae-model v1";

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, 16);
  (void)ec;
  return std::string(buf, ptr);
}

class LineReader {
public:
  LineReader(const std::string& text, std::string origin)
      : text_(text), origin_(std::move(origin)) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const std::size_t nl = text_.find('\n', pos_);
    const std::size_t end = nl == std::string::npos ? text_.size() : nl;
    line = std::string_view(text_).substr(pos_, end - pos_);
    pos_ = end + 1;
    ++lineno_;
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(origin_ + ":" + std::to_string(lineno_) + ": " + what);
  }

  std::string_view require(const std::string& what) {
    std::string_view line;
    if (!next(line)) fail("unexpected end of model file, expected " + what);
    return line;
  }

private:
  const std::string& text_;
  std::string origin_;
  std::size_t pos_ = 0;
  std::size_t lineno_ = 0;
};

double parse_double_or(LineReader& r, std::string_view f,
                       const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    r.fail("bad " + what + " '" + std::string(f) + "'");
  }
  return v;
}

std::int64_t parse_int_or(LineReader& r, std::string_view f,
                          const std::string& what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    r.fail("bad " + what + " '" + std::string(f) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// "key value" meta line; value parsed by the caller.
std::string_view meta_value(LineReader& r, std::string_view key) {
  const std::string_view line = r.require(std::string(key));
  const auto fields = split_ws(line);
  if (fields.size() != 2 || fields[0] != key) {
    r.fail("expected '" + std::string(key) + " <value>'");
  }
  return fields[1];
}

}  // namespace

std::string serialize_model(const ModelParams& p) {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "window_size " << p.window_size << '\n';
  out << "latent_dim " << p.latent_dim << '\n';
  out << "hidden_units " << p.hidden_units << '\n';
  out << "epsilon " << format_double(p.epsilon) << '\n';
  out << "data_mean " << format_double(p.data_mean) << '\n';
  out << "data_std " << format_double(p.data_std) << '\n';
  for (const TensorView& v : tensor_views(p.w)) {
    out << "tensor " << v.name << ' ' << v.rows << ' ' << v.cols << '\n';
    // One line per column, in storage order.
    for (Index c = 0; c < v.cols; ++c) {
      for (Index r = 0; r < v.rows; ++r) {
        if (r > 0) out << ' ';
        out << format_double(v.data[c * v.rows + r]);
      }
      out << '\n';
    }
  }
  std::string body = out.str();
  body += "checksum " + to_hex(fnv1a64(body)) + '\n';
  return body;
}

ModelParams parse_model(const std::string& text, const std::string& origin) {
  // Verify the checksum over everything before its own line.
  const std::size_t tail = text.rfind("checksum ");
  if (tail == std::string::npos || (tail != 0 && text[tail - 1] != '\n')) {
    throw DataError(origin + ": missing checksum line");
  }
  const std::string_view stated =
      std::string_view(text).substr(tail + 9,
                                    text.find('\n', tail) - tail - 9);
  std::uint64_t stated_value = 0;
  const auto [ptr, ec] = std::from_chars(
      stated.data(), stated.data() + stated.size(), stated_value, 16);
  if (ec != std::errc() || ptr != stated.data() + stated.size()) {
    throw DataError(origin + ": malformed checksum");
  }
  if (fnv1a64(std::string_view(text).substr(0, tail)) != stated_value) {
    throw DataError(origin + ": checksum mismatch, file corrupted");
  }

  LineReader r(text, origin);
  std::string_view line = r.require("format line");
  if (line != kMagic) {
    r.fail("unsupported model format '" + std::string(line) + "'");
  }

  ModelParams p;
  p.window_size = parse_int_or(r, meta_value(r, "window_size"), "window_size");
  p.latent_dim = parse_int_or(r, meta_value(r, "latent_dim"), "latent_dim");
  p.hidden_units =
      parse_int_or(r, meta_value(r, "hidden_units"), "hidden_units");
  p.epsilon = parse_double_or(r, meta_value(r, "epsilon"), "epsilon");
  p.data_mean = parse_double_or(r, meta_value(r, "data_mean"), "data_mean");
  p.data_std = parse_double_or(r, meta_value(r, "data_std"), "data_std");
  if (p.window_size < 1 || p.latent_dim < 1 || p.hidden_units < 1) {
    r.fail("model dimensions must be positive");
  }

  // Allocate via the canonical registry, then fill tensor by tensor.
  Rng dummy(0);
  ModelParams shaped = init_params(p.window_size, p.latent_dim,
                                   p.hidden_units, p.epsilon, dummy);
  p.w = std::move(shaped.w);
  for (const TensorView& v : tensor_views(p.w)) {
    const auto header = split_ws(r.require("tensor header"));
    if (header.size() != 4 || header[0] != "tensor" || header[1] != v.name) {
      r.fail(std::string("expected tensor ") + v.name);
    }
    const std::int64_t rows = parse_int_or(r, header[2], "row count");
    const std::int64_t cols = parse_int_or(r, header[3], "column count");
    if (rows != v.rows || cols != v.cols) {
      r.fail(std::string("tensor ") + v.name + " has shape " +
             std::to_string(rows) + "x" + std::to_string(cols) +
             ", expected " + std::to_string(v.rows) + "x" +
             std::to_string(v.cols));
    }
    for (Index c = 0; c < v.cols; ++c) {
      const auto fields = split_ws(r.require(std::string(v.name) + " data"));
      if (static_cast<Index>(fields.size()) != v.rows) {
        r.fail(std::string("tensor ") + v.name + " row has " +
               std::to_string(fields.size()) + " values, expected " +
               std::to_string(v.rows));
      }
      for (Index row = 0; row < v.rows; ++row) {
        v.data[c * v.rows + row] =
            parse_double_or(r, fields[static_cast<std::size_t>(row)],
                            std::string(v.name) + " value");
      }
    }
  }
  return p;
}

void save_model(const std::string& path, const ModelParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const std::string body = serialize_model(p);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw DataError("write failed for " + path);
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), path);
}

}  // namespace kpivae
