#include "doctest.h"

#include "kpivae/csv.hpp"

#include "test_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace kpivae;
using kpivae::test::temp_path;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_text(const std::string& path) {
  try {
    load_series(path);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("csv") {

TEST_CASE("format_double emits shortest round-trip forms") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(0.1) == "0.1");
  const double v = 0.9189385332046727;
  CHECK(std::stod(format_double(v)) == v);
  const double tiny = 1.2345678912345e-300;
  CHECK(std::stod(format_double(tiny)) == tiny);
}

TEST_CASE("series round-trips through save and load byte for byte") {
  RawSeries r;
  r.start_timestamp = 1700000000;
  r.interval = 60;
  r.values = {1.5, std::nan(""), -0.25, 100.125, 3.0};
  r.labels = {0, 0, 1, 1, 0};
  r.missing = {0, 1, 0, 0, 0};
  const std::string path = temp_path("series_roundtrip.csv");
  save_series(path, r);
  const RawSeries back = load_series(path);
  CHECK(back.start_timestamp == r.start_timestamp);
  CHECK(back.interval == r.interval);
  CHECK(back.labels == r.labels);
  CHECK(back.missing == r.missing);
  REQUIRE(back.values.size() == r.values.size());
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (r.missing[i]) {
      CHECK(std::isnan(back.values[i]));
    } else {
      CHECK(back.values[i] == r.values[i]);
    }
  }
  const std::string first = read_file(path);
  save_series(path, back);
  CHECK(read_file(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("interior timestamp gaps become synthesized missing points") {
  const std::string path = temp_path("series_gaps.csv");
  write_file(path,
             "timestamp,value,label\n"
             "100,1.0,0\n"
             "160,2.0,0\n"
             "340,3.5,1\n");
  const RawSeries r = load_series(path);
  CHECK(r.interval == 60);  // gcd of 60 and 180
  REQUIRE(r.values.size() == 5);
  CHECK(r.missing == std::vector<std::uint8_t>{0, 0, 1, 1, 0});
  CHECK(std::isnan(r.values[2]));
  CHECK(std::isnan(r.values[3]));
  CHECK(r.labels == std::vector<std::uint8_t>{0, 0, 0, 0, 1});
  CHECK(r.values[4] == 3.5);
  std::remove(path.c_str());
}

TEST_CASE("label column is optional and empty values mean missing") {
  const std::string path = temp_path("series_nolabel.csv");
  write_file(path,
             "timestamp,value\n"
             "0,5.5\n"
             "10,\n"
             "20,6.5\n");
  const RawSeries r = load_series(path);
  CHECK(r.interval == 10);
  CHECK(r.missing == std::vector<std::uint8_t>{0, 1, 0});
  CHECK(r.labels == std::vector<std::uint8_t>{0, 0, 0});
  std::remove(path.c_str());
}

TEST_CASE("malformed input errors name the offending line") {
  const std::string path = temp_path("series_bad.csv");

  write_file(path, "time,value\n0,1\n");
  CHECK(error_text(path).find("header") != std::string::npos);

  write_file(path, "timestamp,value,label\n0,1.0,0\n0,2.0,0\n");
  std::string msg = error_text(path);
  CHECK(msg.find(":3") != std::string::npos);
  CHECK(msg.find("increasing") != std::string::npos);

  write_file(path, "timestamp,value,label\n0,1.0,0\n60,abc,0\n");
  CHECK(error_text(path).find(":3") != std::string::npos);

  write_file(path, "timestamp,value,label\n0,1.0,2\n");
  CHECK(error_text(path).find(":2") != std::string::npos);

  write_file(path, "timestamp,value,label\n");
  CHECK_THROWS_AS(load_series(path), DataError);

  CHECK_THROWS_AS(load_series(temp_path("does_not_exist.csv")), DataError);
  std::remove(path.c_str());
}

TEST_CASE("score files round-trip including unscored points") {
  ScoreSeries s;
  s.start_timestamp = 500;
  s.interval = 30;
  s.scores = {0.0, 0.0, 1.25, -3.5, 0.0};
  s.scored = {0, 0, 1, 1, 0};
  const std::string path = temp_path("scores_roundtrip.csv");
  save_scores(path, s);
  const ScoreSeries back = load_scores(path);
  CHECK(back.start_timestamp == 500);
  CHECK(back.interval == 30);
  CHECK(back.scored == s.scored);
  CHECK(back.scores[2] == 1.25);
  CHECK(back.scores[3] == -3.5);
  const std::string first = read_file(path);
  save_scores(path, back);
  CHECK(read_file(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("score files require even spacing") {
  const std::string path = temp_path("scores_bad.csv");
  write_file(path, "timestamp,score\n0,1.0\n10,2.0\n25,3.0\n");
  const auto msg = [&]() -> std::string {
    try {
      load_scores(path);
    } catch (const DataError& e) {
      return e.what();
    }
    return "";
  }();
  CHECK(msg.find(":4") != std::string::npos);
  std::remove(path.c_str());
}

}  // TEST_SUITE
