#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "driftest/io.hpp"

using namespace driftest;

namespace {

SampleStream parse(const std::string& text) {
  std::istringstream in(text);
  return read_stream(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(ReadStream, SkipsCommentsAndBlankLines) {
  const SampleStream s = parse("# header\n3\n\n  4 \n# note\n5\r\n");
  EXPECT_EQ(s, SampleStream({3, 4, 5}));
}

TEST(ReadStream, ReportsOffendingLine) {
  EXPECT_EQ(error_line("1\n2\n-3\n"), 3u);
  EXPECT_EQ(error_line("1\nx\n"), 2u);
  EXPECT_EQ(error_line("1 2\n"), 1u);
  EXPECT_EQ(error_line("99999999999999999999999\n"), 1u);
  try {
    parse("7\n-1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ReadStream, EmptyInput) {
  for (const char* text : {"", "\n\n", "# only a comment\n"}) {
    try {
      parse(text);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_STREQ(e.what(), "empty sample stream");
    }
  }
}

TEST(ReadStream, RoundTripsWriteStream) {
  const SampleStream s({0, 18446744073709551615ull, 12, 12});
  std::ostringstream out;
  write_stream(out, s);
  EXPECT_EQ(parse(out.str()), s);
}

TEST(FormatReal, ShortestRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(1.0), "1");
  for (double v : {1.0 / 3.0, 2.0e-300, 0.8535533905932737}) {
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
}

TEST(Json, PmfRoundTrip) {
  CounterRng rng(12);
  for (int i = 0; i < 500; ++i) {
    const Pmf p = random_pmf(rng);
    EXPECT_EQ(pmf_from_json(json::parse(to_json(p).dump())), p);
  }
}

TEST(Json, EstimateRoundTrip) {
  DriftScenario s;
  s.kind = ScenarioKind::abrupt;
  s.T = 1024;
  s.change_point = 100;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const EstimateResult est = adaptive_estimate(sample_stream(s, trial), 0.05);
    const json j = to_json(est);
    EXPECT_EQ(estimate_from_json(json::parse(j.dump())), est);
    EXPECT_EQ(j.at("chosen_window").get<std::uint64_t>(), est.chosen_window);
    EXPECT_EQ(j.at("stop").at("kind"), est.exhausted() ? "exhausted" : "violation");
  }
  std::vector<Symbol> samples(1 << 15, 1);
  std::fill(samples.begin() + (1 << 14), samples.end(), 2);
  const EstimateResult stopped = adaptive_estimate(SampleStream(samples), 0.05);
  const json j = to_json(stopped);
  EXPECT_EQ(j.at("stop").at("kind"), "violation");
  EXPECT_EQ(j.at("stop").at("j"), 15);
  EXPECT_EQ(estimate_from_json(j), stopped);
}

TEST(Json, RejectsUnknownStopKind) {
  json j = to_json(adaptive_estimate(SampleStream({1}), 0.05));
  j["stop"]["kind"] = "tired";
  EXPECT_THROW(estimate_from_json(j), std::invalid_argument);
}

TEST(Json, CoverageReportFields) {
  CoverageReport c;
  c.name = "prop3";
  c.trials = 100;
  c.violations = 4;
  c.empirical_coverage = 0.96;
  c.breakdown = {{"a", 3}, {"b", 2}};
  const json j = to_json(c, 0.1);
  EXPECT_EQ(j.at("suite"), "prop3");
  EXPECT_EQ(j.at("violations"), 4);
  EXPECT_EQ(j.at("pass"), true);
  EXPECT_EQ(j.at("breakdown").size(), 2u);
  EXPECT_DOUBLE_EQ(j.at("required_coverage").get<double>(), c.required(0.1));
}

TEST(TrialCsv, HeaderAndRows) {
  DriftScenario s;
  s.T = 256;
  const auto metrics = run_trials(s, 3, 0.05);
  std::ostringstream out;
  write_trials_csv(out, s, 0.05, metrics);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kTrialCsvHeader);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12);
    EXPECT_EQ(line.rfind(std::to_string(rows - 1) + ",iid,256,0.05,", 0), 0u);
  }
  EXPECT_EQ(rows, 3u);
}

TEST(ScalingData, SkipsZeroDrift) {
  ScalingResult r;
  r.points = {{0.0, 0.5, 1.0}, {1e-3, 0.1, 1.0}, {1e-2, 0.2, 1.0}};
  std::ostringstream out;
  write_scaling_data(out, r);
  EXPECT_EQ(out.str(), "# log10_delta log10_error\n-3 -1\n-2 " + format_real(std::log10(0.2)) + "\n");
}
