#pragma once

// Text and JSON formats: sample streams (one integer per line), Pmf and
// EstimateResult JSON, coverage JSON and the trial CSV.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftest/adaptive.hpp"
#include "driftest/dist.hpp"
#include "driftest/harness.hpp"
#include "driftest/windows.hpp"

namespace driftest {

using json = nlohmann::json;

/// Shortest decimal that round-trips.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Sample stream text format

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  /// 1-based line number, 0 when the error is not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One nonnegative decimal integer per line, oldest first. Blank lines and
/// lines starting with '#' are skipped; surrounding whitespace is ignored.
inline SampleStream read_stream(std::istream& in) {
  std::vector<Symbol> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    const char* first = line.data() + b;
    const char* last = line.data() + e + 1;
    Symbol value = 0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
      throw ParseError("line " + std::to_string(line_no) + ": expected a nonnegative integer, got '" +
                           std::string(first, last) + "'",
                       line_no);
    }
    samples.push_back(value);
  }
  if (samples.empty()) throw ParseError("empty sample stream", 0);
  return SampleStream(std::move(samples));
}

inline SampleStream read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return read_stream(in);
}

inline void write_stream(std::ostream& out, const SampleStream& stream) {
  for (Symbol s : stream.samples()) out << s << '\n';
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const Pmf& p) {
  json atoms = json::array();
  for (const Atom& a : p.atoms()) atoms.push_back({{"symbol", a.symbol}, {"prob", a.prob}});
  return {{"atoms", std::move(atoms)}};
}

inline Pmf pmf_from_json(const json& j) {
  std::vector<Atom> atoms;
  for (const auto& a : j.at("atoms")) {
    atoms.push_back({a.at("symbol").get<Symbol>(), a.at("prob").get<double>()});
  }
  return Pmf(std::move(atoms));
}

inline json to_json(const EstimateResult& r) {
  json accepted = json::array();
  for (const auto& c : r.accepted) {
    accepted.push_back({{"j", c.j}, {"r", c.r}, {"phi", c.phi}, {"xi", c.xi}});
  }
  json comparisons = json::array();
  for (const auto& c : r.comparisons) {
    comparisons.push_back({{"l", c.l}, {"j", c.j}, {"tv", c.tv}, {"threshold", c.threshold}});
  }
  json stop = r.stop ? json{{"kind", "violation"}, {"j", r.stop->j}, {"l", r.stop->l}}
                     : json{{"kind", "exhausted"}};
  return {{"chosen_window", r.chosen_window},
          {"estimate", to_json(r.estimate)},
          {"accepted", std::move(accepted)},
          {"stop", std::move(stop)},
          {"comparisons", std::move(comparisons)}};
}

inline EstimateResult estimate_from_json(const json& j) {
  EstimateResult r;
  r.chosen_window = j.at("chosen_window").get<std::uint64_t>();
  r.estimate = pmf_from_json(j.at("estimate"));
  for (const auto& c : j.at("accepted")) {
    r.accepted.push_back({c.at("j").get<unsigned>(), c.at("r").get<std::uint64_t>(),
                          c.at("phi").get<double>(), c.at("xi").get<double>()});
  }
  const auto& stop = j.at("stop");
  if (stop.at("kind") == "violation") {
    r.stop = Violation{stop.at("j").get<unsigned>(), stop.at("l").get<unsigned>()};
  } else if (stop.at("kind") != "exhausted") {
    throw std::invalid_argument("unknown stop kind");
  }
  for (const auto& c : j.at("comparisons")) {
    r.comparisons.push_back({c.at("l").get<unsigned>(), c.at("j").get<unsigned>(),
                             c.at("tv").get<double>(), c.at("threshold").get<double>()});
  }
  return r;
}

inline json to_json(const CoverageReport& c, double delta) {
  json breakdown = json::array();
  for (const auto& b : c.breakdown) {
    breakdown.push_back({{"inequality", b.name}, {"violations", b.violations}});
  }
  return {{"suite", c.name},
          {"trials", c.trials},
          {"violations", c.violations},
          {"empirical_coverage", c.empirical_coverage},
          {"delta", delta},
          {"required_coverage", c.required(delta)},
          {"pass", c.passes(delta)},
          {"breakdown", std::move(breakdown)}};
}

inline json to_json(const PropertyReport& p) {
  return {{"property", p.name},
          {"checks", p.checks},
          {"violations", p.violations},
          {"max_excess", p.max_excess},
          {"pass", p.passes()}};
}

// ---------------------------------------------------------------------------
// Trial CSV

inline constexpr const char* kTrialCsvHeader =
    "trial,scenario,T,delta,chosen_r,err_adaptive,err_oracle,r_oracle,err_full,err_last,q_star,"
    "r_star,prop3_held";

inline void write_trials_csv(std::ostream& out, const DriftScenario& s, double delta,
                             const std::vector<TrialMetrics>& metrics) {
  out << kTrialCsvHeader << '\n';
  for (const auto& m : metrics) {
    out << m.trial << ',' << s.name() << ',' << s.T << ',' << format_real(delta) << ','
        << m.chosen_r << ',' << format_real(m.err_adaptive) << ',' << format_real(m.err_oracle)
        << ',' << m.r_oracle << ',' << format_real(m.err_full_window) << ','
        << format_real(m.err_last_sample) << ',' << format_real(m.q_star) << ',' << m.r_star << ','
        << (m.prop3_held ? 1 : 0) << '\n';
  }
}

/// log10(step_delta) and log10(mean error) per positive drift.
inline void write_scaling_data(std::ostream& out, const ScalingResult& r) {
  out << "# log10_delta log10_error\n";
  for (const auto& p : r.points) {
    if (p.step_delta <= 0.0) continue;
    out << format_real(std::log10(p.step_delta)) << ' ' << format_real(std::log10(p.mean_error))
        << '\n';
  }
}

}  // namespace driftest
