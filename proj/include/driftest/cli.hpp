#pragma once

// Command-line front end. Exit codes: 0 success, 1 verification failure,
// 2 usage or input error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "driftest/adaptive.hpp"
#include "driftest/driftgen.hpp"
#include "driftest/harness.hpp"
#include "driftest/io.hpp"
#include "driftest/windows.hpp"

namespace driftest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// bench

struct BenchResult {
  std::uint64_t T = 0;
  double ladder_seconds = 0.0;
  double estimate_seconds = 0.0;
  std::uint64_t chosen_window = 0;
  std::size_t peak_support = 0;   // support of the largest window
  std::size_t ladder_atoms = 0;   // sum of supports over the ladder
  double total_seconds() const { return ladder_seconds + estimate_seconds; }
};

/// iid Zipf(1.1) over 2^20 symbols, drawn by inverse CDF.
inline SampleStream bench_stream(std::uint64_t t, std::uint64_t seed) {
  constexpr std::size_t kSymbols = std::size_t{1} << 20;
  std::vector<double> cdf(kSymbols);
  double total = 0.0;
  for (std::size_t i = 0; i < kSymbols; ++i) {
    total += std::pow(static_cast<double>(i + 1), -1.1);
    cdf[i] = total;
  }
  const CounterRng rng(seed, 0xbe9c);
  std::vector<Symbol> samples(t);
  for (std::uint64_t n = 0; n < t; ++n) {
    const double u = rng.uniform_at(n) * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    samples[n] = static_cast<Symbol>(std::min<std::ptrdiff_t>(it - cdf.begin(), kSymbols - 1)) + 1;
  }
  return SampleStream(std::move(samples));
}

inline BenchResult run_bench(const SampleStream& stream, double delta = 0.05) {
  using clock = std::chrono::steady_clock;
  BenchResult out;
  out.T = stream.length();
  const auto t0 = clock::now();
  const DyadicLadder ladder = build_ladder(stream);
  const auto t1 = clock::now();
  const EstimateResult est = adaptive_estimate(ladder, delta);
  const auto t2 = clock::now();
  out.ladder_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.estimate_seconds = std::chrono::duration<double>(t2 - t1).count();
  out.chosen_window = est.chosen_window;
  out.peak_support = ladder[ladder.top()].support_size();
  for (const auto& w : ladder.windows()) out.ladder_atoms += w.support_size();
  return out;
}

// ---------------------------------------------------------------------------
// verify suites

struct SuiteOutcome {
  bool pass = true;
  json report = json::array();
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"metric", "prop1", "prop2", "prop3",
                                              "prop45", "prop6", "all"};
  return names;
}

/// Scenario used by the coverage suites: linear drift, k = 10, step 1e-3, T = 1024.
inline DriftScenario coverage_scenario(std::uint64_t seed) {
  DriftScenario s;
  s.kind = ScenarioKind::linear_drift;
  s.k = 10;
  s.step_delta = 1e-3;
  s.T = 1024;
  s.seed = seed;
  return s;
}

inline void print_property(std::ostream& out, const std::string& label, const PropertyReport& p) {
  out << (p.passes() ? "[PASS] " : "[FAIL] ") << label << ": " << p.checks << " checks, "
      << p.violations << " violations, max excess " << format_real(p.max_excess) << '\n';
}

inline void print_coverage(std::ostream& out, const std::string& label, const CoverageReport& c,
                           double delta) {
  out << (c.passes(delta) ? "[PASS] " : "[FAIL] ") << label << ": coverage "
      << format_real(c.empirical_coverage) << " (required >= " << format_real(c.required(delta))
      << ", " << c.trials << " trials";
  for (const auto& b : c.breakdown) out << ", " << b.name << " violations " << b.violations;
  out << ")\n";
}

inline SuiteOutcome run_suite(const std::string& suite, std::optional<std::uint64_t> trials,
                              double delta, std::uint64_t seed, std::ostream& out) {
  SuiteOutcome res;
  const auto add_property = [&](const std::string& label, const PropertyReport& p) {
    print_property(out, label, p);
    json j = to_json(p);
    j["label"] = label;
    res.report.push_back(std::move(j));
    res.pass = res.pass && p.passes();
  };
  const auto add_coverage = [&](const std::string& label, const CoverageReport& c) {
    print_coverage(out, label, c, delta);
    json j = to_json(c, delta);
    j["label"] = label;
    res.report.push_back(std::move(j));
    res.pass = res.pass && c.passes(delta);
  };

  if (suite == "metric") {
    add_property("metric tv axioms", verify_metric(trials.value_or(10000), seed));
    add_property("metric lambda bounds", verify_lambda_bounds(trials.value_or(10000), seed));
  } else if (suite == "prop6") {
    const auto [lip, ratio] = verify_prop6(trials.value_or(10000), seed);
    add_property("prop6 lipschitz", lip);
    add_property("prop6 window ratio", ratio);
  } else if (suite == "prop1") {
    for (const auto& s : scenario_families(4096, seed)) {
      const auto truth = make_truth(s);
      const auto [dec, avg] = verify_prop1(truth, trials.value_or(200));
      add_property("prop1 " + std::string(s.name()) + " decomposition", dec);
      add_property("prop1 " + std::string(s.name()) + " averaging", avg);
    }
  } else if (suite == "prop2") {
    const auto truth = make_truth(coverage_scenario(seed));
    add_coverage("prop2 linear_drift r=256", verify_prop2(truth, 256, trials.value_or(2000), delta));
    const auto phi = verify_phi_concentration(truth, 256, trials.value_or(2000), delta);
    const bool ok = phi.expectation_ok(delta) && phi.deviation_ok(delta);
    out << (ok ? "[PASS] " : "[FAIL] ") << "prop2 phi concentration: mean phi "
        << format_real(phi.mean_phi) << " vs lambda " << format_real(phi.lambda_average)
        << ", exceed fraction " << format_real(phi.exceed_fraction) << '\n';
    res.report.push_back({{"label", "prop2 phi concentration"},
                          {"mean_phi", phi.mean_phi},
                          {"lambda_average", phi.lambda_average},
                          {"exceed_fraction", phi.exceed_fraction},
                          {"pass", ok}});
    res.pass = res.pass && ok;
  } else if (suite == "prop3") {
    add_coverage("prop3 linear_drift", verify_prop3(coverage_scenario(seed), trials.value_or(2000), delta));
  } else if (suite == "prop45") {
    for (const auto& s : scenario_families(16384, seed)) {
      const auto rep = verify_prop45(make_truth(s), trials.value_or(200), delta);
      const std::string label = "prop45 " + std::string(s.name());
      add_property(label + " continue", rep.continue_bound);
      add_property(label + " stop", rep.stop_bound);
      out << "       " << label << ": " << rep.excluded << " trials excluded, " << rep.stop_traces
          << " stop traces\n";
    }
  } else if (suite == "all") {
    for (const auto& name : suite_names()) {
      if (name == "all") continue;
      SuiteOutcome sub = run_suite(name, trials, delta, seed, out);
      res.pass = res.pass && sub.pass;
      for (auto& r : sub.report) res.report.push_back(std::move(r));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// entry point

inline bool valid_delta(double d) { return d > 0.0 && d < 1.0; }

/// Writes to `path`, or to `fallback` when path is empty.
template <class Fn>
bool write_output(const std::string& path, std::ostream& fallback, std::ostream& err, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return true;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot write " << path << '\n';
    return false;
  }
  fn(f);
  return static_cast<bool>(f);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive estimation of a drifting discrete distribution", "driftest"};
  app.require_subcommand(1);

  std::string input, output, scenario_path, suite;
  double delta = 0.05;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> trials;
  std::uint64_t bench_t = std::uint64_t{1} << 20;
  std::uint64_t scaling_k = 10;
  std::optional<std::uint64_t> scenario_seed;

  auto* estimate = app.add_subcommand("estimate", "Estimate the current distribution of a sample file");
  estimate->add_option("--input", input, "Sample stream, one integer per line")->required();
  estimate->add_option("--output", output, "EstimateResult JSON (default stdout)");
  estimate->add_option("--delta", delta, "Failure probability in (0,1)");

  auto* simulate = app.add_subcommand("simulate", "Run Monte Carlo trials of a scenario");
  simulate->add_option("--scenario", scenario_path, "Scenario config (key = value)")->required();
  simulate->add_option("--trials", trials, "Number of trials (default 100)");
  simulate->add_option("--delta", delta, "Failure probability in (0,1)");
  simulate->add_option("--seed", scenario_seed, "Overrides the scenario seed");
  simulate->add_option("--output", output, "Results CSV (default stdout)");

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", suite, "metric, prop1, prop2, prop3, prop45, prop6 or all")->required();
  verify->add_option("--trials", trials, "Trials (or pmf pairs) per suite");
  verify->add_option("--delta", delta, "Failure probability in (0,1)");
  verify->add_option("--seed", seed, "Random seed");
  verify->add_option("--output", output, "Coverage report JSON");

  auto* bench = app.add_subcommand("bench", "Time ladder construction and estimation");
  bench->add_option("--t", bench_t, "Stream length");
  bench->add_option("--seed", seed, "Random seed");
  bench->add_option("--delta", delta, "Failure probability in (0,1)");

  auto* scaling = app.add_subcommand("scaling", "Bounded-drift scaling study on linear drift");
  scaling->add_option("--k", scaling_k, "Support size");
  scaling->add_option("--trials", trials, "Trials per drift value (default 100)");
  scaling->add_option("--seed", seed, "Random seed");
  scaling->add_option("--delta", delta, "Failure probability in (0,1)");
  scaling->add_option("--output", output, "Two-column data file (log10_delta log10_error)");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (!valid_delta(delta)) {
    err << "error: delta must lie in (0,1)\n";
    return kExitUsage;
  }

  try {
    if (*estimate) {
      SampleStream stream;
      try {
        stream = read_stream_file(input);
      } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
      }
      const EstimateResult result = adaptive_estimate(stream, delta);
      return write_output(output, out, err, [&](std::ostream& o) { o << to_json(result).dump(2) << '\n'; })
                 ? kExitOk
                 : kExitUsage;
    }

    if (*simulate) {
      DriftScenario s;
      try {
        s = load_scenario(scenario_path);
      } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
      }
      if (scenario_seed) s.seed = *scenario_seed;
      const auto metrics = run_trials(s, trials.value_or(100), delta);
      return write_output(output, out, err, [&](std::ostream& o) { write_trials_csv(o, s, delta, metrics); })
                 ? kExitOk
                 : kExitUsage;
    }

    if (*verify) {
      const auto& names = suite_names();
      if (std::find(names.begin(), names.end(), suite) == names.end()) {
        err << "error: unknown suite '" << suite << "'\n";
        return kExitUsage;
      }
      if (trials && *trials == 0) {
        err << "error: trials must be >= 1\n";
        return kExitUsage;
      }
      SuiteOutcome outcome = run_suite(suite, trials, delta, seed, out);
      if (!output.empty()) {
        const json doc{{"suite", suite}, {"delta", delta}, {"seed", seed}, {"pass", outcome.pass},
                       {"reports", outcome.report}};
        if (!write_output(output, out, err, [&](std::ostream& o) { o << doc.dump(2) << '\n'; })) {
          return kExitUsage;
        }
      }
      return outcome.pass ? kExitOk : kExitFailed;
    }

    if (*bench) {
      if (bench_t < 1) {
        err << "error: --t must be >= 1\n";
        return kExitUsage;
      }
      const BenchResult b = run_bench(bench_stream(bench_t, seed), delta);
      out << "T=" << b.T << " ladder_ms=" << std::fixed << std::setprecision(3)
          << b.ladder_seconds * 1e3 << " estimate_ms=" << b.estimate_seconds * 1e3
          << " total_ms=" << b.total_seconds() * 1e3 << std::defaultfloat
          << " chosen_window=" << b.chosen_window << " peak_support=" << b.peak_support
          << " ladder_atoms=" << b.ladder_atoms << '\n';
      return kExitOk;
    }

    if (*scaling) {
      const std::vector<double> deltas{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
      const ScalingResult r = scaling_experiment(scaling_k, deltas, trials.value_or(100), 0, seed, delta);
      for (const auto& p : r.points) {
        out << "step_delta=" << format_real(p.step_delta) << " mean_error=" << format_real(p.mean_error)
            << " mean_window=" << format_real(p.mean_window) << '\n';
      }
      out << "T=" << r.T << " slope=" << format_real(r.slope) << '\n';
      if (!output.empty() &&
          !write_output(output, out, err, [&](std::ostream& o) { write_scaling_data(o, r); })) {
        return kExitUsage;
      }
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace driftest::cli
