// Estimates the current distribution after an abrupt change and compares the
// adaptive choice with fixed windows.

#include <iostream>

#include "driftest/driftest.hpp"

int main() {
  using namespace driftest;

  DriftScenario s;
  s.kind = ScenarioKind::abrupt;
  s.k = 10;
  s.T = 1 << 15;
  s.change_point = 1 << 13;
  s.seed = 7;

  const SampleStream stream = sample_stream(s, 0);
  const Pmf current = true_pmf(s, s.T);
  const EstimateResult est = adaptive_estimate(stream, 0.05);

  std::cout << "adaptive window " << est.chosen_window << ", error "
            << tv_distance(current, est.estimate) << '\n';
  for (std::uint64_t r : {std::uint64_t{256}, std::uint64_t{4096}, s.T}) {
    std::cout << "fixed window " << r << ", error "
              << tv_distance(current, fixed_window_estimate(stream, r)) << '\n';
  }
  const OracleWindow best = oracle_from_errors(window_errors(stream, current));
  std::cout << "oracle window " << best.r_best << ", error " << best.err_best << '\n';
}
