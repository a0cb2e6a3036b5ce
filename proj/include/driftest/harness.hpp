#pragma once

// Monte Carlo runner and verifiers for the error bounds behind the adaptive
// estimator. Every campaign is deterministic in its seed; trials may run on
// several threads but results are stored by trial index.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "driftest/adaptive.hpp"
#include "driftest/dist.hpp"
#include "driftest/driftgen.hpp"
#include "driftest/windows.hpp"

namespace driftest {

// ---------------------------------------------------------------------------
// Parallelism

/// Worker count: DRIFTEST_THREADS if set to a positive integer, otherwise the
/// number of hardware threads.
inline unsigned worker_count() {
  if (const char* env = std::getenv("DRIFTEST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n). fn must only write state owned by index i.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

// ---------------------------------------------------------------------------
// Ground truth shared by all trials of a scenario

struct ScenarioTruth {
  DriftScenario scenario;
  Pmf current;                     // mu_T
  std::vector<double> drift;       // Delta_1 .. Delta_T
  std::vector<Pmf> dyadic_means;   // mu^[2^j], j = 0 .. floor(log2 T)
};

/// One backward pass over mu_T, mu_{T-1}, ...: running max of the TV to mu_T
/// and running averages snapshotted at dyadic lengths.
inline ScenarioTruth make_truth(const DriftScenario& s) {
  validate(s);
  ScenarioTruth truth{s, true_pmf(s, s.T), {}, {}};
  truth.drift.reserve(s.T);
  PmfAccumulator acc;
  double running = 0.0;
  std::uint64_t next_snapshot = 1;
  const std::uint64_t top_size = std::uint64_t{1} << floor_log2(s.T);
  for (std::uint64_t back = 0; back < s.T; ++back) {
    const Pmf mu = true_pmf(s, s.T - back);
    running = std::max(running, tv_distance(truth.current, mu));
    truth.drift.push_back(running);
    if (back < top_size) {
      acc.add(mu);
      if (back + 1 == next_snapshot) {
        truth.dyadic_means.push_back(acc.mean());
        next_snapshot <<= 1;
      }
    }
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Trial metrics

struct TrialMetrics {
  std::uint64_t trial = 0;
  std::uint64_t chosen_r = 0;
  double err_adaptive = 0.0;
  double err_oracle = 0.0;
  std::uint64_t r_oracle = 0;
  double err_full_window = 0.0;
  double err_last_sample = 0.0;
  double q_star = 0.0;
  std::uint64_t r_star = 0;
  bool prop3_held = false;
};

/// Outcome of the two uniform-over-j statistical error inequalities.
struct Prop3Check {
  bool empirical_ok = true;  // tv(emp_j, mu^[r_j]) <= xi_j for all j
  bool true_ok = true;       // Phi_j <= 4 Lambda(mu^[r_j]) + 3 conc_j for all j
  bool held() const { return empirical_ok && true_ok; }
};

inline Prop3Check check_prop3_event(const DyadicLadder& ladder, const ScenarioTruth& truth,
                                    double delta) {
  Prop3Check out;
  for (unsigned j = 0; j <= ladder.top(); ++j) {
    const EmpiricalWindow& w = ladder[j];
    const Pmf& avg = truth.dyadic_means[j];
    const double conc = 3.0 * dyadic_concentration(j, delta);
    const double phi = phi_empirical(w);
    if (tv_distance(w, avg) > phi + conc) out.empirical_ok = false;
    if (phi > 4.0 * lambda_complexity(avg, w.size()) + conc) out.true_ok = false;
  }
  return out;
}

inline std::vector<TrialMetrics> run_trials(const ScenarioTruth& truth, std::uint64_t trials,
                                            double delta) {
  require_delta(delta);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const QMinimum qmin = q_argmin(truth.current, truth.drift, delta);
  std::vector<TrialMetrics> out(trials);
  parallel_for(trials, [&](std::size_t i) {
    const SampleStream stream = sample_stream(truth.scenario, i);
    const DyadicLadder ladder = build_ladder(stream);
    const EstimateResult est = adaptive_estimate(ladder, delta);
    const std::vector<double> errors = window_errors(stream, truth.current);
    const OracleWindow oracle = oracle_from_errors(errors);
    TrialMetrics& m = out[i];
    m.trial = i;
    m.chosen_r = est.chosen_window;
    m.err_adaptive = errors[est.chosen_window - 1];
    m.err_oracle = oracle.err_best;
    m.r_oracle = oracle.r_best;
    m.err_full_window = errors.back();
    m.err_last_sample = errors.front();
    m.q_star = qmin.q_star;
    m.r_star = qmin.r_star;
    m.prop3_held = check_prop3_event(ladder, truth, delta).held();
  });
  return out;
}

inline std::vector<TrialMetrics> run_trials(const DriftScenario& s, std::uint64_t trials,
                                            double delta) {
  return run_trials(make_truth(s), trials, delta);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median of err_adaptive / err_oracle; a zero oracle error counts as ratio 1
/// when the adaptive error is also zero.
inline double median_competitive_ratio(const std::vector<TrialMetrics>& metrics) {
  std::vector<double> ratios;
  ratios.reserve(metrics.size());
  for (const auto& m : metrics) {
    if (m.err_oracle > 0.0) {
      ratios.push_back(m.err_adaptive / m.err_oracle);
    } else {
      ratios.push_back(m.err_adaptive > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    }
  }
  return median(std::move(ratios));
}

// ---------------------------------------------------------------------------
// Coverage of the high-probability bounds

struct InequalityTally {
  std::string name;
  std::uint64_t violations = 0;
};

struct CoverageReport {
  std::string name;
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;  // trials where the conjunction failed
  double empirical_coverage = 1.0;
  std::vector<InequalityTally> breakdown;

  /// 1 - delta less three binomial standard errors.
  double required(double delta) const {
    return 1.0 - delta - 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
  }
  bool passes(double delta) const { return empirical_coverage >= required(delta); }
};

inline CoverageReport finish_coverage(std::string name, std::uint64_t trials,
                                      const std::vector<unsigned char>& first,
                                      const std::vector<unsigned char>& second,
                                      std::string first_name, std::string second_name) {
  CoverageReport rep;
  rep.name = std::move(name);
  rep.trials = trials;
  rep.breakdown = {{std::move(first_name), 0}, {std::move(second_name), 0}};
  for (std::size_t i = 0; i < trials; ++i) {
    rep.breakdown[0].violations += first[i] ? 0 : 1;
    rep.breakdown[1].violations += second[i] ? 0 : 1;
    rep.violations += (first[i] && second[i]) ? 0 : 1;
  }
  rep.empirical_coverage = 1.0 - static_cast<double>(rep.violations) / static_cast<double>(trials);
  return rep;
}

/// Both single-window inequalities at a fixed dyadic r:
///   tv(emp_r, mu^[r]) <= Phi_r + 3 sqrt(ln(4/delta) / (2r))
///   Phi_r <= 4 Lambda_r(mu^[r]) + sqrt(ln(4/delta) / r)
inline CoverageReport verify_prop2(const ScenarioTruth& truth, std::uint64_t r,
                                   std::uint64_t trials, double delta) {
  require_delta(delta);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!std::has_single_bit(r) || r > truth.scenario.T) {
    throw std::invalid_argument("r must be a power of two no larger than T");
  }
  const Pmf& avg = truth.dyadic_means[floor_log2(r)];
  const double rd = static_cast<double>(r);
  const double log_term = std::log(4.0 / delta);
  const double first_slack = 3.0 * std::sqrt(log_term / (2.0 * rd));
  const double second_bound = 4.0 * lambda_complexity(avg, r) + std::sqrt(log_term / rd);
  std::vector<unsigned char> first(trials), second(trials);
  parallel_for(trials, [&](std::size_t i) {
    const SampleStream stream = sample_stream(truth.scenario, i);
    const EmpiricalWindow w = EmpiricalWindow::from_samples(stream.suffix(r));
    const double phi = phi_empirical(w);
    first[i] = tv_distance(w, avg) <= phi + first_slack;
    second[i] = phi <= second_bound;
  });
  return finish_coverage("prop2", trials, first, second, "statistical_error", "complexity");
}

inline CoverageReport verify_prop2(const DriftScenario& s, std::uint64_t r, std::uint64_t trials,
                                   double delta) {
  return verify_prop2(make_truth(s), r, trials, delta);
}

/// Both inequalities for every dyadic window simultaneously, with the
/// union-bound constant c.
inline CoverageReport verify_prop3(const ScenarioTruth& truth, std::uint64_t trials, double delta) {
  require_delta(delta);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<unsigned char> first(trials), second(trials);
  parallel_for(trials, [&](std::size_t i) {
    const DyadicLadder ladder = build_ladder(sample_stream(truth.scenario, i));
    const Prop3Check c = check_prop3_event(ladder, truth, delta);
    first[i] = c.empirical_ok;
    second[i] = c.true_ok;
  });
  return finish_coverage("prop3", trials, first, second, "statistical_error_empirical",
                         "statistical_error_true");
}

inline CoverageReport verify_prop3(const DriftScenario& s, std::uint64_t trials, double delta) {
  return verify_prop3(make_truth(s), trials, delta);
}

/// Monte Carlo view of where the complexity inequality comes from: the mean of
/// Phi_r against Lambda_r(mu^[r]), and how often Phi_r exceeds
/// Lambda_r(mu^[r]) + sqrt(ln(2/delta)/r) (bounded differences allow at most
/// delta/2).
struct PhiConcentration {
  double mean_phi = 0.0;
  double phi_standard_error = 0.0;
  double lambda_average = 0.0;
  double exceed_fraction = 0.0;
  std::uint64_t trials = 0;
  bool expectation_ok(double) const { return mean_phi <= lambda_average + 3.0 * phi_standard_error; }
  bool deviation_ok(double delta) const {
    const double p = delta / 2.0;
    return exceed_fraction <= p + 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

inline PhiConcentration verify_phi_concentration(const ScenarioTruth& truth, std::uint64_t r,
                                                 std::uint64_t trials, double delta) {
  require_delta(delta);
  if (!std::has_single_bit(r) || r > truth.scenario.T || trials < 2) {
    throw std::invalid_argument("need a dyadic r <= T and at least two trials");
  }
  const Pmf& avg = truth.dyadic_means[floor_log2(r)];
  const double lambda = lambda_complexity(avg, r);
  const double limit = lambda + std::sqrt(std::log(2.0 / delta) / static_cast<double>(r));
  std::vector<double> phis(trials);
  parallel_for(trials, [&](std::size_t i) {
    const SampleStream stream = sample_stream(truth.scenario, i);
    phis[i] = phi_empirical(EmpiricalWindow::from_samples(stream.suffix(r)));
  });
  PhiConcentration out;
  out.trials = trials;
  out.lambda_average = lambda;
  double sum = 0.0, sq = 0.0;
  std::uint64_t exceed = 0;
  for (double p : phis) {
    sum += p;
    sq += p * p;
    exceed += p > limit ? 1 : 0;
  }
  const double n = static_cast<double>(trials);
  out.mean_phi = sum / n;
  out.phi_standard_error = std::sqrt(std::max(sq / n - out.mean_phi * out.mean_phi, 0.0) / (n - 1.0));
  out.exceed_fraction = static_cast<double>(exceed) / n;
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic inequality campaigns

/// Counts checks of an inequality lhs <= rhs + slack; max_excess is the
/// largest lhs - rhs seen (negative when every check had room to spare).
struct PropertyReport {
  std::string name;
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();

  void check(double lhs, double rhs, double slack) {
    ++checks;
    max_excess = std::max(max_excess, lhs - rhs);
    if (lhs > rhs + slack) ++violations;
  }
  void merge(const PropertyReport& other) {
    checks += other.checks;
    violations += other.violations;
    max_excess = std::max(max_excess, other.max_excess);
  }
  bool passes() const { return violations == 0; }
};

/// Random pmf with 1..max_support atoms on symbols below `universe`; a share of
/// atoms is made very light so both branches of Lambda_r are exercised.
inline Pmf random_pmf(CounterRng& rng, std::uint64_t max_support = 40, std::uint64_t universe = 64) {
  const std::uint64_t k = 1 + rng.below(std::min(max_support, universe));
  std::vector<Symbol> symbols;
  while (symbols.size() < k) {
    const Symbol s = rng.below(universe);
    if (std::find(symbols.begin(), symbols.end(), s) == symbols.end()) symbols.push_back(s);
  }
  std::vector<double> weights(k);
  double total = 0.0;
  for (auto& w : weights) {
    const double u = rng.uniform();
    w = rng.below(4) == 0 ? std::pow(u, 12.0) + 1e-300 : -std::log1p(-u) + 1e-12;
    total += w;
  }
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < k; ++i) atoms.push_back({symbols[i], weights[i] / total});
  return Pmf(std::move(atoms));
}

/// r log-uniform on [1, 2^16].
inline std::uint64_t random_window(CounterRng& rng) {
  const auto r = static_cast<std::uint64_t>(std::floor(std::exp2(16.0 * rng.uniform())));
  return std::clamp<std::uint64_t>(r, 1, std::uint64_t{1} << 16);
}

/// Both complexity-versus-drift inequalities:
///   |Lambda_r(p) - Lambda_r(q)| <= 2 tv(p, q)
///   Lambda_r(p) <= sqrt(s/r) Lambda_s(p) for r <= s.
inline std::pair<PropertyReport, PropertyReport> verify_prop6(std::uint64_t pairs,
                                                              std::uint64_t seed = 0,
                                                              double slack = 1e-12) {
  if (pairs < 1) throw std::invalid_argument("pairs must be >= 1");
  PropertyReport lipschitz{"lambda_lipschitz_in_tv"};
  PropertyReport ratio{"lambda_window_ratio"};
  CounterRng rng(seed, 0x6060);
  for (std::uint64_t i = 0; i < pairs; ++i) {
    const Pmf p = random_pmf(rng);
    // every fourth pair is the same pmf to hit the equality case
    const Pmf q = (i % 4 == 0) ? p : random_pmf(rng);
    const std::uint64_t r = random_window(rng);
    lipschitz.check(std::abs(lambda_complexity(p, r) - lambda_complexity(q, r)),
                    2.0 * tv_distance(p, q), slack);
    std::uint64_t lo = random_window(rng), hi = random_window(rng);
    if (lo > hi) std::swap(lo, hi);
    if (i % 8 == 1) hi = lo;
    ratio.check(lambda_complexity(p, lo),
                std::sqrt(static_cast<double>(hi) / static_cast<double>(lo)) *
                    lambda_complexity(p, hi),
                slack);
  }
  return {lipschitz, ratio};
}

/// Symmetry, identity and triangle inequality of tv_distance.
inline PropertyReport verify_metric(std::uint64_t triples, std::uint64_t seed = 0,
                                    double slack = 1e-12) {
  PropertyReport rep{"tv_metric"};
  CounterRng rng(seed, 0x7e7);
  for (std::uint64_t i = 0; i < triples; ++i) {
    const Pmf a = random_pmf(rng), b = random_pmf(rng), c = random_pmf(rng);
    const double ab = tv_distance(a, b), ba = tv_distance(b, a);
    rep.check(std::abs(ab - ba), 0.0, slack);
    rep.check(tv_distance(a, a), 0.0, slack);
    rep.check(tv_distance(a, c), ab + tv_distance(b, c), slack);
    rep.check(ab, 1.0, slack);
    rep.check(-ab, 0.0, slack);
  }
  return rep;
}

/// Lambda_r <= sqrt(k/r), Lambda_r <= sqrt(half_norm/r), and Lambda_r
/// non-increasing in r.
inline PropertyReport verify_lambda_bounds(std::uint64_t instances, std::uint64_t seed = 0,
                                           double slack = 1e-12) {
  PropertyReport rep{"lambda_bounds"};
  CounterRng rng(seed, 0x1a3b);
  for (std::uint64_t i = 0; i < instances; ++i) {
    const Pmf p = random_pmf(rng);
    std::uint64_t s = random_window(rng), r = random_window(rng);
    if (s > r) std::swap(s, r);
    if (s == r) r = std::min<std::uint64_t>(r + 1, std::uint64_t{1} << 16);
    const double lr = lambda_complexity(p, r);
    const double rd = static_cast<double>(r);
    rep.check(lr, std::sqrt(static_cast<double>(p.support_size()) / rd), slack);
    rep.check(lr, std::sqrt(half_norm(p) / rd), slack);
    if (s < r) rep.check(lr, lambda_complexity(p, s), slack);
  }
  return rep;
}

/// Per-trial checks over every dyadic r:
///   tv(mu_T, emp_r) <= tv(mu^[r], emp_r) + Delta_r
///   tv(mu^[r], mu_T) <= Delta_r
inline std::pair<PropertyReport, PropertyReport> verify_prop1(const ScenarioTruth& truth,
                                                              std::uint64_t trials,
                                                              double slack = 1e-12) {
  PropertyReport decomposition{"error_decomposition"};
  PropertyReport averaging{"averaging_bound"};
  for (std::size_t j = 0; j < truth.dyadic_means.size(); ++j) {
    averaging.check(tv_distance(truth.dyadic_means[j], truth.current),
                    truth.drift[(std::size_t{1} << j) - 1], slack);
  }
  std::vector<PropertyReport> per_trial(trials, PropertyReport{"error_decomposition"});
  parallel_for(trials, [&](std::size_t i) {
    const DyadicLadder ladder = build_ladder(sample_stream(truth.scenario, i));
    for (unsigned j = 0; j <= ladder.top(); ++j) {
      const EmpiricalWindow& w = ladder[j];
      per_trial[i].check(tv_distance(truth.current, w),
                         tv_distance(truth.dyadic_means[j], w) + truth.drift[w.size() - 1], slack);
    }
  });
  for (const auto& rep : per_trial) decomposition.merge(rep);
  return {decomposition, averaging};
}

/// Trace checks of the continue and stop certificates, on trials where the
/// uniform statistical-error event held.
struct TraceReport {
  std::uint64_t trials = 0;
  std::uint64_t excluded = 0;     // event failed; the certificates do not apply
  std::uint64_t stop_traces = 0;  // trials where the stop test fired
  PropertyReport continue_bound{"continue_factor_5"};
  PropertyReport stop_bound{"stop_factor_2"};
  bool passes() const { return continue_bound.passes() && stop_bound.passes(); }
};

inline TraceReport verify_prop45(const ScenarioTruth& truth, std::uint64_t trials, double delta,
                                 double slack = 1e-9) {
  require_delta(delta);
  struct Slot {
    bool excluded = false;
    bool stopped = false;
    PropertyReport cont{"continue_factor_5"};
    PropertyReport stop{"stop_factor_2"};
  };
  std::vector<Slot> slots(trials);
  parallel_for(trials, [&](std::size_t i) {
    const DyadicLadder ladder = build_ladder(sample_stream(truth.scenario, i));
    Slot& slot = slots[i];
    if (!check_prop3_event(ladder, truth, delta).held()) {
      slot.excluded = true;
      return;
    }
    const EstimateResult est = adaptive_estimate(ladder, delta);
    std::vector<double> u(ladder.depth());
    for (unsigned j = 0; j <= ladder.top(); ++j) {
      u[j] = u_bound(j, xi_bound(ladder[j], j, delta), truth.drift);
    }
    double best_u = u[est.accepted.front().j];
    for (std::size_t a = 1; a < est.accepted.size(); ++a) {
      const unsigned j = est.accepted[a].j;
      slot.cont.check(tv_distance(truth.current, ladder[j]), 5.0 * best_u, slack);
      best_u = std::min(best_u, u[j]);
    }
    if (est.stop) {
      slot.stopped = true;
      for (unsigned n = est.stop->j; n <= ladder.top(); ++n) {
        slot.stop.check(u[est.stop->l], 2.0 * u[n], slack);
      }
    }
  });
  TraceReport rep;
  rep.trials = trials;
  for (const Slot& s : slots) {
    rep.excluded += s.excluded ? 1 : 0;
    rep.stop_traces += s.stopped ? 1 : 0;
    rep.continue_bound.merge(s.cont);
    rep.stop_bound.merge(s.stop);
  }
  return rep;
}

/// One representative scenario per family with horizon T.
inline std::vector<DriftScenario> scenario_families(std::uint64_t T, std::uint64_t seed = 0) {
  std::vector<DriftScenario> out;
  DriftScenario base;
  base.T = T;
  base.seed = seed;

  DriftScenario iid = base;
  iid.kind = ScenarioKind::iid;
  iid.k = 20;
  out.push_back(iid);

  DriftScenario linear = base;
  linear.kind = ScenarioKind::linear_drift;
  linear.k = 10;
  linear.step_delta = 1e-4;
  out.push_back(linear);

  DriftScenario abrupt = base;
  abrupt.kind = ScenarioKind::abrupt;
  abrupt.k = 10;
  abrupt.change_point = T / 4;
  out.push_back(abrupt);

  DriftScenario rotating = base;
  rotating.kind = ScenarioKind::rotating_support;
  rotating.k = 10;
  rotating.period = std::max<std::uint64_t>(1, T / 32);
  out.push_back(rotating);

  DriftScenario geometric = base;
  geometric.kind = ScenarioKind::geometric_drift;
  out.push_back(geometric);

  DriftScenario zipf = base;
  zipf.kind = ScenarioKind::zipf_drift;
  out.push_back(zipf);
  return out;
}

// ---------------------------------------------------------------------------
// Bounded-drift scaling

struct ScalingPoint {
  double step_delta = 0.0;
  double mean_error = 0.0;
  double mean_window = 0.0;
};

struct ScalingResult {
  std::uint64_t T = 0;
  std::vector<ScalingPoint> points;
  double slope = 0.0;  // least squares of log10(error) on log10(step_delta)
  double intercept = 0.0;
};

/// Smallest horizon considered asymptotic for the smallest positive drift:
/// 100 (k / delta_min^2)^(1/3).
inline double scaling_min_horizon(std::uint64_t k, double min_delta) {
  return 100.0 * std::cbrt(static_cast<double>(k) / (min_delta * min_delta));
}

/// Runs linear_drift with support k at each per-step drift and fits the slope
/// of log mean adaptive error against log drift. T = 0 picks the smallest
/// power of two above the asymptotic horizon; an explicit T below it is
/// rejected. Zero drifts are run but left out of the fit.
inline ScalingResult scaling_experiment(std::uint64_t k, const std::vector<double>& deltas,
                                        std::uint64_t trials, std::uint64_t T = 0,
                                        std::uint64_t seed = 0, double delta = 0.05) {
  double min_positive = std::numeric_limits<double>::infinity();
  std::size_t positive = 0;
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("drift must lie in [0, 1]");
    if (d > 0.0) {
      min_positive = std::min(min_positive, d);
      ++positive;
    }
  }
  if (positive < 2) throw std::invalid_argument("need at least two positive drifts to fit a slope");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const double needed = scaling_min_horizon(k, min_positive);
  if (T == 0) {
    T = std::bit_ceil(static_cast<std::uint64_t>(std::ceil(needed)));
  } else if (static_cast<double>(T) < needed) {
    throw std::invalid_argument("T too small for the asymptotic regime: need at least " +
                                std::to_string(static_cast<std::uint64_t>(std::ceil(needed))));
  }

  ScalingResult result;
  result.T = T;
  for (double d : deltas) {
    DriftScenario s;
    s.kind = ScenarioKind::linear_drift;
    s.k = k;
    s.step_delta = d;
    s.T = T;
    s.seed = seed;
    const Pmf current = true_pmf(s, T);
    std::vector<double> errors(trials), windows(trials);
    parallel_for(trials, [&](std::size_t i) {
      const EstimateResult est = adaptive_estimate(sample_stream(s, i), delta);
      errors[i] = tv_distance(current, est.estimate);
      windows[i] = static_cast<double>(est.chosen_window);
    });
    ScalingPoint pt{d, 0.0, 0.0};
    for (std::size_t i = 0; i < trials; ++i) {
      pt.mean_error += errors[i];
      pt.mean_window += windows[i];
    }
    pt.mean_error /= static_cast<double>(trials);
    pt.mean_window /= static_cast<double>(trials);
    result.points.push_back(pt);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto& pt : result.points) {
    if (pt.step_delta <= 0.0) continue;
    if (!(pt.mean_error > 0.0)) throw std::domain_error("zero mean error; cannot fit a log slope");
    const double x = std::log10(pt.step_delta), y = std::log10(pt.mean_error);
    sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
  }
  const double spread = n * sxx - sx * sx;
  if (!(spread > 0.0)) throw std::invalid_argument("need two distinct positive drifts to fit a slope");
  result.slope = (n * sxy - sx * sy) / spread;
  result.intercept = (sy - result.slope * sx) / n;
  return result;
}

}  // namespace driftest
