#pragma once

// Adaptive window selection over the dyadic ladder, with the fixed-window and
// oracle baselines and the simulation-only diagnostics (drift sequence, U, Q).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "driftest/dist.hpp"
#include "driftest/windows.hpp"

namespace driftest {

/// A dyadic window accepted into the candidate list L.
struct CandidateRecord {
  unsigned j = 0;
  std::uint64_t r = 1;
  double phi = 0.0;
  double xi = 0.0;
  friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

/// One evaluation of the stop test: tv(window l, window j) against 3 xi_l + xi_j.
struct Comparison {
  unsigned l = 0;
  unsigned j = 0;
  double tv = 0.0;
  double threshold = 0.0;
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// The stop test fired for window j against accepted window l.
struct Violation {
  unsigned j = 0;
  unsigned l = 0;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct EstimateResult {
  std::uint64_t chosen_window = 1;
  Pmf estimate;
  std::vector<CandidateRecord> accepted;
  /// Empty when every dyadic window was examined without a violation.
  std::optional<Violation> stop;
  std::vector<Comparison> comparisons;

  bool exhausted() const { return !stop.has_value(); }
  friend bool operator==(const EstimateResult&, const EstimateResult&) = default;
};

/// Runs the selection on a prebuilt ladder.
///
/// L starts as {0}. For j = 1 .. top, window j is considered only if its xi is
/// strictly below every xi in L; it is then compared against each l in L in
/// increasing order and the search stops at the first
/// tv(window l, window j) >= 3 xi_l + xi_j. The estimate is always the
/// empirical distribution of the largest window in L.
inline EstimateResult adaptive_estimate(const DyadicLadder& ladder, double delta) {
  require_delta(delta);
  if (ladder.depth() == 0) throw std::invalid_argument("empty sample stream");

  EstimateResult result;
  const auto record = [&](unsigned j) {
    const EmpiricalWindow& w = ladder[j];
    return CandidateRecord{j, w.size(), phi_empirical(w), xi_bound(w, j, delta)};
  };
  result.accepted.push_back(record(0));

  for (unsigned j = 1; j <= ladder.top(); ++j) {
    const CandidateRecord candidate = record(j);
    // xi strictly decreases along L, so the last entry holds the minimum.
    if (!(candidate.xi < result.accepted.back().xi)) continue;

    for (const CandidateRecord& prev : result.accepted) {
      const double tv = tv_distance(ladder[prev.j], ladder[j]);
      const double threshold = 3.0 * prev.xi + candidate.xi;
      result.comparisons.push_back({prev.j, j, tv, threshold});
      if (tv >= threshold) {
        result.stop = Violation{j, prev.j};
        break;
      }
    }
    if (result.stop) break;
    result.accepted.push_back(candidate);
  }

  const EmpiricalWindow& chosen = ladder[result.accepted.back().j];
  result.chosen_window = chosen.size();
  result.estimate = chosen.to_pmf();
  return result;
}

inline EstimateResult adaptive_estimate(const SampleStream& stream, double delta) {
  require_delta(delta);
  if (stream.length() == 0) throw std::invalid_argument("empty sample stream");
  return adaptive_estimate(build_ladder(stream), delta);
}

/// Empirical distribution of the most recent r samples.
inline Pmf fixed_window_estimate(const SampleStream& stream, std::uint64_t r) {
  if (r < 1 || r > stream.length()) throw std::invalid_argument("window size must lie in [1, T]");
  return EmpiricalWindow::from_samples(stream.suffix(r)).to_pmf();
}

/// (Delta_1, ..., Delta_T) where Delta_r = max_{0 <= t < r} tv(mu_T, mu_{T-t})
/// and truth[t-1] is mu_t.
inline std::vector<double> drift_sequence(std::span<const Pmf> truth) {
  if (truth.empty()) throw std::invalid_argument("drift_sequence needs a non-empty truth");
  const Pmf& current = truth.back();
  std::vector<double> out;
  out.reserve(truth.size());
  double running = 0.0;
  for (std::size_t back = 0; back < truth.size(); ++back) {
    running = std::max(running, tv_distance(current, truth[truth.size() - 1 - back]));
    out.push_back(running);
  }
  return out;
}

/// Delta_r looked up from a drift sequence (1-based r).
inline double drift_at(std::span<const double> drift, std::uint64_t r) {
  if (r < 1 || r > drift.size()) throw std::out_of_range("drift index out of range");
  return drift[r - 1];
}

/// U(r_j) = xi_{r_j} + Delta_{r_j}.
inline double u_bound(unsigned j, double xi, std::span<const double> drift) {
  return xi + drift_at(drift, std::uint64_t{1} << j);
}

inline double u_bound(unsigned j, double xi, std::span<const Pmf> truth) {
  return u_bound(j, xi, drift_sequence(truth));
}

/// Q(r) = Lambda_r(mu_T) + sqrt(ln(c((log2 r)^2 + 1)/delta)/r) + Delta_r.
inline double q_value(std::uint64_t r, const Pmf& current, std::span<const double> drift,
                      double delta) {
  return lambda_complexity(current, r) + union_concentration(static_cast<double>(r), delta) +
         drift_at(drift, r);
}

inline double q_value(std::uint64_t r, std::span<const Pmf> truth, double delta) {
  if (truth.empty()) throw std::invalid_argument("q_value needs a non-empty truth");
  return q_value(r, truth.back(), drift_sequence(truth), delta);
}

struct QMinimum {
  std::uint64_t r_star = 1;
  double q_star = 0.0;
};

/// argmin over 1 <= r <= T of Q(r); the first minimizer wins.
inline QMinimum q_argmin(const Pmf& current, std::span<const double> drift, double delta) {
  QMinimum best{1, q_value(1, current, drift, delta)};
  for (std::uint64_t r = 2; r <= drift.size(); ++r) {
    const double q = q_value(r, current, drift, delta);
    if (q < best.q_star) best = {r, q};
  }
  return best;
}

/// tv(current, empirical distribution of the last r samples) for every
/// r = 1 .. T in a single backward scan; element r-1 holds window r.
///
/// Only symbols in the support of `current` need explicit tracking: mass the
/// window puts elsewhere contributes (r - in_support) / r in total.
inline std::vector<double> window_errors(const SampleStream& stream, const Pmf& current) {
  const auto atoms = current.atoms();
  std::vector<std::uint64_t> counts(atoms.size(), 0);
  std::vector<std::size_t> seen;
  double unseen_mass = 0.0;
  for (const Atom& a : atoms) unseen_mass += a.prob;

  const auto samples = stream.samples();
  std::vector<double> errors;
  errors.reserve(samples.size());
  std::uint64_t in_support = 0;
  for (std::size_t r = 1; r <= samples.size(); ++r) {
    const Symbol x = samples[samples.size() - r];
    auto it = std::lower_bound(atoms.begin(), atoms.end(), x,
                               [](const Atom& a, Symbol v) { return a.symbol < v; });
    if (it != atoms.end() && it->symbol == x) {
      const auto idx = static_cast<std::size_t>(it - atoms.begin());
      if (counts[idx]++ == 0) {
        seen.push_back(idx);
        unseen_mass -= it->prob;
      }
      ++in_support;
    }
    const double rd = static_cast<double>(r);
    double sum = std::max(unseen_mass, 0.0) + static_cast<double>(r - in_support) / rd;
    for (std::size_t idx : seen) {
      sum += std::abs(atoms[idx].prob - static_cast<double>(counts[idx]) / rd);
    }
    errors.push_back(0.5 * sum);
  }
  return errors;
}

struct OracleWindow {
  std::uint64_t r_best = 1;
  double err_best = 0.0;
};

/// The window size with the smallest realized error; ties go to the larger r.
inline OracleWindow oracle_from_errors(std::span<const double> errors) {
  OracleWindow best{1, errors.front()};
  for (std::size_t r = 2; r <= errors.size(); ++r) {
    if (errors[r - 1] <= best.err_best) best = {r, errors[r - 1]};
  }
  return best;
}

inline OracleWindow oracle_best_window(const SampleStream& stream, std::span<const Pmf> truth) {
  if (truth.size() != stream.length()) {
    throw std::invalid_argument("truth length must match the stream length");
  }
  return oracle_from_errors(window_errors(stream, truth.back()));
}

}  // namespace driftest
