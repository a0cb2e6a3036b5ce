#pragma once

// Ground-truth drift scenarios mu_1 .. mu_T and reproducible samplers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "driftest/adaptive.hpp"
#include "driftest/dist.hpp"
#include "driftest/windows.hpp"

namespace driftest {

/// Infinite-support families drop a tail lighter than this; the largest atom
/// absorbs it.
inline constexpr double kTailMass = 1e-12;
/// Upper limit on the truncated support of a single Zipf pmf.
inline constexpr std::uint64_t kMaxZipfAtoms = std::uint64_t{1} << 22;

// ---------------------------------------------------------------------------
// Random numbers

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the value at position n depends only on
/// (seed, stream, n), so samples can be drawn in any order or in parallel.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t at(std::uint64_t n) const { return mix64(key_ + kGolden * (n + 1)); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform_at(std::uint64_t n) const { return static_cast<double>(at(n) >> 11) * 0x1.0p-53; }

  std::uint64_t next() { return at(counter_++); }
  double uniform() { return uniform_at(counter_++); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Scenarios

enum class ScenarioKind { iid, linear_drift, abrupt, rotating_support, geometric_drift, zipf_drift };

inline std::string_view kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::iid: return "iid";
    case ScenarioKind::linear_drift: return "linear_drift";
    case ScenarioKind::abrupt: return "abrupt";
    case ScenarioKind::rotating_support: return "rotating_support";
    case ScenarioKind::geometric_drift: return "geometric_drift";
    case ScenarioKind::zipf_drift: return "zipf_drift";
  }
  return "unknown";
}

inline std::optional<ScenarioKind> parse_kind(std::string_view name) {
  for (auto k : {ScenarioKind::iid, ScenarioKind::linear_drift, ScenarioKind::abrupt,
                 ScenarioKind::rotating_support, ScenarioKind::geometric_drift,
                 ScenarioKind::zipf_drift}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

/// Declarative description of mu_1 .. mu_T.
///
///  - iid: uniform over {0..k-1} at every step (k = 1 is a point mass).
///  - linear_drift: a uniform block of k symbols slides upward; every step
///    moves step_delta of mass from the bottom of the block to fresh symbols
///    above it, so consecutive steps are exactly step_delta apart in TV and
///    tv(mu_t, mu_{t-s}) = min(s * step_delta, 1).
///  - abrupt: uniform over {0..k-1} up to T - change_point, then uniform over
///    k symbols starting at max(k, 100) (disjoint supports).
///  - rotating_support: a uniform block of k symbols on a ring of 2k symbols,
///    advanced by one symbol every `period` steps.
///  - geometric_drift: Geometric(p_t) on {0, 1, ...}, p_t linear from
///    geo_p_start to geo_p_end.
///  - zipf_drift: Zipf(s_t) on {1, 2, ...}, s_t linear from zipf_s_start to
///    zipf_s_end.
struct DriftScenario {
  ScenarioKind kind = ScenarioKind::iid;
  std::uint64_t T = 4096;
  std::uint64_t seed = 0;
  std::uint64_t k = 10;
  double step_delta = 1e-3;
  std::uint64_t change_point = 256;
  std::uint64_t period = 64;
  double geo_p_start = 0.2;
  double geo_p_end = 0.05;
  double zipf_s_start = 5.0;
  double zipf_s_end = 4.0;

  std::string_view name() const { return kind_name(kind); }
};

namespace detail {

inline double schedule(double start, double end, std::uint64_t t, std::uint64_t T) {
  if (T <= 1) return start;
  return start + (end - start) * static_cast<double>(t - 1) / static_cast<double>(T - 1);
}

/// Tail sum_{i > n} i^{-s}. Euler-Maclaurin for large n, direct otherwise.
inline double zipf_tail(double s, std::uint64_t n, double zeta) {
  if (n >= 32) {
    const double nd = static_cast<double>(n);
    return std::pow(nd, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(nd, -s) +
           s * std::pow(nd, -s - 1.0) / 12.0 -
           s * (s + 1.0) * (s + 2.0) * std::pow(nd, -s - 3.0) / 720.0;
  }
  double partial = 0.0;
  for (std::uint64_t i = 1; i <= n; ++i) partial += std::pow(static_cast<double>(i), -s);
  return std::max(zeta - partial, 0.0);
}

struct ZipfTruncation {
  double zeta;
  std::uint64_t atoms;
  double tail;
};

inline ZipfTruncation zipf_truncation(double s) {
  const double zeta = boost::math::zeta(s);
  // Asymptotic guess, then walk to the smallest n with tail/zeta < kTailMass.
  double guess = std::pow(kTailMass * (s - 1.0) * zeta, -1.0 / (s - 1.0));
  std::uint64_t n = guess > 4.0 * static_cast<double>(kMaxZipfAtoms)
                        ? 4 * kMaxZipfAtoms
                        : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(guess));
  while (n > 1 && zipf_tail(s, n - 1, zeta) / zeta < kTailMass) n = n * 15 / 16;
  while (zipf_tail(s, n, zeta) / zeta >= kTailMass) n += std::max<std::uint64_t>(1, n / 64);
  while (n > 1 && zipf_tail(s, n - 1, zeta) / zeta < kTailMass) --n;
  return {zeta, n, zipf_tail(s, n, zeta)};
}

inline std::uint64_t geometric_atoms(double p) {
  // smallest n with (1-p)^(n+1) < kTailMass
  if (p >= 1.0) return 1;
  const double q = 1.0 - p;
  auto n = static_cast<std::uint64_t>(std::floor(std::log(kTailMass) / std::log(q)));
  while (n > 0 && std::pow(q, static_cast<double>(n)) < kTailMass) --n;
  while (std::pow(q, static_cast<double>(n + 1)) >= kTailMass) ++n;
  return n + 1;
}

}  // namespace detail

/// Throws std::invalid_argument naming the offending parameter.
inline void validate(const DriftScenario& s) {
  const auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("invalid value for key '" + key + "': " + why);
  };
  if (s.T < 1) fail("t", "must be >= 1");
  switch (s.kind) {
    case ScenarioKind::iid:
    case ScenarioKind::linear_drift:
    case ScenarioKind::abrupt:
    case ScenarioKind::rotating_support:
      if (s.k < 1) fail("k", "must be >= 1");
      break;
    default: break;
  }
  if (s.kind == ScenarioKind::linear_drift && !(s.step_delta >= 0.0 && s.step_delta <= 1.0)) {
    fail("step_delta", "must lie in [0, 1]");
  }
  if (s.kind == ScenarioKind::abrupt && s.change_point > s.T) fail("change_point", "must be <= t");
  if (s.kind == ScenarioKind::rotating_support && s.period < 1) fail("period", "must be >= 1");
  if (s.kind == ScenarioKind::geometric_drift) {
    if (!(s.geo_p_start > 0.0 && s.geo_p_start <= 1.0)) fail("geo_p_start", "must lie in (0, 1]");
    if (!(s.geo_p_end > 0.0 && s.geo_p_end <= 1.0)) fail("geo_p_end", "must lie in (0, 1]");
  }
  if (s.kind == ScenarioKind::zipf_drift) {
    for (auto [key, v] : {std::pair{"zipf_s_start", s.zipf_s_start}, std::pair{"zipf_s_end", s.zipf_s_end}}) {
      if (!(v > 1.0 && v <= 64.0)) fail(key, "must lie in (1, 64]");
      if (detail::zipf_truncation(v).atoms > kMaxZipfAtoms) {
        fail(key, "exponent too small for an exact truncated support");
      }
    }
  }
}

/// Calls visit(Atom) for every atom of mu_t in increasing symbol order until
/// visit returns false. The atoms are exactly those of true_pmf(s, t).
template <class Visit>
void for_each_atom(const DriftScenario& s, std::uint64_t t, Visit&& visit) {
  if (t < 1 || t > s.T) throw std::out_of_range("time step out of range [1, T]");
  const double kd = static_cast<double>(s.k);
  switch (s.kind) {
    case ScenarioKind::iid: {
      for (std::uint64_t i = 0; i < s.k; ++i)
        if (!visit(Atom{i, 1.0 / kd})) return;
      return;
    }
    case ScenarioKind::abrupt: {
      const bool after = t > s.T - s.change_point;
      const Symbol first = after ? std::max<std::uint64_t>(s.k, 100) : 0;
      for (std::uint64_t i = 0; i < s.k; ++i)
        if (!visit(Atom{first + i, 1.0 / kd})) return;
      return;
    }
    case ScenarioKind::linear_drift: {
      // Displacement in units of whole atoms.
      const double shift = static_cast<double>(t - 1) * s.step_delta * kd;
      const double whole = std::floor(shift);
      const double frac = shift - whole;
      const auto base = static_cast<Symbol>(whole);
      if (1.0 - frac > 0.0 && !visit(Atom{base, (1.0 - frac) / kd})) return;
      for (std::uint64_t i = 1; i < s.k; ++i)
        if (!visit(Atom{base + i, 1.0 / kd})) return;
      if (frac > 0.0) visit(Atom{base + s.k, frac / kd});
      return;
    }
    case ScenarioKind::rotating_support: {
      const std::uint64_t ring = 2 * s.k;
      const std::uint64_t start = ((t - 1) / s.period) % ring;
      std::vector<Symbol> block;
      block.reserve(s.k);
      for (std::uint64_t i = 0; i < s.k; ++i) block.push_back((start + i) % ring);
      std::sort(block.begin(), block.end());
      for (Symbol sym : block)
        if (!visit(Atom{sym, 1.0 / kd})) return;
      return;
    }
    case ScenarioKind::geometric_drift: {
      const double p = detail::schedule(s.geo_p_start, s.geo_p_end, t, s.T);
      const std::uint64_t n = detail::geometric_atoms(p);
      const double q = 1.0 - p;
      // atom 0 absorbs the dropped tail (1-p)^n
      if (!visit(Atom{0, p + std::pow(q, static_cast<double>(n))})) return;
      double mass = p;
      for (std::uint64_t i = 1; i < n; ++i) {
        mass *= q;
        if (!visit(Atom{i, mass})) return;
      }
      return;
    }
    case ScenarioKind::zipf_drift: {
      const double exponent = detail::schedule(s.zipf_s_start, s.zipf_s_end, t, s.T);
      const auto trunc = detail::zipf_truncation(exponent);
      if (!visit(Atom{1, (1.0 + trunc.tail) / trunc.zeta})) return;
      for (std::uint64_t i = 2; i <= trunc.atoms; ++i)
        if (!visit(Atom{i, std::pow(static_cast<double>(i), -exponent) / trunc.zeta})) return;
      return;
    }
  }
}

/// mu_t as an exact finite pmf.
inline Pmf true_pmf(const DriftScenario& s, std::uint64_t t) {
  std::vector<Atom> atoms;
  for_each_atom(s, t, [&](const Atom& a) {
    atoms.push_back(a);
    return true;
  });
  return Pmf(std::move(atoms));
}

/// mu_1 .. mu_T materialized.
inline std::vector<Pmf> truth_sequence(const DriftScenario& s) {
  std::vector<Pmf> out;
  out.reserve(s.T);
  for (std::uint64_t t = 1; t <= s.T; ++t) out.push_back(true_pmf(s, t));
  return out;
}

/// Inverse-CDF draw from mu_t given u in [0, 1).
inline Symbol draw_symbol(const DriftScenario& s, std::uint64_t t, double u) {
  double cumulative = 0.0;
  Symbol last = 0;
  bool found = false;
  for_each_atom(s, t, [&](const Atom& a) {
    cumulative += a.prob;
    last = a.symbol;
    if (u < cumulative) {
      found = true;
      return false;
    }
    return true;
  });
  (void)found;
  return last;
}

/// X_t ~ mu_t independently; X_t uses position t of the (seed, trial) stream.
inline SampleStream sample_stream(const DriftScenario& s, std::uint64_t trial) {
  const CounterRng rng(s.seed, trial);
  std::vector<Symbol> samples;
  samples.reserve(s.T);
  for (std::uint64_t t = 1; t <= s.T; ++t) samples.push_back(draw_symbol(s, t, rng.uniform_at(t)));
  return SampleStream(std::move(samples));
}

/// Delta_1 .. Delta_T for mu_t produced on demand by pmf_at(t), t = 1..T.
template <class PmfAt>
std::vector<double> drift_sequence(std::uint64_t T, PmfAt&& pmf_at) {
  if (T < 1) throw std::invalid_argument("drift_sequence needs T >= 1");
  const Pmf current = pmf_at(T);
  std::vector<double> out;
  out.reserve(T);
  double running = 0.0;
  for (std::uint64_t back = 0; back < T; ++back) {
    running = std::max(running, tv_distance(current, pmf_at(T - back)));
    out.push_back(running);
  }
  return out;
}

/// Delta_1 .. Delta_T of the scenario.
inline std::vector<double> scenario_drift(const DriftScenario& s) {
  return drift_sequence(s.T, [&](std::uint64_t t) { return true_pmf(s, t); });
}

inline double scenario_delta(const DriftScenario& s, std::uint64_t r) {
  if (r < 1 || r > s.T) throw std::out_of_range("r must lie in [1, T]");
  return scenario_drift(s)[r - 1];
}

// ---------------------------------------------------------------------------
// key = value scenario files

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline DriftScenario parse_scenario(std::istream& in) {
  DriftScenario s;
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  const auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r");
    const auto e = v.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  const auto as_uint = [&](const std::string& key, const std::string& v) -> std::uint64_t {
    std::size_t used = 0;
    try {
      if (!v.empty() && v.front() != '-') {
        const auto out = std::stoull(v, &used);
        if (used == v.size()) return out;
      }
    } catch (const std::exception&) {
    }
    throw ConfigError("invalid value for key '" + key + "': " + v);
  };
  const auto as_real = [&](const std::string& key, const std::string& v) -> double {
    std::size_t used = 0;
    try {
      const double out = std::stod(v, &used);
      if (used == v.size()) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError("invalid value for key '" + key + "': " + v);
  };

  if (!values.contains("kind")) throw ConfigError("missing key 'kind'");
  for (const auto& [key, v] : values) {
    if (key == "kind") {
      const auto kind = parse_kind(v);
      if (!kind) throw ConfigError("unknown kind '" + v + "'");
      s.kind = *kind;
    } else if (key == "t") {
      s.T = as_uint(key, v);
    } else if (key == "seed") {
      s.seed = as_uint(key, v);
    } else if (key == "k") {
      s.k = as_uint(key, v);
    } else if (key == "step_delta") {
      s.step_delta = as_real(key, v);
    } else if (key == "change_point") {
      s.change_point = as_uint(key, v);
    } else if (key == "period") {
      s.period = as_uint(key, v);
    } else if (key == "geo_p_start") {
      s.geo_p_start = as_real(key, v);
    } else if (key == "geo_p_end") {
      s.geo_p_end = as_real(key, v);
    } else if (key == "zipf_s_start") {
      s.zipf_s_start = as_real(key, v);
    } else if (key == "zipf_s_end") {
      s.zipf_s_end = as_real(key, v);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  try {
    validate(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline DriftScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  return parse_scenario(in);
}

}  // namespace driftest
