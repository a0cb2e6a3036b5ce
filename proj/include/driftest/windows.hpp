#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "driftest/dist.hpp"

namespace driftest {

/// Samples X_1 ... X_T, oldest first.
class SampleStream {
 public:
  SampleStream() = default;
  explicit SampleStream(std::vector<Symbol> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("empty sample stream");
  }

  std::size_t length() const { return samples_.size(); }
  std::span<const Symbol> samples() const { return samples_; }
  /// X_T, the most recent sample.
  Symbol last() const { return samples_.back(); }

  /// The most recent r samples.
  std::span<const Symbol> suffix(std::size_t r) const {
    if (r == 0 || r > samples_.size()) throw std::out_of_range("suffix length out of range");
    return std::span<const Symbol>(samples_).last(r);
  }

  friend bool operator==(const SampleStream&, const SampleStream&) = default;

 private:
  std::vector<Symbol> samples_;
};

/// floor(log2 T) for T >= 1.
inline unsigned floor_log2(std::uint64_t t) {
  if (t == 0) throw std::invalid_argument("floor_log2 of zero");
  return static_cast<unsigned>(std::bit_width(t) - 1);
}

/// Suffix windows of sizes 1, 2, 4, ..., 2^floor(log2 T). windows()[j] has
/// size 2^j.
class DyadicLadder {
 public:
  DyadicLadder() = default;
  explicit DyadicLadder(std::vector<EmpiricalWindow> windows) : windows_(std::move(windows)) {
    for (std::size_t j = 0; j < windows_.size(); ++j) {
      if (windows_[j].size() != (std::uint64_t{1} << j)) {
        throw std::invalid_argument("ladder window j must have size 2^j");
      }
    }
  }

  std::span<const EmpiricalWindow> windows() const { return windows_; }
  const EmpiricalWindow& operator[](std::size_t j) const { return windows_[j]; }
  std::size_t depth() const { return windows_.size(); }
  /// Largest window index, floor(log2 T).
  std::size_t top() const { return windows_.size() - 1; }

  friend bool operator==(const DyadicLadder&, const DyadicLadder&) = default;

 private:
  std::vector<EmpiricalWindow> windows_;
};

/// One backward scan; snapshots the running counts every time the scan length
/// hits a power of two. Samples older than the largest dyadic window are never
/// read.
inline DyadicLadder build_ladder(const SampleStream& stream) {
  const auto samples = stream.samples();
  const std::size_t t_len = samples.size();
  if (t_len == 0) throw std::invalid_argument("empty sample stream");
  const unsigned top = floor_log2(t_len);

  std::unordered_map<Symbol, std::uint64_t> table;
  std::vector<EmpiricalWindow> windows;
  windows.reserve(top + 1);
  std::size_t next_snapshot = 1;
  for (std::size_t scanned = 1; scanned <= (std::size_t{1} << top); ++scanned) {
    ++table[samples[t_len - scanned]];
    if (scanned == next_snapshot) {
      std::vector<SymbolCount> counts;
      counts.reserve(table.size());
      for (const auto& [s, c] : table) counts.push_back({s, c});
      windows.emplace_back(scanned, std::move(counts));
      next_snapshot <<= 1;
    }
  }
  return DyadicLadder(std::move(windows));
}

/// c = 4 pi^2 / 3, the union-bound constant over dyadic windows.
inline constexpr double kUnionConstant = 4.0 * std::numbers::pi * std::numbers::pi / 3.0;

inline void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}

/// sqrt(ln(c ((log2 r)^2 + 1) / delta) / r). For r = 2^j the squared log is j^2.
inline double union_concentration(double r, double delta) {
  require_delta(delta);
  const double lg = std::log2(r);
  return std::sqrt(std::log(kUnionConstant * (lg * lg + 1.0) / delta) / r);
}

inline double dyadic_concentration(unsigned j, double delta) {
  require_delta(delta);
  const double jd = static_cast<double>(j);
  return std::sqrt(std::log(kUnionConstant * (jd * jd + 1.0) / delta) /
                   static_cast<double>(std::uint64_t{1} << j));
}

/// xi_{r_j} = Phi_{r_j} + 3 * sqrt(ln(c (j^2 + 1) / delta) / r_j). Not clamped
/// to 1.
inline double xi_bound(const EmpiricalWindow& w, unsigned j, double delta) {
  require_delta(delta);
  if (j >= 63 || w.size() != (std::uint64_t{1} << j)) {
    throw std::invalid_argument("xi_bound: window size must equal 2^j");
  }
  return phi_empirical(w) + 3.0 * dyadic_concentration(j, delta);
}

}  // namespace driftest
