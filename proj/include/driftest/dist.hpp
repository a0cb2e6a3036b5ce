#pragma once

// Sparse discrete distributions over the natural numbers and the
// functionals used to bound estimation error: total variation, the
// learning complexity Lambda_r, the half-norm and its empirical
// counterpart Phi_r.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace driftest {

using Symbol = std::uint64_t;

/// Tolerance on total mass accepted by Pmf validation.
inline constexpr double kMassTolerance = 1e-9;

struct Atom {
  Symbol symbol;
  double prob;
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct SymbolCount {
  Symbol symbol;
  std::uint64_t count;
  friend bool operator==(const SymbolCount&, const SymbolCount&) = default;
};

/// Anything that exposes a finite support in increasing symbol order with a
/// probability per support point.
template <class M>
concept DiscreteMeasure = requires(const M& m, std::size_t k) {
  { m.support_size() } -> std::convertible_to<std::size_t>;
  { m.symbol_at(k) } -> std::convertible_to<Symbol>;
  { m.prob_at(k) } -> std::convertible_to<double>;
};

/// Probability mass function with finite support. Atoms are kept sorted by
/// symbol and every stored probability is strictly positive.
class Pmf {
 public:
  Pmf() = default;

  /// Validates and canonicalizes: sorts by symbol, rejects duplicate
  /// symbols, non-positive or non-finite masses and total mass away from 1.
  explicit Pmf(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.symbol < b.symbol; });
    double total = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      const Atom& a = atoms_[k];
      if (!(a.prob > 0.0) || !std::isfinite(a.prob) || a.prob > 1.0 + kMassTolerance) {
        throw std::invalid_argument("pmf atom " + std::to_string(a.symbol) +
                                    " has invalid probability");
      }
      if (k > 0 && atoms_[k - 1].symbol == a.symbol) {
        throw std::invalid_argument("pmf has duplicate symbol " + std::to_string(a.symbol));
      }
      total += a.prob;
    }
    if (atoms_.empty() || std::abs(total - 1.0) > kMassTolerance) {
      throw std::invalid_argument("pmf mass does not sum to 1");
    }
  }

  static Pmf point_mass(Symbol s) { return Pmf({{s, 1.0}}); }

  /// Uniform over symbols first, first+1, ..., first+k-1.
  static Pmf uniform(std::size_t k, Symbol first = 0) {
    if (k == 0) throw std::invalid_argument("uniform pmf needs k >= 1");
    std::vector<Atom> atoms;
    atoms.reserve(k);
    for (std::size_t i = 0; i < k; ++i) atoms.push_back({first + i, 1.0 / static_cast<double>(k)});
    return Pmf(std::move(atoms));
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }
  Symbol symbol_at(std::size_t k) const { return atoms_[k].symbol; }
  double prob_at(std::size_t k) const { return atoms_[k].prob; }

  /// Probability of a single symbol; 0 off the support.
  double operator()(Symbol s) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), s,
                               [](const Atom& a, Symbol v) { return a.symbol < v; });
    return (it != atoms_.end() && it->symbol == s) ? it->prob : 0.0;
  }

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<Atom> atoms_;
};

/// Counts of the most recent `size` samples. Counts are sorted by symbol and
/// strictly positive; they sum to `size`.
class EmpiricalWindow {
 public:
  EmpiricalWindow() = default;

  EmpiricalWindow(std::uint64_t size, std::vector<SymbolCount> counts)
      : size_(size), counts_(std::move(counts)) {
    std::sort(counts_.begin(), counts_.end(),
              [](const SymbolCount& a, const SymbolCount& b) { return a.symbol < b.symbol; });
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (counts_[k].count == 0) throw std::invalid_argument("window count must be positive");
      if (k > 0 && counts_[k - 1].symbol == counts_[k].symbol) {
        throw std::invalid_argument("window has duplicate symbol");
      }
      total += counts_[k].count;
    }
    if (size_ == 0 || total != size_) {
      throw std::invalid_argument("window counts must sum to its positive size");
    }
  }

  /// Builds the window directly from a run of samples.
  static EmpiricalWindow from_samples(std::span<const Symbol> samples) {
    std::unordered_map<Symbol, std::uint64_t> table;
    for (Symbol s : samples) ++table[s];
    std::vector<SymbolCount> counts;
    counts.reserve(table.size());
    for (const auto& [s, c] : table) counts.push_back({s, c});
    return EmpiricalWindow(samples.size(), std::move(counts));
  }

  std::uint64_t size() const { return size_; }
  std::span<const SymbolCount> counts() const { return counts_; }
  std::size_t support_size() const { return counts_.size(); }
  Symbol symbol_at(std::size_t k) const { return counts_[k].symbol; }
  double prob_at(std::size_t k) const {
    return static_cast<double>(counts_[k].count) / static_cast<double>(size_);
  }

  std::uint64_t count(Symbol s) const {
    auto it = std::lower_bound(counts_.begin(), counts_.end(), s,
                               [](const SymbolCount& a, Symbol v) { return a.symbol < v; });
    return (it != counts_.end() && it->symbol == s) ? it->count : 0;
  }

  /// The induced empirical distribution.
  Pmf to_pmf() const {
    std::vector<Atom> atoms;
    atoms.reserve(counts_.size());
    for (std::size_t k = 0; k < counts_.size(); ++k) atoms.push_back({counts_[k].symbol, prob_at(k)});
    return Pmf(std::move(atoms));
  }

  friend bool operator==(const EmpiricalWindow&, const EmpiricalWindow&) = default;

 private:
  std::uint64_t size_ = 0;
  std::vector<SymbolCount> counts_;
};

/// (1/2) * sum over the union of supports of |p(i) - q(i)|, merged in
/// increasing symbol order.
template <DiscreteMeasure P, DiscreteMeasure Q>
double tv_distance(const P& p, const Q& q) {
  const std::size_t np = p.support_size();
  const std::size_t nq = q.support_size();
  std::size_t a = 0, b = 0;
  double sum = 0.0;
  while (a < np || b < nq) {
    if (b == nq || (a < np && p.symbol_at(a) < q.symbol_at(b))) {
      sum += p.prob_at(a++);
    } else if (a == np || q.symbol_at(b) < p.symbol_at(a)) {
      sum += q.prob_at(b++);
    } else {
      sum += std::abs(p.prob_at(a++) - q.prob_at(b++));
    }
  }
  return 0.5 * sum;
}

/// Lambda_r(p): atoms below 1/r contribute their mass, atoms at or above 1/r
/// contribute sqrt(p(i)/r).
inline double lambda_complexity(const Pmf& p, std::uint64_t r) {
  if (r == 0) throw std::invalid_argument("lambda_complexity needs r >= 1");
  const double rd = static_cast<double>(r);
  const double threshold = 1.0 / rd;
  double light = 0.0;
  double heavy = 0.0;
  for (const Atom& a : p.atoms()) {
    if (a.prob >= threshold) {
      heavy += std::sqrt(a.prob);
    } else {
      light += a.prob;
    }
  }
  return light + heavy / std::sqrt(rd);
}

/// (sum_i sqrt(p(i)))^2.
template <DiscreteMeasure M>
double half_norm(const M& m) {
  double root_sum = 0.0;
  for (std::size_t k = 0; k < m.support_size(); ++k) root_sum += std::sqrt(m.prob_at(k));
  return root_sum * root_sum;
}

/// Phi_r = (1/sqrt r) * sum_i sqrt(count(i)/r) for a window of size r.
inline double phi_empirical(const EmpiricalWindow& w) {
  const double r = static_cast<double>(w.size());
  double root_sum = 0.0;
  for (std::size_t k = 0; k < w.support_size(); ++k) root_sum += std::sqrt(w.prob_at(k));
  return root_sum / std::sqrt(r);
}

/// Sums weighted pmfs symbol by symbol. Each symbol's total is accumulated in
/// insertion order, so the result does not depend on hash iteration order.
class PmfAccumulator {
 public:
  void add(const Pmf& p, double weight = 1.0) {
    for (const Atom& a : p.atoms()) mass_[a.symbol] += weight * a.prob;
    total_weight_ += weight;
  }

  double total_weight() const { return total_weight_; }

  /// Mean of everything added so far.
  Pmf mean() const {
    if (!(total_weight_ > 0.0)) throw std::invalid_argument("mean of an empty pmf sequence");
    std::vector<Atom> atoms;
    atoms.reserve(mass_.size());
    for (const auto& [s, m] : mass_) {
      const double prob = m / total_weight_;
      if (prob > 0.0) atoms.push_back({s, prob});
    }
    return Pmf(std::move(atoms));
  }

 private:
  std::unordered_map<Symbol, double> mass_;
  double total_weight_ = 0.0;
};

/// Entrywise arithmetic mean; the support is the union of supports.
inline Pmf mean_pmf(std::span<const Pmf> seq) {
  if (seq.empty()) throw std::invalid_argument("mean of an empty pmf sequence");
  PmfAccumulator acc;
  for (const Pmf& p : seq) acc.add(p);
  return acc.mean();
}

}  // namespace driftest
