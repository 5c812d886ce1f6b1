#pragma once
// Conjectures as model selection: likelihood-entropy scoring and
// K-regularized universes.

#include "belief_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace hintikka {

/// A depth-d dnf; no members encodes "false".
template <class Key>
struct Conjecture {
  int depth = 0;
  std::vector<Key> members;  // ascending
  bool operator==(const Conjecture&) const = default;
};

using WeightFn = std::function<double(std::size_t)>;

inline double sqrt_weight(std::size_t n) { return std::sqrt(static_cast<double>(n)); }

/// c(|D|) * l / ln(|D|+1) * H(D+ plus the remainder atom), natural log.
/// Zero when no member carries positive weight.
inline double score_likelihood_entropy(const std::vector<Rational>& member_weights, const WeightFn& c = sqrt_weight) {
  const std::size_t n = member_weights.size();
  if (n == 0) return 0.0;
  // Summed in ascending order so relabelling members cannot change the result.
  std::vector<Rational> sorted = member_weights;
  std::sort(sorted.begin(), sorted.end());
  Rational l = 0;
  bool any = false;
  for (const auto& w : sorted) {
    l += w;
    any = any || w > 0;
  }
  if (!any) return 0.0;
  double h = 0.0;
  for (const auto& w : sorted)
    if (w > 0) {
      const double p = to_double(w);
      h -= p * std::log(p);
    }
  const Rational rest = 1 - l;
  if (rest > 0) {
    const double p = to_double(rest);
    h -= p * std::log(p);
  }
  return c(n) * to_double(l) / std::log(static_cast<double>(n + 1)) * h;
}

template <class Key>
struct Scored {
  Conjecture<Key> conjecture;
  double score = 0.0;
};

/// Stable descending sort by score; ties by member list order.
template <class Key, class Weights>
std::vector<Scored<Key>> rank_conjectures(const Weights& weight_of, const std::vector<Conjecture<Key>>& universe,
                                          const WeightFn& c = sqrt_weight) {
  std::vector<Scored<Key>> out;
  out.reserve(universe.size());
  for (const auto& conj : universe) {
    std::vector<Rational> ws;
    for (const auto& m : conj.members) ws.push_back(weight_of(m));
    out.push_back({conj, score_likelihood_entropy(ws, c)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Scored<Key>& a, const Scored<Key>& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.conjecture.members < b.conjecture.members;
  });
  return out;
}

/// All subsets of `base` (ascending) with at most max_size members, by size
/// then lexicographically; starts with the empty conjecture.
template <class Key>
std::vector<Conjecture<Key>> subsets_up_to(int depth, const std::vector<Key>& base, std::size_t max_size,
                                           std::size_t cap = kDefaultCap) {
  std::vector<Conjecture<Key>> out;
  std::vector<std::size_t> idx;
  const std::size_t n = base.size();
  for (std::size_t size = 0; size <= std::min(max_size, n); ++size) {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      Conjecture<Key> c{depth, {}};
      for (std::size_t i : idx) c.members.push_back(base[i]);
      out.push_back(std::move(c));
      if (out.size() > cap) throw CapExceeded("conjecture universe exceeds cap");
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

/// Subsets of the union of dnf(phi, d) over phi in K, up to max_size.
inline std::vector<Conjecture<Constituent>> k_regularized_universe(const Language& lang, const std::vector<Formula>& K,
                                                                   int d, std::size_t max_size,
                                                                   std::size_t cap = kDefaultCap) {
  std::vector<Constituent> base;
  for (const auto& phi : K) {
    auto s = dnf(lang, phi, d, cap);
    base.insert(base.end(), s.members.begin(), s.members.end());
  }
  canonicalize(base);
  return subsets_up_to(d, base, max_size, cap);
}

}  // namespace hintikka
