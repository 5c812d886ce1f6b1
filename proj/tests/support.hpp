#pragma once
// Independent oracles shared by the unit and acceptance tests. Nothing here
// calls the library's own semantics (characteristic constituents, dnf
// membership); truth is always decided by Tarskian evaluation.

#include "hintikka/belief_tree.hpp"

#include <random>
#include <string>
#include <vector>

namespace oracle {

using namespace hintikka;

inline Signature sig_of(const std::string& text) { return Signature::parse(text); }

/// |Delta^(d)| for one binary predicate, from the closed form
/// N(0,k) = 2^(2k-1), N(d,k) = 2^(2k-1) * 2^N(d-1,k+1), with N(.,0) having an empty base.
inline BigInt binary_count(int d, int k) {
  const int base = k == 0 ? 0 : 2 * k - 1;
  BigInt here = BigInt(1) << base;
  if (d == 0) return here;
  BigInt below = binary_count(d - 1, k + 1);
  return here << static_cast<unsigned>(below);
}

/// Monadic worlds as structures (one element per realized type), empty world included.
inline std::vector<FiniteStructure> worlds(const Signature& sig) {
  std::vector<FiniteStructure> out;
  for (const auto& w : enumerate_monadic_worlds(sig)) out.push_back(w.to_structure(sig));
  return out;
}

inline bool valid(const std::vector<FiniteStructure>& ws, const Formula& phi) {
  for (const auto& m : ws)
    if (!satisfies(m, phi)) return false;
  return true;
}

inline bool satisfiable(const std::vector<FiniteStructure>& ws, const Formula& phi) {
  for (const auto& m : ws)
    if (satisfies(m, phi)) return true;
  return false;
}

/// Random monadic formula over the bound variables in `scope`, with at most
/// `quant` further nested quantifiers.
class FormulaGen {
 public:
  FormulaGen(const Signature& sig, std::uint64_t seed) : sig_(sig), rng_(seed) {}

  Formula sentence(int max_depth) {
    std::vector<std::string> scope;
    return gen(scope, max_depth, 4);
  }

  /// Formula with `x1` free (for quantifier laws).
  Formula open_in_x1(int max_depth) {
    std::vector<std::string> scope{"x1"};
    return gen(scope, max_depth, 4);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  int pick(int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng_)); }

  Formula gen(std::vector<std::string>& scope, int quant, int size) {
    const bool can_atom = !scope.empty();
    int choice = pick(size <= 0 ? 3 : 8);
    if (size <= 0 && !can_atom) choice = quant > 0 ? 7 : 0;
    switch (choice) {
      case 0:
        if (!can_atom || pick(6) == 0) return pick(2) ? Formula::top() : Formula::bottom();
        [[fallthrough]];
      case 1:
      case 2:
        if (can_atom) {
          const int p = pick(static_cast<int>(sig_.size()));
          return Formula::atom(p, {scope[pick(static_cast<int>(scope.size()))]});
        }
        return Formula::top();
      case 3: return Formula::neg(gen(scope, quant, size - 1));
      case 4: return Formula::disj(gen(scope, quant, size - 2), gen(scope, quant, size - 2));
      case 5: return Formula::conj(gen(scope, quant, size - 2), gen(scope, quant, size - 2));
      default: {
        if (quant <= 0) return gen(scope, quant, size - 1);
        const std::string v = "x" + std::to_string(scope.size() + 1);
        scope.push_back(v);
        Formula body = gen(scope, quant - 1, size - 1);
        scope.pop_back();
        return pick(2) ? Formula::exists(v, body) : Formula::forall(v, body);
      }
    }
  }

  Signature sig_;
  std::mt19937_64 rng_;
};

/// Random coherent label tree: all leaves at depth D, weights from random
/// non-negative integers normalized to root 1. Some subtrees carry zero.
inline BeliefTree<std::string> random_label_tree(std::mt19937_64& rng, int D, std::size_t max_nodes) {
  struct Proto {
    std::string key;
    int parent;
    int depth;
    std::vector<int> kids;
    long raw = 0;
  };
  std::vector<Proto> ps{{"/", -1, 0, {}, 0}};
  std::vector<int> layer{0};
  std::uniform_int_distribution<int> nk(1, 3);
  for (int d = 1; d <= D; ++d) {
    std::vector<int> next;
    for (int p : layer) {
      int k = nk(rng);
      if (ps.size() + k > max_nodes) k = 1;
      for (int j = 0; j < k; ++j) {
        const std::string base = ps[p].key == "/" ? "" : ps[p].key;
        ps.push_back({base + "/" + std::string(1, static_cast<char>('a' + j)), p, d, {}, 0});
        ps[p].kids.push_back(static_cast<int>(ps.size()) - 1);
        next.push_back(static_cast<int>(ps.size()) - 1);
      }
    }
    layer = std::move(next);
  }
  std::uniform_int_distribution<int> wd(0, 6);
  for (int i : layer) ps[i].raw = wd(rng) < 2 ? 0 : wd(rng) + 1;
  long total = 0;
  for (int i : layer) total += ps[i].raw;
  if (total == 0) {
    ps[layer.front()].raw = 1;
    total = 1;
  }
  for (auto it = ps.rbegin(); it != ps.rend(); ++it)
    if (!it->kids.empty())
      for (int c : it->kids) it->raw += ps[c].raw;
  BeliefTree<std::string> h("/");
  std::vector<int> id(ps.size(), 0);
  for (std::size_t i = 1; i < ps.size(); ++i)
    id[i] = h.add_child(id[ps[i].parent], ps[i].key, Rational(ps[i].raw, total));
  return h;
}

/// Renorm computed from its definition, without the library's support pass:
/// rho is the deepest proper ancestor of `minus` with a positive same-depth
/// descendant other than `minus`; that layer is rescaled by Z/Z+.
template <class Key>
BeliefTree<Key> renorm_by_definition(const BeliefTree<Key>& h, int minus, int* rho_out = nullptr) {
  const int d = h.node(minus).depth;
  auto layer = h.at_depth(d);
  int rho = h.node(minus).parent;
  Rational zplus = 0;
  for (; rho >= 0; rho = h.node(rho).parent) {
    zplus = 0;
    for (int i : layer)
      if (i != minus && h.is_ancestor(rho, i) && h.weight(i) > 0) zplus += h.weight(i);
    if (zplus > 0) break;
  }
  if (rho < 0) throw UndefinedRenorm("oracle: no alternative");
  if (rho_out) *rho_out = rho;
  const Rational scale = h.weight(rho) / zplus;
  BeliefTree<Key> out = h;
  // Layer d and below: scale by the depth-d ancestor's fate.
  for (int i = 0; i < static_cast<int>(h.size()); ++i) {
    if (h.node(i).depth < d || !h.is_ancestor(rho, i)) continue;
    int a = i;
    while (h.node(a).depth > d) a = h.node(a).parent;
    out.set_weight(i, a == minus || h.is_ancestor(minus, i) ? Rational(0) : h.weight(i) * scale);
  }
  // Between rho and d: sums of children, deepest first.
  for (int e = d - 1; e > h.node(rho).depth; --e)
    for (int i : h.at_depth(e)) {
      if (!h.is_ancestor(rho, i)) continue;
      Rational s = 0;
      for (int c : h.node(i).kids) s += out.weight(c);
      out.set_weight(i, s);
    }
  return out;
}

}  // namespace oracle
