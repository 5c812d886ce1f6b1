#pragma once
// Weighted refinement trees (Hintikka trees), renormalization, the belief
// sequence, sentence probabilities and the derived prover.

#include "dnf.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintikka {

struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};
struct UndefinedRenorm : std::domain_error {
  using std::domain_error::domain_error;
};
struct BeyondFrontier : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Counters for invariant checks run after mutating operations.
struct InvariantStats {
  std::atomic<long> checks{0};
  std::atomic<long> failures{0};
};
inline InvariantStats& invariant_stats() {
  static InvariantStats s;
  return s;
}

/// A tree of keyed nodes with exact weights. An expanded node lists its
/// materialized children; refinements that are not listed carry weight 0.
/// A leaf is a frontier node.
template <class Key>
class BeliefTree {
 public:
  struct Node {
    Key key;
    int parent = -1;
    int depth = 0;
    Rational w;
    std::vector<int> kids;  // ascending by key
  };

  BeliefTree() : BeliefTree(Key{}) {}
  explicit BeliefTree(Key root) {
    nodes_.push_back({std::move(root), -1, 0, Rational(1), {}});
    index_.emplace(nodes_[0].key, 0);
  }

  int root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(int i) const { return nodes_.at(i); }
  const Rational& weight(int i) const { return nodes_.at(i).w; }
  const Key& key(int i) const { return nodes_.at(i).key; }
  bool leaf(int i) const { return nodes_.at(i).kids.empty(); }

  int find(const Key& k) const {
    auto it = index_.find(k);
    return it == index_.end() ? -1 : it->second;
  }

  int add_child(int parent, Key k, Rational w) {
    if (index_.count(k)) throw std::invalid_argument("duplicate node key");
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({k, parent, nodes_.at(parent).depth + 1, std::move(w), {}});
    index_.emplace(std::move(k), id);
    auto& kids = nodes_[parent].kids;
    auto pos = std::lower_bound(kids.begin(), kids.end(), id,
                                [&](int a, int b) { return nodes_[a].key < nodes_[b].key; });
    kids.insert(pos, id);
    return id;
  }

  void set_weight(int i, Rational w) { nodes_.at(i).w = std::move(w); }

  int max_depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
  }

  /// Nodes at depth d, ascending by key.
  std::vector<int> at_depth(int d) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
      if (nodes_[i].depth == d) out.push_back(i);
    std::sort(out.begin(), out.end(), [&](int a, int b) { return nodes_[a].key < nodes_[b].key; });
    return out;
  }

  /// Preorder with children ascending.
  std::vector<int> preorder() const {
    std::vector<int> out, stack{0};
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      out.push_back(i);
      const auto& kids = nodes_[i].kids;
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  bool is_ancestor(int anc, int i) const {
    while (i >= 0) {
      if (i == anc) return true;
      i = nodes_[i].parent;
    }
    return false;
  }

  /// Empty string when the tree is a coherent, normalized HT.
  std::string violations() const {
    if (nodes_[0].w != 1) return "root weight " + to_text(nodes_[0].w);
    const int D = max_depth();
    std::vector<Rational> per_depth(D + 1);
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      const auto& n = nodes_[i];
      if (n.w < 0 || n.w > 1) return "weight out of range at node " + std::to_string(i);
      if (!n.kids.empty()) {
        Rational s = 0;
        for (int c : n.kids) s += nodes_[c].w;
        if (s != n.w) return "incoherent node " + std::to_string(i);
      }
      per_depth[n.depth] += n.w;
      if (n.kids.empty())  // frontier mass stands in for its unmaterialized refinements
        for (int d = n.depth + 1; d <= D; ++d) per_depth[d] += n.w;
    }
    for (int d = 0; d <= D; ++d)
      if (per_depth[d] != 1) return "depth " + std::to_string(d) + " sums to " + to_text(per_depth[d]);
    return {};
  }

  void assert_invariants() const {
    invariant_stats().checks++;
    auto v = violations();
    if (!v.empty()) {
      invariant_stats().failures++;
      throw InvariantViolation(v);
    }
  }

  bool operator==(const BeliefTree& o) const {
    if (nodes_.size() != o.nodes_.size()) return false;
    for (const auto& n : nodes_) {
      int j = o.find(n.key);
      if (j < 0 || o.nodes_[j].w != n.w || o.nodes_[j].depth != n.depth) return false;
      int p = n.parent < 0 ? -1 : o.find(nodes_[n.parent].key);
      if (p != o.nodes_[j].parent) return false;
    }
    return true;
  }

 private:
  std::vector<Node> nodes_;
  std::map<Key, int> index_;
};

// ---------------------------------------------------------------------------
// Renormalization

/// Support flags with respect to refuting `minus` at depth d. A node at
/// depth <= d is supported when some positive-weight path below it reaches
/// depth d at a node other than `minus` (a positive frontier leaf above d
/// counts); deeper nodes inherit from their depth-d ancestor; `minus` and
/// its subtree are unsupported.
template <class Key>
std::vector<char> support(const BeliefTree<Key>& h, int minus) {
  const int d = h.node(minus).depth;
  std::vector<char> sup(h.size(), 0);
  auto order = h.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {  // children before parents
    int i = *it;
    const auto& n = h.node(i);
    if (n.depth > d) continue;
    if (i == minus) { sup[i] = 0; continue; }
    if (n.depth == d || n.kids.empty()) { sup[i] = n.w > 0; continue; }
    char s = 0;
    for (int c : n.kids) s |= sup[c];
    sup[i] = s;
  }
  for (int i : order) {
    const auto& n = h.node(i);
    if (n.depth > d) sup[i] = sup[n.parent];
  }
  return sup;
}

/// Refutes `minus`: zeroes its subtree and rescales the supported
/// descendants of the deepest supported ancestor by Z / Z+.
template <class Key>
BeliefTree<Key> renorm(const BeliefTree<Key>& h, int minus) {
  if (minus <= 0 || minus >= static_cast<int>(h.size())) throw std::invalid_argument("renorm needs a non-root node");
  auto sup = support(h, minus);
  int rho = h.node(minus).parent;
  while (rho >= 0 && !sup[rho]) rho = h.node(rho).parent;
  if (rho < 0) throw UndefinedRenorm("no supported alternative (Z+ = 0)");
  Rational z = 0, zplus = 0;
  for (int c : h.node(rho).kids) {
    z += h.weight(c);
    if (sup[c]) zplus += h.weight(c);
  }
  if (zplus == 0) throw UndefinedRenorm("Z+ = 0");
  const Rational scale = z / zplus;
  BeliefTree<Key> out = h;
  for (int i = 0; i < static_cast<int>(h.size()); ++i) {
    if (i == rho || !h.is_ancestor(rho, i)) continue;
    out.set_weight(i, sup[i] ? h.weight(i) * scale : Rational(0));
  }
  out.assert_invariants();
  return out;
}

/// Left fold of renorm over `minus` keys in ascending key order.
template <class Key>
BeliefTree<Key> renorm_batch(const BeliefTree<Key>& h, std::vector<Key> minus) {
  std::sort(minus.begin(), minus.end());
  BeliefTree<Key> cur = h;
  for (const auto& k : minus) {
    int i = cur.find(k);
    if (i < 0) throw std::invalid_argument("renorm target not materialized");
    cur = renorm(cur, i);
  }
  cur.assert_invariants();
  return cur;
}

// ---------------------------------------------------------------------------
// Constituent trees

using HT = BeliefTree<Constituent>;

/// Replaces a frontier leaf's implicit refinements by materialized
/// children that split its weight evenly.
inline void expand_uniform(const Language& lang, HT& h, int leaf, std::size_t cap = kDefaultCap) {
  if (!h.leaf(leaf)) return;
  auto kids = refine_children(lang, h.key(leaf), cap);
  const Rational share = h.weight(leaf) / static_cast<long long>(kids.size());
  for (auto& k : kids) h.add_child(leaf, std::move(k), share);
}

/// Each node's weight split equally among all of its refinements, to depth D.
inline HT make_parent_uniform(const Language& lang, int D, std::size_t cap = kDefaultCap) {
  HT h(top_constituent());
  std::vector<int> layer{h.root()};
  for (int d = 0; d < D; ++d) {
    std::vector<int> next;
    for (int i : layer) {
      expand_uniform(lang, h, i, cap);
      if (h.size() > cap) throw CapExceeded("tree exceeds cap");
      next.insert(next.end(), h.node(i).kids.begin(), h.node(i).kids.end());
    }
    layer = std::move(next);
  }
  h.assert_invariants();
  return h;
}

struct DepthUniformReport {
  HT tree;                                     // weights 1/|Delta^(d)| at depth d
  bool coherent = true;
  std::vector<std::pair<int, Rational>> residuals;  // node, w(node) - sum of children
};

/// The uninformative assignment, validated rather than assumed coherent.
inline DepthUniformReport make_depth_uniform(const Language& lang, int D, std::size_t cap = kDefaultCap) {
  DepthUniformReport r{HT(top_constituent()), true, {}};
  std::vector<int> layer{0};
  for (int d = 1; d <= D; ++d) {
    const Rational w(BigInt(1), count_constituents(lang, d));
    std::vector<int> next;
    for (int i : layer) {
      for (auto& k : refine_children(lang, r.tree.key(i), cap)) next.push_back(r.tree.add_child(i, std::move(k), w));
      if (r.tree.size() > cap) throw CapExceeded("tree exceeds cap");
    }
    layer = std::move(next);
  }
  for (int i = 0; i < static_cast<int>(r.tree.size()); ++i) {
    const auto& n = r.tree.node(i);
    if (n.kids.empty()) continue;
    Rational s = 0;
    for (int c : n.kids) s += r.tree.weight(c);
    if (s != n.w) {
      r.coherent = false;
      r.residuals.push_back({i, n.w - s});
    }
  }
  return r;
}

/// Monadic depth HT to depth D: only consistent refinements are
/// materialized, each parent's weight split evenly among them.
inline HT make_depth_ht(const MonadicModels& models, int D) {
  HT h(top_constituent());
  std::vector<int> layer{0};
  for (int d = 0; d < D; ++d) {
    std::vector<int> next;
    for (int i : layer) {
      auto kids = models.consistent_children(h.key(i));
      if (kids.empty()) continue;
      const Rational share = h.weight(i) / static_cast<long long>(kids.size());
      for (auto& k : kids) next.push_back(h.add_child(i, std::move(k), share));
    }
    layer = std::move(next);
  }
  h.assert_invariants();
  return h;
}

/// H^{d+1} = renorm over the trivially inconsistent depth d+1 nodes.
inline HT belief_sequence_step(const Language& lang, const HT& h, int depth) {
  std::vector<Constituent> minus;
  for (int i : h.at_depth(depth))
    if (trivially_inconsistent(lang, h.key(i))) minus.push_back(h.key(i));
  return renorm_batch(h, minus);
}

/// Iterates the belief sequence from depth 1 to the deepest materialized depth.
inline HT converge(const Language& lang, const HT& h) {
  HT cur = h;
  for (int d = 1; d <= h.max_depth(); ++d) cur = belief_sequence_step(lang, cur, d);
  return cur;
}

inline bool is_reasonable(const Language& lang, const HT& h) {
  for (int i = 0; i < static_cast<int>(h.size()); ++i)
    if (h.weight(i) == 0 && !trivially_inconsistent(lang, h.key(i))) return false;
  return true;
}

/// Sum of weights of depth-d nodes in dnf(phi); free variables are closed
/// universally first.
inline Rational belief_in_sentence(const Language& lang, const HT& h, const Formula& phi, int d) {
  Formula s = is_sentence(phi) ? phi : universal_closure(phi);
  if (depth(s) > d) throw DepthTooSmall("sentence deeper than requested depth");
  Rational total = 0;
  for (int i = 0; i < static_cast<int>(h.size()); ++i) {
    const auto& n = h.node(i);
    if (n.depth < d && n.kids.empty() && n.w > 0)
      throw BeyondFrontier("depth " + std::to_string(d) + " not materialized below node " + std::to_string(i));
    if (n.depth == d && dnf_member(lang, s, n.key)) total += n.w;
  }
  return total;
}

/// Weight of a constituent in a sparse tree: refinements missing below an
/// expanded node carry 0.
inline Rational ht_weight(const HT& h, const Constituent& c) {
  Constituent cur = c;
  while (true) {
    int i = h.find(cur);
    if (i >= 0) {
      if (cur.depth == c.depth) return h.weight(i);
      if (h.leaf(i) && h.weight(i) > 0) throw BeyondFrontier("constituent lies below a frontier leaf");
      return 0;
    }
    if (cur.depth == 0) return 0;
    cur = truncate(cur);
  }
}

inline bool prove(const Language& lang, const HT& h, const Formula& phi, int d) {
  return belief_in_sentence(lang, h, phi, d) == 1;
}

}  // namespace hintikka
