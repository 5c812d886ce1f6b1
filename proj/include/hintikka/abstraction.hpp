#pragma once
// Observation masks, filtrations and super constituents.
//
// A depth-d constituent is determined by which depth d-1 attributive
// constituents in one term (its "positions") it marks as existing. A mask
// observes some of these positions; constituents that agree on every
// observed position share a cell.

#include "belief_tree.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintikka {

struct IncompatibleFiltration : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct LayerMask {
  enum class Kind { None, Explicit, All };
  Kind kind = Kind::None;
  std::vector<AttrConstituent> observed;  // Explicit only; ascending, depth d-1, k = 1

  bool operator==(const LayerMask&) const = default;

  bool observes(const AttrConstituent& p) const {
    if (kind == Kind::All) return true;
    if (kind == Kind::None) return false;
    return std::binary_search(observed.begin(), observed.end(), p);
  }
  /// Every position observed here is observed by `finer`.
  bool covered_by(const LayerMask& finer) const {
    if (finer.kind == Kind::All || kind == Kind::None) return true;
    if (kind == Kind::All) return false;
    if (finer.kind == Kind::None) return observed.empty();
    return std::includes(finer.observed.begin(), finer.observed.end(), observed.begin(), observed.end());
  }
};

/// Masks for depths 1..max_depth(); deeper layers repeat the last layer's
/// kind (only None and All may be extended this way).
class Filtration {
 public:
  Filtration() = default;
  explicit Filtration(std::vector<LayerMask> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) layers_.resize(1);
  }

  static Filtration trivial() { return Filtration({LayerMask{}}); }
  static Filtration complete() { return Filtration({LayerMask{}, LayerMask{LayerMask::Kind::All, {}}}); }

  int max_depth() const { return static_cast<int>(layers_.size()) - 1; }

  LayerMask layer(int d) const {
    if (d <= 0) return LayerMask{};
    if (d < static_cast<int>(layers_.size())) return layers_[d];
    const auto& last = layers_.back();
    if (last.kind == LayerMask::Kind::Explicit && !last.observed.empty())
      throw IncompatibleFiltration("explicit mask not closed to depth " + std::to_string(d));
    return LayerMask{last.kind == LayerMask::Kind::All ? LayerMask::Kind::All : LayerMask::Kind::None, {}};
  }

  void set_layer(int d, LayerMask m) {
    if (d <= 0) throw std::invalid_argument("masks start at depth 1");
    if (d >= static_cast<int>(layers_.size())) layers_.resize(d + 1);
    layers_[d] = std::move(m);
  }

  /// Adds every truncation preimage of each observed position to the next
  /// depth, up to max_depth, and propagates All downward in the tree.
  void close(const Language& lang, int max_depth, std::size_t cap = kDefaultCap) {
    if (max_depth >= static_cast<int>(layers_.size())) {
      LayerMask fill = layers_.back();
      if (fill.kind == LayerMask::Kind::Explicit) fill.observed.clear();
      if (fill.kind == LayerMask::Kind::Explicit) fill.kind = LayerMask::Kind::None;
      layers_.resize(max_depth + 1, fill);
    }
    for (int d = 1; d < static_cast<int>(layers_.size()) - 1; ++d) {
      const auto& cur = layers_[d];
      auto& next = layers_[d + 1];
      if (cur.kind == LayerMask::Kind::All) {
        next = LayerMask{LayerMask::Kind::All, {}};
        continue;
      }
      if (cur.kind != LayerMask::Kind::Explicit || next.kind == LayerMask::Kind::All) continue;
      std::vector<AttrConstituent> add = next.observed;
      for (const auto& p : cur.observed) {
        auto pre = refine_children(lang, p, cap);
        add.insert(add.end(), pre.begin(), pre.end());
        if (add.size() > cap) throw CapExceeded("mask closure exceeds cap");
      }
      canonicalize(add);
      next = LayerMask{add.empty() ? LayerMask::Kind::None : LayerMask::Kind::Explicit, std::move(add)};
    }
  }

  /// Cross-depth compatibility: each cell at depth d+1 lies inside one cell
  /// at depth d.
  void validate(const Language& lang, std::size_t cap = kDefaultCap) const {
    for (int d = 1; d < max_depth(); ++d) {
      const auto cur = layer(d), next = layer(d + 1);
      if (cur.kind == LayerMask::Kind::All && next.kind != LayerMask::Kind::All)
        throw IncompatibleFiltration("depth " + std::to_string(d) + " observes everything but depth " +
                                     std::to_string(d + 1) + " does not");
      if (cur.kind != LayerMask::Kind::Explicit) continue;
      for (const auto& p : cur.observed)
        for (const auto& q : refine_children(lang, p, cap))
          if (!next.observes(q))
            throw IncompatibleFiltration("preimage of an observed position is unobserved at depth " +
                                         std::to_string(d + 1));
    }
  }

  /// This filtration's partition at every depth is refined by `finer`'s.
  bool refined_by(const Filtration& finer) const {
    const int D = std::max(max_depth(), finer.max_depth());
    for (int d = 1; d <= D; ++d)
      if (!layer(d).covered_by(finer.layer(d))) return false;
    return true;
  }

  bool operator==(const Filtration& o) const {
    const int D = std::max(max_depth(), o.max_depth());
    for (int d = 1; d <= D; ++d)
      if (!(layer(d) == o.layer(d))) return false;
    return true;
  }

 private:
  std::vector<LayerMask> layers_{LayerMask{}};
};

/// A super constituent: a cell of the partition at one depth.
struct Cell {
  int depth = 0;
  LayerMask::Kind kind = LayerMask::Kind::None;
  std::vector<bool> pattern;  // Explicit: signs of the observed positions
  Constituent member;         // All: the single member

  bool operator==(const Cell& o) const {
    return depth == o.depth && kind == o.kind && pattern == o.pattern && member == o.member;
  }
  bool operator<(const Cell& o) const {
    if (depth != o.depth) return depth < o.depth;
    if (kind != o.kind) return kind < o.kind;
    if (pattern != o.pattern) return pattern < o.pattern;
    return member < o.member;
  }
};

inline Cell trivial_cell(int d) {
  Cell c;
  c.depth = d;
  if (d == 0) {
    c.kind = LayerMask::Kind::All;
    c.member = top_constituent();
  }
  return c;
}

/// `depth:*`, `depth:o<bits>` or `depth:c<constituent text>`.
inline std::string cell_id(const Language& lang, const Cell& c) {
  std::string s = std::to_string(c.depth) + ":";
  switch (c.kind) {
    case LayerMask::Kind::None: return s + "*";
    case LayerMask::Kind::Explicit:
      s += "o";
      for (bool b : c.pattern) s += b ? '1' : '0';
      return s;
    case LayerMask::Kind::All: return s + "c" + to_text(lang, c.member);
  }
  return s;
}

inline Cell parse_cell_id(const Language& lang, const std::string& id) {
  auto colon = id.find(':');
  if (colon == std::string::npos || colon + 1 >= id.size()) throw std::invalid_argument("bad cell id '" + id + "'");
  Cell c;
  c.depth = std::stoi(id.substr(0, colon));
  const char tag = id[colon + 1];
  const std::string body = id.substr(colon + 2);
  if (tag == '*') {
    c.kind = LayerMask::Kind::None;
  } else if (tag == 'o') {
    c.kind = LayerMask::Kind::Explicit;
    for (char ch : body) {
      if (ch != '0' && ch != '1') throw std::invalid_argument("bad cell pattern in '" + id + "'");
      c.pattern.push_back(ch == '1');
    }
  } else if (tag == 'c') {
    c.kind = LayerMask::Kind::All;
    c.member = parse_constituent(lang, body);
    if (c.member.depth != c.depth) throw std::invalid_argument("cell depth mismatch in '" + id + "'");
  } else {
    throw std::invalid_argument("bad cell id '" + id + "'");
  }
  return c;
}

inline Cell cell_of(const Filtration& f, const Constituent& delta) {
  if (delta.depth == 0) return trivial_cell(0);
  const LayerMask m = f.layer(delta.depth);
  Cell c;
  c.depth = delta.depth;
  c.kind = m.kind;
  if (m.kind == LayerMask::Kind::All) c.member = delta;
  if (m.kind == LayerMask::Kind::Explicit)
    for (const auto& p : m.observed) c.pattern.push_back(std::binary_search(delta.pos.begin(), delta.pos.end(), p));
  return c;
}

/// Members of a cell, ascending.
inline std::vector<Constituent> cell_members(const Language& lang, const Filtration& f, const Cell& cell,
                                             std::size_t cap = kDefaultCap) {
  if (cell.kind == LayerMask::Kind::All) return {cell.member};
  std::vector<Constituent> out;
  for (auto& c : enumerate_constituents(lang, cell.depth, cap))
    if (cell_of(f, c) == cell) out.push_back(std::move(c));
  return out;
}

/// Partition of Delta^(d) induced by the filtration's mask at depth d.
inline std::vector<std::pair<Cell, std::vector<Constituent>>> partition_from_mask(const Language& lang,
                                                                                  const Filtration& f, int d,
                                                                                  std::size_t cap = kDefaultCap) {
  std::map<Cell, std::vector<Constituent>> cells;
  for (auto& c : enumerate_constituents(lang, d, cap)) cells[cell_of(f, c)].push_back(std::move(c));
  return {cells.begin(), cells.end()};
}

namespace detail {
/// Patterns over `n` positions where fixed[i] >= 0 forces a bit.
inline void patterns(const std::vector<int>& fixed, std::vector<std::vector<bool>>& out, std::size_t cap) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i] < 0) free.push_back(i);
  if (free.size() >= 63 || (std::uint64_t{1} << free.size()) > cap) throw CapExceeded("too many cells");
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << free.size()); ++s) {
    std::vector<bool> p(fixed.size());
    for (std::size_t i = 0; i < fixed.size(); ++i) p[i] = fixed[i] > 0;
    for (std::size_t j = 0; j < free.size(); ++j) p[free[j]] = s >> (free.size() - 1 - j) & 1u;
    out.push_back(std::move(p));
  }
}
}  // namespace detail

/// Splits `cell` (a cell of `f`) into the cells of `finer` it contains.
inline std::vector<Cell> refine_cell(const Language& lang, const Filtration& f, const Cell& cell,
                                     const Filtration& finer, std::size_t cap = kDefaultCap) {
  if (!f.refined_by(finer)) throw std::invalid_argument("mask is not finer");
  const int d = cell.depth;
  const LayerMask coarse = f.layer(d), fine = finer.layer(d);
  if (d == 0) return {cell};
  std::vector<Cell> out;
  if (fine.kind == LayerMask::Kind::All) {
    for (auto& m : cell_members(lang, f, cell, cap)) out.push_back(cell_of(finer, m));
  } else if (fine.kind == LayerMask::Kind::None) {
    out.push_back(cell);
  } else {
    std::vector<int> fixed(fine.observed.size(), -1);
    for (std::size_t i = 0; i < fine.observed.size(); ++i)
      if (coarse.kind == LayerMask::Kind::Explicit) {
        auto it = std::lower_bound(coarse.observed.begin(), coarse.observed.end(), fine.observed[i]);
        if (it != coarse.observed.end() && *it == fine.observed[i])
          fixed[i] = cell.pattern[it - coarse.observed.begin()] ? 1 : 0;
      }
    std::vector<std::vector<bool>> pats;
    detail::patterns(fixed, pats, cap);
    for (auto& p : pats) out.push_back(Cell{d, LayerMask::Kind::Explicit, std::move(p), {}});
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// The depth-d cell containing the truncations of a depth-(d+1) cell's members.
inline Cell parent_cell(const Language& lang, const Filtration& f, const Cell& child, std::size_t cap = kDefaultCap) {
  if (child.depth == 0) throw std::invalid_argument("root cell has no parent");
  const int d = child.depth - 1;
  if (d == 0) return trivial_cell(0);
  const LayerMask pm = f.layer(d);
  switch (child.kind) {
    case LayerMask::Kind::All: return cell_of(f, truncate(child.member));
    case LayerMask::Kind::None:
      if (pm.kind != LayerMask::Kind::None) throw IncompatibleFiltration("coarse child under finer parent");
      return trivial_cell(d);
    case LayerMask::Kind::Explicit: {
      if (pm.kind == LayerMask::Kind::None) return trivial_cell(d);
      if (pm.kind == LayerMask::Kind::All) throw IncompatibleFiltration("coarse child under complete parent");
      const LayerMask cm = f.layer(child.depth);
      Cell out{d, LayerMask::Kind::Explicit, std::vector<bool>(pm.observed.size(), false), {}};
      for (std::size_t i = 0; i < cm.observed.size(); ++i) {
        if (!child.pattern[i]) continue;
        auto t = truncate(cm.observed[i]);
        auto it = std::lower_bound(pm.observed.begin(), pm.observed.end(), t);
        if (it != pm.observed.end() && *it == t) out.pattern[it - pm.observed.begin()] = true;
      }
      (void)lang;
      (void)cap;
      return out;
    }
  }
  return trivial_cell(d);
}

/// Depth-(d+1) cells whose members truncate into `cell`, ascending.
inline std::vector<Cell> super_children(const Language& lang, const Filtration& f, const Cell& cell,
                                        std::size_t cap = kDefaultCap) {
  const int d = cell.depth;
  const LayerMask pm = f.layer(d), cm = f.layer(d + 1);
  std::vector<Cell> out;
  if (cm.kind == LayerMask::Kind::None) {
    if (d > 0 && pm.kind != LayerMask::Kind::None) throw IncompatibleFiltration("coarse child layer");
    return {trivial_cell(d + 1)};
  }
  if (cm.kind == LayerMask::Kind::All) {
    for (const auto& m : cell_members(lang, f, cell, cap))
      for (auto& c : refine_children(lang, m, cap)) {
        out.push_back(cell_of(f, c));
        if (out.size() > cap) throw CapExceeded("too many child cells");
      }
    std::sort(out.begin(), out.end());
    return out;
  }
  // Explicit child layer.
  const std::size_t n = cm.observed.size();
  if (d == 0 || pm.kind == LayerMask::Kind::None) {
    std::vector<std::vector<bool>> pats;
    detail::patterns(std::vector<int>(n, -1), pats, cap);
    for (auto& p : pats) out.push_back(Cell{d + 1, LayerMask::Kind::Explicit, std::move(p), {}});
    return out;
  }
  if (pm.kind == LayerMask::Kind::All) throw IncompatibleFiltration("coarse child under complete parent");
  // Group child positions by the parent position they truncate to.
  std::vector<int> group(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    auto t = truncate(cm.observed[i]);
    auto it = std::lower_bound(pm.observed.begin(), pm.observed.end(), t);
    if (it != pm.observed.end() && *it == t) group[i] = static_cast<int>(it - pm.observed.begin());
  }
  std::vector<std::vector<bool>> pats;
  detail::patterns(std::vector<int>(n, -1), pats, cap);
  for (auto& p : pats) {
    std::vector<bool> induced(pm.observed.size(), false);
    for (std::size_t i = 0; i < n; ++i)
      if (group[i] >= 0 && p[i]) induced[group[i]] = true;
    if (induced == cell.pattern) out.push_back(Cell{d + 1, LayerMask::Kind::Explicit, std::move(p), {}});
  }
  return out;
}

inline bool super_trivially_inconsistent(const Language& lang, const Filtration& f, const Cell& cell,
                                         std::size_t cap = kDefaultCap) {
  for (const auto& m : cell_members(lang, f, cell, cap))
    if (!trivially_inconsistent(lang, m)) return false;
  return true;
}

/// Total weight of a cell's materialized members.
inline Rational cell_weight(const HT& h, const Filtration& f, const Cell& cell) {
  Rational s = 0;
  for (int i : h.at_depth(cell.depth))
    if (cell_of(f, h.key(i)) == cell) s += h.weight(i);
  return s;
}

// ---------------------------------------------------------------------------
// Mask files:  `<depth> none|all|idx=i,j,...|base=<bits>,<bits>...`
// Positions are indexed in ascending order of G^{d-1}_1.

inline Filtration parse_mask(const Language& lang, const std::string& text, int close_to = 0,
                             std::size_t cap = kDefaultCap) {
  Filtration f = Filtration::trivial();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    int d;
    std::string spec;
    if (!(ls >> d)) continue;
    if (!(ls >> spec) || d < 1) throw std::invalid_argument("mask line " + std::to_string(lineno) + ": malformed");
    LayerMask m;
    if (spec == "none") {
    } else if (spec == "all") {
      m.kind = LayerMask::Kind::All;
    } else {
      auto eq = spec.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("mask line " + std::to_string(lineno) + ": malformed");
      const std::string what = spec.substr(0, eq);
      std::vector<std::string> items;
      std::stringstream ss(spec.substr(eq + 1));
      for (std::string it; std::getline(ss, it, ',');)
        if (!it.empty()) items.push_back(it);
      auto positions = enumerate_attr(lang, d - 1, 1, cap);
      m.kind = LayerMask::Kind::Explicit;
      if (what == "idx") {
        for (const auto& it : items) {
          std::size_t k = std::stoul(it);
          if (k >= positions.size()) throw std::invalid_argument("mask line " + std::to_string(lineno) + ": index out of range");
          m.observed.push_back(positions[k]);
        }
      } else if (what == "base") {
        const int len = lang.base_len(1);
        for (const auto& p : positions) {
          std::string bits;
          for (int i = 0; i < len; ++i) bits += base_bit(p.base, len, i) ? '1' : '0';
          if (std::find(items.begin(), items.end(), bits) != items.end()) m.observed.push_back(p);
        }
      } else {
        throw std::invalid_argument("mask line " + std::to_string(lineno) + ": unknown selector '" + what + "'");
      }
      canonicalize(m.observed);
      if (m.observed.empty()) m.kind = LayerMask::Kind::None;
    }
    f.set_layer(d, std::move(m));
  }
  if (close_to > 0) f.close(lang, close_to, cap);
  f.validate(lang, cap);
  return f;
}

}  // namespace hintikka
