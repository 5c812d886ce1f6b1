#pragma once
// Attributive constituents and constituents: counting, enumeration, text
// form, truncation/refinement, rendering, characteristic constituents of
// finite structures and the trivial-inconsistency test.

#include "fol.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintikka {

/// Default bound on any materialized set of constituents.
inline constexpr std::size_t kDefaultCap = std::size_t{1} << 20;

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An atom over y1..yk; arguments are 1-based variable indices.
struct AtomRef {
  int pred = 0;
  std::vector<int> args;
  bool operator==(const AtomRef&) const = default;
  auto operator<=>(const AtomRef&) const = default;
};

/// Signature plus the atom bases B[y1..yk] (atoms mentioning y_k).
class Language {
 public:
  static constexpr int kMaxBits = 63;

  explicit Language(Signature sig) : sig_(std::move(sig)) {
    for (int k = 0; k <= 24; ++k) {
      std::vector<AtomRef> atoms;
      for (std::size_t p = 0; p < sig_.size(); ++p) {
        const int a = sig_[p].arity;
        std::vector<int> t(a, 1);
        if (k == 0) continue;
        while (true) {
          if (std::find(t.begin(), t.end(), k) != t.end()) atoms.push_back({static_cast<int>(p), t});
          int i = a - 1;
          while (i >= 0 && t[i] == k) t[i--] = 1;
          if (i < 0) break;
          ++t[i];
        }
      }
      if (static_cast<int>(atoms.size()) > kMaxBits) break;
      std::map<AtomRef, int> idx;
      for (std::size_t i = 0; i < atoms.size(); ++i) idx[atoms[i]] = static_cast<int>(i);
      last_.push_back(std::move(atoms));
      index_.push_back(std::move(idx));
    }
  }

  const Signature& signature() const { return sig_; }

  int max_terms() const { return static_cast<int>(last_.size()) - 1; }

  const std::vector<AtomRef>& last_atoms(int k) const {
    check(k);
    return last_[k];
  }
  int base_len(int k) const { return static_cast<int>(last_atoms(k).size()); }
  int atom_index(int k, const AtomRef& a) const {
    check(k);
    auto it = index_[k].find(a);
    if (it == index_[k].end()) throw std::logic_error("atom not in basis");
    return it->second;
  }

  /// All atoms over y1..yk, grouped by the last variable they mention.
  std::vector<AtomRef> all_atoms(int k) const {
    std::vector<AtomRef> out;
    for (int j = 1; j <= k; ++j) {
      const auto& l = last_atoms(j);
      out.insert(out.end(), l.begin(), l.end());
    }
    return out;
  }

 private:
  void check(int k) const {
    if (k < 0 || k > max_terms())
      throw std::out_of_range("too many free terms for a 64-bit atom basis (k=" + std::to_string(k) + ")");
  }

  Signature sig_;
  std::vector<std::vector<AtomRef>> last_;
  std::vector<std::map<AtomRef, int>> index_;
};

// Bases are bitstrings with the first atom as the most significant bit, so
// numeric order on `base` equals lexicographic order on the bitstring.
inline bool base_bit(std::uint64_t base, int len, int i) { return (base >> (len - 1 - i)) & 1u; }
inline void set_base_bit(std::uint64_t& base, int len, int i, bool v) {
  const std::uint64_t m = std::uint64_t{1} << (len - 1 - i);
  base = v ? (base | m) : (base & ~m);
}

/// gamma^(d)[y1..yk]: a base over B[y1..yk] plus the sign map over the
/// depth d-1 attributive constituents in one more term, stored as its
/// positive set (sorted ascending, distinct).
struct AttrConstituent {
  int depth = 0;
  int k = 0;
  std::uint64_t base = 0;
  std::vector<AttrConstituent> pos;
};

/// Sentence constituents are attributive constituents with k = 0 (their
/// A-part is empty). Depth 0 is the single constituent "true".
using Constituent = AttrConstituent;

/// Total order: depth, k, base, then the sign map read as a bitstring with
/// the smallest child index as the most significant position.
inline int compare(const AttrConstituent& a, const AttrConstituent& b) {
  if (a.depth != b.depth) return a.depth < b.depth ? -1 : 1;
  if (a.k != b.k) return a.k < b.k ? -1 : 1;
  if (a.base != b.base) return a.base < b.base ? -1 : 1;
  const std::size_t n = std::min(a.pos.size(), b.pos.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(a.pos[i], b.pos[i]);
    if (c != 0) return c < 0 ? 1 : -1;  // whoever holds the smaller index is greater
  }
  if (a.pos.size() == b.pos.size()) return 0;
  return a.pos.size() > b.pos.size() ? 1 : -1;
}

inline bool operator==(const AttrConstituent& a, const AttrConstituent& b) { return compare(a, b) == 0; }
inline bool operator!=(const AttrConstituent& a, const AttrConstituent& b) { return compare(a, b) != 0; }
inline bool operator<(const AttrConstituent& a, const AttrConstituent& b) { return compare(a, b) < 0; }

inline void canonicalize(std::vector<AttrConstituent>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline Constituent top_constituent() { return Constituent{}; }

// ---------------------------------------------------------------------------
// Text form:  constituent := depth attr ;  attr := "[" bits (":{" attr ("," attr)* "}")? "]"
// The child list is present iff the depth is positive and lists the
// positive children only, in ascending order.

namespace detail {
inline void write_attr(const Language& lang, const AttrConstituent& a, std::string& out) {
  out += '[';
  const int len = lang.base_len(a.k);
  for (int i = 0; i < len; ++i) out += base_bit(a.base, len, i) ? '1' : '0';
  if (a.depth > 0) {
    out += ":{";
    for (std::size_t i = 0; i < a.pos.size(); ++i) {
      if (i) out += ',';
      write_attr(lang, a.pos[i], out);
    }
    out += '}';
  }
  out += ']';
}

struct AttrReader {
  const Language& lang;
  const std::string& s;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("constituent text: " + what + " at offset " + std::to_string(i));
  }
  void expect(char c) {
    if (i >= s.size() || s[i] != c) fail(std::string("expected '") + c + "'");
    ++i;
  }
  AttrConstituent read(int depth, int k) {
    AttrConstituent a;
    a.depth = depth;
    a.k = k;
    expect('[');
    const int len = lang.base_len(k);
    for (int b = 0; b < len; ++b) {
      if (i >= s.size() || (s[i] != '0' && s[i] != '1')) fail("expected base bit");
      set_base_bit(a.base, len, b, s[i] == '1');
      ++i;
    }
    if (depth > 0) {
      expect(':');
      expect('{');
      if (i < s.size() && s[i] != '}') {
        a.pos.push_back(read(depth - 1, k + 1));
        while (i < s.size() && s[i] == ',') {
          ++i;
          a.pos.push_back(read(depth - 1, k + 1));
        }
      }
      expect('}');
      for (std::size_t j = 1; j < a.pos.size(); ++j)
        if (!(a.pos[j - 1] < a.pos[j])) fail("children not strictly ascending");
    }
    expect(']');
    return a;
  }
};
}  // namespace detail

inline std::string attr_text(const Language& lang, const AttrConstituent& a) {
  std::string out;
  detail::write_attr(lang, a, out);
  return out;
}

inline std::string to_text(const Language& lang, const Constituent& c) {
  return std::to_string(c.depth) + attr_text(lang, c);
}

inline Constituent parse_constituent(const Language& lang, const std::string& text, int k = 0) {
  std::size_t i = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == 0) throw std::invalid_argument("constituent text: missing depth prefix");
  int d = std::stoi(text.substr(0, i));
  detail::AttrReader r{lang, text, i};
  Constituent c = r.read(d, k);
  if (r.i != text.size()) r.fail("trailing input");
  return c;
}

// ---------------------------------------------------------------------------
// Counting and enumeration

struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Number of depth-d attributive constituents describing y_k given y_1..y_{k-1}.
inline BigInt count_attr(const Language& lang, int d, int k) {
  BigInt g0 = BigInt(1) << lang.base_len(k);
  if (d == 0) return g0;
  BigInt children = count_attr(lang, d - 1, k + 1);
  if (children > BigInt(1) << 24) throw TooLarge("count exceeds representable size (2^" + children.str() + ")");
  return g0 << static_cast<unsigned>(children);
}

/// Number of sentence constituents of depth d (k = 0) or attributive ones for k > 0.
inline BigInt count_constituents(const Language& lang, int d, int k = 0) { return count_attr(lang, d, k); }

/// Every attributive constituent of depth d describing y_k, ascending.
inline std::vector<AttrConstituent> enumerate_attr(const Language& lang, int d, int k,
                                                   std::size_t cap = kDefaultCap) {
  BigInt n = count_attr(lang, d, k);
  if (n > cap) throw CapExceeded("enumeration of " + n.str() + " constituents exceeds cap " + std::to_string(cap));
  const int len = lang.base_len(k);
  std::vector<AttrConstituent> out;
  out.reserve(static_cast<std::size_t>(n));
  if (d == 0) {
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << len); ++b) out.push_back({0, k, b, {}});
    return out;
  }
  auto kids = enumerate_attr(lang, d - 1, k + 1, cap);
  const std::size_t m = kids.size();
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << len); ++b)
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
      AttrConstituent a{d, k, b, {}};
      for (std::size_t i = 0; i < m; ++i)
        if (s >> (m - 1 - i) & 1u) a.pos.push_back(kids[i]);
      out.push_back(std::move(a));
    }
  return out;
}

inline std::vector<Constituent> enumerate_constituents(const Language& lang, int d, std::size_t cap = kDefaultCap) {
  return enumerate_attr(lang, d, 0, cap);
}

// ---------------------------------------------------------------------------
// Truncation and refinement

/// Removes the deepest layer.
inline AttrConstituent truncate(const AttrConstituent& a) {
  if (a.depth == 0) throw std::invalid_argument("cannot truncate a depth-0 constituent");
  AttrConstituent out{a.depth - 1, a.k, a.base, {}};
  if (out.depth > 0) {
    out.pos.reserve(a.pos.size());
    for (const auto& c : a.pos) out.pos.push_back(truncate(c));
    canonicalize(out.pos);
  }
  return out;
}

/// Truncates to depth `d` (no-op when already there).
inline AttrConstituent truncate_to(const AttrConstituent& a, int d) {
  AttrConstituent out = a;
  while (out.depth > d) out = truncate(out);
  return out;
}

/// Number of one-step refinements; truncation is a function, so this is
/// also the number of children in the refinement tree.
inline BigInt count_children(const Language& lang, const AttrConstituent& a) {
  if (a.depth == 0) {
    BigInt n = count_attr(lang, 0, a.k + 1);
    if (n > 1 << 24) throw TooLarge("child count too large");
    return BigInt(1) << static_cast<unsigned>(n);
  }
  BigInt prod = 1;
  for (const auto& c : a.pos) {
    BigInt n = count_children(lang, c);
    if (n > 1 << 24) throw TooLarge("child count too large");
    prod *= (BigInt(1) << static_cast<unsigned>(n)) - 1;
  }
  return prod;
}

/// { a' : truncate(a') = a }, ascending.
inline std::vector<AttrConstituent> refine_children(const Language& lang, const AttrConstituent& a,
                                                    std::size_t cap = kDefaultCap) {
  BigInt n = count_children(lang, a);
  if (n > cap) throw CapExceeded("refinement of size " + n.str() + " exceeds cap " + std::to_string(cap));
  std::vector<AttrConstituent> out;
  if (a.depth == 0) {
    auto kids = enumerate_attr(lang, 0, a.k + 1, cap);
    const std::size_t m = kids.size();
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
      AttrConstituent r{1, a.k, a.base, {}};
      for (std::size_t i = 0; i < m; ++i)
        if (s >> (m - 1 - i) & 1u) r.pos.push_back(kids[i]);
      out.push_back(std::move(r));
    }
    return out;
  }
  // For each positive child choose a non-empty set of its refinements.
  std::vector<std::vector<AttrConstituent>> pre;
  for (const auto& c : a.pos) pre.push_back(refine_children(lang, c, cap));
  std::vector<std::uint64_t> choice(pre.size(), 1);
  while (true) {
    AttrConstituent r{a.depth + 1, a.k, a.base, {}};
    for (std::size_t j = 0; j < pre.size(); ++j)
      for (std::size_t i = 0; i < pre[j].size(); ++i)
        if (choice[j] >> i & 1u) r.pos.push_back(pre[j][i]);
    canonicalize(r.pos);
    out.push_back(std::move(r));
    std::size_t j = 0;
    while (j < pre.size()) {
      if (++choice[j] < (std::uint64_t{1} << pre[j].size())) break;
      choice[j] = 1;
      ++j;
    }
    if (j == pre.size()) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// e-fold refinement, ascending.
inline std::vector<AttrConstituent> expand(const Language& lang, int e, const AttrConstituent& a,
                                           std::size_t cap = kDefaultCap) {
  std::vector<AttrConstituent> cur{a};
  for (int step = 0; step < e; ++step) {
    std::vector<AttrConstituent> next;
    for (const auto& c : cur) {
      auto kids = refine_children(lang, c, cap);
      if (next.size() + kids.size() > cap) throw CapExceeded("expansion exceeds cap");
      next.insert(next.end(), kids.begin(), kids.end());
    }
    std::sort(next.begin(), next.end());
    cur = std::move(next);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Semantics

namespace detail {
inline bool atom_holds(const FiniteStructure& m, const AtomRef& a, const std::vector<int>& elems) {
  std::vector<int> t;
  t.reserve(a.args.size());
  for (int v : a.args) t.push_back(elems[v - 1]);
  return m.holds(a.pred, t);
}
}  // namespace detail

/// The unique depth-d attributive constituent true of elems (y1..yk) in m.
inline AttrConstituent characteristic_attr(const Language& lang, const FiniteStructure& m, std::vector<int>& elems,
                                           int d) {
  const int k = static_cast<int>(elems.size());
  AttrConstituent a{d, k, 0, {}};
  const auto& atoms = lang.last_atoms(k);
  const int len = static_cast<int>(atoms.size());
  for (int i = 0; i < len; ++i) set_base_bit(a.base, len, i, detail::atom_holds(m, atoms[i], elems));
  if (d > 0) {
    for (int b = 0; b < m.domain_size; ++b) {
      elems.push_back(b);
      a.pos.push_back(characteristic_attr(lang, m, elems, d - 1));
      elems.pop_back();
    }
    canonicalize(a.pos);
  }
  return a;
}

/// The unique depth-d constituent satisfied by m.
inline Constituent characteristic(const Language& lang, const FiniteStructure& m, int d) {
  std::vector<int> elems;
  return characteristic_attr(lang, m, elems, d);
}

inline std::string var_name(int i) { return "x" + std::to_string(i); }

/// gamma as a formula in free variables x1..xk:
///   base literals & AND_{c+} (E x_{k+1}) c & (A x_{k+1}) OR_{c+} c
inline Formula render_attr(const Language& lang, const AttrConstituent& a) {
  std::vector<Formula> parts;
  const auto& atoms = lang.last_atoms(a.k);
  const int len = static_cast<int>(atoms.size());
  for (int i = 0; i < len; ++i) {
    std::vector<std::string> args;
    for (int v : atoms[i].args) args.push_back(var_name(v));
    Formula at = Formula::atom(atoms[i].pred, args);
    parts.push_back(base_bit(a.base, len, i) ? at : Formula::neg(at));
  }
  if (a.depth > 0) {
    const std::string x = var_name(a.k + 1);
    std::vector<Formula> kids;
    for (const auto& c : a.pos) kids.push_back(render_attr(lang, c));
    for (const auto& f : kids) parts.push_back(Formula::exists(x, f));
    parts.push_back(Formula::forall(x, Formula::disj_all(kids)));
  }
  return Formula::conj_all(parts);
}

inline Formula render_formula(const Language& lang, const Constituent& c) { return render_attr(lang, c); }

// ---------------------------------------------------------------------------
// Trivial inconsistency

namespace detail {

inline bool atom_value(const Language& lang, const std::vector<std::uint64_t>& stack, const AtomRef& a) {
  int j = *std::max_element(a.args.begin(), a.args.end());
  return base_bit(stack[j - 1], lang.base_len(j), lang.atom_index(j, a));
}

/// Drops every atom mentioning variable j from an attributive constituent
/// describing y_n (n > j) and renumbers the remaining variables.
inline AttrConstituent delete_var(const Language& lang, const AttrConstituent& a, int j) {
  const int n = a.k;
  AttrConstituent out{a.depth, n - 1, 0, {}};
  const auto& atoms = lang.last_atoms(n);
  const int len = static_cast<int>(atoms.size());
  const int out_len = lang.base_len(n - 1);
  for (int i = 0; i < len; ++i) {
    const auto& at = atoms[i];
    if (std::find(at.args.begin(), at.args.end(), j) != at.args.end()) continue;
    AtomRef r{at.pred, at.args};
    for (int& v : r.args)
      if (v > j) --v;
    set_base_bit(out.base, out_len, lang.atom_index(n - 1, r), base_bit(a.base, len, i));
  }
  for (const auto& c : a.pos) out.pos.push_back(delete_var(lang, c, j));
  canonicalize(out.pos);
  return out;
}

inline bool trivially_inconsistent(const Language& lang, const AttrConstituent& a, std::vector<std::uint64_t>& stack) {
  const int k = a.k;
  if (a.depth == 0) return false;
  // Instantiation: every existing term must realize one of the positive
  // children when substituted for the quantified variable.
  if (k >= 1) {
    const auto& atoms = lang.last_atoms(k + 1);
    const int len = static_cast<int>(atoms.size());
    for (int i = 1; i <= k; ++i) {
      bool realized = false;
      for (const auto& c : a.pos) {
        bool ok = true;
        for (int t = 0; t < len && ok; ++t) {
          AtomRef s = atoms[t];
          for (int& v : s.args)
            if (v == k + 1) v = i;
          ok = atom_value(lang, stack, s) == base_bit(c.base, len, t);
        }
        if (ok) { realized = true; break; }
      }
      if (!realized) return true;
    }
  }
  // Cross-consistency: what a positive child says about "all other
  // individuals" must agree with the shallower view from the current level.
  if (a.depth >= 2) {
    std::vector<AttrConstituent> shallow;
    for (const auto& c : a.pos) shallow.push_back(truncate(c));
    canonicalize(shallow);
    for (const auto& c : a.pos) {
      std::vector<AttrConstituent> seen;
      for (const auto& g : c.pos) seen.push_back(delete_var(lang, g, k + 1));
      canonicalize(seen);
      if (seen != shallow) return true;
    }
  }
  for (const auto& c : a.pos) {
    stack.push_back(c.base);
    bool bad = trivially_inconsistent(lang, c, stack);
    stack.pop_back();
    if (bad) return true;
  }
  return false;
}
}  // namespace detail

/// Sound syntactic test: true only for inconsistent constituents.
inline bool trivially_inconsistent(const Language& lang, const Constituent& c) {
  std::vector<std::uint64_t> stack;
  return detail::trivially_inconsistent(lang, c, stack);
}

enum class Verdict { Consistent, Inconsistent, Unknown };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Inconsistent: return "inconsistent";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

/// Inconsistent iff every member of expand(e, c) is trivially inconsistent.
/// A trivially inconsistent constituent has only trivially inconsistent
/// refinements, which lets the search stop early.
inline Verdict inconsistent_at_effort(const Language& lang, const Constituent& c, int e,
                                      std::size_t cap = kDefaultCap) {
  if (trivially_inconsistent(lang, c)) return Verdict::Inconsistent;
  if (e == 0) return Verdict::Unknown;
  for (const auto& child : refine_children(lang, c, cap))
    if (inconsistent_at_effort(lang, child, e - 1, cap) != Verdict::Inconsistent) return Verdict::Unknown;
  return Verdict::Inconsistent;
}

}  // namespace hintikka
