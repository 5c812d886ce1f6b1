#pragma once
// Distributive normal forms and consistency decisions.

#include "constituent.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintikka {

struct DepthTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct MemberCtx {
  const Language& lang;
  std::vector<const AttrConstituent*> levels;  // levels[j-1] describes y_j
  std::map<std::string, int> env;              // variable -> level
};

inline bool member(MemberCtx& ctx, const Formula& f, const AttrConstituent& cur) {
  switch (f.kind()) {
    case Kind::Top: return true;
    case Kind::Atom: {
      AtomRef a{f.pred(), {}};
      int j = 0;
      for (const auto& v : f.args()) {
        auto it = ctx.env.find(v);
        if (it == ctx.env.end()) throw std::invalid_argument("free variable '" + v + "' in dnf conversion");
        a.args.push_back(it->second);
        j = std::max(j, it->second);
      }
      const AttrConstituent* at = ctx.levels[j - 1];
      return base_bit(at->base, ctx.lang.base_len(j), ctx.lang.atom_index(j, a));
    }
    case Kind::Not: return !member(ctx, f.sub(), cur);
    case Kind::Or: return member(ctx, f.lhs(), cur) || member(ctx, f.rhs(), cur);
    case Kind::Exists: {
      if (cur.depth == 0) throw DepthTooSmall("formula deeper than constituent");
      const int level = static_cast<int>(ctx.levels.size()) + 1;
      auto it = ctx.env.find(f.var());
      std::optional<int> saved;
      if (it != ctx.env.end()) saved = it->second;
      ctx.env[f.var()] = level;
      bool found = false;
      for (const auto& c : cur.pos) {
        ctx.levels.push_back(&c);
        found = member(ctx, f.sub(), c);
        ctx.levels.pop_back();
        if (found) break;
      }
      if (saved) ctx.env[f.var()] = *saved; else ctx.env.erase(f.var());
      return found;
    }
  }
  return false;
}

}  // namespace detail

/// Whether the constituent belongs to dnf(phi) at its own depth. Membership
/// of a constituent depends only on its truncation to depth(phi), so this is
/// also membership in the expanded dnf.
inline bool dnf_member(const Language& lang, const Formula& phi, const Constituent& c) {
  if (depth(phi) > c.depth) throw DepthTooSmall("depth(phi) exceeds constituent depth");
  detail::MemberCtx ctx{lang, {}, {}};
  return detail::member(ctx, phi, c);
}

struct DnfSet {
  int depth = 0;
  std::vector<Constituent> members;  // ascending, distinct

  bool contains(const Constituent& c) const { return std::binary_search(members.begin(), members.end(), c); }
  bool operator==(const DnfSet& o) const { return depth == o.depth && members == o.members; }
};

inline DnfSet dnf(const Language& lang, const Formula& phi, int d, std::size_t cap = kDefaultCap) {
  if (!is_sentence(phi)) throw std::invalid_argument("dnf expects a sentence");
  if (depth(phi) > d) throw DepthTooSmall("depth(phi) = " + std::to_string(depth(phi)) + " > " + std::to_string(d));
  DnfSet out{d, {}};
  for (auto& c : enumerate_constituents(lang, d, cap))
    if (dnf_member(lang, phi, c)) out.members.push_back(std::move(c));
  return out;
}

inline DnfSet expand_dnf(const Language& lang, const DnfSet& s, int e, std::size_t cap = kDefaultCap) {
  DnfSet out{s.depth + e, {}};
  for (const auto& c : s.members) {
    auto ex = expand(lang, e, c, cap);
    out.members.insert(out.members.end(), ex.begin(), ex.end());
    if (out.members.size() > cap) throw CapExceeded("expanded dnf exceeds cap");
  }
  std::sort(out.members.begin(), out.members.end());
  return out;
}

/// Depth-d constituents satisfied by some world of a monadic signature.
class MonadicModels {
 public:
  explicit MonadicModels(const Language& lang) : lang_(lang), worlds_(enumerate_monadic_worlds(lang.signature())) {}

  const std::vector<QTypeWorld>& worlds() const { return worlds_; }

  /// char(W, d) for each world, in world order.
  const std::vector<Constituent>& characteristics(int d) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = chars_.find(d);
    if (it != chars_.end()) return it->second;
    std::vector<Constituent> v;
    for (const auto& w : worlds_) v.push_back(characteristic(lang_, w.to_structure(lang_.signature()), d));
    return chars_.emplace(d, std::move(v)).first->second;
  }

  bool consistent(const Constituent& c) const {
    for (const auto& x : characteristics(c.depth))
      if (x == c) return true;
    return false;
  }

  /// Consistent one-step refinements of c (never more than one per world).
  std::vector<Constituent> consistent_children(const Constituent& c) const {
    const auto& here = characteristics(c.depth);
    const auto& next = characteristics(c.depth + 1);
    std::vector<Constituent> out;
    for (std::size_t i = 0; i < here.size(); ++i)
      if (here[i] == c) out.push_back(next[i]);
    canonicalize(out);
    return out;
  }

 private:
  const Language& lang_;
  std::vector<QTypeWorld> worlds_;
  mutable std::mutex mu_;
  mutable std::map<int, std::vector<Constituent>> chars_;
};

struct ConsistencyOracle {
  enum class Backend { ExactMonadic, Bounded };
  Backend backend = Backend::ExactMonadic;
  int effort = 0;      // Bounded: expansion depth for trivial inconsistency
  int max_domain = 2;  // Bounded: largest structure searched
  std::size_t cap = kDefaultCap;

  static ConsistencyOracle exact() { return {}; }
  static ConsistencyOracle bounded(int e, int n) { return {Backend::Bounded, e, n}; }
};

/// Searches structures of size 0..n (increasing size, relation tables in
/// lexicographic order) for one whose characteristic constituent is c.
inline bool find_model(const Language& lang, const Constituent& c, int max_domain, std::size_t cap,
                       FiniteStructure* found = nullptr) {
  const Signature& sig = lang.signature();
  std::size_t budget = cap;
  for (int n = 0; n <= max_domain; ++n) {
    // One bit per (predicate, tuple).
    std::vector<std::pair<int, std::vector<int>>> slots;
    for (std::size_t p = 0; p < sig.size(); ++p) {
      std::vector<int> t(sig[p].arity, 0);
      if (n == 0) continue;
      while (true) {
        slots.push_back({static_cast<int>(p), t});
        int i = sig[p].arity - 1;
        while (i >= 0 && t[i] == n - 1) t[i--] = 0;
        if (i < 0) break;
        ++t[i];
      }
    }
    if (slots.size() >= 63) throw CapExceeded("model search space too large");
    const std::uint64_t total = std::uint64_t{1} << slots.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      if (budget-- == 0) throw CapExceeded("model search exceeds cap");
      FiniteStructure m(sig, n);
      for (std::size_t s = 0; s < slots.size(); ++s)
        if (mask >> (slots.size() - 1 - s) & 1u) m.relations[slots[s].first].insert(slots[s].second);
      if (characteristic(lang, m, c.depth) == c) {
        if (found) *found = m;
        return true;
      }
    }
  }
  return false;
}

inline Verdict decide(const ConsistencyOracle& o, const Language& lang, const Constituent& c,
                      const MonadicModels* models = nullptr) {
  if (o.backend == ConsistencyOracle::Backend::ExactMonadic) {
    if (!lang.signature().monadic()) throw std::invalid_argument("exact backend requires a monadic signature");
    if (models) return models->consistent(c) ? Verdict::Consistent : Verdict::Inconsistent;
    MonadicModels local(lang);
    return local.consistent(c) ? Verdict::Consistent : Verdict::Inconsistent;
  }
  if (inconsistent_at_effort(lang, c, o.effort, o.cap) == Verdict::Inconsistent) return Verdict::Inconsistent;
  if (find_model(lang, c, o.max_domain, o.cap)) return Verdict::Consistent;
  return Verdict::Unknown;
}

}  // namespace hintikka
