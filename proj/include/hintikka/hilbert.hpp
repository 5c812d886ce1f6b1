#pragma once
// Finite-cutoff embedding of sentences as functions over depth-D nodes,
// weighted by a belief tree.

#include "belief_tree.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hintikka {

struct MismatchedCutoff : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A function on the depth-D nodes of a tree; `values[i]` belongs to
/// `basis()[i]`.
class Embedded {
 public:
  Embedded(const HT& h, int D) : h_(&h), D_(D), basis_(h.at_depth(D)), values_(basis_.size()) {
    for (int i = 0; i < static_cast<int>(h.size()); ++i) {
      const auto& n = h.node(i);
      if (n.depth < D && n.kids.empty() && n.w > 0)
        throw BeyondFrontier("cutoff " + std::to_string(D) + " lies beyond the frontier");
    }
  }

  const HT& tree() const { return *h_; }
  int cutoff() const { return D_; }
  const std::vector<int>& basis() const { return basis_; }
  const std::vector<Rational>& values() const { return values_; }
  std::vector<Rational>& values() { return values_; }
  const Rational& weight(std::size_t i) const { return h_->weight(basis_[i]); }

  static Embedded constant(const HT& h, int D, const Rational& c) {
    Embedded e(h, D);
    for (auto& v : e.values_) v = c;
    return e;
  }

  void check_same(const Embedded& o) const {
    if (h_ != o.h_ || D_ != o.D_) throw MismatchedCutoff("embeddings use different trees or cutoffs");
  }

  bool operator==(const Embedded& o) const { return h_ == o.h_ && D_ == o.D_ && values_ == o.values_; }

 private:
  const HT* h_;
  int D_;
  std::vector<int> basis_;
  std::vector<Rational> values_;
};

/// Indicator of dnf(phi) expanded to the cutoff.
inline Embedded embed(const Language& lang, const Formula& phi, const HT& h, int D) {
  if (!is_sentence(phi)) throw std::invalid_argument("embed expects a sentence");
  if (depth(phi) > D) throw DepthTooSmall("sentence deeper than cutoff");
  Embedded e(h, D);
  for (std::size_t i = 0; i < e.basis().size(); ++i)
    e.values()[i] = dnf_member(lang, phi, h.key(e.basis()[i])) ? 1 : 0;
  return e;
}

inline Rational inner(const Embedded& f, const Embedded& g) {
  f.check_same(g);
  Rational s = 0;
  for (std::size_t i = 0; i < f.values().size(); ++i) s += f.values()[i] * g.values()[i] * f.weight(i);
  return s;
}

inline Rational norm_squared(const Embedded& f) { return inner(f, f); }
inline double norm(const Embedded& f) { return std::sqrt(to_double(norm_squared(f))); }

inline Embedded pointwise_max(const Embedded& f, const Embedded& g) {
  f.check_same(g);
  Embedded out = f;
  for (std::size_t i = 0; i < f.values().size(); ++i) out.values()[i] = std::max(f.values()[i], g.values()[i]);
  return out;
}

inline Embedded pointwise_min(const Embedded& f, const Embedded& g) {
  f.check_same(g);
  Embedded out = f;
  for (std::size_t i = 0; i < f.values().size(); ++i) out.values()[i] = std::min(f.values()[i], g.values()[i]);
  return out;
}

inline Embedded scaled(const Embedded& f, const Rational& c) {
  Embedded out = f;
  for (auto& v : out.values()) v *= c;
  return out;
}

/// Integral of f against the tree weights.
inline Rational mean(const Embedded& f) { return inner(f, Embedded::constant(f.tree(), f.cutoff(), 1)); }

/// Correlation of two sentences; empty when either probability is 0 or 1.
inline std::optional<double> correlation(const Embedded& f1, const Embedded& f2) {
  f1.check_same(f2);
  const Rational b1 = mean(f1), b2 = mean(f2);
  if (b1 == 0 || b1 == 1 || b2 == 0 || b2 == 1) return std::nullopt;
  Embedded c1 = f1, c2 = f2;
  for (auto& v : c1.values()) v -= b1;
  for (auto& v : c2.values()) v -= b2;
  const Rational num = inner(c1, c2);
  const Rational radicand = b1 * (1 - b1) * b2 * (1 - b2);
  return to_double(num) / std::sqrt(to_double(radicand));
}

/// E[g | f] over the two-cell sigma-algebra generated by the indicator f;
/// a cell of measure zero gets value 0.
inline Embedded cond_exp(const Embedded& g, const Embedded& f) {
  g.check_same(f);
  Rational in_mass = 0, in_val = 0, out_mass = 0, out_val = 0;
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    const Rational& w = f.weight(i);
    if (f.values()[i] != 0) {
      in_mass += w;
      in_val += g.values()[i] * w;
    } else {
      out_mass += w;
      out_val += g.values()[i] * w;
    }
  }
  const Rational a = in_mass == 0 ? Rational(0) : in_val / in_mass;
  const Rational b = out_mass == 0 ? Rational(0) : out_val / out_mass;
  Embedded out = g;
  for (std::size_t i = 0; i < f.values().size(); ++i) out.values()[i] = f.values()[i] != 0 ? a : b;
  return out;
}

/// Orthogonal projection of g onto the line spanned by f; zero when f is null.
inline Embedded project(const Embedded& g, const Embedded& f) {
  const Rational ff = inner(f, f);
  if (ff == 0) return scaled(f, 0);
  return scaled(f, inner(g, f) / ff);
}

/// (||f|| / ||project(g, f)||) * project(g, f). For an indicator f this
/// recovers f exactly whenever <g, f> is nonzero; the norm ratio is the
/// rational ||f||^2 / |<g, f>|.
inline std::optional<Embedded> rescaled_projection(const Embedded& g, const Embedded& f) {
  const Rational gf = inner(g, f);
  if (gf == 0) return std::nullopt;
  const Rational ratio = inner(f, f) / (gf < 0 ? Rational(-gf) : gf);
  return scaled(project(g, f), ratio);
}

/// The implication rewritten through rescaled projections:
///   (not phi1 rescaled from phi2) max (phi2 rescaled from not phi1).
inline std::optional<Embedded> implication_via_projections(const Embedded& phi1, const Embedded& phi2,
                                                           const Embedded& not_phi1) {
  phi1.check_same(phi2);
  auto a = rescaled_projection(phi2, not_phi1);
  auto b = rescaled_projection(not_phi1, phi2);
  if (!a || !b) return std::nullopt;
  return pointwise_max(*a, *b);
}

}  // namespace hintikka
