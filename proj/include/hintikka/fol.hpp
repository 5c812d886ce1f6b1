#pragma once
// Constant-free, function-free first-order syntax, parsing/printing and
// model checking over finite structures.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hintikka {

struct Predicate {
  std::string name;
  int arity = 1;
  bool operator==(const Predicate&) const = default;
};

class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<Predicate> preds) : preds_(std::move(preds)) {
    if (preds_.empty()) throw std::invalid_argument("signature must not be empty");
    std::set<std::string> seen;
    for (const auto& p : preds_) {
      if (p.arity < 1) throw std::invalid_argument("predicate '" + p.name + "' has arity < 1");
      if (p.name.empty()) throw std::invalid_argument("empty predicate name");
      if (!seen.insert(p.name).second)
        throw std::invalid_argument("duplicate predicate '" + p.name + "'");
    }
  }

  const std::vector<Predicate>& predicates() const { return preds_; }
  std::size_t size() const { return preds_.size(); }
  const Predicate& operator[](std::size_t i) const { return preds_[i]; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < preds_.size(); ++i)
      if (preds_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  bool monadic() const {
    return std::all_of(preds_.begin(), preds_.end(), [](const Predicate& p) { return p.arity == 1; });
  }

  /// One `name/arity` per line; `#` starts a comment.
  static Signature parse(const std::string& text) {
    std::vector<Predicate> preds;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      auto e = line.find_last_not_of(" \t\r");
      line = line.substr(b, e - b + 1);
      auto slash = line.find('/');
      if (slash == std::string::npos)
        throw std::invalid_argument("signature line " + std::to_string(lineno) + ": expected name/arity");
      Predicate p;
      p.name = line.substr(0, slash);
      try {
        p.arity = std::stoi(line.substr(slash + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("signature line " + std::to_string(lineno) + ": bad arity");
      }
      preds.push_back(p);
    }
    return Signature(std::move(preds));
  }

  std::string to_text() const {
    std::string out;
    for (const auto& p : preds_) out += p.name + "/" + std::to_string(p.arity) + "\n";
    return out;
  }

  /// Compact single-line form used in file headers.
  std::string key() const {
    std::string out;
    for (std::size_t i = 0; i < preds_.size(); ++i) {
      if (i) out += ",";
      out += preds_[i].name + "/" + std::to_string(preds_[i].arity);
    }
    return out;
  }

  bool operator==(const Signature&) const = default;

 private:
  std::vector<Predicate> preds_;
};

// ---------------------------------------------------------------------------
// Formulas

enum class Kind { Top, Atom, Not, Or, Exists };

class Formula;

struct FormulaNode {
  Kind kind = Kind::Top;
  int pred = -1;                  // Atom
  std::vector<std::string> args;  // Atom
  std::string var;                // Exists
  std::shared_ptr<const FormulaNode> left, right;  // Not/Exists use left
};

class Formula {
 public:
  Formula() : node_(top_node()) {}

  static Formula top() { return Formula(top_node()); }
  static Formula bottom() { return neg(top()); }
  static Formula atom(int pred, std::vector<std::string> args) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Atom;
    n->pred = pred;
    n->args = std::move(args);
    return Formula(n);
  }
  static Formula neg(const Formula& f) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Not;
    n->left = f.node_;
    return Formula(n);
  }
  static Formula disj(const Formula& a, const Formula& b) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Or;
    n->left = a.node_;
    n->right = b.node_;
    return Formula(n);
  }
  static Formula exists(const std::string& v, const Formula& f) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = Kind::Exists;
    n->var = v;
    n->left = f.node_;
    return Formula(n);
  }
  // Derived forms.
  static Formula conj(const Formula& a, const Formula& b) { return neg(disj(neg(a), neg(b))); }
  static Formula forall(const std::string& v, const Formula& f) { return neg(exists(v, neg(f))); }
  static Formula implies(const Formula& a, const Formula& b) { return disj(neg(a), b); }

  /// Left-folded conjunction; empty gives `true`.
  static Formula conj_all(const std::vector<Formula>& fs) {
    if (fs.empty()) return top();
    Formula acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
    return acc;
  }
  /// Left-folded disjunction; empty gives `false`.
  static Formula disj_all(const std::vector<Formula>& fs) {
    if (fs.empty()) return bottom();
    Formula acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) acc = disj(acc, fs[i]);
    return acc;
  }

  Kind kind() const { return node_->kind; }
  int pred() const { return node_->pred; }
  const std::vector<std::string>& args() const { return node_->args; }
  const std::string& var() const { return node_->var; }
  Formula sub() const { return Formula(node_->left); }
  Formula lhs() const { return Formula(node_->left); }
  Formula rhs() const { return Formula(node_->right); }

  bool operator==(const Formula& o) const { return equal(node_.get(), o.node_.get()); }

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}

  static std::shared_ptr<const FormulaNode> top_node() {
    static const auto t = std::make_shared<const FormulaNode>();
    return t;
  }

  static bool equal(const FormulaNode* a, const FormulaNode* b) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case Kind::Top: return true;
      case Kind::Atom: return a->pred == b->pred && a->args == b->args;
      case Kind::Not: return equal(a->left.get(), b->left.get());
      case Kind::Or: return equal(a->left.get(), b->left.get()) && equal(a->right.get(), b->right.get());
      case Kind::Exists: return a->var == b->var && equal(a->left.get(), b->left.get());
    }
    return false;
  }

  std::shared_ptr<const FormulaNode> node_;
};

/// Maximal nesting of quantifiers.
inline int depth(const Formula& f) {
  switch (f.kind()) {
    case Kind::Top:
    case Kind::Atom: return 0;
    case Kind::Not: return depth(f.sub());
    case Kind::Or: return std::max(depth(f.lhs()), depth(f.rhs()));
    case Kind::Exists: return 1 + depth(f.sub());
  }
  return 0;
}

namespace detail {
inline void free_vars(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out) {
  switch (f.kind()) {
    case Kind::Top: return;
    case Kind::Atom:
      for (const auto& a : f.args())
        if (std::find(bound.begin(), bound.end(), a) == bound.end() &&
            std::find(out.begin(), out.end(), a) == out.end())
          out.push_back(a);
      return;
    case Kind::Not: free_vars(f.sub(), bound, out); return;
    case Kind::Or:
      free_vars(f.lhs(), bound, out);
      free_vars(f.rhs(), bound, out);
      return;
    case Kind::Exists:
      bound.push_back(f.var());
      free_vars(f.sub(), bound, out);
      bound.pop_back();
      return;
  }
}
}  // namespace detail

/// Free variables in order of first appearance.
inline std::vector<std::string> free_variables(const Formula& f) {
  std::vector<std::string> bound, out;
  detail::free_vars(f, bound, out);
  return out;
}

inline bool is_sentence(const Formula& f) { return free_variables(f).empty(); }

/// Prepends a universal quantifier for each free variable; the first free
/// variable becomes the outermost binder.
inline Formula universal_closure(const Formula& f) {
  auto fv = free_variables(f);
  Formula out = f;
  for (auto it = fv.rbegin(); it != fv.rend(); ++it) out = Formula::forall(*it, out);
  return out;
}

namespace detail {
inline Formula rename(const Formula& f, std::map<std::string, std::string>& env, int& counter,
                      const std::set<std::string>& avoid) {
  switch (f.kind()) {
    case Kind::Top: return f;
    case Kind::Atom: {
      std::vector<std::string> args;
      for (const auto& a : f.args()) {
        auto it = env.find(a);
        args.push_back(it == env.end() ? a : it->second);
      }
      return Formula::atom(f.pred(), args);
    }
    case Kind::Not: return Formula::neg(rename(f.sub(), env, counter, avoid));
    case Kind::Or: {
      Formula l = rename(f.lhs(), env, counter, avoid);
      Formula r = rename(f.rhs(), env, counter, avoid);
      return Formula::disj(l, r);
    }
    case Kind::Exists: {
      std::string fresh;
      do fresh = "x" + std::to_string(++counter);
      while (avoid.count(fresh));
      auto saved = env.find(f.var()) == env.end() ? std::optional<std::string>{} : env[f.var()];
      env[f.var()] = fresh;
      Formula body = rename(f.sub(), env, counter, avoid);
      if (saved) env[f.var()] = *saved; else env.erase(f.var());
      return Formula::exists(fresh, body);
    }
  }
  return f;
}
}  // namespace detail

/// Alpha-renames bound variables to x1, x2, ... in binder order.
inline Formula normalize(const Formula& f) {
  auto fv = free_variables(f);
  std::set<std::string> avoid(fv.begin(), fv.end());
  std::map<std::string, std::string> env;
  int counter = 0;
  return detail::rename(f, env, counter, avoid);
}

// ---------------------------------------------------------------------------
// Concrete syntax

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at offset " + std::to_string(pos)), position(pos) {}
};

namespace detail {

class Parser {
 public:
  Parser(const std::string& text, const Signature& sig) : s_(text), sig_(sig) {}

  Formula parse_all() {
    Formula f = form();
    skip();
    if (i_ != s_.size()) throw ParseError("trailing input", i_);
    return f;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool peek(const char* lit) {
    skip();
    return s_.compare(i_, std::char_traits<char>::length(lit), lit) == 0;
  }
  void expect(const char* lit) {
    if (!peek(lit)) throw ParseError(std::string("expected '") + lit + "'", i_);
    i_ += std::char_traits<char>::length(lit);
  }
  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
  std::string ident() {
    skip();
    if (i_ >= s_.size() || !ident_start(s_[i_])) throw ParseError("expected identifier", i_);
    std::size_t b = i_;
    while (i_ < s_.size() && ident_char(s_[i_])) ++i_;
    return s_.substr(b, i_ - b);
  }

  // Is the text at `(` a quantifier prefix `(A v)` / `(E v)`?
  bool quantifier_ahead(char& q) {
    std::size_t j = i_ + 1;
    while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
    if (j >= s_.size() || (s_[j] != 'A' && s_[j] != 'E')) return false;
    char which = s_[j++];
    if (j < s_.size() && ident_char(s_[j])) return false;
    while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
    if (j >= s_.size() || !ident_start(s_[j])) return false;
    while (j < s_.size() && ident_char(s_[j])) ++j;
    while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
    if (j >= s_.size() || s_[j] != ')') return false;
    q = which;
    return true;
  }

  Formula form() {
    skip();
    if (i_ >= s_.size()) throw ParseError("unexpected end of input", i_);
    char c = s_[i_];
    if (c == '~') {
      ++i_;
      return Formula::neg(form());
    }
    if (c == '(') {
      char q;
      if (quantifier_ahead(q)) {
        ++i_;
        skip();
        ++i_;  // A or E
        std::string v = ident();
        expect(")");
        Formula body = form();
        return q == 'A' ? Formula::forall(v, body) : Formula::exists(v, body);
      }
      std::size_t open = i_;
      ++i_;
      Formula acc = form();
      std::string op;
      while (true) {
        skip();
        std::string here;
        if (peek("->")) here = "->";
        else if (peek("|")) here = "|";
        else if (peek("&")) here = "&";
        else if (peek(")")) break;
        else throw ParseError("expected connective or ')'", i_);
        if (!op.empty() && op != here) throw ParseError("mixed connectives need parentheses", i_);
        if (here == "->" && !op.empty()) throw ParseError("'->' does not chain", i_);
        op = here;
        i_ += here.size();
        Formula rhs = form();
        if (op == "|") acc = Formula::disj(acc, rhs);
        else if (op == "&") acc = Formula::conj(acc, rhs);
        else acc = Formula::implies(acc, rhs);
      }
      expect(")");
      if (op.empty()) {
        (void)open;  // redundant parentheses around a single formula
      }
      return acc;
    }
    std::size_t at = i_;
    std::string name = ident();
    if (name == "true") return Formula::top();
    if (name == "false") return Formula::bottom();
    int p = sig_.index_of(name);
    if (p < 0) throw ParseError("unknown predicate '" + name + "'", at);
    expect("(");
    std::vector<std::string> args{ident()};
    while (peek(",")) {
      ++i_;
      args.push_back(ident());
    }
    expect(")");
    if (static_cast<int>(args.size()) != sig_[p].arity)
      throw ParseError("arity mismatch for '" + name + "': expected " + std::to_string(sig_[p].arity) +
                           ", got " + std::to_string(args.size()),
                       at);
    return Formula::atom(p, args);
  }

  const std::string& s_;
  const Signature& sig_;
  std::size_t i_ = 0;
};

}  // namespace detail

/// Parses a formula. With `require_sentence`, free variables are an error
/// unless `close` is set, in which case the universal closure is returned.
inline Formula parse_formula(const std::string& text, const Signature& sig, bool require_sentence = false,
                             bool close = false) {
  Formula f = detail::Parser(text, sig).parse_all();
  if (close) return universal_closure(f);
  if (require_sentence) {
    auto fv = free_variables(f);
    if (!fv.empty()) throw ParseError("unbound variable '" + fv.front() + "'", 0);
  }
  return f;
}

namespace detail {
inline bool is_neg(const Formula& f) { return f.kind() == Kind::Not; }

inline void print(const Formula& f, const Signature& sig, std::string& out) {
  switch (f.kind()) {
    case Kind::Top: out += "true"; return;
    case Kind::Atom: {
      out += sig[f.pred()].name + "(";
      for (std::size_t i = 0; i < f.args().size(); ++i) {
        if (i) out += ",";
        out += f.args()[i];
      }
      out += ")";
      return;
    }
    case Kind::Not: {
      Formula g = f.sub();
      if (g.kind() == Kind::Top) { out += "false"; return; }
      if (g.kind() == Kind::Or && is_neg(g.lhs()) && is_neg(g.rhs())) {
        out += "(";
        print(g.lhs().sub(), sig, out);
        out += " & ";
        print(g.rhs().sub(), sig, out);
        out += ")";
        return;
      }
      if (g.kind() == Kind::Exists && is_neg(g.sub())) {
        out += "(A " + g.var() + ")";
        print(g.sub().sub(), sig, out);
        return;
      }
      out += "~";
      print(g, sig, out);
      return;
    }
    case Kind::Or:
      out += "(";
      print(f.lhs(), sig, out);
      out += " | ";
      print(f.rhs(), sig, out);
      out += ")";
      return;
    case Kind::Exists:
      out += "(E " + f.var() + ")";
      print(f.sub(), sig, out);
      return;
  }
}
}  // namespace detail

inline std::string print_formula(const Formula& f, const Signature& sig) {
  std::string out;
  detail::print(f, sig, out);
  return out;
}

// ---------------------------------------------------------------------------
// Finite structures

struct FiniteStructure {
  int domain_size = 0;
  std::vector<std::set<std::vector<int>>> relations;  // one per predicate

  FiniteStructure() = default;
  FiniteStructure(const Signature& sig, int n) : domain_size(n), relations(sig.size()) {}

  bool holds(int pred, const std::vector<int>& tuple) const { return relations[pred].count(tuple) > 0; }

  void validate(const Signature& sig) const {
    if (domain_size < 0) throw std::invalid_argument("negative domain size");
    if (relations.size() != sig.size()) throw std::invalid_argument("relation count mismatch");
    for (std::size_t p = 0; p < sig.size(); ++p)
      for (const auto& t : relations[p]) {
        if (static_cast<int>(t.size()) != sig[p].arity) throw std::invalid_argument("tuple arity mismatch");
        for (int e : t)
          if (e < 0 || e >= domain_size) throw std::invalid_argument("tuple element out of range");
      }
  }
};

using Env = std::map<std::string, int>;

/// Tarskian satisfaction; existential quantification over an empty domain is false.
inline bool satisfies(const FiniteStructure& m, const Formula& f, Env& env) {
  switch (f.kind()) {
    case Kind::Top: return true;
    case Kind::Atom: {
      std::vector<int> tuple;
      tuple.reserve(f.args().size());
      for (const auto& a : f.args()) {
        auto it = env.find(a);
        if (it == env.end()) throw std::invalid_argument("unmapped free variable '" + a + "'");
        tuple.push_back(it->second);
      }
      return m.holds(f.pred(), tuple);
    }
    case Kind::Not: return !satisfies(m, f.sub(), env);
    case Kind::Or: return satisfies(m, f.lhs(), env) || satisfies(m, f.rhs(), env);
    case Kind::Exists: {
      auto it = env.find(f.var());
      std::optional<int> saved;
      if (it != env.end()) saved = it->second;
      bool found = false;
      for (int e = 0; e < m.domain_size && !found; ++e) {
        env[f.var()] = e;
        found = satisfies(m, f.sub(), env);
      }
      if (saved) env[f.var()] = *saved; else env.erase(f.var());
      return found;
    }
  }
  return false;
}

inline bool satisfies(const FiniteStructure& m, const Formula& f) {
  Env env;
  return satisfies(m, f, env);
}

// ---------------------------------------------------------------------------
// Monadic worlds: a structure up to duplication is its set of realized types.

using QType = std::uint32_t;  // bit j set iff predicate j holds

struct QTypeWorld {
  std::vector<QType> types;  // sorted, distinct
  bool operator==(const QTypeWorld&) const = default;
  bool operator<(const QTypeWorld& o) const { return types < o.types; }

  /// One element per realized type, repeated `copies` times.
  FiniteStructure to_structure(const Signature& sig, int copies = 1) const {
    FiniteStructure m(sig, static_cast<int>(types.size()) * copies);
    int e = 0;
    for (int c = 0; c < copies; ++c)
      for (QType t : types) {
        for (std::size_t p = 0; p < sig.size(); ++p)
          if (t >> p & 1u) m.relations[p].insert({e});
        ++e;
      }
    return m;
  }
};

/// All 2^(2^m) worlds, ordered by the bitmask of realized types.
inline std::vector<QTypeWorld> enumerate_monadic_worlds(const Signature& sig) {
  if (!sig.monadic()) throw std::invalid_argument("signature is not monadic");
  const std::size_t m = sig.size();
  if (m > 4) throw std::invalid_argument("too many unary predicates for world enumeration");
  const std::uint32_t ntypes = 1u << m;
  std::vector<QTypeWorld> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ntypes); ++mask) {
    QTypeWorld w;
    for (QType t = 0; t < ntypes; ++t)
      if (mask >> t & 1u) w.types.push_back(t);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace hintikka
