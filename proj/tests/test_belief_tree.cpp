#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <map>

using namespace hintikka;
using LabelTree = BeliefTree<std::string>;

namespace {
const Language& p_lang() {
  static const Language l(Signature::parse("P/1\n"));
  return l;
}
Rational q(long long n, long long d = 1) { return make_rational(n, d); }

LabelTree renorm_example() {
  LabelTree h("/");
  int a = h.add_child(0, "/a", q(1, 6));
  h.add_child(0, "/b", q(1, 3));
  int c = h.add_child(0, "/c", q(1, 2));
  h.add_child(a, "/a/d", q(1, 6));
  h.add_child(c, "/c/e", q(1, 12));
  int f = h.add_child(c, "/c/f", q(5, 12));
  h.add_child(f, "/c/f/g", q(1, 6));
  h.add_child(f, "/c/f/h", q(1, 4));
  return h;
}

Rational at(const LabelTree& h, const std::string& k) { return h.weight(h.find(k)); }

// Parent-uniform shape with random positive leaf weights.
HT random_positive_ht(std::mt19937_64& rng) {
  HT h = make_parent_uniform(p_lang(), 2);
  std::uniform_int_distribution<int> w(1, 9);
  std::vector<int> raw(h.size(), 0);
  long total = 0;
  for (int i : h.at_depth(2)) total += raw[i] = w(rng);
  for (int i : h.at_depth(2)) h.set_weight(i, Rational(raw[i], total));
  for (int i : h.at_depth(1)) {
    Rational s = 0;
    for (int c : h.node(i).kids) s += h.weight(c);
    h.set_weight(i, s);
  }
  h.assert_invariants();
  return h;
}
}  // namespace

TEST_CASE("parent-uniform construction", "[belief]") {
  HT h = make_parent_uniform(p_lang(), 1);
  CHECK(h.weight(0) == 1);
  REQUIRE(h.at_depth(1).size() == 4);
  for (int i : h.at_depth(1)) CHECK(h.weight(i) == q(1, 4));
  HT h2 = make_parent_uniform(p_lang(), 2);
  CHECK(h2.violations().empty());
  CHECK(is_reasonable(p_lang(), h2));
}

TEST_CASE("depth-uniform coherence is validated", "[belief]") {
  auto r1 = make_depth_uniform(p_lang(), 1);
  CHECK(r1.coherent);
  for (int i : r1.tree.at_depth(1)) CHECK(r1.tree.weight(i) == q(1, 4));
  auto r2 = make_depth_uniform(p_lang(), 2);
  // Independent count: group Delta^(2) by depth-1 projection.
  std::map<Constituent, long> per_parent;
  for (const auto& c : enumerate_constituents(p_lang(), 2)) per_parent[truncate(c)]++;
  bool equal_counts = true;
  for (const auto& [p, n] : per_parent) equal_counts = equal_counts && n == 256 / 4;
  CHECK(r2.coherent == equal_counts);
  CHECK(r2.residuals.size() == 4);
  for (const auto& [node, res] : r2.residuals)
    CHECK(res == q(1, 4) - Rational(per_parent.at(r2.tree.key(node)), 256));
}

TEST_CASE("refuting one of three siblings forces their totals", "[belief]") {
  LabelTree h("/");
  int p = h.add_child(0, "/p", q(1, 2));
  int qn = h.add_child(0, "/q", q(1, 2));
  h.add_child(qn, "/q/x", q(1, 2));
  const Rational a = q(1, 10), b = q(3, 20), c = q(1, 4);
  h.add_child(p, "/p/a", a);
  h.add_child(p, "/p/b", b);
  h.add_child(p, "/p/c", c);
  LabelTree r = renorm(h, h.find("/p/a"));
  CHECK(at(r, "/p/a") == 0);
  CHECK(at(r, "/p/b") == b * (a + b + c) / (b + c));
  CHECK(at(r, "/p/c") == c * (a + b + c) / (b + c));
  CHECK(at(r, "/q/x") == q(1, 2));
}

TEST_CASE("worked renormalization example", "[belief]") {
  LabelTree h0 = renorm_example();
  h0.assert_invariants();
  LabelTree h1 = renorm(h0, h0.find("/b"));
  CHECK(at(h1, "/a/d") == q(1, 4));
  CHECK(at(h1, "/c/e") == q(1, 8));
  CHECK(at(h1, "/c/f") == q(5, 8));
  CHECK(at(h1, "/b") == 0);
  LabelTree h2 = renorm_batch(h1, std::vector<std::string>{"/c/e", "/a/d"});
  CHECK(at(h2, "/c/f") == 1);
  CHECK(at(h2, "/c/f/g") == q(2, 5));
  CHECK(at(h2, "/c/f/h") == q(3, 5));
  LabelTree ab = renorm(renorm(h1, h1.find("/a/d")), h1.find("/c/e"));
  LabelTree ba = renorm(renorm(h1, h1.find("/c/e")), h1.find("/a/d"));
  CHECK(ab == h2);
  CHECK(ba == h2);
  CHECK(renorm_batch(h1, std::vector<std::string>{}) == h1);
}

TEST_CASE("renorm edge cases", "[belief]") {
  LabelTree h("/");
  int a = h.add_child(0, "/a", q(1));
  h.add_child(0, "/b", q(0));
  CHECK_THROWS_AS(renorm(h, a), UndefinedRenorm);
  // Refuting an already-zero node with everything else supported is a no-op.
  CHECK(renorm(h, h.find("/b")) == h);
  CHECK_THROWS(renorm(h, 0));
  CHECK_THROWS_AS(h.add_child(0, "/a", q(0)), std::invalid_argument);
}

TEST_CASE("renorm agrees with its definition on random trees", "[belief]") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const int D = 1 + static_cast<int>(rng() % 3);
    LabelTree h = oracle::random_label_tree(rng, D, 64);
    for (int d = 1; d <= D; ++d)
      for (int m : h.at_depth(d)) {
        LabelTree expect;
        int rho = -1;
        try {
          expect = oracle::renorm_by_definition(h, m, &rho);
        } catch (const UndefinedRenorm&) {
          CHECK_THROWS_AS(renorm(h, m), UndefinedRenorm);
          continue;
        }
        LabelTree got = renorm(h, m);
        CHECK(got == expect);
        CHECK(got.weight(rho) == h.weight(rho));
        ++checked;
      }
  }
  CHECK(checked > 500);
}

TEST_CASE("belief sequence on m=1", "[belief]") {
  const Language& l = p_lang();
  HT h1 = make_parent_uniform(l, 1);
  CHECK(belief_sequence_step(l, h1, 1) == h1);
  HT h = make_parent_uniform(l, 2);
  HT c = converge(l, h);
  auto ws = oracle::worlds(l.signature());
  for (int i = 0; i < static_cast<int>(c.size()); ++i) {
    const bool sat = oracle::satisfiable(ws, render_formula(l, c.key(i)));
    CHECK((c.weight(i) == 0) == !sat);
  }
  CHECK(is_reasonable(l, c));
}

TEST_CASE("reasonableness", "[belief]") {
  const Language& l = p_lang();
  HT h = make_parent_uniform(l, 1);
  h.set_weight(h.at_depth(1)[0], 0);
  CHECK_FALSE(is_reasonable(l, h));
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    HT r = random_positive_ht(rng);
    REQUIRE(is_reasonable(l, r));
    HT s = belief_sequence_step(l, r, 2);
    CHECK(is_reasonable(l, s));
    for (int i = 0; i < static_cast<int>(s.size()); ++i)
      if (s.weight(i) > 0) CHECK(s.weight(i) >= r.weight(i));
  }
}

TEST_CASE("beliefs in sentences", "[belief]") {
  const Language& l = p_lang();
  const Signature& sig = l.signature();
  HT h = make_parent_uniform(l, 2);
  for (int i : h.at_depth(2)) CHECK(belief_in_sentence(l, h, render_formula(l, h.key(i)), 2) == h.weight(i));
  CHECK(prove(l, h, parse_formula("(P(x) | ~P(x))", sig), 1));
  const int some = h.at_depth(2)[5];
  CHECK_FALSE(prove(l, h, render_formula(l, h.key(some)), 2));
  CHECK_THROWS_AS(belief_in_sentence(l, make_parent_uniform(l, 1), parse_formula("(E x)(E y) P(y)", sig), 2),
                  BeyondFrontier);
}

TEST_CASE("belief in a three-member disjunction", "[belief]") {
  const Language& l = p_lang();
  HT h(top_constituent());
  auto kids = enumerate_constituents(l, 1);
  const Rational w[] = {q(1, 5), q(3, 10), q(2, 5), q(1, 10)};
  for (int i = 0; i < 4; ++i) h.add_child(0, kids[i], w[i]);
  std::vector<Formula> three;
  for (int i = 0; i < 3; ++i) three.push_back(render_formula(l, kids[i]));
  CHECK(belief_in_sentence(l, h, Formula::disj_all(three), 1) == q(9, 10));
}

TEST_CASE("failure of logical omniscience", "[belief]") {
  const Language& l = p_lang();
  HT h = make_parent_uniform(l, 2);
  MonadicModels models(l);
  std::vector<Constituent> bad;
  for (int i : h.at_depth(2))
    if (!models.consistent(h.key(i))) bad.push_back(h.key(i));
  REQUIRE(bad.size() >= 2);
  Formula f1 = render_formula(l, bad[0]);
  Formula f2 = Formula::conj(f1, render_formula(l, bad[1]));
  auto ws = oracle::worlds(l.signature());
  CHECK_FALSE(oracle::satisfiable(ws, f1));
  CHECK_FALSE(oracle::satisfiable(ws, f2));
  CHECK(belief_in_sentence(l, h, f1, 2) != belief_in_sentence(l, h, f2, 2));
}

TEST_CASE("probability laws", "[belief]") {
  const Language& l = p_lang();
  HT pu = make_parent_uniform(l, 2);
  HT cv = converge(l, pu);
  oracle::FormulaGen gen(l.signature(), 99);
  for (const HT* h : {&pu, &cv})
    for (int i = 0; i < 100; ++i) {
      Formula a = gen.sentence(2), b = gen.sentence(2);
      const Rational ba = belief_in_sentence(l, *h, a, 2), bb = belief_in_sentence(l, *h, b, 2);
      CHECK(belief_in_sentence(l, *h, Formula::neg(a), 2) == 1 - ba);
      CHECK(belief_in_sentence(l, *h, Formula::conj(a, b), 2) <= std::min(ba, bb));
      CHECK(belief_in_sentence(l, *h, Formula::disj(a, b), 2) >= std::max(ba, bb));
      Formula open = gen.open_in_x1(1);
      Formula all = Formula::forall("x1", open), ex = Formula::exists("x1", open);
      Rational lo = 1;
      for (const auto& d : dnf(l, Formula::exists("x1", Formula::neg(open)), 2).members)
        lo = std::min(lo, Rational(1 - ht_weight(*h, d)));
      CHECK(belief_in_sentence(l, *h, all, 2) <= lo);
      Rational hi = 0;
      for (const auto& d : dnf(l, ex, 2).members) hi = std::max(hi, ht_weight(*h, d));
      CHECK(hi <= belief_in_sentence(l, *h, ex, 2));
    }
}

TEST_CASE("prove is sound and complete with converged weights", "[belief]") {
  const Language& l = p_lang();
  HT cv = converge(l, make_parent_uniform(l, 2));
  auto ws = oracle::worlds(l.signature());
  oracle::FormulaGen gen(l.signature(), 4);
  int valid = 0;
  for (int i = 0; i < 200; ++i) {
    Formula f = gen.sentence(2);
    const bool v = oracle::valid(ws, f);
    valid += v;
    CHECK(prove(l, cv, f, 2) == v);
  }
  CHECK(valid > 0);
}
