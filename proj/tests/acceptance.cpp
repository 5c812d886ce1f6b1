// End-to-end acceptance checks; one PASS/FAIL line each, nonzero exit on any failure.

#include "support.hpp"
#include "hintikka/arena.hpp"
#include "hintikka/conjecture.hpp"
#include "hintikka/hilbert.hpp"
#include "hintikka/io.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace hintikka;
using LabelTree = BeliefTree<std::string>;

namespace {

struct Check {
  std::ostringstream why;
  bool ok = true;
  void expect(bool c, const std::string& what) {
    if (!c && ok) why << what;
    ok = ok && c;
  }
};

int failures = 0;

void criterion(int n, const std::string& name, double limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) c.expect(false, "too slow");
  failures += !c.ok;
  std::printf("%s criterion %d: %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", n, name.c_str(), secs,
              c.ok ? "" : " - ", c.why.str().c_str());
  std::fflush(stdout);
}

Rational q(long long n, long long d = 1) { return make_rational(n, d); }

const Language& p_lang() {
  static const Language l(Signature::parse("P/1\n"));
  return l;
}
const Language& pq_lang() {
  static const Language l(Signature::parse("P/1\nQ/1\n"));
  return l;
}
const Language& lt_lang() {
  static const Language l(Signature::parse("Lt/2\n"));
  return l;
}

bool is_ancestor(const LabelTree& h, int a, int b) {
  for (int x = b; x > 0; x = h.node(x).parent)
    if (x == a) return true;
  return false;
}

// Sum of the depth-d descendants of node i.
Rational mass_at(const LabelTree& h, int i, int d) {
  if (h.node(i).depth == d) return h.weight(i);
  Rational s = 0;
  for (int k : h.node(i).kids) s += mass_at(h, k, d);
  return s;
}

}  // namespace

int main() {
  criterion(1, "one binary predicate, depth 2 has 2^512 constituents", 1.0, [](Check& c) {
    const BigInt n = count_constituents(lt_lang(), 2);
    c.expect(n == (BigInt(1) << 512), "count is not 2^512");
    c.expect(n == oracle::binary_count(2, 0), "closed form disagrees");
  });

  criterion(2, "worked renormalization example", 1.0, [](Check& c) {
    LabelTree h("/");
    int a = h.add_child(0, "/a", q(1, 6));
    int b = h.add_child(0, "/b", q(1, 3));
    int cc = h.add_child(0, "/c", q(1, 2));
    h.add_child(a, "/a/d", q(1, 6));
    h.add_child(cc, "/c/e", q(1, 12));
    int f = h.add_child(cc, "/c/f", q(5, 12));
    h.add_child(f, "/c/f/g", q(1, 6));
    h.add_child(f, "/c/f/h", q(1, 4));
    LabelTree h1 = renorm(h, b);
    auto w = [](const LabelTree& t, const char* k) { return t.weight(t.find(k)); };
    c.expect(w(h1, "/a/d") == q(1, 4) && w(h1, "/c/e") == q(1, 8) && w(h1, "/c/f") == q(5, 8), "first step");
    LabelTree h2 = renorm_batch(h1, std::vector<std::string>{"/a/d", "/c/e"});
    c.expect(w(h2, "/c/f/g") == q(2, 5) && w(h2, "/c/f/h") == q(3, 5), "batch step");
  });

  criterion(3, "renormalization laws on 200 random trees", 30.0, [](Check& c) {
    std::mt19937_64 rng(31337);
    long singles = 0, pairs = 0;
    for (int t = 0; t < 200; ++t) {
      const int D = 1 + static_cast<int>(rng() % 3);
      LabelTree h = oracle::random_label_tree(rng, D, 64);
      std::vector<int> ok;
      for (int i = 1; i < static_cast<int>(h.size()); ++i) {
        int rho = -1;
        LabelTree expect;
        try {
          expect = oracle::renorm_by_definition(h, i, &rho);
        } catch (const UndefinedRenorm&) {
          continue;
        }
        LabelTree r = renorm(h, i);
        c.expect(r.violations().empty(), "incoherent result");
        c.expect(r == expect, "differs from the definition");
        c.expect(r.weight(rho) == h.weight(rho) && mass_at(r, rho, D) == h.weight(rho), "w(rho) not preserved");
        ok.push_back(i);
        ++singles;
      }
      for (std::size_t x = 0; x < ok.size(); ++x)
        for (std::size_t y = x + 1; y < ok.size() && y < x + 4; ++y) {
          const int i = ok[x], j = ok[y];
          if (is_ancestor(h, i, j) || is_ancestor(h, j, i)) continue;
          LabelTree ij, ji;
          try {
            ij = renorm(renorm(h, i), j);
            ji = renorm(renorm(h, j), i);
          } catch (const UndefinedRenorm&) {
            continue;
          }
          c.expect(ij == ji, "order matters");
          ++pairs;
        }
    }
    c.expect(singles > 500 && pairs > 200, "too few checks");
  });

  criterion(5, "monadic constituents are exclusive and exhaustive; dnf is faithful", 60.0, [](Check& c) {
    for (const Language* l : {&p_lang(), &pq_lang()}) {
      auto ws = oracle::worlds(l->signature());
      const int full = l == &p_lang() ? 2 : 1;
      for (int d = 0; d <= full; ++d) {
        std::vector<Formula> rendered;
        for (const auto& k : enumerate_constituents(*l, d)) rendered.push_back(render_formula(*l, k));
        for (const auto& m : ws) {
          int hits = 0;
          for (const auto& f : rendered) hits += satisfies(m, f);
          c.expect(hits == 1, "world satisfies " + std::to_string(hits) + " constituents");
        }
      }
    }
    // m=2, d=2 is too large to enumerate: each world's characteristic constituent
    // holds in exactly the worlds that share it.
    {
      const Language& l = pq_lang();
      auto ws = oracle::worlds(l.signature());
      std::vector<Constituent> ch;
      for (const auto& m : ws) ch.push_back(characteristic(l, m, 2));
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const Formula f = render_formula(l, ch[i]);
        for (std::size_t j = 0; j < ws.size(); ++j) c.expect(satisfies(ws[j], f) == (ch[i] == ch[j]), "m=2 d=2 overlap");
      }
    }
    oracle::FormulaGen gen(p_lang().signature(), 5);
    auto ws = oracle::worlds(p_lang().signature());
    for (int i = 0; i < 200; ++i) {
      Formula f = gen.sentence(2);
      DnfSet s = dnf(p_lang(), f, 2);
      std::vector<Formula> parts;
      for (const auto& m : s.members) parts.push_back(render_formula(p_lang(), m));
      const Formula g = Formula::disj_all(parts);
      for (const auto& m : ws) c.expect(satisfies(m, f) == satisfies(m, g), "dnf not equivalent");
    }
    oracle::FormulaGen gen2(pq_lang().signature(), 6);
    auto ws2 = oracle::worlds(pq_lang().signature());
    for (int i = 0; i < 200; ++i) {
      Formula f = gen2.sentence(2);
      for (const auto& m : ws2) c.expect(dnf_member(pq_lang(), f, characteristic(pq_lang(), m, 2)) == satisfies(m, f), "m=2 dnf");
    }
  });

  criterion(6, "belief sequence converges to the depth HT; prove matches validity", 60.0, [](Check& c) {
    const Language& l = p_lang();
    HT h = converge(l, make_parent_uniform(l, 2));
    auto ws = oracle::worlds(l.signature());
    for (int i = 0; i < static_cast<int>(h.size()); ++i) {
      const bool sat = oracle::satisfiable(ws, render_formula(l, h.key(i)));
      c.expect((h.weight(i) == 0) == !sat, "wrong zero at " + to_text(l, h.key(i)));
    }
    oracle::FormulaGen gen(l.signature(), 5);
    int valid = 0;
    for (int i = 0; i < 200; ++i) {
      Formula f = gen.sentence(2);
      const bool v = oracle::valid(ws, f);
      valid += v;
      c.expect(prove(l, h, f, 2) == v, "prove disagrees with validity");
    }
    c.expect(valid > 0, "corpus has no valid sentence");
  });

  criterion(7, "equivalent sentences can get different beliefs", 0, [](Check& c) {
    const Language& l = p_lang();
    HT h = make_parent_uniform(l, 2);
    MonadicModels models(l);
    std::vector<Constituent> bad;
    for (int i : h.at_depth(2))
      if (!models.consistent(h.key(i))) bad.push_back(h.key(i));
    c.expect(bad.size() >= 2, "need two inconsistent constituents");
    if (bad.size() < 2) return;
    // Both are contradictions, hence equivalent.
    const Formula a = render_formula(l, bad[0]);
    const Formula b = Formula::disj(a, render_formula(l, bad[1]));
    auto ws = oracle::worlds(l.signature());
    c.expect(!oracle::satisfiable(ws, a) && !oracle::satisfiable(ws, b), "not equivalent");
    c.expect(belief_in_sentence(l, h, a, 2) != belief_in_sentence(l, h, b, 2), "beliefs equal");
  });

  criterion(8, "probability laws on 100 pairs", 0, [](Check& c) {
    const Language& l = p_lang();
    HT pu = make_parent_uniform(l, 2);
    HT cv = converge(l, pu);
    oracle::FormulaGen gen(l.signature(), 8);
    for (const HT* h : {&pu, &cv})
      for (int i = 0; i < 100; ++i) {
        Formula a = gen.sentence(2), b = gen.sentence(2);
        const Rational ba = belief_in_sentence(l, *h, a, 2), bb = belief_in_sentence(l, *h, b, 2);
        c.expect(belief_in_sentence(l, *h, Formula::neg(a), 2) == 1 - ba, "negation");
        const Rational both = belief_in_sentence(l, *h, Formula::conj(a, b), 2);
        const Rational either = belief_in_sentence(l, *h, Formula::disj(a, b), 2);
        c.expect(both <= std::min(ba, bb), "conjunction bound");
        c.expect(either >= std::max(ba, bb), "disjunction bound");
        c.expect(either == ba + bb - both, "inclusion-exclusion");
        Formula open = gen.open_in_x1(1);
        Formula all = Formula::forall("x1", open), ex = Formula::exists("x1", open);
        Rational lo = 1, hi = 0;
        for (const auto& d : dnf(l, Formula::exists("x1", Formula::neg(open)), 2).members)
          lo = std::min(lo, Rational(1 - ht_weight(*h, d)));
        for (const auto& d : dnf(l, ex, 2).members) hi = std::max(hi, ht_weight(*h, d));
        c.expect(belief_in_sentence(l, *h, all, 2) <= lo, "universal bound");
        c.expect(hi <= belief_in_sentence(l, *h, ex, 2), "existential bound");
      }
  });

  criterion(9, "embedding laws", 0, [](Check& c) {
    const Language& l = p_lang();
    HT h = make_parent_uniform(l, 2);
    oracle::FormulaGen gen(l.signature(), 9);
    int impl = 0;
    for (int i = 0; i < 200; ++i) {
      Formula a = gen.sentence(2), b = gen.sentence(2);
      Embedded ea = embed(l, a, h, 2), eb = embed(l, b, h, 2), na = embed(l, Formula::neg(a), h, 2);
      c.expect(inner(ea, na) == 0, "negation not orthogonal");
      c.expect(embed(l, Formula::disj(a, b), h, 2) == pointwise_max(ea, eb), "or is not max");
      c.expect(embed(l, Formula::conj(a, Formula::neg(b)), h, 2) ==
                   pointwise_min(ea, embed(l, Formula::neg(b), h, 2)),
               "subtraction is not min");
      c.expect(inner(cond_exp(eb, ea), ea) == inner(eb, ea), "conditional expectation identity");
      if (auto via = implication_via_projections(ea, eb, na)) {
        c.expect(*via == embed(l, Formula::implies(a, b), h, 2), "implication identity");
        ++impl;
      }
      if (auto r = correlation(ea, ea)) c.expect(std::abs(*r - 1.0) < 1e-9, "self correlation");
      if (auto r = correlation(ea, na)) c.expect(std::abs(*r + 1.0) < 1e-9, "negation correlation");
    }
    c.expect(impl >= 50, "too few implication checks");
  });

  criterion(10, "conjecture scoring", 0, [](Check& c) {
    c.expect(score_likelihood_entropy({q(0), q(0), q(0)}) == 0.0, "zero-weight conjecture scores nonzero");
    std::vector<int> keys(8);
    for (int i = 0; i < 8; ++i) keys[i] = i;
    auto ranked = rank_conjectures<int>([](int) { return q(1, 8); }, subsets_up_to(1, keys, 4));
    std::map<std::size_t, double> by_size;
    for (const auto& s : ranked) {
      auto [it, fresh] = by_size.emplace(s.conjecture.members.size(), s.score);
      c.expect(fresh || it->second == s.score, "uniform score depends on more than size");
    }
    const Language& l = p_lang();
    MonadicModels models(l);
    HT h = make_depth_ht(models, 2);
    auto universe = subsets_up_to(2, enumerate_constituents(l, 2), 1);
    double worst = 1e300, best_bad = -1e300;
    for (const auto& s : rank_conjectures<Constituent>([&](const Constituent& k) { return ht_weight(h, k); }, universe)) {
      bool any = false;
      for (const auto& m : s.conjecture.members) any = any || models.consistent(m);
      (any ? worst : best_bad) = any ? std::min(worst, s.score) : std::max(best_bad, s.score);
    }
    c.expect(worst > best_bad, "an all-inconsistent conjecture ranks too high");
  });

  criterion(11, "self-play with depth-HT agents", 120.0, [](Check& c) {
    const Language& l = p_lang();
    MonadicModels models(l);
    HT dh = make_depth_ht(models, 8);
    const VerdictFn v = verdict_fn(l, ConsistencyOracle::exact(), &models);
    RationalAgent opt(dh);
    SelfPlayStats s;
    auto games = self_play_batch(l, opt, opt, 1000, 6, v, 2024, &s, 4);
    c.expect(s.games == 1000 && s.draws == 1000, "not every game was drawn");
    c.expect(s.challenge_accuracy() == 1.0, "challenge accuracy below 1");
    auto again = self_play_batch(l, opt, opt, 1000, 6, v, 2024, nullptr, 1);
    for (std::size_t i = 0; i < games.size(); ++i) {
      const std::string line = format_log(games[i], i);
      c.expect(line == format_log(again[i], i), "replay differs");
      if (i < 100) c.expect(validate_log(l, parse_log(line), &v).empty(), "log fails validation");
    }
    HT pu = make_parent_uniform(l, 2);
    RationalAgent naive(pu);
    SelfPlayStats n;
    self_play_batch(l, naive, naive, 300, 6, v, 7, &n);
    c.expect(n.lost_by_depth[2] > 0, "parent-uniform agent never lost a challenge at depth 2");
  });

  criterion(12, "trailblazer refines to singleton cells and replays the pathfinder", 0, [](Check& c) {
    const Language& l = p_lang();
    MonadicModels models(l);
    HT dh = make_depth_ht(models, 8);
    const VerdictFn v = verdict_fn(l, ConsistencyOracle::exact(), &models);
    const Filtration ptype = parse_mask(l, read_file(HINTIKKA_DATA_DIR "/p-type-then-all.mask"));
    const Filtration all = parse_mask(l, read_file(HINTIKKA_DATA_DIR "/all.mask"));
    LiftedRationalAgent lifted(l, dh);
    ScriptedRefiner script(l, {{ptype, 0}, {all, 0}}, lifted);
    RationalAgent opt(dh);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      TrailRecord t = play_trail(l, script, script, 8, v, seed);
      GameRecord p = play_game(l, opt, opt, 6, v, seed);
      c.expect(t.outcome == p.outcome, "outcomes differ");
      const auto& ts = t.final_position.states;
      const auto& ps = p.final_position.states;
      c.expect(t.final_position.filtrations.size() == 3, "script did not run");
      c.expect(ts.size() == ps.size() + 2, "lengths differ");
      for (std::size_t i = 3; i < ts.size(); ++i) {
        c.expect(ts[i].cell.kind == LayerMask::Kind::All, "cell is not a singleton");
        if (i - 2 < ps.size()) c.expect(ts[i].cell.member == ps[i - 2], "members differ");
      }
    }
    for (const Language* g : {&p_lang(), &lt_lang()})
      for (int d = 1; d <= (g == &p_lang() ? 2 : 1); ++d) {
        const std::size_t n = enumerate_constituents(*g, d).size();
        c.expect(partition_from_mask(*g, Filtration::trivial(), d).size() == 1, "trivial mask is not one cell");
        auto fine = partition_from_mask(*g, Filtration::complete(), d);
        c.expect(fine.size() == n, "complete mask is not all singletons");
        for (const auto& [cell, ms] : fine) c.expect(ms.size() == 1, "non-singleton cell");
      }
  });

  // Runs last so it sees every mutation made above.
  criterion(4, "tree invariants held after every mutation", 0, [](Check& c) {
    c.expect(invariant_stats().checks > 0, "no invariant checks ran");
    c.expect(invariant_stats().failures == 0, "invariant failures recorded");
    std::cout << "  invariant checks: " << invariant_stats().checks << "\n";
  });

  return failures == 0 ? 0 : 1;
}
