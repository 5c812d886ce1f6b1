// hintikka: command-line driver.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include "hintikka/arena.hpp"
#include "hintikka/hilbert.hpp"
#include "hintikka/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace hintikka;

namespace {

struct Common {
  std::string sig;
  std::size_t cap = kDefaultCap;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Language load_language(const Common& c) { return Language(Signature::parse(read_file(c.sig))); }

/// A formula argument is a file path when one exists, otherwise inline text.
std::string formula_text(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) {
    std::string t = read_file(arg);
    while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
    return t;
  }
  return arg;
}

Formula sentence(const Language& lang, const std::string& arg) {
  return parse_formula(formula_text(arg), lang.signature(), true, true);
}

std::string snapshot_kind(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  for (int i = 0; i < 4 && std::getline(in, line); ++i)
    if (line.rfind("kind ", 0) == 0) return line.substr(5);
  return "";
}

/// `parent-uniform`, `converged`, `depth-ht` or a snapshot path.
HT make_tree(const Language& lang, const std::string& spec, int depth, std::size_t cap) {
  if (spec == "parent-uniform") return make_parent_uniform(lang, depth, cap);
  if (spec == "converged") return converge(lang, make_parent_uniform(lang, depth, cap));
  if (spec == "depth-ht") {
    MonadicModels mm(lang);
    return make_depth_ht(mm, depth);
  }
  return load_snapshot<Constituent>(lang, read_file(spec));
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) std::cout << text;
  else write_file(out, text);
}

ConsistencyOracle make_oracle(const std::string& backend, int effort, int max_domain, std::size_t cap) {
  ConsistencyOracle o;
  if (backend == "exact") o = ConsistencyOracle::exact();
  else if (backend == "bounded") o = ConsistencyOracle::bounded(effort, max_domain);
  else throw UsageError("unknown oracle '" + backend + "'");
  o.cap = cap;
  return o;
}

ChallengeRule make_rule(const std::string& r) {
  if (r == "support") return ChallengeRule::Support;
  if (r == "literal") return ChallengeRule::LiteralWeight;
  throw UsageError("unknown challenge rule '" + r + "'");
}

/// Human player: reads a move number (or `c`) from stdin.
Decision prompt_move(const Language& lang, const PathPosition& p) {
  auto moves = legal_moves(lang, p);
  std::cerr << "state " << to_text(lang, p.current()) << "  (" << player_name(p.to_move()) << " to move)\n";
  for (std::size_t i = 0; i + 1 < moves.size(); ++i) std::cerr << "  " << i << "  " << move_text(lang, moves[i]) << "\n";
  std::cerr << "  c  challenge\n> " << std::flush;
  std::string in;
  Decision d;
  if (!(std::cin >> in) || in == "c") {
    d.challenge = 1;
    return d;
  }
  std::size_t k = std::stoul(in);
  if (k + 1 >= moves.size()) throw std::out_of_range("no such move");
  d.select.emplace_back(moves[k].child, Rational(1));
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hintikka normal forms, belief trees and proving games"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--sig", c.sig, "signature file (name/arity per line)")->required()->check(CLI::ExistingFile);
    s->add_option("--cap", c.cap, "enumeration cap");
  };

  // parse
  std::string formula;
  bool close = false;
  auto* parse = app.add_subcommand("parse", "parse and pretty-print a formula");
  add_common(parse);
  parse->add_option("--formula", formula, "formula text or file")->required();
  parse->add_flag("--close", close, "close free variables universally");

  // enumerate / count
  int depth = 0, k = 0;
  bool only_consistent = false;
  auto* enumerate = app.add_subcommand("enumerate", "list constituents of a depth");
  add_common(enumerate);
  enumerate->add_option("--depth", depth)->required();
  enumerate->add_flag("--consistent", only_consistent, "drop trivially inconsistent constituents");
  std::string mask_path;
  enumerate->add_option("--mask", mask_path, "print the cells of this mask instead")->check(CLI::ExistingFile);
  auto* count = app.add_subcommand("count", "count constituents of a depth");
  add_common(count);
  count->add_option("--depth", depth)->required();
  count->add_option("--k", k, "free terms for attributive constituents");

  // dnf
  auto* dnfc = app.add_subcommand("dnf", "distributive normal form of a sentence");
  add_common(dnfc);
  dnfc->add_option("--formula", formula)->required();
  dnfc->add_option("--depth", depth)->required();

  // belief
  std::string tree = "parent-uniform", in_path, out_path, kind = "parent-uniform";
  std::vector<std::string> nodes;
  int tree_depth = -1;
  auto* belief = app.add_subcommand("belief", "belief trees");
  belief->require_subcommand(1);
  auto* binit = belief->add_subcommand("init", "build a tree");
  add_common(binit);
  binit->add_option("--kind", kind, "parent-uniform | depth-uniform | depth-ht | converged");
  binit->add_option("--depth", depth)->required();
  binit->add_option("-o,--out", out_path);
  auto* brenorm = belief->add_subcommand("renorm", "refute nodes and renormalize");
  add_common(brenorm);
  brenorm->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
  brenorm->add_option("--node", nodes, "node id (repeat for a batch)")->required();
  brenorm->add_option("-o,--out", out_path);
  auto* bstep = belief->add_subcommand("step", "belief sequence step at a depth (0: all depths)");
  add_common(bstep);
  bstep->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
  bstep->add_option("--depth", depth)->required();
  bstep->add_option("-o,--out", out_path);
  auto* bquery = belief->add_subcommand("query", "belief in a sentence");
  auto* bprove = belief->add_subcommand("prove", "whether the belief is 1");
  for (auto* s : {bquery, bprove}) {
    add_common(s);
    s->add_option("--formula", formula)->required();
    s->add_option("--depth", depth)->required();
    s->add_option("--tree", tree, "parent-uniform | converged | depth-ht | snapshot path");
    s->add_option("--tree-depth", tree_depth, "materialized depth (defaults to --depth)");
  }
  auto* bsnap = belief->add_subcommand("snapshot", "validate and re-emit a snapshot");
  add_common(bsnap);
  bsnap->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
  bsnap->add_option("-o,--out", out_path);

  // embed / geom
  std::vector<std::string> formulas;
  auto* embedc = app.add_subcommand("embed", "embed a sentence as a function on depth-D nodes");
  add_common(embedc);
  embedc->add_option("--formula", formula)->required();
  embedc->add_option("--depth", depth, "cutoff")->required();
  embedc->add_option("--tree", tree);
  auto* geom = app.add_subcommand("geom", "inner products and correlation of two sentences");
  add_common(geom);
  geom->add_option("--formula", formulas)->required()->expected(2);
  geom->add_option("--depth", depth, "cutoff")->required();
  geom->add_option("--tree", tree);

  // conjecture
  std::size_t max_size = 3, top = 10;
  std::string k_file, c_choice = "sqrt";
  bool all_subsets = false;
  auto* conj = app.add_subcommand("conjecture", "rank conjectures over dnf members");
  add_common(conj);
  conj->add_option("--formula", formulas, "regularizing sentence (repeatable)");
  conj->add_option("--k-file", k_file, "regularizing sentences, one per line")->check(CLI::ExistingFile);
  conj->add_option("--c", c_choice, "concave size weight: sqrt | log | one");
  conj->add_flag("--all-subsets", all_subsets, "no size limit");
  conj->add_option("--depth", depth)->required();
  conj->add_option("--tree", tree);
  conj->add_option("--tree-depth", tree_depth);
  conj->add_option("--max-size", max_size);
  conj->add_option("--top", top);

  // play / selfplay / replay
  int N = 6;
  std::uint64_t seed = 1;
  std::string agent = "rational", rule = "support", oracle = "exact", log_path, interactive;
  int effort = 0, max_domain = 2;
  long games = 100;
  unsigned threads = 1;
  auto add_game = [&](CLI::App* s) {
    add_common(s);
    s->add_option("--tree", tree, "parent-uniform | converged | depth-ht | snapshot path");
    s->add_option("--tree-depth", tree_depth)->required();
    s->add_option("--N", N, "move limit");
    s->add_option("--seed", seed);
    s->add_option("--agent", agent, "rational | conjecturing");
    s->add_option("--challenge-rule", rule, "support | literal");
    s->add_option("--oracle", oracle, "exact | bounded");
    s->add_option("--effort", effort);
    s->add_option("--max-domain", max_domain);
  };
  auto* play = app.add_subcommand("play", "play one Pathfinder game");
  add_game(play);
  play->add_option("--interactive", interactive, "O or E: read that player's moves from stdin");
  bool trail = false;
  std::vector<std::string> refine_masks;
  play->add_flag("--trail", trail, "play Trailblazer over cells");
  play->add_option("--mask", mask_path, "initial mask (default: trivial)")->check(CLI::ExistingFile);
  play->add_option("--refine", refine_masks, "scripted Refine into this mask (repeatable)")->check(CLI::ExistingFile);
  auto* selfplay = app.add_subcommand("selfplay", "run a batch of self-play games");
  add_game(selfplay);
  selfplay->add_option("--games", games);
  selfplay->add_option("--threads", threads);
  selfplay->add_option("--log", log_path, "write game log here instead of stdout");
  bool validate = false;
  auto* replay = app.add_subcommand("replay", "check a game log");
  add_common(replay);
  replay->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
  replay->add_flag("--validate", validate)->required();
  replay->add_option("--oracle", oracle, "exact | bounded | none");
  replay->add_option("--effort", effort);
  replay->add_option("--max-domain", max_domain);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const Language lang = load_language(c);
    if (tree_depth < 0) tree_depth = depth;

    if (*parse) {
      Formula f = parse_formula(formula_text(formula), lang.signature(), false, close);
      std::cout << print_formula(f, lang.signature()) << "\n"
                << "depth " << hintikka::depth(f) << "\n"
                << "sentence " << (is_sentence(f) ? "true" : "false") << "\n";
    } else if (*enumerate && !mask_path.empty()) {
      Filtration f = parse_mask(lang, read_file(mask_path), depth, c.cap);
      for (const auto& [cell, members] : partition_from_mask(lang, f, depth, c.cap))
        std::cout << cell_id(lang, cell) << "\t" << members.size() << "\n";
    } else if (*enumerate) {
      for (const auto& x : enumerate_constituents(lang, depth, c.cap))
        if (!only_consistent || !trivially_inconsistent(lang, x)) std::cout << to_text(lang, x) << "\n";
    } else if (*count) {
      std::cout << count_attr(lang, depth, k) << "\n";
    } else if (*dnfc) {
      auto s = dnf(lang, sentence(lang, formula), depth, c.cap);
      for (const auto& x : s.members) std::cout << to_text(lang, x) << "\n";
      std::cerr << s.members.size() << " constituents\n";
    } else if (*binit) {
      HT h;
      if (kind == "depth-uniform") {
        auto r = make_depth_uniform(lang, depth, c.cap);
        if (!r.coherent) throw std::domain_error("depth-uniform weights are not coherent for this signature");
        h = r.tree;
      } else {
        h = make_tree(lang, kind, depth, c.cap);
      }
      emit(save_snapshot(lang, h), out_path);
    } else if (*brenorm || *bsnap) {
      const std::string text = read_file(in_path);
      auto run = [&](auto tag) {
        using Key = decltype(tag);
        auto h = load_snapshot<Key>(lang, text);
        if (*brenorm) {
          std::vector<Key> keys;
          for (const auto& n : nodes) {
            Key key;
            detail::parse_key(lang, n, key);
            if (h.find(key) < 0) throw std::invalid_argument("node '" + n + "' not in tree");
            keys.push_back(key);
          }
          h = keys.size() == 1 ? renorm(h, h.find(keys[0])) : renorm_batch(h, keys);
        }
        emit(save_snapshot(lang, h), out_path);
      };
      const std::string kd = snapshot_kind(text);
      if (kd == "label") run(std::string{});
      else if (kd == "cell") run(Cell{});
      else run(Constituent{});
    } else if (*bstep) {
      HT h = load_snapshot<Constituent>(lang, read_file(in_path));
      h = depth == 0 ? converge(lang, h) : belief_sequence_step(lang, h, depth);
      emit(save_snapshot(lang, h), out_path);
    } else if (*bquery || *bprove) {
      HT h = make_tree(lang, tree, tree_depth, c.cap);
      const Rational b = belief_in_sentence(lang, h, sentence(lang, formula), depth);
      if (*bquery) std::cout << to_text(b) << "\n";
      else std::cout << (b == 1 ? "true" : "false") << "\n";
    } else if (*embedc) {
      HT h = make_tree(lang, tree, depth, c.cap);
      Embedded e = embed(lang, sentence(lang, formula), h, depth);
      for (std::size_t i = 0; i < e.basis().size(); ++i)
        std::cout << to_text(lang, h.key(e.basis()[i])) << "\t" << to_text(e.values()[i]) << "\t"
                  << to_text(e.weight(i)) << "\n";
      std::cout << "norm2\t" << to_text(norm_squared(e)) << "\n";
    } else if (*geom) {
      HT h = make_tree(lang, tree, depth, c.cap);
      Embedded a = embed(lang, sentence(lang, formulas[0]), h, depth);
      Embedded b = embed(lang, sentence(lang, formulas[1]), h, depth);
      std::cout << "mean1\t" << to_text(mean(a)) << "\n"
                << "mean2\t" << to_text(mean(b)) << "\n"
                << "inner\t" << to_text(inner(a, b)) << "\n";
      auto r = correlation(a, b);
      std::cout << "correlation\t";
      if (r) std::cout << std::setprecision(12) << *r << "\n";
      else std::cout << "undefined\n";
    } else if (*conj) {
      HT h = make_tree(lang, tree, tree_depth, c.cap);
      std::vector<Formula> K;
      for (const auto& f : formulas) K.push_back(sentence(lang, f));
      if (!k_file.empty()) {
        std::istringstream in(read_file(k_file));
        for (std::string line; std::getline(in, line);)
          if (!line.empty() && line[0] != '#') K.push_back(sentence(lang, line));
      }
      // Without regularizers, conjecture over every constituent of the depth.
      if (K.empty()) K.push_back(Formula::top());
      WeightFn cw = sqrt_weight;
      if (c_choice == "log") cw = [](std::size_t n) { return std::log1p(static_cast<double>(n)); };
      else if (c_choice == "one") cw = [](std::size_t) { return 1.0; };
      else if (c_choice != "sqrt") throw UsageError("unknown --c '" + c_choice + "'");
      auto universe = k_regularized_universe(lang, K, depth, all_subsets ? c.cap : max_size, c.cap);
      auto ranked = rank_conjectures<Constituent>([&](const Constituent& x) { return ht_weight(h, x); }, universe, cw);
      for (std::size_t i = 0; i < ranked.size() && i < top; ++i) {
        std::cout << std::setprecision(12) << ranked[i].score;
        if (ranked[i].conjecture.members.empty()) std::cout << "\tfalse";
        for (const auto& m : ranked[i].conjecture.members) std::cout << "\t" << to_text(lang, m);
        std::cout << "\n";
      }
    } else if (*play || *selfplay) {
      HT h = make_tree(lang, tree, tree_depth, c.cap);
      const ChallengeRule cr = make_rule(rule);
      std::unique_ptr<PathPolicy> pol;
      if (agent == "rational") pol = std::make_unique<RationalAgent>(h, cr);
      else if (agent == "conjecturing") pol = std::make_unique<ConjecturingAgent>(h, cr);
      else throw UsageError("unknown agent '" + agent + "'");
      std::unique_ptr<MonadicModels> mm;
      const ConsistencyOracle o = make_oracle(oracle, effort, max_domain, c.cap);
      if (o.backend == ConsistencyOracle::Backend::ExactMonadic) mm = std::make_unique<MonadicModels>(lang);
      const VerdictFn vf = verdict_fn(lang, o, mm.get());
      if (*play && trail) {
        const int close_to = std::max(N, tree_depth) + 1;
        Filtration init = mask_path.empty() ? Filtration::trivial() : parse_mask(lang, read_file(mask_path), close_to, c.cap);
        std::vector<ScriptedRefiner::Step> script;
        for (const auto& m : refine_masks) script.push_back({parse_mask(lang, read_file(m), close_to, c.cap), 0});
        LiftedRationalAgent lifted(lang, h, cr);
        ScriptedRefiner agent_t(lang, script, lifted);
        TrailRecord r = play_trail(lang, agent_t, agent_t, N, vf, seed, init, c.cap);
        std::cout << "seed=" << r.seed << " N=" << r.N << " moves=";
        if (r.moves.empty()) std::cout << "-";
        for (std::size_t i = 0; i < r.moves.size(); ++i) std::cout << (i ? ";" : "") << r.moves[i];
        std::cout << " winner=" << outcome_name(r.outcome) << " zO=" << r.z_O() << " zE=" << r.z_E() << "\n";
      } else if (*play) {
        FunctionPolicy human([&](const PathPosition& p) { return prompt_move(lang, p); });
        if (!interactive.empty() && interactive != "O" && interactive != "E")
          throw UsageError("--interactive takes O or E");
        const PathPolicy& po = interactive == "O" ? static_cast<const PathPolicy&>(human) : *pol;
        const PathPolicy& pe = interactive == "E" ? static_cast<const PathPolicy&>(human) : *pol;
        std::cout << format_log(play_game(lang, po, pe, N, vf, seed, effort), 0) << "\n";
      } else {
        SelfPlayStats stats;
        auto recs = self_play_batch(lang, *pol, *pol, games, N, vf, seed, &stats, threads, effort);
        std::ofstream logf;
        if (!log_path.empty()) logf.open(log_path);
        std::ostream& log = log_path.empty() ? std::cout : logf;
        for (std::size_t i = 0; i < recs.size(); ++i) log << format_log(recs[i], i) << "\n";
        (log_path.empty() ? std::cerr : std::cout) << stats.summary() << "\n";
      }
    } else if (*replay) {
      std::unique_ptr<MonadicModels> mm;
      std::optional<VerdictFn> vf;
      if (oracle != "none") {
        const ConsistencyOracle o = make_oracle(oracle, effort, max_domain, c.cap);
        if (o.backend == ConsistencyOracle::Backend::ExactMonadic) mm = std::make_unique<MonadicModels>(lang);
        vf = verdict_fn(lang, o, mm.get());
      }
      std::istringstream in(read_file(log_path));
      std::string line;
      int lineno = 0, checked = 0, bad = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::string err;
        try {
          err = validate_log(lang, parse_log(line), vf ? &*vf : nullptr);
        } catch (const std::exception& e) {
          err = e.what();
        }
        ++checked;
        if (!err.empty()) {
          ++bad;
          std::cerr << log_path << ":" << lineno << ": " << err << "\n";
        }
      }
      std::cout << (bad ? "invalid" : "ok") << " " << checked << " games, " << bad << " rejected\n";
      return bad ? 1 : 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
