#pragma once
// Pathfinder and Trailblazer: alternating games over refinement paths.
//
// Positions start at [top]. O moves when the position has even length, so E
// makes the first move. A challenge ends the game; the challenger wins iff
// the challenged state is inconsistent.

#include "abstraction.hpp"
#include "conjecture.hpp"
#include "dnf.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace hintikka {

enum class Player { O, E };
enum class Outcome { OWins, EWins, Drawn, Unknown };

inline Player turn_of(std::size_t length) { return length % 2 == 0 ? Player::O : Player::E; }
inline Player other(Player p) { return p == Player::O ? Player::E : Player::O; }
inline const char* player_name(Player p) { return p == Player::O ? "O" : "E"; }
inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::OWins: return "O";
    case Outcome::EWins: return "E";
    case Outcome::Drawn: return "draw";
    case Outcome::Unknown: return "unknown";
  }
  return "?";
}
inline Outcome win_for(Player p) { return p == Player::O ? Outcome::OWins : Outcome::EWins; }

struct TerminalPosition : std::logic_error {
  using std::logic_error::logic_error;
};

using VerdictFn = std::function<Verdict(const Constituent&)>;

/// Oracle as a callable; `models` may be null and is only used by the exact
/// monadic backend.
inline VerdictFn verdict_fn(const Language& lang, ConsistencyOracle o, const MonadicModels* models = nullptr) {
  return [&lang, o, models](const Constituent& c) { return decide(o, lang, c, models); };
}

/// Winner for a challenge issued by `challenger` against a state with verdict v.
inline Outcome challenge_outcome(Player challenger, Verdict v) {
  if (v == Verdict::Unknown) return Outcome::Unknown;
  return v == Verdict::Inconsistent ? win_for(challenger) : win_for(other(challenger));
}

/// Uniform draw in [0, 1) with 64 bits of resolution.
inline Rational uniform_draw(std::mt19937_64& rng) { return unit_from_bits(rng()); }

/// Per-game seed derived from a batch seed; fixed by the standard seed_seq
/// algorithm, so it is portable.
inline std::uint64_t game_seed(std::uint64_t base, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 g(seq);
  return g();
}

// ---------------------------------------------------------------------------
// Pathfinder

struct PathMove {
  enum class Kind { Select, Challenge };
  Kind kind = Kind::Challenge;
  Constituent child;

  static PathMove select(Constituent c) { return {Kind::Select, std::move(c)}; }
  static PathMove challenge() { return {}; }
  bool operator==(const PathMove&) const = default;
};

inline std::string move_text(const Language& lang, const PathMove& m) {
  return m.kind == PathMove::Kind::Challenge ? "C" : "S:" + to_text(lang, m.child);
}

inline PathMove parse_move(const Language& lang, const std::string& s) {
  if (s == "C") return PathMove::challenge();
  if (s.rfind("S:", 0) == 0) return PathMove::select(parse_constituent(lang, s.substr(2)));
  throw std::invalid_argument("bad move '" + s + "'");
}

/// A challenge does not add a state: the player to move at the last state
/// is the challenger.
struct PathPosition {
  std::vector<Constituent> states{top_constituent()};
  bool challenged = false;

  Player to_move() const { return turn_of(states.size()); }
  const Constituent& current() const { return states.back(); }
};

inline std::vector<PathMove> legal_moves(const Language& lang, const PathPosition& p, std::size_t cap = kDefaultCap) {
  if (p.challenged) throw TerminalPosition("no moves after a challenge");
  std::vector<PathMove> out;
  for (auto& c : refine_children(lang, p.current(), cap)) out.push_back(PathMove::select(std::move(c)));
  out.push_back(PathMove::challenge());
  return out;
}

inline bool is_legal(const PathPosition& p, const PathMove& m) {
  if (p.challenged) return false;
  if (m.kind == PathMove::Kind::Challenge) return true;
  return m.child.depth == p.current().depth + 1 && truncate(m.child) == p.current();
}

inline Outcome winner(const PathPosition& p, const VerdictFn& verdict) {
  if (!p.challenged) throw TerminalPosition("winner of an unfinished game");
  return challenge_outcome(p.to_move(), verdict(p.current()));
}

/// A finite distribution over Select moves plus a challenge probability.
struct Decision {
  std::vector<std::pair<Constituent, Rational>> select;
  Rational challenge = 0;
  Rational value = Rational(1, 2);  // estimate for O

  bool well_formed() const {
    if (challenge < 0 || challenge > 1) return false;
    Rational s = challenge;
    for (const auto& [c, p] : select) {
      if (p < 0) return false;
      s += p;
    }
    return s == 1;
  }
};

class PathPolicy {
 public:
  virtual ~PathPolicy() = default;
  virtual Decision evaluate(const PathPosition& p) const = 0;
};

/// Challenge if u < q, otherwise walk the cumulative select weights.
inline PathMove sample(const Decision& d, std::mt19937_64& rng) {
  const Rational u = uniform_draw(rng);
  if (u < d.challenge) return PathMove::challenge();
  Rational acc = d.challenge;
  for (const auto& [c, p] : d.select) {
    acc += p;
    if (u < acc) return PathMove::select(c);
  }
  return PathMove::challenge();
}

enum class ChallengeRule {
  Support,       // challenge iff w(delta) = 0 or the children carry no weight
  LiteralWeight  // challenge with probability 1 - w(delta)
};

namespace detail {
/// Weight of `c` and its positive materialized children, ascending.
inline std::pair<Rational, std::vector<std::pair<Constituent, Rational>>> local_weights(const HT& h,
                                                                                        const Constituent& c) {
  std::vector<std::pair<Constituent, Rational>> kids;
  const int i = h.find(c);
  if (i < 0) return {Rational(0), kids};
  for (int k : h.node(i).kids)
    if (h.weight(k) > 0) kids.emplace_back(h.key(k), h.weight(k));
  return {h.weight(i), kids};
}

inline Rational challenge_probability(ChallengeRule rule, const Rational& w, const Rational& mass) {
  if (mass == 0 || w == 0) return 1;
  return rule == ChallengeRule::Support ? Rational(0) : Rational(1 - w);
}
}  // namespace detail

/// Follows the tree: challenges unsupported states, otherwise selects a
/// child in proportion to its weight.
class RationalAgent : public PathPolicy {
 public:
  explicit RationalAgent(const HT& h, ChallengeRule rule = ChallengeRule::Support) : h_(h), rule_(rule) {}

  Decision evaluate(const PathPosition& p) const override {
    auto [w, kids] = detail::local_weights(h_, p.current());
    Rational mass = 0;
    for (const auto& [c, x] : kids) mass += x;
    Decision d;
    d.challenge = detail::challenge_probability(rule_, w, mass);
    if (d.challenge == 1) return d;
    for (auto& [c, x] : kids) d.select.emplace_back(std::move(c), (1 - d.challenge) * x / mass);
    return d;
  }

 private:
  const HT& h_;
  ChallengeRule rule_;
};

/// Selects within the best-scoring conjecture over the current state's
/// children. Only positive-weight children enter the universe: a zero-weight
/// member always lowers the score when c(n)/ln(n+1) is non-increasing.
class ConjecturingAgent : public PathPolicy {
 public:
  ConjecturingAgent(const HT& h, ChallengeRule rule = ChallengeRule::Support, std::size_t max_size = 3,
                    WeightFn c = sqrt_weight)
      : h_(h), rule_(rule), max_size_(max_size), c_(std::move(c)) {}

  Decision evaluate(const PathPosition& p) const override {
    auto [w, kids] = detail::local_weights(h_, p.current());
    Rational mass = 0;
    for (const auto& [c, x] : kids) mass += x;
    Decision d;
    d.challenge = detail::challenge_probability(rule_, w, mass);
    if (d.challenge == 1) return d;
    std::vector<Constituent> base;
    std::map<Constituent, Rational> weight;
    for (const auto& [c, x] : kids) {
      base.push_back(c);
      weight.emplace(c, x);
    }
    auto universe = subsets_up_to(p.current().depth + 1, base, max_size_);
    auto ranked = rank_conjectures<Constituent>([&](const Constituent& c) { return weight.at(c); }, universe, c_);
    const auto& top = ranked.front().conjecture.members;
    Rational tmass = 0;
    for (const auto& c : top) tmass += weight.at(c);
    for (const auto& c : top) d.select.emplace_back(c, (1 - d.challenge) * weight.at(c) / tmass);
    return d;
  }

 private:
  const HT& h_;
  ChallengeRule rule_;
  std::size_t max_size_;
  WeightFn c_;
};

/// Wraps a callable; used for scripted, adversarial and interactive players.
class FunctionPolicy : public PathPolicy {
 public:
  explicit FunctionPolicy(std::function<Decision(const PathPosition&)> f) : f_(std::move(f)) {}
  Decision evaluate(const PathPosition& p) const override { return f_(p); }

 private:
  std::function<Decision(const PathPosition&)> f_;
};

inline Decision always_challenge(const PathPosition&) {
  Decision d;
  d.challenge = 1;
  return d;
}

struct GameRecord {
  std::uint64_t seed = 0;
  int effort = 0;
  int N = 0;
  std::vector<std::string> moves;
  PathPosition final_position;
  Outcome outcome = Outcome::Drawn;
  std::optional<Player> forfeit;  // player whose policy misbehaved
  Verdict verdict = Verdict::Unknown;

  int z_O() const { return outcome == Outcome::OWins ? 1 : outcome == Outcome::EWins ? -1 : 0; }
  int z_E() const { return -z_O(); }
  bool challenged() const { return final_position.challenged; }
  std::optional<Player> challenger() const {
    if (!challenged()) return std::nullopt;
    return final_position.to_move();
  }
};

inline GameRecord play_game(const Language& lang, const PathPolicy& o, const PathPolicy& e, int N,
                            const VerdictFn& verdict, std::uint64_t seed, int effort = 0) {
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  GameRecord r;
  r.seed = seed;
  r.effort = effort;
  r.N = N;
  std::mt19937_64 rng(seed);
  PathPosition& p = r.final_position;
  for (int step = 0; step < N; ++step) {
    const Player mover = p.to_move();
    const PathPolicy& pol = mover == Player::O ? o : e;
    Decision d;
    bool ok = true;
    try {
      d = pol.evaluate(p);
      ok = d.well_formed();
    } catch (const std::exception&) {
      ok = false;
    }
    PathMove m;
    if (ok) {
      m = sample(d, rng);
      ok = is_legal(p, m);
    }
    if (!ok) {
      r.forfeit = mover;
      r.outcome = win_for(other(mover));
      return r;
    }
    r.moves.push_back(move_text(lang, m));
    if (m.kind == PathMove::Kind::Challenge) {
      p.challenged = true;
      r.verdict = verdict(p.current());
      r.outcome = challenge_outcome(mover, r.verdict);
      return r;
    }
    p.states.push_back(std::move(m.child));
  }
  r.outcome = Outcome::Drawn;
  return r;
}

// ---------------------------------------------------------------------------
// Game log: one line per game, space separated key=value pairs.
//   game=<i> seed=<s> effort=<e> N=<n> moves=<m1;m2;...|-> winner=<O|E|draw|unknown>
//   zO=<z> zE=<z> verdict=<...> forfeit=<O|E|->

inline std::string format_log(const GameRecord& r, std::uint64_t index) {
  std::ostringstream s;
  s << "game=" << index << " seed=" << r.seed << " effort=" << r.effort << " N=" << r.N << " moves=";
  if (r.moves.empty()) s << "-";
  for (std::size_t i = 0; i < r.moves.size(); ++i) s << (i ? ";" : "") << r.moves[i];
  s << " winner=" << outcome_name(r.outcome) << " zO=" << r.z_O() << " zE=" << r.z_E()
    << " verdict=" << (r.challenged() ? verdict_name(r.verdict) : "-")
    << " forfeit=" << (r.forfeit ? player_name(*r.forfeit) : "-");
  return s.str();
}

struct LogEntry {
  std::map<std::string, std::string> fields;
  std::vector<std::string> moves;

  const std::string& at(const std::string& k) const {
    auto it = fields.find(k);
    if (it == fields.end()) throw std::invalid_argument("log line lacks '" + k + "'");
    return it->second;
  }
};

inline LogEntry parse_log(const std::string& line) {
  LogEntry e;
  std::istringstream in(line);
  for (std::string tok; in >> tok;) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad log token '" + tok + "'");
    e.fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  const std::string& m = e.at("moves");
  if (m != "-") {
    std::stringstream ss(m);
    for (std::string t; std::getline(ss, t, ';');) e.moves.push_back(t);
  }
  return e;
}

/// Structural checks on a logged game; returns an empty string when valid.
/// With a verdict function the recorded winner is also recomputed.
inline std::string validate_log(const Language& lang, const LogEntry& e, const VerdictFn* verdict = nullptr) {
  try {
    PathPosition p;
    const int N = std::stoi(e.at("N"));
    if (static_cast<int>(e.moves.size()) > N) return "more moves than N";
    for (std::size_t i = 0; i < e.moves.size(); ++i) {
      if (p.challenged) return "move " + std::to_string(i + 1) + " after a challenge";
      PathMove m = parse_move(lang, e.moves[i]);
      if (!is_legal(p, m)) return "move " + std::to_string(i + 1) + " is not a refinement of the current state";
      if (m.kind == PathMove::Kind::Challenge) p.challenged = true;
      else p.states.push_back(std::move(m.child));
    }
    const std::string& w = e.at("winner");
    const std::string& forfeit = e.at("forfeit");
    if (forfeit != "-") return "";
    if (!p.challenged) {
      if (static_cast<int>(e.moves.size()) != N) return "unfinished game without a challenge";
      if (w != "draw") return "truncated game must be drawn";
      return "";
    }
    if (w == "draw") return "challenged game recorded as drawn";
    if (verdict && w != outcome_name(winner(p, *verdict))) return "winner disagrees with the oracle";
    return "";
  } catch (const std::exception& ex) {
    return ex.what();
  }
}

// ---------------------------------------------------------------------------
// Self-play

struct SelfPlayStats {
  long games = 0, o_wins = 0, e_wins = 0, draws = 0, unresolved = 0, forfeits = 0;
  long challenges = 0, correct_challenges = 0, lost_challenges = 0;
  std::map<int, long> lost_by_depth;

  /// Fraction of resolved challenges that hit an inconsistent state; 1 when
  /// there were none.
  double challenge_accuracy() const {
    const long resolved = correct_challenges + lost_challenges;
    return resolved == 0 ? 1.0 : static_cast<double>(correct_challenges) / resolved;
  }

  void add(const GameRecord& r) {
    ++games;
    if (r.forfeit) ++forfeits;
    switch (r.outcome) {
      case Outcome::OWins: ++o_wins; break;
      case Outcome::EWins: ++e_wins; break;
      case Outcome::Drawn: ++draws; break;
      case Outcome::Unknown: ++unresolved; break;
    }
    if (r.challenged() && !r.forfeit) {
      ++challenges;
      if (r.verdict == Verdict::Inconsistent) ++correct_challenges;
      if (r.verdict == Verdict::Consistent) {
        ++lost_challenges;
        ++lost_by_depth[r.final_position.current().depth];
      }
    }
  }

  std::string summary() const {
    std::ostringstream s;
    s << "games=" << games << " O=" << o_wins << " E=" << e_wins << " draw=" << draws << " unknown=" << unresolved
      << " forfeit=" << forfeits << " challenges=" << challenges << " correct=" << correct_challenges
      << " lost=" << lost_challenges << " accuracy=" << challenge_accuracy();
    for (const auto& [d, n] : lost_by_depth) s << " lost@" << d << "=" << n;
    return s.str();
  }
};

/// Runs `count` games on up to `threads` workers. Records come back in game
/// order, so logs do not depend on scheduling.
inline std::vector<GameRecord> self_play_batch(const Language& lang, const PathPolicy& o, const PathPolicy& e,
                                               long count, int N, const VerdictFn& verdict, std::uint64_t seed,
                                               SelfPlayStats* stats = nullptr, unsigned threads = 1,
                                               int effort = 0) {
  std::vector<GameRecord> out(count > 0 ? count : 0);
  std::atomic<long> next{0};
  auto work = [&] {
    for (long i; (i = next++) < count;)
      out[i] = play_game(lang, o, e, N, verdict, game_seed(seed, static_cast<std::uint64_t>(i)), effort);
  };
  threads = std::max(1u, std::min<unsigned>(threads, count > 0 ? static_cast<unsigned>(count) : 1u));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (stats)
    for (const auto& r : out) stats->add(r);
  return out;
}

// ---------------------------------------------------------------------------
// Trailblazer: states are cells of a filtration; Refine switches to a finer
// filtration and a sub-cell of the current cell.

struct TrailState {
  int filtration = 0;  // index into TrailPosition::filtrations
  Cell cell;
  bool operator==(const TrailState&) const = default;
};

struct TrailMove {
  enum class Kind { Select, Challenge, Refine };
  Kind kind = Kind::Challenge;
  Cell cell;                         // Select: child cell; Refine: sub-cell
  std::optional<Filtration> finer;   // Refine only
};

struct TrailPosition {
  std::vector<Filtration> filtrations{Filtration::trivial()};
  std::vector<TrailState> states{TrailState{0, trivial_cell(0)}};
  bool challenged = false;

  Player to_move() const { return turn_of(states.size()); }
  const TrailState& current() const { return states.back(); }
  const Filtration& filtration() const { return filtrations[current().filtration]; }
};

inline std::string trail_move_text(const Language& lang, const TrailMove& m, int filtration_index) {
  switch (m.kind) {
    case TrailMove::Kind::Challenge: return "C";
    case TrailMove::Kind::Select: return "S:" + cell_id(lang, m.cell);
    case TrailMove::Kind::Refine: return "R" + std::to_string(filtration_index) + ":" + cell_id(lang, m.cell);
  }
  return "?";
}

inline bool trail_legal(const Language& lang, const TrailPosition& p, const TrailMove& m,
                        std::size_t cap = kDefaultCap) {
  if (p.challenged) return false;
  const Cell& cur = p.current().cell;
  const Filtration& f = p.filtration();
  try {
    switch (m.kind) {
      case TrailMove::Kind::Challenge: return true;
      case TrailMove::Kind::Select:
        if (m.cell.depth != cur.depth + 1 || m.cell.kind != f.layer(cur.depth + 1).kind) return false;
        return parent_cell(lang, f, m.cell, cap) == cur;
      case TrailMove::Kind::Refine: {
        if (!m.finer || !f.refined_by(*m.finer) || *m.finer == f) return false;
        m.finer->validate(lang, cap);
        if (m.cell.depth != cur.depth) return false;
        if (cur.depth == 0) return m.cell == cur;
        for (const auto& sub : refine_cell(lang, f, cur, *m.finer, cap))
          if (sub == m.cell) return true;
        return false;
      }
    }
  } catch (const std::exception&) {
    return false;
  }
  return false;
}

/// Select for each child cell, Challenge, and Refine into each sub-cell for
/// every candidate filtration strictly finer than the current one.
inline std::vector<TrailMove> legal_trail_moves(const Language& lang, const TrailPosition& p,
                                                const std::vector<Filtration>& candidates = {},
                                                std::size_t cap = kDefaultCap) {
  if (p.challenged) throw TerminalPosition("no moves after a challenge");
  const Filtration& f = p.filtration();
  std::vector<TrailMove> out;
  for (auto& c : super_children(lang, f, p.current().cell, cap))
    out.push_back({TrailMove::Kind::Select, std::move(c), std::nullopt});
  out.push_back({TrailMove::Kind::Challenge, {}, std::nullopt});
  for (const auto& g : candidates) {
    if (!f.refined_by(g) || g == f) continue;
    for (auto& sub : refine_cell(lang, f, p.current().cell, g, cap))
      out.push_back({TrailMove::Kind::Refine, std::move(sub), g});
  }
  return out;
}

/// A challenged cell is inconsistent iff all its members are.
inline Verdict cell_verdict(const Language& lang, const Filtration& f, const Cell& c, const VerdictFn& verdict,
                            std::size_t cap = kDefaultCap) {
  bool unknown = false;
  for (const auto& m : cell_members(lang, f, c, cap)) {
    const Verdict v = verdict(m);
    if (v == Verdict::Consistent) return Verdict::Consistent;
    unknown = unknown || v == Verdict::Unknown;
  }
  return unknown ? Verdict::Unknown : Verdict::Inconsistent;
}

struct TrailDecision {
  std::vector<std::pair<Cell, Rational>> select;
  Rational challenge = 0;
  Rational value = Rational(1, 2);
  std::optional<std::pair<Filtration, Cell>> refine;  // taken without a draw

  bool well_formed() const {
    if (refine) return true;
    if (challenge < 0 || challenge > 1) return false;
    Rational s = challenge;
    for (const auto& [c, p] : select) {
      if (p < 0) return false;
      s += p;
    }
    return s == 1;
  }
};

class TrailPolicy {
 public:
  virtual ~TrailPolicy() = default;
  virtual TrailDecision evaluate(const TrailPosition& p) const = 0;
};

/// Rational agent lifted to cells: a cell weighs what its materialized
/// members weigh; children are grouped by cell.
class LiftedRationalAgent : public TrailPolicy {
 public:
  LiftedRationalAgent(const Language& lang, const HT& h, ChallengeRule rule = ChallengeRule::Support)
      : lang_(lang), h_(h), rule_(rule) {}

  TrailDecision evaluate(const TrailPosition& p) const override {
    const Filtration& f = p.filtration();
    const Cell& cur = p.current().cell;
    Rational w = 0;
    std::map<Cell, Rational> kids;
    for (int i : h_.at_depth(cur.depth)) {
      if (!(cell_of(f, h_.key(i)) == cur)) continue;
      w += h_.weight(i);
      for (int k : h_.node(i).kids)
        if (h_.weight(k) > 0) kids[cell_of(f, h_.key(k))] += h_.weight(k);
    }
    Rational mass = 0;
    for (const auto& [c, x] : kids) mass += x;
    TrailDecision d;
    d.challenge = detail::challenge_probability(rule_, w, mass);
    if (d.challenge == 1) return d;
    for (const auto& [c, x] : kids) d.select.emplace_back(c, (1 - d.challenge) * x / mass);
    return d;
  }

 private:
  const Language& lang_;
  const HT& h_;
  ChallengeRule rule_;
};

/// Plays a fixed list of refinements first (shared by both players: the
/// i-th Refine of the game is script[i]), then defers to `inner`.
class ScriptedRefiner : public TrailPolicy {
 public:
  struct Step {
    Filtration finer;
    std::size_t subcell = 0;  // index into refine_cell's ascending result
  };

  ScriptedRefiner(const Language& lang, std::vector<Step> script, const TrailPolicy& inner)
      : lang_(lang), script_(std::move(script)), inner_(inner) {}

  TrailDecision evaluate(const TrailPosition& p) const override {
    const std::size_t done = p.filtrations.size() - 1;
    if (done < script_.size()) {
      const auto& step = script_[done];
      auto subs = refine_cell(lang_, p.filtration(), p.current().cell, step.finer);
      if (step.subcell >= subs.size()) throw std::out_of_range("scripted sub-cell out of range");
      TrailDecision d;
      d.refine = std::make_pair(step.finer, subs[step.subcell]);
      return d;
    }
    return inner_.evaluate(p);
  }

 private:
  const Language& lang_;
  std::vector<Step> script_;
  const TrailPolicy& inner_;
};

struct TrailRecord {
  std::uint64_t seed = 0;
  int N = 0;
  std::vector<std::string> moves;
  TrailPosition final_position;
  Outcome outcome = Outcome::Drawn;
  std::optional<Player> forfeit;
  Verdict verdict = Verdict::Unknown;

  int z_O() const { return outcome == Outcome::OWins ? 1 : outcome == Outcome::EWins ? -1 : 0; }
  int z_E() const { return -z_O(); }
};

inline TrailRecord play_trail(const Language& lang, const TrailPolicy& o, const TrailPolicy& e, int N,
                              const VerdictFn& verdict, std::uint64_t seed,
                              Filtration initial = Filtration::trivial(), std::size_t cap = kDefaultCap) {
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  TrailRecord r;
  r.seed = seed;
  r.N = N;
  std::mt19937_64 rng(seed);
  TrailPosition& p = r.final_position;
  p.filtrations = {std::move(initial)};
  for (int step = 0; step < N; ++step) {
    const Player mover = p.to_move();
    const TrailPolicy& pol = mover == Player::O ? o : e;
    TrailMove m;
    bool ok = true;
    try {
      TrailDecision d = pol.evaluate(p);
      ok = d.well_formed();
      if (ok && d.refine) {
        m = {TrailMove::Kind::Refine, d.refine->second, d.refine->first};
      } else if (ok) {
        const Rational u = uniform_draw(rng);
        m.kind = TrailMove::Kind::Challenge;
        if (!(u < d.challenge)) {
          Rational acc = d.challenge;
          for (const auto& [c, q] : d.select) {
            acc += q;
            if (u < acc) {
              m = {TrailMove::Kind::Select, c, std::nullopt};
              break;
            }
          }
        }
      }
      ok = ok && trail_legal(lang, p, m, cap);
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) {
      r.forfeit = mover;
      r.outcome = win_for(other(mover));
      return r;
    }
    switch (m.kind) {
      case TrailMove::Kind::Challenge:
        r.moves.push_back("C");
        p.challenged = true;
        r.verdict = cell_verdict(lang, p.filtration(), p.current().cell, verdict, cap);
        r.outcome = challenge_outcome(mover, r.verdict);
        return r;
      case TrailMove::Kind::Select:
        r.moves.push_back(trail_move_text(lang, m, p.current().filtration));
        p.states.push_back({p.current().filtration, std::move(m.cell)});
        break;
      case TrailMove::Kind::Refine:
        p.filtrations.push_back(std::move(*m.finer));
        r.moves.push_back(trail_move_text(lang, m, static_cast<int>(p.filtrations.size()) - 1));
        p.states.push_back({static_cast<int>(p.filtrations.size()) - 1, std::move(m.cell)});
        break;
    }
  }
  r.outcome = Outcome::Drawn;
  return r;
}

/// Splits a lifted cell weight evenly across its sub-cells.
inline std::vector<std::pair<Cell, Rational>> split_uniform(const Language& lang, const Filtration& f,
                                                            const Cell& cell, const Rational& w,
                                                            const Filtration& finer, std::size_t cap = kDefaultCap) {
  auto subs = refine_cell(lang, f, cell, finer, cap);
  std::vector<std::pair<Cell, Rational>> out;
  for (auto& s : subs) out.emplace_back(std::move(s), w / static_cast<long long>(subs.size()));
  return out;
}

}  // namespace hintikka
