#include "support.hpp"
#include "hintikka/io.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace hintikka;
using LabelTree = BeliefTree<std::string>;

namespace {
const Language& p_lang() {
  static const Language l(Signature::parse("P/1\n"));
  return l;
}
}  // namespace

TEST_CASE("label snapshots round trip", "[io]") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    LabelTree h = oracle::random_label_tree(rng, 1 + static_cast<int>(rng() % 3), 40);
    const std::string text = save_snapshot(p_lang(), h);
    LabelTree back = load_snapshot<std::string>(p_lang(), text);
    CHECK(back == h);
    CHECK(save_snapshot(p_lang(), back) == text);
  }
}

TEST_CASE("constituent snapshots round trip", "[io]") {
  const Language& l = p_lang();
  HT h = make_parent_uniform(l, 2);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    HT g = h;
    // Refute a few random leaves to get varied weights.
    for (int k = 0; k < 3; ++k) {
      const auto& leaves = g.at_depth(2);
      try {
        g = renorm(g, leaves[rng() % leaves.size()]);
      } catch (const UndefinedRenorm&) {
      }
    }
    const std::string text = save_snapshot(l, g);
    CHECK(load_snapshot<Constituent>(l, text) == g);
  }
}

TEST_CASE("cell snapshots keep their ids", "[io]") {
  const Language& l = p_lang();
  Filtration f = parse_mask(l, "1 base=1\n2 all\n");
  BeliefTree<Cell> h(trivial_cell(0));
  for (const auto& [cell, ms] : partition_from_mask(l, f, 1)) h.add_child(0, cell, make_rational(1, 2));
  const std::string text = save_snapshot(l, h);
  BeliefTree<Cell> back = load_snapshot<Cell>(l, text);
  REQUIRE(back.size() == h.size());
  for (int i = 0; i < static_cast<int>(h.size()); ++i) CHECK(cell_id(l, back.key(i)) == cell_id(l, h.key(i)));
}

TEST_CASE("snapshot errors carry line numbers", "[io]") {
  const Language& l = p_lang();
  const std::string good = read_file(HINTIKKA_DATA_DIR "/renorm-example.snap");
  CHECK_NOTHROW(load_snapshot<std::string>(l, good));

  auto line_of = [&](const std::string& text) {
    try {
      load_snapshot<std::string>(l, text);
    } catch (const SnapshotError& e) {
      return e.line;
    }
    return -1;
  };
  std::string corrupt = good;
  corrupt.replace(corrupt.find("1/12"), 4, "x/12");
  CHECK(line_of(corrupt) == 10);
  std::string notab = good;
  notab.replace(notab.find("/b\t"), 3, "/b ");
  CHECK(line_of(notab) == 8);
  std::string badsum = good;
  badsum.replace(badsum.find("/c/f/h\t1/4"), 10, "/c/f/h\t1/3");
  CHECK(line_of(badsum) > 0);
  CHECK(line_of("# hintikka belief v2\n") == 1);
  CHECK(line_of("") == 1);

  const Language lt(Signature::parse("Lt/2\n"));
  CHECK_THROWS_AS(load_snapshot<std::string>(lt, good), SnapshotError);
  CHECK_THROWS_AS(load_snapshot<Constituent>(l, good), SnapshotError);
}
