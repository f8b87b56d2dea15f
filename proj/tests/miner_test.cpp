#include "kway/miner.hpp"

#include <sstream>

#include "doctest.h"
#include "kway/error.hpp"
#include "support/oracles.hpp"

using namespace kway;
using corpus::WordId;
using miner::Candidate;
using miner::FrequentSetTable;
using miner::KWaySet;
using miner::MinerConfig;

namespace {

corpus::EncodedCorpus one_doc(std::vector<WordId> ids) {
  corpus::EncodedCorpus enc;
  enc.token_count = static_cast<std::int64_t>(ids.size());
  enc.documents.push_back(std::move(ids));
  return enc;
}

MinerConfig config(std::int64_t support, int k_max, int width, int stride = 1) {
  MinerConfig cfg;
  cfg.support = support;
  cfg.k_max = k_max;
  cfg.window = corpus::WindowSpec{width, stride};
  return cfg;
}

std::string table_bytes(const FrequentSetTable& t) {
  std::ostringstream out;
  miner::write_sets(t, out);
  return out.str();
}

std::string levels_bytes(const std::vector<FrequentSetTable>& levels) {
  std::string all;
  for (const auto& t : levels) all += table_bytes(t);
  return all;
}

void check_closure_and_monotonicity(const std::vector<FrequentSetTable>& levels) {
  for (std::size_t li = 1; li < levels.size(); ++li) {
    const auto& prev = levels[li - 1];
    auto prev_count = [&](const std::vector<WordId>& ids) -> std::int64_t {
      for (const auto& s : prev.sets) {
        if (s.ids == ids) return s.count;
      }
      return -1;
    };
    for (const auto& s : levels[li].sets) {
      for (std::size_t drop = 0; drop < s.ids.size(); ++drop) {
        std::vector<WordId> sub;
        for (std::size_t i = 0; i < s.ids.size(); ++i) {
          if (i != drop) sub.push_back(s.ids[i]);
        }
        std::int64_t parent = prev_count(sub);
        REQUIRE(parent >= 0);            // downward closure
        REQUIRE(parent >= s.count);      // support monotonicity
      }
    }
  }
}

}  // namespace

TEST_CASE("mine_level1 counts windows containing each word") {
  // Windows of [x y z x y], W=3: {x,y,z} three times.
  auto enc = one_doc({0, 1, 2, 0, 1});
  auto t = miner::mine_level1(enc, config(2, 1, 3));
  REQUIRE(t.sets.size() == 3);
  for (const auto& s : t.sets) CHECK(s.count == 3);

  SUBCASE("empty corpus gives an empty table") {
    corpus::EncodedCorpus empty;
    CHECK(miner::mine_level1(empty, config(2, 1, 3)).sets.empty());
  }
  SUBCASE("short document forms a single whole-document window") {
    auto t1 = miner::mine_level1(one_doc({0}), config(1, 1, 10));
    REQUIRE(t1.sets.size() == 1);
    CHECK(t1.sets[0].count == 1);
  }
  SUBCASE("repeats inside a window count once") {
    auto t1 = miner::mine_level1(one_doc({4, 4, 4}), config(1, 1, 3));
    REQUIRE(t1.sets.size() == 1);
    CHECK(t1.sets[0].ids == std::vector<WordId>{4});
    CHECK(t1.sets[0].count == 1);
  }
}

TEST_CASE("generate_candidates joins on shared prefixes and prunes") {
  FrequentSetTable f2;
  f2.k = 2;
  f2.sets = {KWaySet{{1, 2}, 9}, KWaySet{{1, 3}, 9}, KWaySet{{2, 3}, 9},
             KWaySet{{2, 4}, 9}};
  auto cands = miner::generate_candidates(f2);
  // {2,3,4} is pruned because {3,4} is not frequent.
  REQUIRE(cands.size() == 1);
  CHECK(cands[0] == Candidate{1, 2, 3});

  SUBCASE("empty previous level") {
    FrequentSetTable empty;
    empty.k = 2;
    CHECK(miner::generate_candidates(empty).empty());
  }
  SUBCASE("all pairs of frequent singletons") {
    FrequentSetTable f1;
    f1.k = 1;
    f1.sets = {KWaySet{{1}, 5}, KWaySet{{2}, 5}};
    auto pairs = miner::generate_candidates(f1);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == Candidate{1, 2});
  }
}

TEST_CASE("count_supports counts window containment") {
  auto enc = one_doc({0, 1, 2, 0, 1});
  auto t = miner::count_supports(enc, {Candidate{0, 1, 2}}, config(2, 3, 3));
  REQUIRE(t.sets.size() == 1);
  CHECK(t.sets[0].count == 3);

  SUBCASE("a candidate with an unseen id is dropped at support 1") {
    auto t2 = miner::count_supports(enc, {Candidate{0, 9}}, config(1, 2, 3));
    CHECK(t2.sets.empty());
  }
  SUBCASE("pair containment") {
    auto t2 = miner::count_supports(enc, {Candidate{0, 1}}, config(2, 2, 3));
    REQUIRE(t2.sets.size() == 1);
    CHECK(t2.sets[0].count == 3);
  }
  SUBCASE("mixed candidate orders are rejected") {
    CHECK_THROWS_AS(
        miner::count_supports(enc, {Candidate{0, 1}, Candidate{0}}, config(1, 2, 3)),
        std::invalid_argument);
  }
}

TEST_CASE("mine_all on the toy corpus") {
  auto enc = one_doc({0, 1, 2, 0, 1});
  auto levels = miner::mine_all(enc, config(2, 3, 3));
  REQUIRE(levels.size() == 3);
  CHECK(levels[0].sets.size() == 3);
  CHECK(levels[1].sets.size() == 3);
  CHECK(levels[2].sets.size() == 1);
  for (const auto& level : levels) {
    for (const auto& s : level.sets) CHECK(s.count == 3);
  }

  SUBCASE("k_max 1 stops after unigrams") {
    CHECK(miner::mine_all(enc, config(2, 1, 3)).size() == 1);
  }
}

TEST_CASE("mine_all equals brute-force enumeration on random corpora") {
  Rng rng(2024);
  const int widths[] = {3, 5, 10};
  const std::int64_t supports[] = {2, 5};
  for (int trial = 0; trial < 40; ++trial) {
    auto enc = oracles::random_corpus(rng, 8, 120,
                                      static_cast<WordId>(4 + rng.uniform_index(16)));
    auto cfg = config(supports[trial % 2], 4, widths[trial % 3]);
    auto mined = miner::mine_all(enc, cfg);
    auto expected = oracles::brute_force_mine(enc, cfg);
    REQUIRE(levels_bytes(mined) == levels_bytes(expected));
    check_closure_and_monotonicity(mined);

    // The explicit candidate path must agree with the fused one.
    for (std::size_t li = 1; li < mined.size(); ++li) {
      auto cands = miner::generate_candidates(mined[li - 1]);
      auto counted = miner::count_supports(enc, cands, cfg);
      counted.k = mined[li].k;
      CHECK(table_bytes(counted) == table_bytes(mined[li]));
    }

    // Sharded counting must be byte-identical to single-pass.
    auto sharded = miner::mine_all(enc, cfg, 3);
    CHECK(levels_bytes(sharded) == levels_bytes(mined));
  }
}

TEST_CASE("mining is deterministic") {
  Rng rng(7);
  auto enc = oracles::random_corpus(rng, 10, 100, 12);
  auto cfg = config(2, 3, 5);
  CHECK(levels_bytes(miner::mine_all(enc, cfg)) ==
        levels_bytes(miner::mine_all(enc, cfg)));
}

TEST_CASE("set file round trip and canonical format") {
  FrequentSetTable t;
  t.k = 2;
  t.support = 5;
  t.window = corpus::WindowSpec{10, 1};
  t.sets = {KWaySet{{1, 2}, 5}, KWaySet{{1, 7}, 12}};
  std::string bytes = table_bytes(t);
  CHECK(bytes ==
        "#kway\tk=2\tsupport=5\twindow=10\tstride=1\n"
        "1\t2\t5\n"
        "1\t7\t12\n");
  std::istringstream in(bytes);
  auto back = miner::read_sets(in);
  CHECK(table_bytes(back) == bytes);
  CHECK(back.window.width == 10);
}

TEST_CASE("set file parse errors") {
  SUBCASE("unsorted ids on a line") {
    std::istringstream bad("#kway\tk=2\tsupport=1\twindow=10\tstride=1\n2\t1\t4\n");
    try {
      miner::read_sets(bad);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("arity does not match the header order") {
    std::istringstream bad("#kway\tk=3\tsupport=1\twindow=10\tstride=1\n1\t2\t4\n");
    CHECK_THROWS_AS(miner::read_sets(bad), format_error);
  }
  SUBCASE("missing header") {
    std::istringstream bad("1\t2\t4\n");
    CHECK_THROWS_AS(miner::read_sets(bad), format_error);
  }
  SUBCASE("count below the header support") {
    std::istringstream bad("#kway\tk=2\tsupport=10\twindow=10\tstride=1\n1\t2\t4\n");
    CHECK_THROWS_AS(miner::read_sets(bad), format_error);
  }
  SUBCASE("lines out of canonical order") {
    std::istringstream bad(
        "#kway\tk=2\tsupport=1\twindow=10\tstride=1\n1\t7\t4\n1\t2\t4\n");
    CHECK_THROWS_AS(miner::read_sets(bad), format_error);
  }
  SUBCASE("negative ids") {
    std::istringstream bad("#kway\tk=2\tsupport=1\twindow=10\tstride=1\n-3\t2\t4\n");
    CHECK_THROWS_AS(miner::read_sets(bad), format_error);
  }
}
