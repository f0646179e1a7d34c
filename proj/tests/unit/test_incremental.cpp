#include <catch2/catch_amalgamated.hpp>

#include "btm/incremental.hpp"
#include "support/oracles.hpp"

using namespace btm;

namespace {

Hyperparams hp(std::size_t K, std::size_t R, std::uint64_t seed = 1) {
  Hyperparams h;
  h.K = K;
  h.gamma = 0.5;
  h.beta = 0.1;
  h.rejuv_len = R;
  h.seed = seed;
  return h;
}

std::vector<Biterm> random_biterms(std::size_t n, std::size_t W, Rng& rng) {
  std::vector<Biterm> bs;
  for (std::size_t i = 0; i < n; ++i)
    bs.push_back(make_biterm(static_cast<WordId>(uniform_index(W, rng)), static_cast<WordId>(uniform_index(W, rng))));
  return bs;
}

}  // namespace

TEST_CASE("without rejuvenation counts equal the number of arrivals", "[incremental]") {
  Rng data = make_rng(1);
  const auto bs = random_biterms(100, 9, data);
  IncrementalBtm m(9, hp(3, 0));
  for (std::size_t i = 0; i < bs.size(); ++i) {
    m.observe(bs[i]);
    const auto n = m.counts().topic_counts();
    REQUIRE(n[0] + n[1] + n[2] == static_cast<std::int64_t>(i + 1));
  }
  // With R = 0 the stored assignments never change after arrival.
  CountState recount(3, 9);
  for (const auto& e : m.history()) recount.add(e.biterm, e.z);
  for (WordId w = 0; w < 9; ++w)
    for (std::size_t k = 0; k < 3; ++k) CHECK(recount.word_topic_count(k, w) == m.counts().word_topic_count(k, w));
}

TEST_CASE("a history of one is resampled R times", "[incremental]") {
  CountState counts(2, 3);
  std::vector<HistoryEntry> history;
  std::vector<double> scratch(2);
  Rng rng = make_rng(4);
  process_biterm_incremental(counts, history, {0, 2}, 3, hp(2, 3), rng, scratch);
  REQUIRE(history.size() == 1);
  CHECK(counts.consistent());
  CHECK(counts.topic_count(history[0].z) == 1);
  CHECK(counts.word_topic_count(history[0].z, 2) == 1);
}

TEST_CASE("single topic assigns everything to topic zero", "[incremental]") {
  Rng data = make_rng(2);
  const auto bs = random_biterms(80, 7, data);
  IncrementalBtm m(7, hp(1, 10));
  m.observe(bs);
  const auto tallies = count_word_biterms(bs, 7);
  for (WordId w = 0; w < 7; ++w) {
    // a self-pair contributes two increments to its word
    std::int64_t expect = 0;
    for (const auto& b : bs) expect += (b.w1 == w) + (b.w2 == w);
    CHECK(m.counts().word_topic_count(0, w) == expect);
    CHECK(tallies[w] <= static_cast<std::uint64_t>(expect));
  }
  for (const auto& e : m.history()) CHECK(e.z == 0);
}

TEST_CASE("counts stay consistent through every rejuvenation", "[incremental][property]") {
  Rng data = make_rng(3);
  for (std::size_t R : {0u, 1u, 5u, 20u}) {
    CountState counts(4, 12);
    std::vector<HistoryEntry> history;
    std::vector<double> scratch(4);
    Rng rng = make_rng(R + 1);
    for (const auto& b : random_biterms(150, 12, data)) {
      process_biterm_incremental(counts, history, b, R, hp(4, R), rng, scratch);
      REQUIRE(counts.consistent());
    }
    CountState recount(4, 12);
    for (const auto& e : history) recount.add(e.biterm, e.z);
    for (WordId w = 0; w < 12; ++w)
      for (std::size_t k = 0; k < 4; ++k) CHECK(recount.word_topic_count(k, w) == counts.word_topic_count(k, w));
  }
}

TEST_CASE("memory grows with the history", "[incremental]") {
  Rng data = make_rng(5);
  IncrementalBtm m(20, hp(3, 2));
  const auto before = m.state_bytes();
  m.observe(random_biterms(1000, 20, data));
  CHECK(m.processed() == 1000);
  CHECK(m.state_bytes() >= before + 1000 * sizeof(HistoryEntry));
  CHECK(m.params().valid(1e-12));
}

TEST_CASE("incremental runs are reproducible from the seed", "[incremental]") {
  Rng data = make_rng(6);
  const auto bs = random_biterms(200, 10, data);
  IncrementalBtm a(10, hp(3, 4, 77)), b(10, hp(3, 4, 77)), c(10, hp(3, 4, 78));
  a.observe(bs);
  b.observe(bs);
  c.observe(bs);
  CHECK(a.params() == b.params());
  CHECK_FALSE(a.params() == c.params());
}
