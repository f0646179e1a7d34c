#include <catch2/catch_amalgamated.hpp>

#include "btm/online.hpp"
#include "support/oracles.hpp"

using namespace btm;
using btm::testing::make_counts;
using Catch::Approx;

namespace {

Hyperparams hp(std::size_t K, double gamma, double beta, double lambda, std::uint64_t seed = 1) {
  Hyperparams h;
  h.K = K;
  h.gamma = gamma;
  h.beta = beta;
  h.lambda = lambda;
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

TEST_CASE("online conditional reductions", "[online]") {
  SECTION("uniform priors and empty counts give a uniform vector") {
    const OnlineHyperState hs(4, 5, 0.3, 0.02);
    for (double p : online_conditional(CountState(4, 5), hs, {1, 2})) CHECK(p == Approx(0.25).epsilon(1e-15));
  }
  SECTION("symmetric priors reproduce the batch conditional") {
    Rng rng = make_rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t K = 1 + uniform_index(5, rng), W = 2 + uniform_index(8, rng);
      CountState c(K, W);
      for (const auto& b : random_biterms(uniform_index(40, rng), W, rng)) c.add(b, static_cast<TopicId>(uniform_index(K, rng)));
      const auto h = hp(K, 0.5 + trial * 0.01, 0.05, 1.0);
      const OnlineHyperState hs(K, W, h.gamma, h.beta);
      const auto b = random_biterms(1, W, rng).front();
      const auto online = online_conditional(c, hs, b);
      const auto batch = gibbs_conditional(c, h, b);
      for (std::size_t k = 0; k < K; ++k) CHECK(online[k] == batch[k]);
    }
  }
}

TEST_CASE("online conditional with asymmetric priors", "[online]") {
  // K = 2, W = 2. gamma = [1, 3]; beta (k, w): k0 = [0.5, 0.25], k1 = [2, 1].
  OnlineHyperState hs(2, 2, 1.0, 1.0);
  hs.gamma_vec = {1.0, 3.0};
  hs.beta_mat(0, 0) = 0.5;
  hs.beta_mat(1, 0) = 0.25;
  hs.beta_mat(0, 1) = 2.0;
  hs.beta_mat(1, 1) = 1.0;
  hs.beta_row_sum = {0.75, 3.0};
  // slice counts: one biterm (0,1) in topic 0, one (1,1) in topic 1
  const auto c = make_counts(2, 2, {{{0, 1}, 0}, {{1, 1}, 1}});
  // query biterm (0, 1)
  // k0: (1+1)(1+0.5)(1+0.25) / ((2+0.75)(3.75)) ; k1: (1+3)(0+2)(2+1) / ((2+3)(6))
  const double a = 2.0 * 1.5 * 1.25 / (2.75 * 3.75);
  const double b = 4.0 * 2.0 * 3.0 / (5.0 * 6.0);
  const auto p = online_conditional(c, hs, {0, 1});
  CHECK(p[0] == Approx(a / (a + b)).epsilon(1e-14));
  CHECK(p[1] == Approx(b / (a + b)).epsilon(1e-14));
}

TEST_CASE("update_hyperparams arithmetic", "[online]") {
  const auto slice = make_counts(2, 3, [] {
    std::vector<std::pair<Biterm, TopicId>> v;
    for (int i = 0; i < 10; ++i) v.push_back({{0, 1}, 0});
    return v;
  }());
  SECTION("lambda = 0 leaves the state unchanged") {
    OnlineHyperState hs(2, 3, 0.5, 0.01);
    const auto before = hs;
    update_hyperparams(hs, slice, 0.0);
    CHECK(hs == before);
  }
  SECTION("lambda = 1 adds topic counts") {
    OnlineHyperState hs(2, 3, 0.5, 0.01);
    update_hyperparams(hs, slice, 1.0);
    CHECK(hs.gamma_vec[0] == Approx(10.5));
    CHECK(hs.gamma_vec[1] == Approx(0.5));
  }
  SECTION("lambda = 0.5 scales word-topic counts") {
    const auto four = make_counts(1, 2, {{{0, 1}, 0}, {{0, 1}, 0}, {{0, 1}, 0}, {{0, 1}, 0}});
    OnlineHyperState hs(1, 2, 0.5, 0.01);
    update_hyperparams(hs, four, 0.5);
    CHECK(hs.beta(0, 0) == Approx(2.01).epsilon(1e-14));
    double s = 0.0;
    for (std::size_t w = 0; w < 2; ++w) s += hs.beta(0, w);
    CHECK(hs.beta_row_sum[0] == Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("single slice with lambda = 0 is batch Gibbs", "[online]") {
  Rng data_rng = make_rng(9);
  const auto bs = random_biterms(200, 15, data_rng);
  const auto h = hp(3, 0.7, 0.05, 0.0, 42);

  GibbsSampler g(bs, 15, h);
  for (int i = 0; i < 10; ++i) g.sweep();

  OnlineHyperState hs(3, 15, h.gamma, h.beta);
  Rng rng = make_rng(h.seed);
  const auto r = process_slice(hs, bs, 10, 0.0, OnlineUpdateMode::SliceEnd, rng);
  CHECK(r.params == g.params());

  OnlineBtm online(15, h, {.slice_size = 1000, .inner_iters = 10});
  online.observe(bs);
  CHECK(online.params() == g.params());
  CHECK(online.slices() == 1);
}

TEST_CASE("two slices with lambda = 1 chain the priors", "[online]") {
  Rng data_rng = make_rng(10);
  const auto s1 = random_biterms(50, 8, data_rng);
  const auto s2 = random_biterms(70, 8, data_rng);
  OnlineHyperState hs(2, 8, 0.5, 0.1);
  Rng rng = make_rng(1);
  const auto r1 = process_slice(hs, s1, 5, 1.0, OnlineUpdateMode::SliceEnd, rng);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(hs.gamma_vec[k] == Approx(0.5 + static_cast<double>(r1.counts.topic_count(k))));
    for (std::size_t w = 0; w < 8; ++w)
      CHECK(hs.beta(k, w) == Approx(0.1 + static_cast<double>(r1.counts.word_topic_count(k, w))));
  }
  CHECK(hs.gamma_vec[0] + hs.gamma_vec[1] == Approx(1.0 + 50.0));
  const auto before = hs;
  const auto r2 = process_slice(hs, s2, 5, 1.0, OnlineUpdateMode::SliceEnd, rng);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(hs.gamma_vec[k] == Approx(before.gamma_vec[k] + static_cast<double>(r2.counts.topic_count(k))));
  CHECK(hs.gamma_vec[0] + hs.gamma_vec[1] == Approx(1.0 + 120.0));
  CHECK(r2.params == restore_online(r2.counts, before));
}

TEST_CASE("empty slice is the identity on priors", "[online]") {
  OnlineHyperState hs(3, 4, 0.2, 0.01);
  const auto before = hs;
  Rng rng = make_rng(1);
  const auto r = process_slice(hs, {}, 10, 1.0, OnlineUpdateMode::SliceEnd, rng);
  CHECK(hs == before);
  CHECK(r.params == restore_online(CountState(3, 4), before));
  CHECK(r.params.valid());
  CHECK_THROWS_AS(process_slice(hs, {}, 0, 1.0, OnlineUpdateMode::SliceEnd, rng), std::invalid_argument);
}

TEST_CASE("priors never decrease across slices", "[online][property]") {
  Rng data_rng = make_rng(12);
  for (auto mode : {OnlineUpdateMode::SliceEnd, OnlineUpdateMode::PerBiterm}) {
    OnlineHyperState hs(3, 6, 0.4, 0.05);
    Rng rng = make_rng(3);
    for (int t = 0; t < 5; ++t) {
      const auto before = hs;
      const auto r = process_slice(hs, random_biterms(20, 6, data_rng), 2, 0.7, mode, rng);
      CHECK(r.params.valid(1e-12));
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(hs.gamma_vec[k] >= before.gamma_vec[k]);
        for (std::size_t w = 0; w < 6; ++w) CHECK(hs.beta(k, w) >= before.beta(k, w));
      }
    }
  }
}

TEST_CASE("per-biterm mode applies the update after every sample", "[online]") {
  // With one iteration and a single-biterm slice the slice counts after the
  // sample are exactly that biterm, so both modes add the same amount.
  const std::vector<Biterm> one{{0, 1}};
  OnlineHyperState a(2, 3, 0.5, 0.1), b(2, 3, 0.5, 0.1);
  Rng ra = make_rng(5), rb = make_rng(5);
  process_slice(a, one, 1, 1.0, OnlineUpdateMode::SliceEnd, ra);
  process_slice(b, one, 1, 1.0, OnlineUpdateMode::PerBiterm, rb);
  CHECK(a == b);

  // Three biterms, all assigned from initialization: each of the three
  // per-biterm updates adds the full slice count.
  const std::vector<Biterm> three{{0, 1}, {1, 2}, {0, 2}};
  OnlineHyperState c(1, 3, 0.5, 0.1);
  Rng rc = make_rng(6);
  process_slice(c, three, 1, 1.0, OnlineUpdateMode::PerBiterm, rc);
  CHECK(c.gamma_vec[0] == Approx(0.5 + 3 + 3 + 3));
  OnlineHyperState d(1, 3, 0.5, 0.1);
  process_slice(d, three, 1, 1.0, OnlineUpdateMode::SliceEnd, rc);
  CHECK(d.gamma_vec[0] == Approx(0.5 + 3));
}

TEST_CASE("with lambda = 0 each slice depends only on its own data", "[online][property]") {
  Rng data_rng = make_rng(13);
  const auto a = random_biterms(40, 6, data_rng);
  const auto b = random_biterms(40, 6, data_rng);
  const auto last = random_biterms(40, 6, data_rng);
  auto run = [&](const std::vector<Biterm>& first, const std::vector<Biterm>& second) {
    OnlineHyperState hs(2, 6, 0.5, 0.1);
    Rng rng = make_rng(1);
    process_slice(hs, first, 3, 0.0, OnlineUpdateMode::SliceEnd, rng);
    process_slice(hs, second, 3, 0.0, OnlineUpdateMode::SliceEnd, rng);
    Rng fresh = make_rng(99);
    return process_slice(hs, last, 3, 0.0, OnlineUpdateMode::SliceEnd, fresh).params;
  };
  CHECK(run(a, b) == run(b, a));
}

TEST_CASE("OnlineBtm cuts chunks into slices", "[online]") {
  Rng data_rng = make_rng(14);
  const auto bs = random_biterms(250, 10, data_rng);
  OnlineBtm m(10, hp(2, 0.5, 0.1, 1.0), {.slice_size = 100, .inner_iters = 2});
  m.observe(std::span(bs).first(120));
  CHECK(m.slices() == 2);
  m.observe(std::span(bs).subspan(120));
  CHECK(m.slices() == 4);
  CHECK(m.processed() == 250);
  const auto& hs = m.hyper_state();
  CHECK(hs.gamma_vec[0] + hs.gamma_vec[1] == Approx(1.0 + 250.0));
  CHECK(m.params().valid(1e-12));
}
