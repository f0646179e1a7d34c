#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "btm/metrics.hpp"
#include "btm/synth.hpp"

using namespace btm;
using Catch::Approx;

namespace {

BackendConfig small_config(std::uint64_t seed) {
  BackendConfig cfg;
  cfg.hyper = Hyperparams::defaults(3);
  cfg.hyper.seed = seed;
  cfg.online.slice_size = 500;
  cfg.online.inner_iters = 2;
  return cfg;
}

}  // namespace

TEST_CASE("checkpoint validation", "[metrics]") {
  CHECK_NOTHROW(validate_checkpoints(std::vector<double>{1.0}));
  CHECK_NOTHROW(validate_checkpoints(even_checkpoints(10)));
  CHECK_THROWS_AS(validate_checkpoints(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(validate_checkpoints(std::vector<double>{0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate_checkpoints(std::vector<double>{0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(validate_checkpoints(std::vector<double>{0.5, 1.2}), std::invalid_argument);
  CHECK(even_checkpoints(4) == std::vector<double>{0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("trace_run emits one ordered record per checkpoint", "[metrics]") {
  const auto s = generate(3, 30, 1.0, 0.1, 4000, 2);
  const auto split = split_shuffle(s.biterms, 0.8, 1);
  for (Algo a : {Algo::Obtm, Algo::Ibtm, Algo::Scvb0, Algo::Sdm}) {
    auto backend = make_backend(a, 30, small_config(1), split.train);
    const auto single = trace_run(backend, backend.name(), 1, split.train, split.test, std::vector<double>{1.0});
    REQUIRE(single.size() == 1);
    CHECK(single[0].fraction == 1.0);
    CHECK(single[0].backend == algo_name(a));

    auto fresh = make_backend(a, 30, small_config(1), split.train);
    const auto cps = even_checkpoints(5);
    const auto recs = trace_run(fresh, fresh.name(), 1, split.train, split.test, cps);
    REQUIRE(recs.size() == 5);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(recs[i].fraction == cps[i]);
      CHECK(std::isfinite(recs[i].avg_test_loglik));
      CHECK(recs[i].rss_bytes > 0);
      if (i) CHECK(recs[i].wall_ms >= recs[i - 1].wall_ms);
    }
  }
}

TEST_CASE("trace_gibbs uses sweep progress", "[metrics]") {
  const auto s = generate(2, 20, 1.0, 0.1, 500, 3);
  GibbsSampler g(s.biterms, 20, Hyperparams::defaults(2));
  const auto recs = trace_gibbs(g, 10, 1, s.biterms, even_checkpoints(2));
  REQUIRE(recs.size() == 2);
  CHECK(g.sweeps_done() == 10);
  CHECK(recs[1].backend == "cgs");
}

TEST_CASE("trace CSV round-trips", "[metrics][io]") {
  std::vector<TraceRecord> recs{{"sdm", 3, 0.5, -6.25, 12.5, 0.0, 4096}, {"sdm", 3, 1.0, -6.125, 30.0, 0.0, 4096}};
  std::stringstream ss;
  write_trace(ss, recs);
  CHECK(ss.str().substr(0, kTraceHeader.size()) == kTraceHeader);
  const auto back = read_trace(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].avg_test_loglik == -6.125);
  CHECK(back[0].rss_bytes == 4096);

  std::istringstream bad_header("a,b,c\n");
  CHECK_THROWS_AS(read_trace(bad_header), InputFormatError);
  std::istringstream short_row(std::string(kTraceHeader) + "\nsdm,1,0.5\n");
  CHECK_THROWS_AS(read_trace(short_row), InputFormatError);
}

TEST_CASE("merging ten seeds gives mean and sample deviation per checkpoint", "[metrics]") {
  std::vector<TraceRecord> recs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    recs.push_back({"scvb0", seed, 0.5, -7.0 - static_cast<double>(seed), 1.0, 0.0, 1});
    recs.push_back({"scvb0", seed, 1.0, -6.0, 2.0, 0.0, 1});
  }
  const auto merged = merge_traces(recs);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].runs == 10);
  CHECK(merged[0].mean == Approx(-11.5));
  // sample sd of 0..9
  CHECK(merged[0].stddev == Approx(std::sqrt(82.5 / 9.0)));
  CHECK(merged[1].stddev == 0.0);
  CHECK(merged[1].mean_wall_ms == Approx(2.0));
  std::ostringstream out;
  write_merged(out, merged);
  CHECK(out.str().rfind("backend,fraction,runs,mean_avg_test_loglik,std_avg_test_loglik,mean_wall_ms\n", 0) == 0);
}

TEST_CASE("cost classes and accounting", "[metrics]") {
  CHECK(cost_class(Algo::Sdm).update == "O(K)");
  CHECK(cost_class(Algo::Ibtm).update == "O(R)");
  CHECK(cost_class(Algo::Obtm).update == "O(B_t(1+KW))");
  CHECK(median(std::vector<double>{3.0, 1.0, 2.0}) == 2.0);
  CHECK(median(std::vector<double>{4.0, 1.0, 2.0, 3.0}) == 2.5);

  const auto s = generate(3, 40, 1.0, 0.1, 5000, 4);
  const auto rep = cost_accounting(Algo::Sdm, 40, small_config(1), s.biterms, 3);
  CHECK(rep.median_ns_per_biterm > 0.0);
  CHECK(rep.state_bytes > 0);
  CHECK_THROWS_AS(make_backend(Algo::Cgs, 40, small_config(1), s.biterms), std::invalid_argument);
}

TEST_CASE("scvb0 memory does not depend on the stream length", "[metrics]") {
  const auto s = generate(3, 40, 1.0, 0.1, 20000, 5);
  auto a = make_backend(Algo::Scvb0, 40, small_config(1), s.biterms);
  a.observe(std::span(s.biterms).first(1000));
  const auto small = a.state_bytes();
  a.observe(std::span(s.biterms).subspan(1000));
  CHECK(a.state_bytes() == small);
}
