#include <catch2/catch_amalgamated.hpp>

#include "btm/synth.hpp"
#include "support/oracles.hpp"

using namespace btm;

TEST_CASE("generator is deterministic under the seed", "[synth]") {
  const auto a = generate(3, 20, 1.0, 0.1, 70000, 5);
  const auto b = generate(3, 20, 1.0, 0.1, 70000, 5);
  const auto c = generate(3, 20, 1.0, 0.1, 70000, 6);
  CHECK(a.true_params == b.true_params);
  CHECK(a.biterms == b.biterms);
  CHECK_FALSE(a.biterms == c.biterms);
  CHECK(a.true_params.valid(1e-12));
  for (const auto& bt : a.biterms) CHECK(bt.w1 <= bt.w2);
}

TEST_CASE("single-topic word frequencies converge to phi", "[synth]") {
  const std::size_t W = 10, N = 100000;
  const auto s = generate(1, W, 1.0, 1.0, N, 11);
  std::vector<double> freq(W, 0.0);
  for (const auto& b : s.biterms) {
    freq[b.w1] += 1.0;
    freq[b.w2] += 1.0;
  }
  // Kolmogorov-Smirnov style: max CDF gap over 2N word draws.
  double cdf_emp = 0.0, cdf_true = 0.0, gap = 0.0;
  for (std::size_t w = 0; w < W; ++w) {
    cdf_emp += freq[w] / (2.0 * N);
    cdf_true += s.true_params.phi(0, w);
    gap = std::max(gap, std::abs(cdf_emp - cdf_true));
  }
  // 1.63 / sqrt(n) is the 1% KS critical value.
  CHECK(gap < 1.63 / std::sqrt(2.0 * N));
}

TEST_CASE("very large gamma concentrates theta near uniform", "[synth]") {
  const auto s = generate(5, 10, 1e4, 0.1, 1, 3);
  for (double t : s.true_params.theta) CHECK(std::abs(t - 0.2) < 0.05);
}

TEST_CASE("true parameters beat a misspecified model on held-out synthetic data", "[synth]") {
  const auto s = generate(4, 50, 1.0, 0.1, 20000, 8);
  ModelParams flat;
  flat.theta = {1.0};
  flat.phi = Matrix<double>(1, 50, 1.0 / 50.0);
  CHECK(avg_test_loglik(s.true_params, s.biterms) > avg_test_loglik(flat, s.biterms));
}

TEST_CASE("generator rejects degenerate sizes", "[synth]") {
  CHECK_THROWS_AS(generate(0, 5, 1.0, 1.0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate(1, 5, 1.0, 1.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate(1, 5, -1.0, 1.0, 10, 1), std::invalid_argument);
}
