#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "btm/corpus.hpp"
#include "btm/model.hpp"
#include "btm/random.hpp"

namespace btm {

struct SyntheticCorpus {
  ModelParams true_params;
  std::vector<Biterm> biterms;
};

/// Symmetric Dirichlet draw through normalized Gamma(concentration, 1) variates.
inline std::vector<double> sample_dirichlet(std::size_t dim, double concentration, Rng& rng) {
  std::gamma_distribution<double> g(concentration, 1.0);
  std::vector<double> x(dim);
  double total = 0.0;
  do {
    total = 0.0;
    for (double& v : x) {
      v = g(rng);
      total += v;
    }
  } while (!(total > 0.0));
  for (double& v : x) v /= total;
  return x;
}

inline constexpr std::size_t kSynthChunk = 1 << 16;

/// theta ~ Dir(gamma), phi_k ~ Dir(beta), then per biterm z ~ theta and two
/// words i.i.d. from phi_z. Biterms are drawn in fixed-size chunks, each
/// from its own seed derived from (seed, chunk index).
inline SyntheticCorpus generate(std::size_t topics, std::size_t vocab_size, double gamma, double beta,
                                std::size_t n_biterms, std::uint64_t seed) {
  if (topics < 1 || vocab_size < 1 || n_biterms < 1) throw std::invalid_argument("generate: K, W, N_B must be >= 1");
  if (!(gamma > 0.0) || !(beta > 0.0)) throw std::invalid_argument("generate: gamma and beta must be > 0");
  SyntheticCorpus out;
  Rng rng = make_rng(seed);
  out.true_params.theta = sample_dirichlet(topics, gamma, rng);
  out.true_params.phi = Matrix<double>(topics, vocab_size);
  for (std::size_t k = 0; k < topics; ++k) {
    const auto row = sample_dirichlet(vocab_size, beta, rng);
    std::copy(row.begin(), row.end(), out.true_params.phi.row(k).begin());
  }

  std::discrete_distribution<std::size_t> topic_dist(out.true_params.theta.begin(), out.true_params.theta.end());
  std::vector<std::discrete_distribution<WordId>> word_dist;
  word_dist.reserve(topics);
  for (std::size_t k = 0; k < topics; ++k) {
    const auto row = out.true_params.phi.row(k);
    word_dist.emplace_back(row.begin(), row.end());
  }

  out.biterms.resize(n_biterms);
  for (std::size_t chunk = 0; chunk * kSynthChunk < n_biterms; ++chunk) {
    Rng local = make_rng(seed ^ (0x9E3779B97F4A7C15ULL * (chunk + 1)));
    auto td = topic_dist;
    auto wd = word_dist;
    const std::size_t end = std::min(n_biterms, (chunk + 1) * kSynthChunk);
    for (std::size_t i = chunk * kSynthChunk; i < end; ++i) {
      const std::size_t z = td(local);
      const WordId a = wd[z](local);
      const WordId b = wd[z](local);
      out.biterms[i] = make_biterm(a, b);
    }
  }
  return out;
}

}  // namespace btm
