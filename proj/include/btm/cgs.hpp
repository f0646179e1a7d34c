#pragma once

// Batch collapsed Gibbs sampling for BTM, plus a brute-force posterior over
// all K^N assignments for tiny instances.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "btm/corpus.hpp"
#include "btm/model.hpp"
#include "btm/random.hpp"

namespace btm {

/// Unnormalized collapsed conditional for biterm b against counts that
/// already exclude b:
///   (n_k + g)(n_{w1|k} + b)(n_{w2|k} + b) / ((n_{.|k} + W b)(n_{.|k} + W b + 1))
inline void gibbs_weights(const CountState& counts, double gamma, double beta, const Biterm& b,
                          std::span<double> out) {
  const double w_beta = static_cast<double>(counts.vocab_size()) * beta;
  const auto row1 = counts.word_row(b.w1);
  const auto row2 = counts.word_row(b.w2);
  const auto n_k = counts.topic_counts();
  const auto n_dot = counts.topic_word_totals();
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double denom = static_cast<double>(n_dot[k]) + w_beta;
    out[k] = (static_cast<double>(n_k[k]) + gamma) * (static_cast<double>(row1[k]) + beta) *
             (static_cast<double>(row2[k]) + beta) / (denom * (denom + 1.0));
  }
}

inline void normalize_in_place(std::span<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
}

/// Normalized conditional P(z_i = k | z_\i, B).
inline std::vector<double> gibbs_conditional(const CountState& counts, const Hyperparams& hyper, const Biterm& b) {
  std::vector<double> p(counts.num_topics());
  gibbs_weights(counts, hyper.gamma, hyper.beta, b, p);
  normalize_in_place(p);
  return p;
}

/// One pass in corpus order: remove, resample, re-add each biterm.
inline void gibbs_sweep(CountState& counts, std::span<TopicId> z, std::span<const Biterm> biterms,
                        const Hyperparams& hyper, Rng& rng, std::span<double> scratch) {
  for (std::size_t i = 0; i < biterms.size(); ++i) {
    counts.remove(biterms[i], z[i]);
    gibbs_weights(counts, hyper.gamma, hyper.beta, biterms[i], scratch);
    z[i] = static_cast<TopicId>(sample_discrete(scratch, rng));
    counts.add(biterms[i], z[i]);
  }
  assert(counts.consistent());
}

/// Owns the chain state for one corpus. Assignments start uniform.
class GibbsSampler {
 public:
  GibbsSampler(std::vector<Biterm> biterms, std::size_t vocab_size, const Hyperparams& hyper)
      : hyper_(hyper),
        biterms_(std::move(biterms)),
        counts_(hyper.K, vocab_size),
        z_(biterms_.size()),
        scratch_(hyper.K),
        rng_(make_rng(hyper.seed)) {
    hyper_.validate();
    for (std::size_t i = 0; i < biterms_.size(); ++i) {
      z_[i] = static_cast<TopicId>(uniform_index(hyper_.K, rng_));
      counts_.add(biterms_[i], z_[i]);
    }
  }

  void sweep() {
    gibbs_sweep(counts_, z_, biterms_, hyper_, rng_, scratch_);
    ++sweeps_;
  }

  const CountState& counts() const { return counts_; }
  std::span<const TopicId> assignments() const { return z_; }
  std::size_t sweeps_done() const { return sweeps_; }
  ModelParams params() const { return restore_params(counts_, hyper_); }
  std::size_t state_bytes() const {
    return counts_.bytes() + z_.capacity() * sizeof(TopicId) + biterms_.capacity() * sizeof(Biterm);
  }

 private:
  Hyperparams hyper_;
  std::vector<Biterm> biterms_;
  CountState counts_;
  std::vector<TopicId> z_;
  std::vector<double> scratch_;
  Rng rng_;
  std::size_t sweeps_ = 0;
};

// ---------------------------------------------------------------------------

/// Normalized collapsed posterior p(z | B) over every assignment vector.
/// Assignment index = sum_i z_i K^i.
class ExactPosterior {
 public:
  ExactPosterior(std::size_t topics, std::size_t n, std::vector<double> probs)
      : K_(topics), N_(n), probs_(std::move(probs)) {}

  std::size_t num_topics() const { return K_; }
  std::size_t num_biterms() const { return N_; }
  std::span<const double> probabilities() const { return probs_; }

  std::vector<TopicId> decode(std::size_t index) const {
    std::vector<TopicId> z(N_);
    for (std::size_t i = 0; i < N_; ++i, index /= K_) z[i] = static_cast<TopicId>(index % K_);
    return z;
  }

  std::size_t encode(std::span<const TopicId> z) const {
    std::size_t index = 0;
    for (std::size_t i = N_; i-- > 0;) index = index * K_ + z[i];
    return index;
  }

  /// Per-biterm marginals, N rows of K.
  std::vector<std::vector<double>> marginals() const {
    std::vector<std::vector<double>> m(N_, std::vector<double>(K_, 0.0));
    for (std::size_t s = 0; s < probs_.size(); ++s) {
      const auto z = decode(s);
      for (std::size_t i = 0; i < N_; ++i) m[i][z[i]] += probs_[s];
    }
    return m;
  }

  /// P(z_i = . | z_{-i}) by marginalizing the joint; z[i] is ignored.
  std::vector<double> conditional(std::size_t i, std::vector<TopicId> z) const {
    std::vector<double> c(K_);
    for (std::size_t k = 0; k < K_; ++k) {
      z[i] = static_cast<TopicId>(k);
      c[k] = probs_[encode(z)];
    }
    normalize_in_place(c);
    return c;
  }

 private:
  std::size_t K_;
  std::size_t N_;
  std::vector<double> probs_;
};

/// Collapsed log joint log p(z, B) up to a z-independent constant:
///   sum_k [lgamma(n_k+g) + sum_w lgamma(n_{w|k}+b) - lgamma(n_{.|k}+Wb)].
inline double collapsed_log_joint(const CountState& counts, double gamma, double beta) {
  const double w_beta = static_cast<double>(counts.vocab_size()) * beta;
  double lj = 0.0;
  for (std::size_t k = 0; k < counts.num_topics(); ++k) {
    lj += std::lgamma(static_cast<double>(counts.topic_count(k)) + gamma) - std::lgamma(gamma);
    for (std::size_t w = 0; w < counts.vocab_size(); ++w)
      lj += std::lgamma(static_cast<double>(counts.word_topic_count(k, w)) + beta) - std::lgamma(beta);
    lj -= std::lgamma(static_cast<double>(counts.topic_word_total(k)) + w_beta) - std::lgamma(w_beta);
  }
  return lj;
}

inline constexpr std::size_t kOracleMaxBiterms = 8;
inline constexpr std::size_t kOracleMaxTopics = 3;

/// Enumerates all K^N assignments (N <= 8, K <= 3). For biterms with two
/// distinct words the conditionals of this joint are exactly the Gibbs
/// formula; for self-pairs the exact conditional carries (n+b)(n+b+1)
/// where the Gibbs formula uses (n+b)^2.
inline ExactPosterior exact_posterior_oracle(std::span<const Biterm> biterms, std::size_t vocab_size,
                                             const Hyperparams& hyper) {
  const std::size_t N = biterms.size();
  const std::size_t K = hyper.K;
  if (N == 0 || N > kOracleMaxBiterms || K > kOracleMaxTopics)
    throw std::invalid_argument("exact_posterior_oracle: instance too large (need 1 <= N_B <= 8, K <= 3)");
  std::size_t states = 1;
  for (std::size_t i = 0; i < N; ++i) states *= K;

  std::vector<double> logp(states);
  ExactPosterior shape(K, N, {});
  double max_lp = -INFINITY;
  for (std::size_t s = 0; s < states; ++s) {
    CountState counts(K, vocab_size);
    const auto z = shape.decode(s);
    for (std::size_t i = 0; i < N; ++i) counts.add(biterms[i], z[i]);
    logp[s] = collapsed_log_joint(counts, hyper.gamma, hyper.beta);
    max_lp = std::max(max_lp, logp[s]);
  }
  double total = 0.0;
  for (double& lp : logp) {
    lp = std::exp(lp - max_lp);
    total += lp;
  }
  for (double& p : logp) p /= total;
  return ExactPosterior(K, N, std::move(logp));
}

}  // namespace btm
