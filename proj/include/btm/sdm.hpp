#pragma once

// Stochastic divergence minimization (SDM) for BTM.
//
// State is the word-topic term b_{k,w} (approximating E[n_{w|k}] + beta),
// its row sums c_k = sum_w b_{k,w}, and a per-word update counter t(w).
// The topic term is recovered as a_k = (c_k - W beta) / 2 + gamma: every
// biterm contributes two word-topic counts, so E[n_k] = E[n_{.|k}] / 2.
//
// Each biterm is seen once. Its responsibility is used as the one-sample
// stand-in for a random other biterm containing the same word, and each
// distinct word of the biterm takes one Robbins-Monro step
//   b_{k,w} += rho_{t(w)} ((n_w - 1) q_k + beta - b_{k,w}),
//   rho_t = 1 / (1 + t)^kappa.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "btm/corpus.hpp"
#include "btm/matrix.hpp"
#include "btm/model.hpp"
#include "btm/random.hpp"
#include "btm/schedule.hpp"

namespace btm {

class SdmState {
 public:
  SdmState() = default;

  /// b_{k,w} = beta everywhere.
  SdmState(std::size_t topics, std::size_t vocab_size, double beta, double kappa)
      : b_(vocab_size, topics, beta),
        c_(topics, static_cast<double>(vocab_size) * beta),
        t_(vocab_size, 0),
        schedule_{1.0, kappa} {}

  /// b given as a K x W matrix; c recomputed from it.
  static SdmState from_terms(const Matrix<double>& b_kw, double kappa) {
    SdmState s(b_kw.rows(), b_kw.cols(), 1.0, kappa);
    for (std::size_t k = 0; k < b_kw.rows(); ++k)
      for (std::size_t w = 0; w < b_kw.cols(); ++w) {
        if (!(b_kw(k, w) > 0.0)) throw std::invalid_argument("sdm: b entries must be positive");
        s.b_(w, k) = b_kw(k, w);
      }
    s.recompute_c();
    return s;
  }

  std::size_t num_topics() const { return c_.size(); }
  std::size_t vocab_size() const { return b_.rows(); }

  double b(std::size_t k, std::size_t w) const { return b_(w, k); }
  double c(std::size_t k) const { return c_[k]; }
  std::uint64_t updates(std::size_t w) const { return t_[w]; }
  const StepSchedule& schedule() const { return schedule_; }
  std::uint64_t total_updates() const { return total_updates_; }

  /// a_k = (c_k - W beta) / 2 + gamma.
  double a(std::size_t k, double gamma, double beta) const {
    return (c_[k] - static_cast<double>(vocab_size()) * beta) / 2.0 + gamma;
  }

  /// Normalized q(z_i = k) ∝ a_k b_{k,w1} b_{k,w2} / (c_k (c_k + 1)).
  void responsibility(double gamma, double beta, const Biterm& b, std::span<double> out) const {
    check(b.w2);
    const double w_beta = static_cast<double>(vocab_size()) * beta;
    const auto b1 = b_.row(b.w1);
    const auto b2 = b_.row(b.w2);
    double total = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double a_k = (c_[k] - w_beta) / 2.0 + gamma;
      out[k] = a_k * b1[k] * b2[k] / (c_[k] * (c_[k] + 1.0));
      total += out[k];
    }
    for (double& v : out) v /= total;
  }

  /// One Robbins-Monro step on column w with target (n_w - 1) resp_k + beta.
  void update_word(WordId w, std::span<const double> resp, std::uint64_t n_w, double beta) {
    check(w);
    if (n_w < 1) throw std::invalid_argument("sdm_update_word: n_w must be >= 1");
    const double rho = schedule_(t_[w]);
    const double others = static_cast<double>(n_w - 1);
    auto row = b_.row(w);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double old_b = row[k];
      const double new_b = old_b + rho * (others * resp[k] + beta - old_b);
      row[k] = new_b;
      c_[k] += new_b - old_b;
    }
    ++t_[w];
    ++total_updates_;
    if (recompute_every_ != 0 && total_updates_ % recompute_every_ == 0) recompute_c();
  }

  void recompute_c() {
    std::fill(c_.begin(), c_.end(), 0.0);
    for (std::size_t w = 0; w < vocab_size(); ++w) {
      const auto row = b_.row(w);
      for (std::size_t k = 0; k < row.size(); ++k) c_[k] += row[k];
    }
  }

  /// max_k |c_k - sum_w b_{k,w}| / sum_w b_{k,w}.
  double c_drift() const {
    std::vector<double> fresh(num_topics(), 0.0);
    for (std::size_t w = 0; w < vocab_size(); ++w) {
      const auto row = b_.row(w);
      for (std::size_t k = 0; k < row.size(); ++k) fresh[k] += row[k];
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < num_topics(); ++k) worst = std::max(worst, std::abs(c_[k] - fresh[k]) / fresh[k]);
    return worst;
  }

  /// Full recomputation of c after every `n` word updates; 0 disables it.
  void set_recompute_interval(std::uint64_t n) { recompute_every_ = n; }

  /// Exactly K*W + K + W numbers.
  std::size_t bytes() const {
    return b_.bytes() + c_.capacity() * sizeof(double) + t_.capacity() * sizeof(std::uint64_t);
  }

  /// Adds U(0, amplitude) to every b entry and recomputes c.
  void perturb(double amplitude, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, amplitude);
    for (double& v : b_.flat()) v += u(rng);
    recompute_c();
  }

 private:
  void check(std::size_t w) const {
    if (w >= vocab_size()) throw std::out_of_range("sdm: word id out of vocabulary range");
  }

  Matrix<double> b_;  // word-major
  std::vector<double> c_;
  std::vector<std::uint64_t> t_;
  StepSchedule schedule_{1.0, 0.51};
  std::uint64_t total_updates_ = 0;
  std::uint64_t recompute_every_ = std::uint64_t{1} << 20;
};

inline std::vector<double> sdm_responsibility(const SdmState& state, const Hyperparams& hyper, const Biterm& b) {
  std::vector<double> r(state.num_topics());
  state.responsibility(hyper.gamma, hyper.beta, b, r);
  return r;
}

inline void sdm_update_word(SdmState& state, WordId w, std::span<const double> resp, std::uint64_t n_w,
                            const Hyperparams& hyper) {
  state.update_word(w, resp, n_w, hyper.beta);
}

/// Responsibility of b, then one update per distinct word of b.
inline void sdm_process_biterm(SdmState& state, const Hyperparams& hyper, const Biterm& b,
                               std::span<const std::uint64_t> word_counts, std::span<double> scratch) {
  if (b.w2 >= state.vocab_size() || b.w2 >= word_counts.size())
    throw std::out_of_range("sdm_process_biterm: word id out of vocabulary range");
  state.responsibility(hyper.gamma, hyper.beta, b, scratch);
  state.update_word(b.w1, scratch, word_counts[b.w1], hyper.beta);
  if (!b.is_self_pair()) state.update_word(b.w2, scratch, word_counts[b.w2], hyper.beta);
}

inline void sdm_process_biterm(SdmState& state, const Hyperparams& hyper, const Biterm& b,
                               std::span<const std::uint64_t> word_counts) {
  std::vector<double> scratch(state.num_topics());
  sdm_process_biterm(state, hyper, b, word_counts, scratch);
}

/// phi_{k,w} = b_{k,w} / c_k, theta_k ∝ (c_k - W beta) / 2 + gamma.
inline ModelParams sdm_restore(const SdmState& state, const Hyperparams& hyper) {
  const std::size_t K = state.num_topics(), W = state.vocab_size();
  ModelParams p;
  p.theta.resize(K);
  p.phi = Matrix<double>(K, W);
  double theta_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    p.theta[k] = state.a(k, hyper.gamma, hyper.beta);
    theta_total += p.theta[k];
    double row_total = 0.0;
    for (std::size_t w = 0; w < W; ++w) row_total += state.b(k, w);
    for (std::size_t w = 0; w < W; ++w) p.phi(k, w) = state.b(k, w) / row_total;
  }
  for (double& t : p.theta) t /= theta_total;
  return p;
}

struct SdmOptions {
  /// Use the running tally of n_w instead of pre-computed corpus counts.
  bool streaming_counts = false;
  /// Draw the stand-in biterm i' from a per-word reservoir of past biterms
  /// instead of reusing the current biterm.
  bool resample_other = false;
  std::size_t reservoir_size = 16;
  /// Symmetry-breaking noise amplitude, as a multiple of beta.
  double init_noise = 0.01;
};

class Sdm {
 public:
  static constexpr std::string_view kName = "sdm";

  /// `word_counts` is the n_w pre-pass; ignored (may be empty) with streaming_counts.
  Sdm(std::size_t vocab_size, const Hyperparams& hyper, std::vector<std::uint64_t> word_counts,
      SdmOptions opts = {})
      : hyper_(hyper),
        opts_(opts),
        state_(hyper.K, vocab_size, hyper.beta, hyper.kappa_sdm),
        word_counts_(std::move(word_counts)),
        scratch_(hyper.K),
        other_(hyper.K),
        rng_(make_rng(hyper.seed)) {
    hyper_.validate();
    if (opts_.streaming_counts) {
      word_counts_.assign(vocab_size, 0);
    } else if (word_counts_.size() != vocab_size) {
      throw std::invalid_argument("sdm: word count vector must have W entries");
    }
    if (opts_.resample_other) reservoirs_.resize(vocab_size);
    state_.perturb(opts_.init_noise * hyper.beta, rng_);
  }

  void observe(const Biterm& b) {
    if (b.w2 >= state_.vocab_size()) throw std::out_of_range("sdm: word id out of vocabulary range");
    if (opts_.streaming_counts) {
      ++word_counts_[b.w1];
      if (!b.is_self_pair()) ++word_counts_[b.w2];
    }
    if (!opts_.resample_other) {
      sdm_process_biterm(state_, hyper_, b, word_counts_, scratch_);
    } else {
      state_.responsibility(hyper_.gamma, hyper_.beta, b, scratch_);
      update_with_reservoir(b.w1, b);
      if (!b.is_self_pair()) update_with_reservoir(b.w2, b);
    }
    ++processed_;
  }

  void observe(std::span<const Biterm> biterms) {
    for (const Biterm& b : biterms) observe(b);
  }

  const SdmState& state() const { return state_; }
  SdmState& mutable_state() { return state_; }
  std::span<const std::uint64_t> word_counts() const { return word_counts_; }
  std::uint64_t processed() const { return processed_; }
  ModelParams params() const { return sdm_restore(state_, hyper_); }
  std::size_t state_bytes() const {
    std::size_t r = 0;
    for (const auto& v : reservoirs_) r += v.capacity() * sizeof(Biterm);
    return state_.bytes() + word_counts_.capacity() * sizeof(std::uint64_t) + r;
  }

 private:
  void update_with_reservoir(WordId w, const Biterm& current) {
    auto& pool = reservoirs_[w];
    std::span<const double> resp = scratch_;
    if (!pool.empty()) {
      const Biterm& other = pool[uniform_index(pool.size(), rng_)];
      state_.responsibility(hyper_.gamma, hyper_.beta, other, other_);
      resp = other_;
    }
    state_.update_word(w, resp, word_counts_[w], hyper_.beta);
    // Reservoir sampling over all biterms seen for w.
    const auto seen = state_.updates(w);
    if (pool.size() < opts_.reservoir_size) {
      pool.push_back(current);
    } else {
      const auto slot = uniform_index(seen, rng_);
      if (slot < pool.size()) pool[slot] = current;
    }
  }

  Hyperparams hyper_;
  SdmOptions opts_;
  SdmState state_;
  std::vector<std::uint64_t> word_counts_;
  std::vector<double> scratch_;
  std::vector<double> other_;
  std::vector<std::vector<Biterm>> reservoirs_;
  Rng rng_;
  std::uint64_t processed_ = 0;
};

}  // namespace btm
