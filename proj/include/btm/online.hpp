#pragma once

// Time-sliced online BTM: per-slice Gibbs sampling under vector priors that
// absorb each slice's counts with decay weight lambda.

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "btm/cgs.hpp"
#include "btm/corpus.hpp"
#include "btm/matrix.hpp"
#include "btm/model.hpp"
#include "btm/random.hpp"

namespace btm {

/// Vector topic priors gamma_k and matrix word priors beta_{k,w}
/// (stored word-major, row w holds beta_{.,w}).
struct OnlineHyperState {
  std::vector<double> gamma_vec;
  Matrix<double> beta_mat;
  std::vector<double> beta_row_sum;  // sum_w beta_{k,w}

  OnlineHyperState() = default;
  OnlineHyperState(std::size_t topics, std::size_t vocab_size, double gamma, double beta)
      : gamma_vec(topics, gamma),
        beta_mat(vocab_size, topics, beta),
        beta_row_sum(topics, static_cast<double>(vocab_size) * beta) {}

  std::size_t num_topics() const { return gamma_vec.size(); }
  std::size_t vocab_size() const { return beta_mat.rows(); }
  double beta(std::size_t k, std::size_t w) const { return beta_mat(w, k); }

  std::size_t bytes() const {
    return beta_mat.bytes() + (gamma_vec.capacity() + beta_row_sum.capacity()) * sizeof(double);
  }

  friend bool operator==(const OnlineHyperState&, const OnlineHyperState&) = default;
};

/// Where the prior update runs inside a slice.
enum class OnlineUpdateMode {
  SliceEnd,    // once, after the slice's Gibbs iterations
  PerBiterm,   // after every biterm sample, with the running slice counts
};

inline void online_weights(const CountState& counts, const OnlineHyperState& hs, const Biterm& b,
                           std::span<double> out) {
  const auto row1 = counts.word_row(b.w1);
  const auto row2 = counts.word_row(b.w2);
  const auto n_k = counts.topic_counts();
  const auto n_dot = counts.topic_word_totals();
  const auto beta1 = hs.beta_mat.row(b.w1);
  const auto beta2 = hs.beta_mat.row(b.w2);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double denom = static_cast<double>(n_dot[k]) + hs.beta_row_sum[k];
    out[k] = (static_cast<double>(n_k[k]) + hs.gamma_vec[k]) * (static_cast<double>(row1[k]) + beta1[k]) *
             (static_cast<double>(row2[k]) + beta2[k]) / (denom * (denom + 1.0));
  }
}

/// Normalized online conditional against slice counts that exclude b.
inline std::vector<double> online_conditional(const CountState& slice_counts, const OnlineHyperState& hs,
                                              const Biterm& b) {
  std::vector<double> p(hs.num_topics());
  online_weights(slice_counts, hs, b, p);
  normalize_in_place(p);
  return p;
}

/// gamma_k += lambda n_k, beta_{k,w} += lambda n_{w|k}.
inline void update_hyperparams(OnlineHyperState& hs, const CountState& slice_counts, double lambda) {
  if (lambda == 0.0) return;
  for (std::size_t k = 0; k < hs.num_topics(); ++k) {
    hs.gamma_vec[k] += lambda * static_cast<double>(slice_counts.topic_count(k));
    hs.beta_row_sum[k] += lambda * static_cast<double>(slice_counts.topic_word_total(k));
  }
  for (std::size_t w = 0; w < hs.vocab_size(); ++w) {
    auto prior = hs.beta_mat.row(w);
    const auto n = slice_counts.word_row(w);
    for (std::size_t k = 0; k < prior.size(); ++k) prior[k] += lambda * static_cast<double>(n[k]);
  }
}

/// Restoration with vector priors; reduces to the scalar formulas when the
/// priors are symmetric.
inline ModelParams restore_online(const CountState& counts, const OnlineHyperState& hs) {
  ModelParams p;
  const std::size_t K = hs.num_topics(), W = hs.vocab_size();
  p.theta.resize(K);
  p.phi = Matrix<double>(K, W);
  double theta_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    p.theta[k] = static_cast<double>(counts.topic_count(k)) + hs.gamma_vec[k];
    theta_total += p.theta[k];
    double row_total = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
      p.phi(k, w) = static_cast<double>(counts.word_topic_count(k, w)) + hs.beta_mat(w, k);
      row_total += p.phi(k, w);
    }
    for (double& v : p.phi.row(k)) v /= row_total;
  }
  for (double& t : p.theta) t /= theta_total;
  return p;
}

struct SliceResult {
  ModelParams params;
  CountState counts;
};

/// Processes one time slice: uniform init, `inner_iters` Gibbs passes,
/// restoration against the priors in effect, then (SliceEnd mode) the
/// prior update. An empty slice leaves `hs` untouched.
inline SliceResult process_slice(OnlineHyperState& hs, std::span<const Biterm> slice, std::size_t inner_iters,
                                 double lambda, OnlineUpdateMode mode, Rng& rng) {
  if (inner_iters < 1) throw std::invalid_argument("process_slice: inner_iters must be >= 1");
  const std::size_t K = hs.num_topics();
  CountState counts(K, hs.vocab_size());
  if (slice.empty()) return {restore_online(counts, hs), std::move(counts)};

  std::vector<TopicId> z(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    z[i] = static_cast<TopicId>(uniform_index(K, rng));
    counts.add(slice[i], z[i]);
  }
  std::vector<double> weights(K);
  for (std::size_t it = 0; it < inner_iters; ++it) {
    for (std::size_t i = 0; i < slice.size(); ++i) {
      counts.remove(slice[i], z[i]);
      online_weights(counts, hs, slice[i], weights);
      z[i] = static_cast<TopicId>(sample_discrete(weights, rng));
      counts.add(slice[i], z[i]);
      if (mode == OnlineUpdateMode::PerBiterm) update_hyperparams(hs, counts, lambda);
    }
  }
  SliceResult out{restore_online(counts, hs), std::move(counts)};
  if (mode == OnlineUpdateMode::SliceEnd) update_hyperparams(hs, out.counts, lambda);
  return out;
}

struct OnlineOptions {
  std::size_t slice_size = 10000;
  std::size_t inner_iters = 10;
  OnlineUpdateMode mode = OnlineUpdateMode::SliceEnd;
};

/// Streaming driver: each observed chunk is cut into slices of at most
/// `slice_size` biterms. The current model is the last slice's restoration.
class OnlineBtm {
 public:
  static constexpr std::string_view kName = "obtm";

  OnlineBtm(std::size_t vocab_size, const Hyperparams& hyper, OnlineOptions opts = {})
      : hyper_(hyper), opts_(opts), hs_(hyper.K, vocab_size, hyper.gamma, hyper.beta), rng_(make_rng(hyper.seed)) {
    hyper_.validate();
    if (opts_.slice_size < 1) throw std::invalid_argument("online: slice size must be >= 1");
    params_ = restore_online(CountState(hyper.K, vocab_size), hs_);
  }

  void observe(std::span<const Biterm> biterms) {
    for (std::size_t start = 0; start < biterms.size(); start += opts_.slice_size) {
      const auto len = std::min(opts_.slice_size, biterms.size() - start);
      auto result = process_slice(hs_, biterms.subspan(start, len), opts_.inner_iters, hyper_.lambda, opts_.mode, rng_);
      params_ = std::move(result.params);
      last_slice_bytes_ = result.counts.bytes() + len * sizeof(TopicId);
      processed_ += len;
      ++slices_;
    }
  }

  ModelParams params() const { return params_; }
  const OnlineHyperState& hyper_state() const { return hs_; }
  std::uint64_t processed() const { return processed_; }
  std::size_t slices() const { return slices_; }
  std::size_t state_bytes() const { return hs_.bytes() + last_slice_bytes_; }

 private:
  Hyperparams hyper_;
  OnlineOptions opts_;
  OnlineHyperState hs_;
  Rng rng_;
  ModelParams params_;
  std::uint64_t processed_ = 0;
  std::size_t slices_ = 0;
  std::size_t last_slice_bytes_ = 0;
};

}  // namespace btm
