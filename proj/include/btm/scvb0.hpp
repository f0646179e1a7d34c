#pragma once

// Zero-order stochastic collapsed variational Bayes (SCVB0) for BTM.
//
// Expected counts N_k and N_{w|k} are blended toward one-sample crude
// estimates |B| z_{i,k}. N_{w|k} is stored as scale_a * A(w, k) so the
// uniform (1 - rho) decay costs O(1) and a biterm update costs O(K).
// scale_a shrinks geometrically; renormalize_scale folds it back into A
// before it can underflow.

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

inline constexpr double kScaleUnderflowThreshold = 1e-100;

struct Scvb0Options {
  bool scale_trick = true;       // false: decay all K*W entries every step
  bool underflow_guard = true;   // false: let scale_a underflow (diagnostics only)
};

class Scvb0State {
 public:
  Scvb0State() = default;

  /// All-zero statistics.
  Scvb0State(std::size_t topics, std::size_t vocab_size, StepSchedule schedule, std::uint64_t corpus_size,
             Scvb0Options opts = {})
      : n_k_(topics, 0.0), a_(vocab_size, topics, 0.0), schedule_(schedule), corpus_size_(corpus_size), opts_(opts) {}

  /// Logical statistics N_{w|k} given as a K x W matrix; scale_a = 1.
  static Scvb0State from_statistics(std::vector<double> n_k, const Matrix<double>& n_wk, StepSchedule schedule,
                                    std::uint64_t corpus_size, Scvb0Options opts = {}) {
    if (n_wk.rows() != n_k.size()) throw std::invalid_argument("scvb0: N_k and N_{w|k} disagree on K");
    Scvb0State s(n_k.size(), n_wk.cols(), schedule, corpus_size, opts);
    s.n_k_ = std::move(n_k);
    for (std::size_t k = 0; k < n_wk.rows(); ++k)
      for (std::size_t w = 0; w < n_wk.cols(); ++w) s.a_(w, k) = n_wk(k, w);
    return s;
  }

  /// Raw (scale_a, A) pair, for exercising the renormalization path.
  static Scvb0State from_raw(std::vector<double> n_k, double scale, const Matrix<double>& dummy_kw,
                             StepSchedule schedule, std::uint64_t corpus_size, Scvb0Options opts = {}) {
    auto s = from_statistics(std::move(n_k), dummy_kw, schedule, corpus_size, opts);
    s.scale_ = scale;
    return s;
  }

  std::size_t num_topics() const { return n_k_.size(); }
  std::size_t vocab_size() const { return a_.rows(); }

  double topic(std::size_t k) const { return n_k_[k]; }
  /// Logical N_{w|k} = scale_a * A(w, k).
  double word_topic(std::size_t k, std::size_t w) const { return scale_ * a_(w, k); }
  double scale() const { return scale_; }
  double dummy(std::size_t k, std::size_t w) const { return a_(w, k); }
  std::uint64_t step_count() const { return step_; }
  const StepSchedule& schedule() const { return schedule_; }
  const Scvb0Options& options() const { return opts_; }
  std::size_t renormalizations() const { return renormalizations_; }

  /// |B| for the crude estimates: the fixed size if known, else the running count.
  double corpus_size() const {
    return static_cast<double>(corpus_size_ != 0 ? corpus_size_ : std::max<std::uint64_t>(seen_, 1));
  }

  /// max_k |sum_w N_{w|k} - 2 N_k| / (2 N_k).
  double coupling_drift() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < num_topics(); ++k) {
      double col = 0.0;
      for (std::size_t w = 0; w < vocab_size(); ++w) col += word_topic(k, w);
      const double target = 2.0 * n_k_[k];
      if (target > 0.0) worst = std::max(worst, std::abs(col - target) / target);
    }
    return worst;
  }

  std::size_t bytes() const { return a_.bytes() + n_k_.capacity() * sizeof(double); }

  /// Fills `out` with the normalized responsibility for b (the current
  /// biterm is not subtracted):
  ///   (N_k + g)(N_{w1|k} + b)(N_{w2|k} + b) / ((2 N_k + W b)(2 N_k + W b + 1))
  void responsibility(double gamma, double beta, const Biterm& b, std::span<double> out) const {
    check(b);
    const double w_beta = static_cast<double>(vocab_size()) * beta;
    const auto a1 = a_.row(b.w1);
    const auto a2 = a_.row(b.w2);
    double total = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double denom = 2.0 * n_k_[k] + w_beta;
      out[k] = (n_k_[k] + gamma) * (scale_ * a1[k] + beta) * (scale_ * a2[k] + beta) / (denom * (denom + 1.0));
      total += out[k];
    }
    for (double& v : out) v /= total;
  }

  /// Blends toward the crude estimate with the explicit rate `rho`, using
  /// `resp` as z_i. A self-pair writes 2|B|z to its single word.
  void blend(const Biterm& b, std::span<const double> resp, double rho) {
    check(b);
    ++seen_;
    const double mass = corpus_size();
    const std::size_t K = num_topics();
    if (rho >= 1.0) {
      a_.fill(0.0);
      scale_ = 1.0;
      for (std::size_t k = 0; k < K; ++k) n_k_[k] = mass * resp[k];
    } else {
      const double keep = 1.0 - rho;
      if (opts_.scale_trick) {
        scale_ *= keep;
        if (opts_.underflow_guard) renormalize();
      } else {
        for (double& v : a_.flat()) v *= keep;
      }
      for (std::size_t k = 0; k < K; ++k) n_k_[k] = keep * n_k_[k] + rho * mass * resp[k];
    }
    const double write_rate = rho >= 1.0 ? 1.0 : rho;
    auto write = [&](WordId w, double copies) {
      auto row = a_.row(w);
      for (std::size_t k = 0; k < K; ++k) row[k] += write_rate * copies * mass * resp[k] / scale_;
    };
    if (b.is_self_pair()) {
      write(b.w1, 2.0);
    } else {
      write(b.w1, 1.0);
      write(b.w2, 1.0);
    }
  }

  /// Folds scale_a into A once it drops below the threshold. Logical
  /// values are unchanged up to rounding.
  bool renormalize() {
    if (!(scale_ < kScaleUnderflowThreshold)) return false;
    for (double& v : a_.flat()) v *= scale_;
    scale_ = 1.0;
    ++renormalizations_;
    return true;
  }

  double next_rate() const { return schedule_(step_); }
  void advance_step() { ++step_; }

 private:
  void check(const Biterm& b) const {
    if (b.w2 >= vocab_size()) throw std::out_of_range("scvb0: word id out of vocabulary range");
  }

  std::vector<double> n_k_;
  Matrix<double> a_;  // word-major dummy matrix
  double scale_ = 1.0;
  StepSchedule schedule_{1000.0, 0.8};
  std::uint64_t corpus_size_ = 0;
  std::uint64_t seen_ = 0;
  std::uint64_t step_ = 0;
  Scvb0Options opts_;
  std::size_t renormalizations_ = 0;
};

inline std::vector<double> scvb0_responsibility(const Scvb0State& state, const Hyperparams& hyper, const Biterm& b) {
  std::vector<double> r(state.num_topics());
  state.responsibility(hyper.gamma, hyper.beta, b, r);
  return r;
}

/// One stochastic update with rho_t = 1 / (t + tau)^kappa.
inline void scvb0_step(Scvb0State& state, const Hyperparams& hyper, const Biterm& b, std::span<double> scratch) {
  state.responsibility(hyper.gamma, hyper.beta, b, scratch);
  state.blend(b, scratch, state.next_rate());
  state.advance_step();
}

inline void scvb0_step(Scvb0State& state, const Hyperparams& hyper, const Biterm& b) {
  std::vector<double> scratch(state.num_topics());
  scvb0_step(state, hyper, b, scratch);
}

inline bool renormalize_scale(Scvb0State& state) { return state.renormalize(); }

/// theta_k ∝ N_k + g, phi_{k,w} ∝ N_{w|k} + b.
inline ModelParams scvb0_restore(const Scvb0State& state, const Hyperparams& hyper) {
  return restore_params(
      state.num_topics(), state.vocab_size(), [&](std::size_t k) { return state.topic(k); },
      [&](std::size_t k, std::size_t w) { return state.word_topic(k, w); }, hyper.gamma, hyper.beta);
}

/// Random coupled initialization: N_{w|k} ~ U(0, 1) * init_scale and
/// N_k = sum_w N_{w|k} / 2.
inline Scvb0State scvb0_random_init(std::size_t vocab_size, const Hyperparams& hyper, std::uint64_t corpus_size,
                                    Rng& rng, double init_scale = 1.0, Scvb0Options opts = {}) {
  Matrix<double> n_wk(hyper.K, vocab_size);
  std::vector<double> n_k(hyper.K, 0.0);
  std::uniform_real_distribution<double> u(0.0, init_scale);
  for (std::size_t k = 0; k < hyper.K; ++k) {
    for (std::size_t w = 0; w < vocab_size; ++w) {
      n_wk(k, w) = u(rng);
      n_k[k] += n_wk(k, w);
    }
    n_k[k] /= 2.0;
  }
  return Scvb0State::from_statistics(std::move(n_k), n_wk, StepSchedule{hyper.tau, hyper.kappa_scvb0}, corpus_size,
                                     opts);
}

class Scvb0 {
 public:
  static constexpr std::string_view kName = "scvb0";

  /// `corpus_size` 0 selects the running biterm count for |B|.
  Scvb0(std::size_t vocab_size, const Hyperparams& hyper, std::uint64_t corpus_size, Scvb0Options opts = {})
      : hyper_(hyper), scratch_(hyper.K) {
    hyper_.validate();
    Rng rng = make_rng(hyper.seed);
    state_ = scvb0_random_init(vocab_size, hyper_, corpus_size, rng, 1.0, opts);
  }

  void observe(const Biterm& b) {
    scvb0_step(state_, hyper_, b, scratch_);
    ++processed_;
  }

  void observe(std::span<const Biterm> biterms) {
    for (const Biterm& b : biterms) observe(b);
  }

  const Scvb0State& state() const { return state_; }
  std::uint64_t processed() const { return processed_; }
  ModelParams params() const { return scvb0_restore(state_, hyper_); }
  std::size_t state_bytes() const { return state_.bytes(); }

 private:
  Hyperparams hyper_;
  Scvb0State state_;
  std::vector<double> scratch_;
  std::uint64_t processed_ = 0;
};

}  // namespace btm
