#pragma once

// Incremental BTM: each arriving biterm is sampled against the global counts,
// then R uniformly chosen past biterms (with replacement, the new arrival
// included) are resampled.

#include <span>
#include <string_view>
#include <vector>

#include "btm/cgs.hpp"
#include "btm/corpus.hpp"
#include "btm/model.hpp"
#include "btm/random.hpp"

namespace btm {

struct HistoryEntry {
  Biterm biterm;
  TopicId z = 0;
};

/// Sample `b` into `counts`, append it to `history`, then run the
/// rejuvenation sequence of length `rejuv_len`.
inline void process_biterm_incremental(CountState& counts, std::vector<HistoryEntry>& history, const Biterm& b,
                                       std::size_t rejuv_len, const Hyperparams& hyper, Rng& rng,
                                       std::span<double> scratch) {
  gibbs_weights(counts, hyper.gamma, hyper.beta, b, scratch);
  const auto k = static_cast<TopicId>(sample_discrete(scratch, rng));
  counts.add(b, k);
  history.push_back({b, k});
  for (std::size_t r = 0; r < rejuv_len; ++r) {
    HistoryEntry& e = history[uniform_index(history.size(), rng)];
    counts.remove(e.biterm, e.z);
    gibbs_weights(counts, hyper.gamma, hyper.beta, e.biterm, scratch);
    e.z = static_cast<TopicId>(sample_discrete(scratch, rng));
    counts.add(e.biterm, e.z);
  }
}

class IncrementalBtm {
 public:
  static constexpr std::string_view kName = "ibtm";

  IncrementalBtm(std::size_t vocab_size, const Hyperparams& hyper)
      : hyper_(hyper), counts_(hyper.K, vocab_size), scratch_(hyper.K), rng_(make_rng(hyper.seed)) {
    hyper_.validate();
  }

  void observe(const Biterm& b) {
    process_biterm_incremental(counts_, history_, b, hyper_.rejuv_len, hyper_, rng_, scratch_);
  }

  void observe(std::span<const Biterm> biterms) {
    for (const Biterm& b : biterms) observe(b);
  }

  const CountState& counts() const { return counts_; }
  std::span<const HistoryEntry> history() const { return history_; }
  std::uint64_t processed() const { return history_.size(); }
  ModelParams params() const { return restore_params(counts_, hyper_); }
  std::size_t state_bytes() const { return counts_.bytes() + history_.capacity() * sizeof(HistoryEntry); }

 private:
  Hyperparams hyper_;
  CountState counts_;
  std::vector<HistoryEntry> history_;
  std::vector<double> scratch_;
  Rng rng_;
};

}  // namespace btm
