#pragma once

// Uniform streaming surface over the four one-pass / online backends.

#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btm/corpus.hpp"
#include "btm/incremental.hpp"
#include "btm/model.hpp"
#include "btm/online.hpp"
#include "btm/scvb0.hpp"
#include "btm/sdm.hpp"

namespace btm {

template <class B>
concept StreamingBackend = requires(B& b, const B& cb, std::span<const Biterm> s) {
  b.observe(s);
  { cb.params() } -> std::same_as<ModelParams>;
  { cb.state_bytes() } -> std::convertible_to<std::size_t>;
};

enum class Algo { Cgs, Obtm, Ibtm, Scvb0, Sdm };

inline std::optional<Algo> parse_algo(std::string_view name) {
  if (name == "cgs") return Algo::Cgs;
  if (name == "obtm") return Algo::Obtm;
  if (name == "ibtm") return Algo::Ibtm;
  if (name == "scvb0") return Algo::Scvb0;
  if (name == "sdm") return Algo::Sdm;
  return std::nullopt;
}

inline std::string_view algo_name(Algo a) {
  switch (a) {
    case Algo::Cgs: return "cgs";
    case Algo::Obtm: return "obtm";
    case Algo::Ibtm: return "ibtm";
    case Algo::Scvb0: return "scvb0";
    case Algo::Sdm: return "sdm";
  }
  return "?";
}

struct BackendConfig {
  Hyperparams hyper;
  OnlineOptions online;
  Scvb0Options scvb0;
  SdmOptions sdm;
  /// |B| hint for SCVB0; 0 means "use the training stream length".
  std::uint64_t corpus_size = 0;
  /// SCVB0 uses the running count instead of any fixed |B|.
  bool scvb0_running_count = false;
};

class AnyBackend {
 public:
  using Variant = std::variant<OnlineBtm, IncrementalBtm, Scvb0, Sdm>;

  explicit AnyBackend(Variant v) : v_(std::move(v)) {}

  void observe(std::span<const Biterm> biterms) {
    std::visit([&](auto& b) { b.observe(biterms); }, v_);
  }
  ModelParams params() const {
    return std::visit([](const auto& b) { return b.params(); }, v_);
  }
  std::size_t state_bytes() const {
    return std::visit([](const auto& b) { return b.state_bytes(); }, v_);
  }
  std::string_view name() const {
    return std::visit([](const auto& b) { return std::decay_t<decltype(b)>::kName; }, v_);
  }

  Variant& get() { return v_; }
  const Variant& get() const { return v_; }

 private:
  Variant v_;
};

/// `train` supplies the n_w pre-pass for SDM and |B| for SCVB0. Not valid
/// for Algo::Cgs, which is a batch sampler.
inline AnyBackend make_backend(Algo algo, std::size_t vocab_size, const BackendConfig& cfg,
                               std::span<const Biterm> train) {
  switch (algo) {
    case Algo::Obtm:
      return AnyBackend(OnlineBtm(vocab_size, cfg.hyper, cfg.online));
    case Algo::Ibtm:
      return AnyBackend(IncrementalBtm(vocab_size, cfg.hyper));
    case Algo::Scvb0: {
      const std::uint64_t size =
          cfg.scvb0_running_count ? 0 : (cfg.corpus_size != 0 ? cfg.corpus_size : train.size());
      return AnyBackend(Scvb0(vocab_size, cfg.hyper, size, cfg.scvb0));
    }
    case Algo::Sdm: {
      std::vector<std::uint64_t> counts;
      if (!cfg.sdm.streaming_counts) counts = count_word_biterms(train, vocab_size);
      return AnyBackend(Sdm(vocab_size, cfg.hyper, std::move(counts), cfg.sdm));
    }
    case Algo::Cgs:
      break;
  }
  throw std::invalid_argument("make_backend: cgs is not a streaming backend");
}

static_assert(StreamingBackend<AnyBackend>);
static_assert(StreamingBackend<OnlineBtm>);
static_assert(StreamingBackend<IncrementalBtm>);
static_assert(StreamingBackend<Scvb0>);
static_assert(StreamingBackend<Sdm>);

}  // namespace btm
