#pragma once

// Shared hyperparameters, integer sufficient statistics, parameter
// restoration, the biterm likelihood and the model snapshot file format.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "btm/corpus.hpp"
#include "btm/error.hpp"
#include "btm/matrix.hpp"

namespace btm {

using TopicId = std::uint32_t;

struct Hyperparams {
  std::size_t K = 1;
  double gamma = 50.0;
  double beta = 0.01;
  double lambda = 1.0;          // online decay weight
  std::size_t rejuv_len = 10;   // incremental rejuvenation sequence length R
  double tau = 1000.0;          // SCVB0 step offset
  double kappa_scvb0 = 0.8;
  double kappa_sdm = 0.51;
  std::uint64_t seed = 1;

  /// gamma = 50/K, beta = 0.01, tau = 1000, kappa 0.8 / 0.51, R = 10.
  static Hyperparams defaults(std::size_t topics) {
    Hyperparams h;
    h.K = topics;
    h.gamma = 50.0 / static_cast<double>(topics);
    return h;
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("hyperparameters: " + msg); };
    if (K < 1) fail("K must be >= 1");
    if (!(gamma > 0.0)) fail("gamma must be > 0");
    if (!(beta > 0.0)) fail("beta must be > 0");
    if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must lie in [0, 1]");
    if (!(tau >= 0.0)) fail("tau must be >= 0");
    if (!(kappa_scvb0 > 0.5 && kappa_scvb0 <= 1.0)) fail("kappa (scvb0) must lie in (0.5, 1]");
    if (!(kappa_sdm > 0.5 && kappa_sdm <= 1.0)) fail("kappa (sdm) must lie in (0.5, 1]");
  }
};

/// Hard-assignment statistics shared by the Gibbs-based backends.
///
/// Word-topic counts are stored word-major (row w holds the K counts of
/// word w) so a biterm touches two contiguous K-length rows.
class CountState {
 public:
  CountState() = default;
  CountState(std::size_t topics, std::size_t vocab_size)
      : n_k_(topics, 0), n_dot_k_(topics, 0), n_wk_(vocab_size, topics, 0) {}

  std::size_t num_topics() const { return n_k_.size(); }
  std::size_t vocab_size() const { return n_wk_.rows(); }

  std::int64_t topic_count(std::size_t k) const { return n_k_[k]; }
  std::int64_t word_topic_count(std::size_t k, std::size_t w) const { return n_wk_(w, k); }
  /// n_{.|k}, the sum of word-topic counts for topic k.
  std::int64_t topic_word_total(std::size_t k) const { return n_dot_k_[k]; }
  std::span<const std::int64_t> word_row(std::size_t w) const { return n_wk_.row(w); }
  std::span<const std::int64_t> topic_counts() const { return n_k_; }
  std::span<const std::int64_t> topic_word_totals() const { return n_dot_k_; }

  std::int64_t assigned() const { return assigned_; }

  void add(const Biterm& b, TopicId k) {
    check_word(b);
    ++n_k_[k];
    n_dot_k_[k] += 2;
    ++n_wk_(b.w1, k);
    ++n_wk_(b.w2, k);
    ++assigned_;
  }

  /// Throws std::logic_error if any count would go negative.
  void remove(const Biterm& b, TopicId k) {
    check_word(b);
    const std::int64_t need_w1 = b.is_self_pair() ? 2 : 1;
    if (n_k_[k] < 1 || n_wk_(b.w1, k) < need_w1 || n_wk_(b.w2, k) < 1)
      throw std::logic_error("count underflow while removing biterm from topic " + std::to_string(k));
    --n_k_[k];
    n_dot_k_[k] -= 2;
    --n_wk_(b.w1, k);
    --n_wk_(b.w2, k);
    --assigned_;
  }

  /// sum_k n_k == assigned, sum_w n_{w|k} == 2 n_k, nonnegative counts.
  bool consistent() const {
    std::int64_t total = 0;
    for (std::size_t k = 0; k < num_topics(); ++k) {
      total += n_k_[k];
      std::int64_t col = 0;
      for (std::size_t w = 0; w < vocab_size(); ++w) {
        if (n_wk_(w, k) < 0) return false;
        col += n_wk_(w, k);
      }
      if (n_k_[k] < 0 || col != 2 * n_k_[k] || col != n_dot_k_[k]) return false;
    }
    return total == assigned_;
  }

  std::size_t bytes() const {
    return n_wk_.bytes() + (n_k_.capacity() + n_dot_k_.capacity()) * sizeof(std::int64_t);
  }

 private:
  void check_word(const Biterm& b) const {
    if (b.w2 >= vocab_size()) throw std::out_of_range("biterm word id out of vocabulary range");
  }

  std::vector<std::int64_t> n_k_;
  std::vector<std::int64_t> n_dot_k_;
  Matrix<std::int64_t> n_wk_;
  std::int64_t assigned_ = 0;
};

/// theta (K) and phi (K x W, topic-major).
struct ModelParams {
  std::vector<double> theta;
  Matrix<double> phi;

  std::size_t num_topics() const { return theta.size(); }
  std::size_t vocab_size() const { return phi.cols(); }

  /// Simplex checks with the given tolerance on each sum.
  bool valid(double tol = 1e-12) const {
    if (phi.rows() != theta.size() || theta.empty()) return false;
    double s = 0.0;
    for (double t : theta) {
      if (!(t >= 0.0) || !std::isfinite(t)) return false;
      s += t;
    }
    if (std::abs(s - 1.0) > tol) return false;
    for (std::size_t k = 0; k < phi.rows(); ++k) {
      double r = 0.0;
      for (double p : phi.row(k)) {
        if (!(p >= 0.0) || !std::isfinite(p)) return false;
        r += p;
      }
      if (std::abs(r - 1.0) > tol) return false;
    }
    return true;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Restoration from (possibly real-valued) statistics:
///   theta_k  = (n_k + gamma) / (sum_j n_j + K gamma)
///   phi_k,w  = (n_{w|k} + beta) / (n_{.|k} + W beta)
/// `topic_count(k)` and `word_topic_count(k, w)` supply the statistics.
template <class TopicCountFn, class WordTopicCountFn>
ModelParams restore_params(std::size_t topics, std::size_t vocab_size, TopicCountFn&& topic_count,
                           WordTopicCountFn&& word_topic_count, double gamma, double beta) {
  ModelParams p;
  p.theta.resize(topics);
  p.phi = Matrix<double>(topics, vocab_size);
  double theta_total = 0.0;
  for (std::size_t k = 0; k < topics; ++k) {
    p.theta[k] = static_cast<double>(topic_count(k)) + gamma;
    theta_total += p.theta[k];
    double row_total = 0.0;
    for (std::size_t w = 0; w < vocab_size; ++w) {
      p.phi(k, w) = static_cast<double>(word_topic_count(k, w)) + beta;
      row_total += p.phi(k, w);
    }
    for (double& v : p.phi.row(k)) v /= row_total;
  }
  for (double& t : p.theta) t /= theta_total;
  return p;
}

inline ModelParams restore_params(const CountState& counts, const Hyperparams& hyper) {
  return restore_params(
      counts.num_topics(), counts.vocab_size(), [&](std::size_t k) { return counts.topic_count(k); },
      [&](std::size_t k, std::size_t w) { return counts.word_topic_count(k, w); }, hyper.gamma, hyper.beta);
}

/// p(b) = sum_k theta_k phi_{k,w1} phi_{k,w2}.
inline double biterm_likelihood(const ModelParams& params, const Biterm& b) {
  if (b.w1 >= params.vocab_size() || b.w2 >= params.vocab_size())
    throw std::out_of_range("biterm_likelihood: word id >= W");
  double p = 0.0;
  for (std::size_t k = 0; k < params.num_topics(); ++k) p += params.theta[k] * params.phi(k, b.w1) * params.phi(k, b.w2);
  return p;
}

/// Floor applied to zero-likelihood biterms inside avg_test_loglik.
inline constexpr double kLikelihoodFloor = 1e-300;

/// Mean log-likelihood of a held-out biterm set.
inline double avg_test_loglik(const ModelParams& params, std::span<const Biterm> test) {
  if (test.empty()) throw std::invalid_argument("avg_test_loglik: empty test set");
  double sum = 0.0;
  for (const Biterm& b : test) sum += std::log(std::max(biterm_likelihood(params, b), kLikelihoodFloor));
  return sum / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------
// Snapshot file:
//   btm-model K=<K> W=<W> gamma=<g> beta=<b> backend=<name> biterms=<n>
//   <theta_0> ... <theta_{K-1}>
//   <phi_0,0> ... <phi_0,W-1>
//   ...  (K rows)
// Reals use 17 significant digits.

struct ModelSnapshot {
  ModelParams params;
  double gamma = 0.0;
  double beta = 0.0;
  std::string backend;
  std::uint64_t biterms_processed = 0;

  friend bool operator==(const ModelSnapshot&, const ModelSnapshot&) = default;
};

namespace detail {

inline void put_real(std::ostream& out, double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  out.write(buf.data(), ptr - buf.data());
}

inline double parse_real(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw InputFormatError(where + ": expected a real number, got '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

inline void write_snapshot(std::ostream& out, const ModelSnapshot& snap) {
  const auto& p = snap.params;
  out << "btm-model K=" << p.num_topics() << " W=" << p.vocab_size() << " gamma=";
  detail::put_real(out, snap.gamma);
  out << " beta=";
  detail::put_real(out, snap.beta);
  out << " backend=" << snap.backend << " biterms=" << snap.biterms_processed << '\n';
  auto put_row = [&](std::span<const double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ' ';
      detail::put_real(out, row[i]);
    }
    out << '\n';
  };
  put_row(p.theta);
  for (std::size_t k = 0; k < p.phi.rows(); ++k) put_row(p.phi.row(k));
}

inline void write_snapshot(const std::string& path, const ModelSnapshot& snap) {
  auto out = detail::open_out(path);
  write_snapshot(out, snap);
}

inline ModelSnapshot read_snapshot(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw InputFormatError(name + ": empty snapshot");
  detail::strip_cr(line);
  auto fields = detail::split_ws(line);
  if (fields.size() != 7 || fields[0] != "btm-model") throw InputFormatError(name + ": bad snapshot header");
  auto value_of = [&](std::string_view field, std::string_view key) {
    if (field.substr(0, key.size()) != key || field.size() <= key.size() || field[key.size()] != '=')
      throw InputFormatError(name + ": expected header field '" + std::string(key) + "='");
    return field.substr(key.size() + 1);
  };
  ModelSnapshot snap;
  const auto K = detail::parse_int<std::size_t>(value_of(fields[1], "K"), name);
  const auto W = detail::parse_int<std::size_t>(value_of(fields[2], "W"), name);
  snap.gamma = detail::parse_real(value_of(fields[3], "gamma"), name);
  snap.beta = detail::parse_real(value_of(fields[4], "beta"), name);
  snap.backend = std::string(value_of(fields[5], "backend"));
  snap.biterms_processed = detail::parse_int<std::uint64_t>(value_of(fields[6], "biterms"), name);
  if (K == 0 || W == 0) throw InputFormatError(name + ": K and W must be positive");

  auto read_row = [&](std::size_t expected, const std::string& what) {
    std::string row;
    if (!std::getline(in, row)) throw InputFormatError(name + ": missing " + what);
    detail::strip_cr(row);
    auto toks = detail::split_ws(row);
    if (toks.size() != expected)
      throw InputFormatError(name + ": " + what + " has " + std::to_string(toks.size()) + " values, expected " +
                             std::to_string(expected));
    std::vector<double> vals;
    vals.reserve(expected);
    for (auto t : toks) vals.push_back(detail::parse_real(t, name + " " + what));
    return vals;
  };
  snap.params.theta = read_row(K, "theta");
  snap.params.phi = Matrix<double>(K, W);
  for (std::size_t k = 0; k < K; ++k) {
    auto row = read_row(W, "phi row " + std::to_string(k));
    std::copy(row.begin(), row.end(), snap.params.phi.row(k).begin());
  }
  return snap;
}

inline ModelSnapshot read_snapshot(const std::string& path) {
  auto in = detail::open_in(path);
  return read_snapshot(in, path);
}

}  // namespace btm
