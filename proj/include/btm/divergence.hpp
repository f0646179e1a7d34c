#pragma once

// Alpha-divergence between finite nonnegative measures, closed-form local
// projection optima, and the martingale-difference check on the SDM noise
// term.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "btm/corpus.hpp"
#include "btm/model.hpp"
#include "btm/random.hpp"
#include "btm/sdm.hpp"

namespace btm {

namespace detail {

inline void check_measure(std::span<const double> m, const char* name) {
  bool positive = false;
  for (double v : m) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string("alpha_divergence: negative or NaN weight in ") + name);
    positive = positive || v > 0.0;
  }
  if (!positive) throw std::invalid_argument(std::string("alpha_divergence: ") + name + " has no positive weight");
}

/// Generalized KL for unnormalized measures: sum p log(p/q) - p + q, with 0 log 0 = 0.
inline double generalized_kl(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (q[i] == 0.0) return INFINITY;
      d += p[i] * std::log(p[i] / q[i]);
    }
    d += q[i] - p[i];
  }
  return d;
}

}  // namespace detail

/// D_alpha[p || q] = sum[alpha p + (1 - alpha) q - p^alpha q^(1-alpha)] / (alpha (1 - alpha)).
/// alpha = 1 gives KL[p || q], alpha = 0 gives KL[q || p] (generalized forms).
inline double alpha_divergence(std::span<const double> p, std::span<const double> q, double alpha) {
  if (p.size() != q.size()) throw std::invalid_argument("alpha_divergence: supports differ in size");
  detail::check_measure(p, "p");
  detail::check_measure(q, "q");
  if (alpha == 1.0) return detail::generalized_kl(p, q);
  if (alpha == 0.0) return detail::generalized_kl(q, p);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0 && q[i] == 0.0) continue;
    double mixed;
    if (p[i] == 0.0) {
      mixed = alpha > 0.0 ? 0.0 : INFINITY;
    } else if (q[i] == 0.0) {
      mixed = (1.0 - alpha) > 0.0 ? 0.0 : INFINITY;
    } else {
      mixed = std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
    }
    sum += alpha * p[i] + (1.0 - alpha) * q[i] - mixed;
  }
  return sum / (alpha * (1.0 - alpha));
}

/// One configuration of the other biterms: the count it induces and its
/// probability under q(z_\i).
struct ConfigMass {
  double count = 0.0;
  double prob = 0.0;
};

using ConfigDistribution = std::vector<ConfigMass>;

/// Distribution of sum_j weight_j [z_j = k] when each z_j = k independently
/// with probability probs[j]. Enumerates all 2^M configurations (M <= 20).
inline ConfigDistribution configuration_distribution(std::span<const double> probs, std::span<const double> weights) {
  if (probs.size() != weights.size()) throw std::invalid_argument("configuration_distribution: size mismatch");
  if (probs.size() > 20) throw std::invalid_argument("configuration_distribution: too many factors to enumerate");
  ConfigDistribution out;
  const std::size_t M = probs.size();
  out.reserve(std::size_t{1} << M);
  for (std::size_t mask = 0; mask < (std::size_t{1} << M); ++mask) {
    ConfigMass cm{0.0, 1.0};
    for (std::size_t j = 0; j < M; ++j) {
      if (mask >> j & 1U) {
        cm.count += weights[j];
        cm.prob *= probs[j];
      } else {
        cm.prob *= 1.0 - probs[j];
      }
    }
    out.push_back(cm);
  }
  return out;
}

enum class ProjectionKind {
  Topic,      // a: factor n + gamma
  Word,       // b: factor n + beta
  Normalizer, // c: factor 1 / (n + W beta); the solution is reported as c
};

/// Closed-form optimum of the local alpha-divergence projection.
///   a, b:  E[(n + offset)^alpha]^(1/alpha)
///   c:     1 / E[(1 / (n + offset))^alpha]^(1/alpha)
/// At alpha = 1 (a, b) and alpha = -1 (c) this is E[n] + offset.
inline double local_projection_solution(const ConfigDistribution& moments, double offset, double alpha,
                                        ProjectionKind kind) {
  if (alpha == 0.0) throw std::invalid_argument("local_projection_solution: alpha = 0 is not supported");
  if (moments.empty()) throw std::invalid_argument("local_projection_solution: empty configuration distribution");
  double e = 0.0;
  double total = 0.0;
  for (const auto& m : moments) {
    const double base = kind == ProjectionKind::Normalizer ? 1.0 / (m.count + offset) : m.count + offset;
    e += m.prob * std::pow(base, alpha);
    total += m.prob;
  }
  const double v = std::pow(e / total, 1.0 / alpha);
  return kind == ProjectionKind::Normalizer ? 1.0 / v : v;
}

/// The local objective D_alpha[target || candidate] over the configuration
/// support, with target_j = m_j f(n_j) and candidate_j = m_j x, where
/// f(n) = n + offset (a, b) or 1 / (n + offset) (c), and x = value (a, b)
/// or 1 / value (c).
inline double local_projection_objective(const ConfigMass* begin, const ConfigMass* end, double offset, double alpha,
                                         ProjectionKind kind, double value) {
  std::vector<double> target, candidate;
  const double x = kind == ProjectionKind::Normalizer ? 1.0 / value : value;
  for (auto it = begin; it != end; ++it) {
    const double f = kind == ProjectionKind::Normalizer ? 1.0 / (it->count + offset) : it->count + offset;
    target.push_back(it->prob * f);
    candidate.push_back(it->prob * x);
  }
  return alpha_divergence(target, candidate, alpha);
}

inline double local_projection_objective(const ConfigDistribution& moments, double offset, double alpha,
                                         ProjectionKind kind, double value) {
  return local_projection_objective(moments.data(), moments.data() + moments.size(), offset, alpha, kind, value);
}

// ---------------------------------------------------------------------------

struct NoiseReport {
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::size_t samples = 0;
  std::size_t others = 0;  // |{i' != i : w in b_i'}|
};

namespace detail {

// Neumaier-compensated running sum; the noise mean is zero in exact
// arithmetic, and plain summation over a few hundred terms leaves ~1e-12.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

struct NoiseSetup {
  std::vector<std::vector<double>> resp;  // responsibilities of the other biterms
  std::vector<double> expected;           // E[n_{\i,w|k}] = sum_{i'} q(z_i' = k)
};

inline NoiseSetup noise_setup(const SdmState& state, const Hyperparams& hyper, std::span<const Biterm> corpus,
                              WordId w, std::size_t current) {
  if (current >= corpus.size()) throw std::out_of_range("martingale_noise_check: current index out of range");
  const Biterm& bi = corpus[current];
  if (bi.w1 != w && bi.w2 != w) throw std::invalid_argument("martingale_noise_check: current biterm lacks word w");
  NoiseSetup s;
  std::vector<CompensatedSum> expected(state.num_topics());
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    if (j == current || (corpus[j].w1 != w && corpus[j].w2 != w)) continue;
    s.resp.push_back(sdm_responsibility(state, hyper, corpus[j]));
    for (std::size_t k = 0; k < state.num_topics(); ++k) expected[k].add(s.resp.back()[k]);
  }
  for (const auto& e : expected) s.expected.push_back(e.value());
  if (s.resp.empty()) throw std::invalid_argument("martingale_noise_check: word occurs in fewer than 2 biterms");
  return s;
}

inline NoiseReport summarize(const std::vector<std::vector<double>>& xi, std::size_t K, std::size_t others) {
  NoiseReport r;
  r.samples = xi.size();
  r.others = others;
  r.stderr_.assign(K, 0.0);
  std::vector<CompensatedSum> total(K);
  for (const auto& x : xi)
    for (std::size_t k = 0; k < K; ++k) total[k].add(x[k]);
  for (const auto& t : total) r.mean.push_back(t.value() / static_cast<double>(xi.size()));
  if (xi.size() > 1) {
    for (const auto& x : xi)
      for (std::size_t k = 0; k < K; ++k) r.stderr_[k] += (x[k] - r.mean[k]) * (x[k] - r.mean[k]);
    for (double& s : r.stderr_) s = std::sqrt(s / static_cast<double>(xi.size() - 1) / static_cast<double>(xi.size()));
  }
  return r;
}

inline std::size_t first_occurrence(std::span<const Biterm> corpus, WordId w) {
  for (std::size_t j = 0; j < corpus.size(); ++j)
    if (corpus[j].w1 == w || corpus[j].w2 == w) return j;
  throw std::invalid_argument("martingale_noise_check: word does not occur in corpus");
}

}  // namespace detail

/// xi_{i',k} = n_{\i,w} q(z_i' = k) - E[n_{\i,w|k}] averaged over every
/// valid i'. The mean is zero by construction.
inline NoiseReport martingale_noise_exhaustive(const SdmState& state, const Hyperparams& hyper,
                                               std::span<const Biterm> corpus, WordId w, std::size_t current) {
  const auto setup = detail::noise_setup(state, hyper, corpus, w, current);
  const double n_others = static_cast<double>(setup.resp.size());
  std::vector<std::vector<double>> xi;
  xi.reserve(setup.resp.size());
  for (const auto& q : setup.resp) {
    std::vector<double> x(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) x[k] = n_others * q[k] - setup.expected[k];
    xi.push_back(std::move(x));
  }
  return detail::summarize(xi, state.num_topics(), setup.resp.size());
}

inline NoiseReport martingale_noise_exhaustive(const SdmState& state, const Hyperparams& hyper,
                                               std::span<const Biterm> corpus, WordId w) {
  return martingale_noise_exhaustive(state, hyper, corpus, w, detail::first_occurrence(corpus, w));
}

/// Same noise term with i' drawn uniformly `n_samples` times.
inline NoiseReport martingale_noise_check(const SdmState& state, const Hyperparams& hyper,
                                          std::span<const Biterm> corpus, WordId w, std::size_t current,
                                          std::size_t n_samples, Rng& rng) {
  if (n_samples < 2) throw std::invalid_argument("martingale_noise_check: need at least 2 samples");
  const auto setup = detail::noise_setup(state, hyper, corpus, w, current);
  const double n_others = static_cast<double>(setup.resp.size());
  std::vector<std::vector<double>> xi;
  xi.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto& q = setup.resp[uniform_index(setup.resp.size(), rng)];
    std::vector<double> x(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) x[k] = n_others * q[k] - setup.expected[k];
    xi.push_back(std::move(x));
  }
  return detail::summarize(xi, state.num_topics(), setup.resp.size());
}

inline NoiseReport martingale_noise_check(const SdmState& state, const Hyperparams& hyper,
                                          std::span<const Biterm> corpus, WordId w, std::size_t n_samples, Rng& rng) {
  return martingale_noise_check(state, hyper, corpus, w, detail::first_occurrence(corpus, w), n_samples, rng);
}

}  // namespace btm
