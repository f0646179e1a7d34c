#pragma once

// Likelihood-vs-progress traces, multi-seed aggregation and per-biterm cost
// measurement.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "btm/backend.hpp"
#include "btm/cgs.hpp"
#include "btm/corpus.hpp"
#include "btm/error.hpp"
#include "btm/model.hpp"

namespace btm {

struct TraceRecord {
  std::string backend;
  std::uint64_t seed = 0;
  double fraction = 0.0;
  double avg_test_loglik = 0.0;
  double wall_ms = 0.0;          // cumulative training time, evaluation excluded
  double biterms_per_sec = 0.0;
  std::uint64_t rss_bytes = 0;   // resident backend state size
};

inline void validate_checkpoints(std::span<const double> checkpoints) {
  if (checkpoints.empty()) throw std::invalid_argument("checkpoints: need at least one");
  double prev = 0.0;
  for (double c : checkpoints) {
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("checkpoints: values must lie in (0, 1]");
    if (!(c > prev)) throw std::invalid_argument("checkpoints: values must be strictly increasing");
    prev = c;
  }
}

/// 0.1, 0.2, ..., 1.0 for steps = 10.
inline std::vector<double> even_checkpoints(std::size_t steps) {
  std::vector<double> out;
  for (std::size_t i = 1; i <= steps; ++i) out.push_back(static_cast<double>(i) / static_cast<double>(steps));
  return out;
}

/// Feeds `train` to the backend in order, pausing at each checkpoint
/// fraction to restore parameters and score `test`.
template <StreamingBackend Backend>
std::vector<TraceRecord> trace_run(Backend& backend, std::string_view name, std::uint64_t seed,
                                   std::span<const Biterm> train, std::span<const Biterm> test,
                                   std::span<const double> checkpoints) {
  validate_checkpoints(checkpoints);
  using clock = std::chrono::steady_clock;
  std::vector<TraceRecord> out;
  std::size_t done = 0;
  double train_ms = 0.0;
  for (double f : checkpoints) {
    const auto end = std::max(done, static_cast<std::size_t>(std::llround(f * static_cast<double>(train.size()))));
    const auto t0 = clock::now();
    backend.observe(train.subspan(done, end - done));
    train_ms += std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    done = end;
    TraceRecord r;
    r.backend = std::string(name);
    r.seed = seed;
    r.fraction = f;
    r.avg_test_loglik = avg_test_loglik(backend.params(), test);
    r.wall_ms = train_ms;
    r.biterms_per_sec = train_ms > 0.0 ? static_cast<double>(done) / (train_ms / 1000.0) : 0.0;
    r.rss_bytes = backend.state_bytes();
    out.push_back(std::move(r));
  }
  return out;
}

/// Batch Gibbs trace: the progress axis is the fraction of `sweeps` done.
inline std::vector<TraceRecord> trace_gibbs(GibbsSampler& sampler, std::size_t sweeps, std::uint64_t seed,
                                            std::span<const Biterm> test, std::span<const double> checkpoints) {
  validate_checkpoints(checkpoints);
  using clock = std::chrono::steady_clock;
  std::vector<TraceRecord> out;
  double train_ms = 0.0;
  for (double f : checkpoints) {
    const auto target = static_cast<std::size_t>(std::llround(f * static_cast<double>(sweeps)));
    const auto t0 = clock::now();
    while (sampler.sweeps_done() < target) sampler.sweep();
    train_ms += std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    TraceRecord r;
    r.backend = "cgs";
    r.seed = seed;
    r.fraction = f;
    r.avg_test_loglik = avg_test_loglik(sampler.params(), test);
    r.wall_ms = train_ms;
    const double processed = static_cast<double>(sampler.sweeps_done() * sampler.assignments().size());
    r.biterms_per_sec = train_ms > 0.0 ? processed / (train_ms / 1000.0) : 0.0;
    r.rss_bytes = sampler.state_bytes();
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace CSV: backend,seed,fraction,avg_test_loglik,wall_ms,rss_bytes

inline constexpr std::string_view kTraceHeader = "backend,seed,fraction,avg_test_loglik,wall_ms,rss_bytes";

inline void write_trace(std::ostream& out, std::span<const TraceRecord> records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    out << r.backend << ',' << r.seed << ',';
    detail::put_real(out, r.fraction);
    out << ',';
    detail::put_real(out, r.avg_test_loglik);
    out << ',';
    detail::put_real(out, r.wall_ms);
    out << ',' << r.rss_bytes << '\n';
  }
}

inline void write_trace(const std::string& path, std::span<const TraceRecord> records) {
  auto out = detail::open_out(path);
  write_trace(out, records);
}

inline std::vector<TraceRecord> read_trace(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw InputFormatError(name + ": empty trace file");
  detail::strip_cr(line);
  if (line != kTraceHeader) throw InputFormatError(name + ": unexpected trace header");
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    std::vector<std::string_view> f;
    std::string_view sv(line);
    for (std::size_t start = 0;;) {
      const auto comma = sv.find(',', start);
      f.push_back(sv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 6) throw InputFormatError(where + ": expected 6 fields");
    TraceRecord r;
    r.backend = std::string(f[0]);
    r.seed = detail::parse_int<std::uint64_t>(f[1], where);
    r.fraction = detail::parse_real(f[2], where);
    r.avg_test_loglik = detail::parse_real(f[3], where);
    r.wall_ms = detail::parse_real(f[4], where);
    r.rss_bytes = detail::parse_int<std::uint64_t>(f[5], where);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TraceRecord> read_trace(const std::string& path) {
  auto in = detail::open_in(path);
  return read_trace(in, path);
}

struct MergedRecord {
  std::string backend;
  double fraction = 0.0;
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  double mean_wall_ms = 0.0;
};

/// Groups by (backend, fraction) in first-seen order and reports the
/// mean and standard deviation of avg_test_loglik across runs.
inline std::vector<MergedRecord> merge_traces(std::span<const TraceRecord> records) {
  std::vector<MergedRecord> out;
  std::vector<std::vector<double>> values;
  std::map<std::pair<std::string, double>, std::size_t> slot;
  for (const auto& r : records) {
    auto [it, fresh] = slot.try_emplace({r.backend, r.fraction}, out.size());
    if (fresh) {
      out.push_back({r.backend, r.fraction, 0, 0.0, 0.0, 0.0});
      values.emplace_back();
    }
    auto& m = out[it->second];
    ++m.runs;
    m.mean_wall_ms += r.wall_ms;
    values[it->second].push_back(r.avg_test_loglik);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& m = out[i];
    const auto& v = values[i];
    double s = 0.0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(v.size());
    m.mean_wall_ms /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - m.mean) * (x - m.mean);
      m.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
  }
  return out;
}

inline void write_merged(std::ostream& out, std::span<const MergedRecord> merged) {
  out << "backend,fraction,runs,mean_avg_test_loglik,std_avg_test_loglik,mean_wall_ms\n";
  for (const auto& m : merged) {
    out << m.backend << ',';
    detail::put_real(out, m.fraction);
    out << ',' << m.runs << ',';
    detail::put_real(out, m.mean);
    out << ',';
    detail::put_real(out, m.stddev);
    out << ',';
    detail::put_real(out, m.mean_wall_ms);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

struct CostClass {
  std::string_view update;
  std::string_view memory;
};

/// Asymptotic per-update cost and memory for each backend.
inline CostClass cost_class(Algo a) {
  switch (a) {
    case Algo::Ibtm: return {"O(R)", "O(K(1+W)+B_t)"};
    case Algo::Obtm: return {"O(B_t(1+KW))", "O(K(1+W)+N_B)"};
    case Algo::Scvb0: return {"O(K)", "O(K(1+W))"};
    case Algo::Sdm: return {"O(K)", "O(K(1+W))"};
    case Algo::Cgs: return {"O(K) per biterm per sweep", "O(K(1+W)+N_B)"};
  }
  return {"?", "?"};
}

struct CostReport {
  std::string backend;
  CostClass predicted;
  double median_ns_per_biterm = 0.0;
  std::size_t state_bytes = 0;
};

template <class T>
T median(std::vector<T> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / T(2);
}

/// Median over `reps` fresh backends of (time to observe `stream`) / |stream|.
/// Construction is excluded from the timing.
inline CostReport cost_accounting(Algo algo, std::size_t vocab_size, const BackendConfig& cfg,
                                  std::span<const Biterm> stream, std::size_t reps = 5) {
  if (stream.empty() || reps == 0) throw std::invalid_argument("cost_accounting: need a stream and reps >= 1");
  using clock = std::chrono::steady_clock;
  CostReport rep;
  rep.backend = std::string(algo_name(algo));
  rep.predicted = cost_class(algo);
  std::vector<double> per_biterm;
  for (std::size_t r = 0; r < reps; ++r) {
    AnyBackend b = make_backend(algo, vocab_size, cfg, stream);
    const auto t0 = clock::now();
    b.observe(stream);
    const double ns = std::chrono::duration<double, std::nano>(clock::now() - t0).count();
    per_biterm.push_back(ns / static_cast<double>(stream.size()));
    rep.state_bytes = b.state_bytes();
  }
  rep.median_ns_per_biterm = median(per_biterm);
  return rep;
}

}  // namespace btm
