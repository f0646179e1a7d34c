// btm: command-line front end for the biterm topic model library.
//
// Exit codes: 0 ok, 2 usage, 3 input format, 4 numeric failure,
// 5 missing or unwritable file, 6 model/vocabulary size mismatch.
// Log verbosity comes from BTM_LOG_LEVEL (trace, debug, info, warn, error, off).

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "btm/btm.hpp"

namespace fs = std::filesystem;
using namespace btm;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 2, kFormat = 3, kNumeric = 4, kMissing = 5, kMismatch = 6 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string path_in(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::vector<std::string> read_lines(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<double> parse_reals(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::string_view sv(csv);
  for (std::size_t start = 0; start <= sv.size();) {
    const auto comma = std::min(sv.find(',', start), sv.size());
    try {
      out.push_back(detail::parse_real(sv.substr(start, comma - start), what));
    } catch (const InputFormatError& e) {
      throw UsageError(e.what());
    }
    start = comma + 1;
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& csv, const std::string& what) {
  std::vector<std::size_t> out;
  for (double v : parse_reals(csv, what)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw UsageError(what + ": expected positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

/// W from a vocabulary file or an explicit size; both given must agree.
std::size_t resolve_vocab_size(const std::string& vocab_path, std::size_t vocab_size) {
  if (!vocab_path.empty()) {
    const auto v = read_vocabulary(vocab_path);
    if (vocab_size != 0 && vocab_size != v.size())
      throw ModelMismatchError("--vocab-size " + std::to_string(vocab_size) + " disagrees with " + vocab_path +
                               " (" + std::to_string(v.size()) + " words)");
    return v.size();
  }
  if (vocab_size == 0) throw UsageError("one of --vocab or --vocab-size is required");
  return vocab_size;
}

void write_split(const std::string& dir, std::span<const Biterm> biterms, double ratio, std::uint64_t seed,
                 std::size_t vocab_size) {
  const auto split = split_shuffle(biterms, ratio, seed);
  write_biterms(path_in(dir, "train.tsv"), split.train);
  write_biterms(path_in(dir, "test.tsv"), split.test);
  write_word_counts(path_in(dir, "train_word_counts.txt"), count_word_biterms(split.train, vocab_size));
  spdlog::info("split {} biterms into {} train / {} test", biterms.size(), split.train.size(), split.test.size());
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::vector<std::string> inputs;
  std::string stopwords;
  std::size_t min_freq = 1;
  std::string out_dir = ".";
  std::optional<double> split;
  std::uint64_t split_seed = 1;
};

int run_preprocess(const PreprocessArgs& a) {
  std::vector<std::string> docs;
  for (const auto& in : a.inputs) {
    auto lines = read_lines(in);
    docs.insert(docs.end(), std::make_move_iterator(lines.begin()), std::make_move_iterator(lines.end()));
  }
  const StopwordSet stop = a.stopwords.empty() ? StopwordSet{} : read_stopwords(a.stopwords);
  const auto corpus = build_corpus(docs, stop, a.min_freq);
  make_dir(a.out_dir);
  write_vocabulary(path_in(a.out_dir, "vocab.txt"), corpus.vocab);
  write_biterms(path_in(a.out_dir, "biterms.tsv"), corpus.biterms);
  write_word_counts(path_in(a.out_dir, "word_counts.txt"), corpus.word_biterm_count);
  spdlog::info("{} documents, W = {}, N_B = {}", docs.size(), corpus.vocab.size(), corpus.biterms.size());
  if (a.split) write_split(a.out_dir, corpus.biterms, *a.split, a.split_seed, corpus.vocab.size());
  return kOk;
}

struct SynthArgs {
  std::size_t topics = 5;
  std::size_t vocab_size = 100;
  double gamma = 10.0;
  double beta = 0.1;
  std::size_t biterms = 200000;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  std::optional<double> split;
  std::uint64_t split_seed = 7;
};

int run_synth(const SynthArgs& a) {
  const auto s = generate(a.topics, a.vocab_size, a.gamma, a.beta, a.biterms, a.seed);
  make_dir(a.out_dir);
  write_vocabulary(path_in(a.out_dir, "vocab.txt"), Vocabulary::synthetic(a.vocab_size));
  write_biterms(path_in(a.out_dir, "biterms.tsv"), s.biterms);
  write_word_counts(path_in(a.out_dir, "word_counts.txt"), count_word_biterms(s.biterms, a.vocab_size));
  write_snapshot(path_in(a.out_dir, "true.model"), {s.true_params, a.gamma, a.beta, "truth", s.biterms.size()});
  if (a.split) write_split(a.out_dir, s.biterms, *a.split, a.split_seed, a.vocab_size);
  return kOk;
}

struct TrainArgs {
  std::string algo;
  std::string train;
  std::string vocab;
  std::size_t vocab_size = 0;
  std::size_t topics = 0;
  std::optional<double> gamma;
  double beta = 0.01;
  double lambda = 1.0;
  std::size_t rejuv_len = 10;
  double tau = 1000.0;
  std::optional<double> kappa;
  std::size_t slice_size = 10000;
  std::size_t inner_iters = 10;
  std::size_t sweeps = 200;
  std::uint64_t seed = 1;
  std::string test;
  std::string checkpoints = "1";
  std::string trace;
  std::string model = "btm.model";
  bool per_biterm_updates = false;
  bool resample_other = false;
  bool streaming_counts = false;
  std::uint64_t corpus_size = 0;
  bool running_count = false;
};

int run_train(const TrainArgs& a) {
  const auto algo = parse_algo(a.algo);
  if (!algo) throw UsageError("unknown --algo '" + a.algo + "'");
  const std::size_t W = resolve_vocab_size(a.vocab, a.vocab_size);
  const auto train = read_biterms(a.train, W);
  if (train.empty()) throw InputFormatError(a.train + ": no biterms");

  BackendConfig cfg;
  cfg.hyper = Hyperparams::defaults(a.topics);
  if (a.gamma) cfg.hyper.gamma = *a.gamma;
  cfg.hyper.beta = a.beta;
  cfg.hyper.lambda = a.lambda;
  cfg.hyper.rejuv_len = a.rejuv_len;
  cfg.hyper.tau = a.tau;
  if (a.kappa) {
    cfg.hyper.kappa_scvb0 = *a.kappa;
    cfg.hyper.kappa_sdm = *a.kappa;
  }
  cfg.hyper.seed = a.seed;
  cfg.hyper.validate();
  cfg.online = {a.slice_size, a.inner_iters,
                a.per_biterm_updates ? OnlineUpdateMode::PerBiterm : OnlineUpdateMode::SliceEnd};
  cfg.sdm.streaming_counts = a.streaming_counts;
  cfg.sdm.resample_other = a.resample_other;
  cfg.corpus_size = a.corpus_size;
  cfg.scvb0_running_count = a.running_count;

  std::vector<Biterm> test;
  if (!a.test.empty()) test = read_biterms(a.test, W);
  const auto checkpoints = parse_reals(a.checkpoints, "--checkpoints");
  validate_checkpoints(checkpoints);
  if (!a.trace.empty() && test.empty()) throw UsageError("--trace needs --test");

  spdlog::info("training {} with K = {}, W = {}, N_B = {}", a.algo, a.topics, W, train.size());
  ModelParams params;
  std::vector<TraceRecord> records;
  if (*algo == Algo::Cgs) {
    GibbsSampler g(train, W, cfg.hyper);
    if (!test.empty()) {
      records = trace_gibbs(g, a.sweeps, a.seed, test, checkpoints);
    } else {
      while (g.sweeps_done() < a.sweeps) g.sweep();
    }
    params = g.params();
  } else {
    auto backend = make_backend(*algo, W, cfg, train);
    if (!test.empty()) {
      records = trace_run(backend, backend.name(), a.seed, train, test, checkpoints);
    } else {
      backend.observe(train);
    }
    params = backend.params();
  }
  if (!params.valid(1e-9)) throw NumericError("restored parameters are not valid distributions");

  write_snapshot(a.model, {params, cfg.hyper.gamma, cfg.hyper.beta, std::string(a.algo), train.size()});
  for (const auto& r : records)
    spdlog::info("fraction {:.3f}: avg test loglik {:.6f} ({:.1f} ms)", r.fraction, r.avg_test_loglik, r.wall_ms);
  if (!a.trace.empty()) write_trace(a.trace, records);
  if (!records.empty()) {
    detail::put_real(std::cout, records.back().avg_test_loglik);
    std::cout << '\n';
  }
  return kOk;
}

int run_eval(const std::string& model, const std::string& test_path, const std::string& vocab) {
  const auto snap = read_snapshot(model);
  const std::size_t W = snap.params.vocab_size();
  if (!vocab.empty()) resolve_vocab_size(vocab, W);
  const auto test = read_biterms(test_path, W);
  if (test.empty()) throw InputFormatError(test_path + ": no biterms");
  const double ll = avg_test_loglik(snap.params, test);
  if (!std::isfinite(ll)) throw NumericError("log-likelihood is not finite");
  detail::put_real(std::cout, ll);
  std::cout << '\n';
  return kOk;
}

int run_topics(const std::string& model, const std::string& vocab_path, std::size_t n) {
  const auto snap = read_snapshot(model);
  const auto vocab = read_vocabulary(vocab_path);
  const auto& p = snap.params;
  if (vocab.size() != p.vocab_size())
    throw ModelMismatchError(model + " has W = " + std::to_string(p.vocab_size()) + " but " + vocab_path + " has " +
                             std::to_string(vocab.size()) + " words");
  const std::size_t top = std::min(n, p.vocab_size());
  std::vector<WordId> order(p.vocab_size());
  for (std::size_t k = 0; k < p.num_topics(); ++k) {
    std::iota(order.begin(), order.end(), WordId{0});
    // descending phi, lower id first on ties
    std::stable_sort(order.begin(), order.end(), [&](WordId x, WordId y) { return p.phi(k, x) > p.phi(k, y); });
    std::cout << "topic " << k << " (";
    detail::put_real(std::cout, p.theta[k]);
    std::cout << "):";
    for (std::size_t i = 0; i < top; ++i) std::cout << ' ' << vocab.word(order[i]);
    std::cout << '\n';
  }
  return kOk;
}

struct DiagnoseArgs {
  std::string biterms;
  std::string vocab;
  std::size_t vocab_size = 0;
  std::size_t topics = 5;
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
  std::size_t words = 5;
  std::size_t projections = 100;
};

int run_diagnose(const DiagnoseArgs& a) {
  const std::size_t W = resolve_vocab_size(a.vocab, a.vocab_size);
  const auto corpus = read_biterms(a.biterms, W);
  if (corpus.empty()) throw InputFormatError(a.biterms + ": no biterms");
  auto hyper = Hyperparams::defaults(a.topics);
  hyper.seed = a.seed;
  const auto counts = count_word_biterms(corpus, W);

  Sdm sdm(W, hyper, counts);
  sdm.mutable_state().set_recompute_interval(0);
  sdm.observe(corpus);
  const auto& state = sdm.state();
  bool ok = true;
  auto report = [&](const std::string& name, bool pass, const std::string& detail) {
    ok = ok && pass;
    std::cout << (pass ? "ok   " : "FAIL ") << name << ": " << detail << '\n';
  };

  const double drift = state.c_drift();
  report("c incremental vs recomputed", drift < 1e-9,
         "relative drift " + std::to_string(drift) + " after " + std::to_string(state.total_updates()) + " updates");

  // SCVB0 statistics that correspond to the trained SDM state.
  Matrix<double> n_wk(a.topics, W);
  std::vector<double> n_k(a.topics);
  for (std::size_t k = 0; k < a.topics; ++k) {
    for (std::size_t w = 0; w < W; ++w) n_wk(k, w) = state.b(k, w) - hyper.beta;
    n_k[k] = (state.c(k) - static_cast<double>(W) * hyper.beta) / 2.0;
  }
  const auto mirror = Scvb0State::from_statistics(n_k, n_wk, {hyper.tau, hyper.kappa_scvb0}, corpus.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(corpus.size(), 10000); ++i) {
    const auto r1 = sdm_responsibility(state, hyper, corpus[i]);
    const auto r2 = scvb0_responsibility(mirror, hyper, corpus[i]);
    for (std::size_t k = 0; k < a.topics; ++k) worst = std::max(worst, std::abs(r1[k] - r2[k]) / r1[k]);
  }
  report("sdm vs scvb0 responsibility", worst <= 1e-9, "max relative gap " + std::to_string(worst));

  Rng rng = make_rng(a.seed);
  std::vector<WordId> candidates;
  for (WordId w = 0; w < W; ++w)
    if (counts[w] >= 2) candidates.push_back(w);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(std::min(candidates.size(), a.words));
  for (WordId w : candidates) {
    const auto exact = martingale_noise_exhaustive(state, hyper, corpus, w);
    double worst_mean = 0.0;
    for (double m : exact.mean) worst_mean = std::max(worst_mean, std::abs(m));
    const double tol = 1e-12 * std::max(1.0, static_cast<double>(exact.others));
    report("noise mean (exhaustive) word " + std::to_string(w), worst_mean <= tol,
           "max |mean| " + std::to_string(worst_mean) + " over " + std::to_string(exact.others) + " biterms");
    const auto sampled = martingale_noise_check(state, hyper, corpus, w, a.samples, rng);
    double worst_z = 0.0;
    for (std::size_t k = 0; k < a.topics; ++k)
      if (sampled.stderr_[k] > 0.0) worst_z = std::max(worst_z, std::abs(sampled.mean[k]) / sampled.stderr_[k]);
    report("noise mean (sampled) word " + std::to_string(w), worst_z < 4.0,
           "max |mean| / stderr " + std::to_string(worst_z));
  }

  double worst_gap = 0.0;
  for (std::size_t i = 0; i < a.projections; ++i) {
    std::vector<double> probs(6), weights(6, 1.0);
    for (double& p : probs) p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto d = configuration_distribution(probs, weights);
    double mean = 0.0;
    for (double p : probs) mean += p;
    worst_gap = std::max(worst_gap, std::abs(local_projection_solution(d, hyper.gamma, 1.0, ProjectionKind::Topic) -
                                             (mean + hyper.gamma)));
    const double w_beta = static_cast<double>(W) * hyper.beta;
    worst_gap = std::max(worst_gap, std::abs(local_projection_solution(d, w_beta, -1.0, ProjectionKind::Normalizer) -
                                             (mean + w_beta)));
  }
  report("projection closed forms reproduce expected counts", worst_gap <= 1e-9,
         "max gap " + std::to_string(worst_gap));
  return ok ? kOk : kNumeric;
}

struct BenchArgs {
  std::string train;
  std::string vocab;
  std::size_t vocab_size = 0;
  std::string algos = "ibtm,obtm,scvb0,sdm";
  std::string topics = "32,64";
  std::size_t reps = 5;
  std::size_t limit = 0;
  std::uint64_t seed = 1;
};

int run_bench(const BenchArgs& a) {
  const std::size_t W = resolve_vocab_size(a.vocab, a.vocab_size);
  auto stream = read_biterms(a.train, W);
  if (a.limit != 0 && stream.size() > a.limit) stream.resize(a.limit);
  if (stream.empty()) throw InputFormatError(a.train + ": no biterms");
  std::vector<Algo> algos;
  std::string_view sv(a.algos);
  for (std::size_t start = 0; start <= sv.size();) {
    const auto comma = std::min(sv.find(',', start), sv.size());
    const auto name = sv.substr(start, comma - start);
    const auto algo = parse_algo(name);
    if (!algo || *algo == Algo::Cgs) throw UsageError("bench: unsupported algorithm '" + std::string(name) + "'");
    algos.push_back(*algo);
    start = comma + 1;
  }
  std::cout << "backend,K,update_cost,memory_cost,median_ns_per_biterm,state_bytes\n";
  for (std::size_t K : parse_sizes(a.topics, "--topics")) {
    for (Algo algo : algos) {
      BackendConfig cfg;
      cfg.hyper = Hyperparams::defaults(K);
      cfg.hyper.seed = a.seed;
      const auto rep = cost_accounting(algo, W, cfg, stream, a.reps);
      std::cout << rep.backend << ',' << K << ',' << rep.predicted.update << ',' << rep.predicted.memory << ',';
      detail::put_real(std::cout, rep.median_ns_per_biterm);
      std::cout << ',' << rep.state_bytes << '\n';
    }
  }
  return kOk;
}

int run_merge(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<TraceRecord> all;
  for (const auto& in : inputs) {
    auto recs = read_trace(in);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  const auto merged = merge_traces(all);
  if (out.empty()) {
    write_merged(std::cout, merged);
  } else {
    auto f = detail::open_out(out);
    write_merged(f, merged);
  }
  return kOk;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("btm");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("BTM_LOG_LEVEL")) spdlog::cfg::helpers::load_levels(env);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Biterm topic model: preprocessing, training, evaluation and diagnostics"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* cmd_pre = app.add_subcommand("preprocess", "Raw documents (one per line) to vocabulary and biterm stream");
  cmd_pre->add_option("inputs", pre.inputs, "Document files")->required()->check(CLI::ExistingFile);
  cmd_pre->add_option("--stopwords", pre.stopwords, "Stopword file")->check(CLI::ExistingFile);
  cmd_pre->add_option("--min-freq", pre.min_freq, "Minimum token frequency")->capture_default_str();
  cmd_pre->add_option("--out", pre.out_dir, "Output directory")->capture_default_str();
  cmd_pre->add_option("--split", pre.split, "Also write a shuffled train/test split with this train ratio");
  cmd_pre->add_option("--split-seed", pre.split_seed)->capture_default_str();

  SynthArgs syn;
  auto* cmd_syn = app.add_subcommand("synth", "Sample a corpus from the generative process");
  cmd_syn->add_option("--topics,-K", syn.topics)->capture_default_str();
  cmd_syn->add_option("--vocab-size,-W", syn.vocab_size)->capture_default_str();
  cmd_syn->add_option("--gamma", syn.gamma)->capture_default_str();
  cmd_syn->add_option("--beta", syn.beta)->capture_default_str();
  cmd_syn->add_option("--biterms,-N", syn.biterms)->capture_default_str();
  cmd_syn->add_option("--seed", syn.seed)->capture_default_str();
  cmd_syn->add_option("--out", syn.out_dir)->capture_default_str();
  cmd_syn->add_option("--split", syn.split, "Also write a shuffled train/test split with this train ratio");
  cmd_syn->add_option("--split-seed", syn.split_seed)->capture_default_str();

  TrainArgs tr;
  auto* cmd_tr = app.add_subcommand("train", "Fit a model and write a snapshot");
  cmd_tr->add_option("--algo", tr.algo, "cgs | obtm | ibtm | scvb0 | sdm")
      ->required()
      ->check(CLI::IsMember({"cgs", "obtm", "ibtm", "scvb0", "sdm"}));
  cmd_tr->add_option("--train", tr.train, "Training biterm stream")->required();
  cmd_tr->add_option("--vocab", tr.vocab, "Vocabulary file (sets W)");
  cmd_tr->add_option("--vocab-size,-W", tr.vocab_size, "W when no vocabulary file is given");
  cmd_tr->add_option("--topics,-K", tr.topics)->required()->check(CLI::PositiveNumber);
  cmd_tr->add_option("--gamma", tr.gamma, "Topic prior (default 50/K)");
  cmd_tr->add_option("--beta", tr.beta)->capture_default_str();
  cmd_tr->add_option("--lambda", tr.lambda, "obtm decay weight")->capture_default_str();
  cmd_tr->add_option("--rejuv-len", tr.rejuv_len, "ibtm rejuvenation length")->capture_default_str();
  cmd_tr->add_option("--tau", tr.tau, "scvb0 step offset")->capture_default_str();
  cmd_tr->add_option("--kappa", tr.kappa, "Step exponent (default 0.8 scvb0, 0.51 sdm)");
  cmd_tr->add_option("--slice-size", tr.slice_size, "obtm slice size")->capture_default_str();
  cmd_tr->add_option("--inner-iters", tr.inner_iters, "obtm Gibbs passes per slice")->capture_default_str();
  cmd_tr->add_option("--sweeps", tr.sweeps, "cgs sweeps")->capture_default_str();
  cmd_tr->add_option("--seed", tr.seed)->capture_default_str();
  cmd_tr->add_option("--test", tr.test, "Held-out biterm stream for tracing");
  cmd_tr->add_option("--checkpoints", tr.checkpoints, "Comma-separated progress fractions")->capture_default_str();
  cmd_tr->add_option("--trace", tr.trace, "Trace CSV output");
  cmd_tr->add_option("--model", tr.model, "Snapshot output")->capture_default_str();
  cmd_tr->add_flag("--per-biterm-updates", tr.per_biterm_updates, "obtm: update priors after every biterm");
  cmd_tr->add_flag("--resample-other", tr.resample_other, "sdm: draw the stand-in biterm from a reservoir");
  cmd_tr->add_flag("--streaming-counts", tr.streaming_counts, "sdm: use running word counts");
  cmd_tr->add_option("--corpus-size", tr.corpus_size, "scvb0: |B| hint (default: training stream length)");
  cmd_tr->add_flag("--running-count", tr.running_count, "scvb0: use the running biterm count for |B|");

  std::string ev_model, ev_test, ev_vocab;
  auto* cmd_ev = app.add_subcommand("eval", "Average held-out log-likelihood of a snapshot");
  cmd_ev->add_option("--model", ev_model)->required();
  cmd_ev->add_option("--test", ev_test)->required();
  cmd_ev->add_option("--vocab", ev_vocab, "Optional vocabulary to check W against");

  std::string tp_model, tp_vocab;
  std::size_t tp_n = 10;
  auto* cmd_tp = app.add_subcommand("topics", "Top words per topic");
  cmd_tp->add_option("--model", tp_model)->required();
  cmd_tp->add_option("--vocab", tp_vocab)->required();
  cmd_tp->add_option("-n", tp_n)->capture_default_str();

  DiagnoseArgs dg;
  auto* cmd_dg = app.add_subcommand("diagnose", "Divergence and noise-term checks on an SDM run");
  cmd_dg->add_option("--biterms", dg.biterms)->required();
  cmd_dg->add_option("--vocab", dg.vocab);
  cmd_dg->add_option("--vocab-size,-W", dg.vocab_size);
  cmd_dg->add_option("--topics,-K", dg.topics)->capture_default_str()->check(CLI::PositiveNumber);
  cmd_dg->add_option("--seed", dg.seed)->capture_default_str();
  cmd_dg->add_option("--samples", dg.samples)->capture_default_str()->check(CLI::Range(2, 100000000));
  cmd_dg->add_option("--words", dg.words)->capture_default_str();
  cmd_dg->add_option("--projections", dg.projections)->capture_default_str();

  BenchArgs bn;
  auto* cmd_bn = app.add_subcommand("bench", "Per-biterm cost and state size per backend");
  cmd_bn->add_option("--train", bn.train)->required();
  cmd_bn->add_option("--vocab", bn.vocab);
  cmd_bn->add_option("--vocab-size,-W", bn.vocab_size);
  cmd_bn->add_option("--algos", bn.algos)->capture_default_str();
  cmd_bn->add_option("--topics,-K", bn.topics, "Comma-separated topic counts")->capture_default_str();
  cmd_bn->add_option("--reps", bn.reps)->capture_default_str()->check(CLI::PositiveNumber);
  cmd_bn->add_option("--limit", bn.limit, "Use at most this many biterms");
  cmd_bn->add_option("--seed", bn.seed)->capture_default_str();

  std::vector<std::string> mg_inputs;
  std::string mg_out;
  auto* cmd_mg = app.add_subcommand("merge", "Mean and standard deviation across trace files");
  cmd_mg->add_option("traces", mg_inputs)->required();
  cmd_mg->add_option("--out", mg_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*cmd_pre) return run_preprocess(pre);
    if (*cmd_syn) return run_synth(syn);
    if (*cmd_tr) return run_train(tr);
    if (*cmd_ev) return run_eval(ev_model, ev_test, ev_vocab);
    if (*cmd_tp) return run_topics(tp_model, tp_vocab, tp_n);
    if (*cmd_dg) return run_diagnose(dg);
    if (*cmd_bn) return run_bench(bn);
    if (*cmd_mg) return run_merge(mg_inputs, mg_out);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const InputFormatError& e) {
    spdlog::error("{}", e.what());
    return kFormat;
  } catch (const NumericError& e) {
    spdlog::error("{}", e.what());
    return kNumeric;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kMissing;
  } catch (const ModelMismatchError& e) {
    spdlog::error("{}", e.what());
    return kMismatch;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  return kUsage;
}
