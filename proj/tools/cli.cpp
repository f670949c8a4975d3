#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "tgeval/corpus.hpp"
#include "tgeval/embedding.hpp"
#include "tgeval/errors.hpp"
#include "tgeval/frechet.hpp"
#include "tgeval/lm.hpp"
#include "tgeval/metrics.hpp"
#include "tgeval/mode_drop.hpp"
#include "tgeval/model.hpp"
#include "tgeval/ngram_metrics.hpp"
#include "tgeval/perturb.hpp"
#include "tgeval/protocol.hpp"

namespace tgeval::cli {

namespace {

using nlohmann::json;

enum class LogLevel { kError, kWarn, kInfo, kDebug };

struct Globals {
  std::uint64_t seed = 0;
  int parallelism = 1;
  bool json = false;
  std::string log_level = "warn";
};

class Session {
 public:
  Session(std::ostream& out, std::ostream& err, const Globals& globals)
      : out_(out), err_(err), globals_(globals) {}

  RngSeed seed() const { return RngSeed{globals_.seed}; }
  int parallelism() const { return globals_.parallelism; }

  void log(LogLevel level, const std::string& message) const {
    if (level > threshold()) return;
    static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
    err_ << "tgeval: " << kNames[static_cast<int>(level)] << ": " << message << '\n';
  }

  /// Human mode prints `text`; --json prints the record.
  void emit(const json& record, const std::string& text) const {
    if (globals_.json) {
      out_ << record.dump(2) << '\n';
    } else {
      out_ << text;
      if (!text.empty() && text.back() != '\n') out_ << '\n';
    }
  }

  std::ostream& out() const { return out_; }

 private:
  LogLevel threshold() const {
    if (globals_.log_level == "error") return LogLevel::kError;
    if (globals_.log_level == "info") return LogLevel::kInfo;
    if (globals_.log_level == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
  }

  std::ostream& out_;
  std::ostream& err_;
  const Globals& globals_;
};

std::string decimal(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("expected true or false, got '" + text + "'");
}

Corpus first_n(const Corpus& c, std::size_t n) {
  if (c.size() <= n) return c;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return c.select(idx);
}

json score_json(const ScoreReport& r) {
  return {{"per_token_ppl", r.per_token_ppl},
          {"total_log_prob", r.total_log_prob},
          {"token_count", r.token_count},
          {"oov_rate", r.oov_rate},
          {"sentences", r.sentences}};
}

std::string score_text(const ScoreReport& r) {
  return decimal(r.per_token_ppl);
}

json bleu_json(const BleuResult& b, const BleuConfig& cfg) {
  return {{"value", b.score},
          {"order", cfg.max_order},
          {"smoothing", cfg.smoothing == Smoothing::kNone ? "none" : "epsilon"},
          {"precisions", b.mean_precision},
          {"clipped", b.clipped},
          {"total", b.total},
          {"brevity_penalty", b.mean_brevity_penalty},
          {"sentences", b.sentences}};
}

json fd_json(const FrechetResult& fd) {
  return {{"metric", "fd"},
          {"value", fd.value},
          {"raw", fd.raw},
          {"mean_term", fd.mean_term},
          {"trace_term", fd.trace_term},
          {"jitter_applied", fd.jitter_applied},
          {"jitter", fd.jitter},
          {"eigenvalue_floor_hits", fd.eigenvalue_floor_hits}};
}

struct EmbedderOptions {
  int dim = 256;
  std::string pooling = "mean";
  std::string bigrams = "true";

  void add_to(CLI::App* sub) {
    sub->add_option("--dim", dim, "Hash embedding dimension")->capture_default_str();
    sub->add_option("--pooling", pooling, "mean or max")->capture_default_str();
    sub->add_option("--bigrams", bigrams, "Include bigram features (true/false)")
        ->capture_default_str();
  }

  HashEmbedderConfig config(RngSeed seed) const {
    return {dim, parse_pooling(pooling), parse_bool(bigrams), seed};
  }
};

struct LmOptions {
  int order = 4;
  int min_count = 1;

  void add_to(CLI::App* sub) {
    sub->add_option("--order", order, "n-gram order in [1, 5]")->capture_default_str();
    sub->add_option("--min-count", min_count, "Minimum token count before <unk>")
        ->capture_default_str();
  }
};

json metric_values_json(const MetricValues& v) {
  json j = {{"metrics", v.values}};
  if (!v.notes.empty()) j["notes"] = v.notes;
  return j;
}

std::string metric_values_text(const std::map<std::string, double>& values) {
  std::string text;
  for (auto m : kAllMetrics) {
    auto it = values.find(std::string(metric_name(m)));
    if (it == values.end()) continue;
    text += std::string(metric_name(m)) + "\t" + decimal(it->second) + "\n";
  }
  return text;
}

struct ProtocolOptions {
  std::string model = "builtin:synthetic";
  std::string reference;
  std::string heldout;
  std::string model_corpus;
  std::size_t samples_n = 10000;
  std::string runs;
  std::string metrics;
  double timeout = 3600.0;
  EmbedderOptions embedder;
  LmOptions lm;

  void add_to(CLI::App* sub, const std::string& default_metrics) {
    metrics = default_metrics;
    sub->add_option("--model", model, "builtin:synthetic or cmd:PATH")->capture_default_str();
    sub->add_option("--reference", reference, "Real reference corpus (lines)")->required();
    sub->add_option("--heldout", heldout, "Held-out real corpus for the reverse LM score");
    sub->add_option("--model-corpus", model_corpus,
                    "Corpus the builtin synthetic model resamples (default: reference)");
    sub->add_option("--samples-n", samples_n, "Samples drawn per trial")->capture_default_str();
    sub->add_option("--runs", runs, "JSON Lines run store to append trial records to");
    sub->add_option("--metrics", metrics, "Comma-separated metric selection")
        ->capture_default_str();
    sub->add_option("--timeout", timeout, "External model timeout in seconds")
        ->capture_default_str();
    embedder.add_to(sub);
    lm.add_to(sub);
  }

  struct Built {
    std::unique_ptr<Model> model;
    std::unique_ptr<MetricSuite> suite;
    std::unique_ptr<RunStore> store;
  };

  Built build(const Session& s, std::vector<Metric> selection) const {
    Built b;
    auto reference_corpus = load_corpus(reference);
    Corpus heldout_corpus = heldout.empty() ? Corpus() : load_corpus(heldout);
    Corpus source = model_corpus.empty() ? reference_corpus : load_corpus(model_corpus);
    if (samples_n < 1) throw UsageError("--samples-n must be at least 1");
    b.model = make_model(model, source, std::chrono::duration<double>(timeout));
    SuiteConfig cfg;
    cfg.embedder = embedder.config(s.seed());
    cfg.lm_order = lm.order;
    cfg.lm_min_count = lm.min_count;
    b.suite = std::make_unique<MetricSuite>(std::move(reference_corpus),
                                            std::move(heldout_corpus), std::move(selection), cfg);
    if (!runs.empty()) b.store = std::make_unique<RunStore>(runs);
    return b;
  }
};

ParamMap load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parameter file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("parameter file " + path + ": " + e.what());
  }
  if (j.is_object() && j.contains("params") && j["params"].is_object()) j = j["params"];
  return params_from_json(j);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluation toolkit for unsupervised text generation", "tgeval"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--seed", globals.seed, "Master random seed")->capture_default_str();
  app.add_option("--parallelism", globals.parallelism, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--json", globals.json, "Print machine-readable JSON results");
  app.add_option("--log-level", globals.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
      ->capture_default_str();

  Session session(out, err, globals);
  std::function<void()> action;
  const auto subcommand = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    return sub;
  };

  // bleu
  std::string samples_path;
  std::string reference_path;
  int order = 4;
  std::string smoothing = "epsilon";
  double epsilon = 1e-9;
  auto* bleu = subcommand("bleu", "Dataset-level BLEU of samples against a reference corpus");
  bleu->add_option("--samples", samples_path, "Sample corpus (lines)")->required();
  bleu->add_option("--reference", reference_path, "Reference corpus (lines)")->required();
  bleu->add_option("--order", order, "Maximum n-gram order")->capture_default_str();
  bleu->add_option("--smoothing", smoothing, "none or epsilon")->capture_default_str();
  bleu->add_option("--epsilon", epsilon, "Floor for zero precisions")->capture_default_str();
  bleu->callback([&] {
    action = [&] {
      BleuConfig cfg{order, parse_smoothing(smoothing), epsilon};
      const auto result = corpus_bleu(load_corpus(samples_path), load_corpus(reference_path), cfg);
      auto j = bleu_json(result, cfg);
      j["metric"] = "bleu";
      session.emit(j, decimal(result.score));
    };
  });

  // selfbleu
  std::string samples2_path;
  std::optional<std::uint64_t> split_seed;
  auto* selfbleu = subcommand("selfbleu", "BLEU of one sample set against a second one");
  selfbleu->add_option("--samples", samples_path, "Sample corpus (lines)")->required();
  auto* second_opt = selfbleu->add_option("--samples2", samples2_path, "Second sample corpus");
  selfbleu->add_option("--split-seed", split_seed, "Split --samples in half with this seed")
      ->excludes(second_opt);
  selfbleu->add_option("--order", order, "Maximum n-gram order")->capture_default_str();
  selfbleu->add_option("--smoothing", smoothing, "none or epsilon")->capture_default_str();
  selfbleu->callback([&] {
    action = [&] {
      BleuConfig cfg{order, parse_smoothing(smoothing), epsilon};
      const auto a = load_corpus(samples_path);
      BleuResult result;
      if (!samples2_path.empty()) {
        result = self_bleu(a, load_corpus(samples2_path), cfg);
      } else {
        const auto [half_a, half_b] =
            split_corpus(a, 0.5, RngSeed{split_seed.value_or(globals.seed)});
        result = self_bleu(half_a, half_b, cfg);
      }
      auto j = bleu_json(result, cfg);
      j["metric"] = "self_bleu";
      session.emit(j, decimal(result.score));
    };
  });

  // ngrams
  auto* ngrams = subcommand("ngrams", "Number of distinct n-grams in a corpus");
  ngrams->add_option("--samples", samples_path, "Sample corpus (lines)")->required();
  ngrams->add_option("--order", order, "n-gram order")->capture_default_str();
  ngrams->callback([&] {
    action = [&] {
      const auto count = unique_ngrams(load_corpus(samples_path), order);
      session.emit({{"metric", "unique_ngrams"}, {"order", order}, {"value", count}},
                   std::to_string(count));
    };
  });

  // embed
  std::string out_path;
  EmbedderOptions embedder;
  auto* embed = subcommand("embed", "Hash-embed a corpus into an embedding file");
  embed->add_option("--samples", samples_path, "Corpus (lines)")->required();
  embed->add_option("--out", out_path, "Output embedding file")->required();
  embedder.add_to(embed);
  embed->callback([&] {
    action = [&] {
      const auto e = hash_embed_corpus(load_corpus(samples_path), embedder.config(session.seed()));
      save_embeddings(e, out_path);
      session.emit({{"rows", e.size()}, {"dim", e.dim()}, {"out", out_path}},
                   std::to_string(e.size()) + " x " + std::to_string(e.dim()) + " -> " + out_path);
    };
  });

  // fd
  std::string real_emb, gen_emb, real_path, gen_path, embedder_name;
  std::size_t max_samples = 10000;
  auto* fd = subcommand("fd", "Frechet Distance between real and generated embeddings");
  auto* re = fd->add_option("--real-embeddings", real_emb, "Real embedding file");
  auto* ge = fd->add_option("--gen-embeddings", gen_emb, "Generated embedding file");
  auto* rc = fd->add_option("--real", real_path, "Real corpus (lines), embedded internally");
  auto* gc = fd->add_option("--gen", gen_path, "Generated corpus (lines), embedded internally");
  fd->add_option("--embedder", embedder_name, "Built-in embedder for --real/--gen (hash)");
  fd->add_option("--max-samples", max_samples, "Use at most this many sentences per corpus")
      ->capture_default_str();
  embedder.add_to(fd);
  re->needs(ge);
  ge->needs(re);
  rc->needs(gc);
  gc->needs(rc);
  re->excludes(rc);
  fd->callback([&] {
    action = [&] {
      EmbeddingSet real, gen;
      if (!real_emb.empty()) {
        real = load_embeddings(real_emb);
        gen = load_embeddings(gen_emb);
      } else if (!real_path.empty()) {
        if (!embedder_name.empty() && embedder_name != "hash") {
          throw UsageError("unknown embedder '" + embedder_name + "' (only hash is built in)");
        }
        const auto cfg = embedder.config(session.seed());
        real = hash_embed_corpus(first_n(load_corpus(real_path), max_samples), cfg);
        gen = hash_embed_corpus(first_n(load_corpus(gen_path), max_samples), cfg);
      } else {
        throw UsageError("fd needs --real-embeddings/--gen-embeddings or --real/--gen");
      }
      const auto result = frechet_distance(fit_gaussian(real), fit_gaussian(gen));
      if (result.jitter_applied) {
        session.log(LogLevel::kWarn, "near-singular covariance: jitter " +
                                         decimal(result.jitter) + " added");
      }
      auto j = fd_json(result);
      j["dim"] = real.dim();
      j["n_real"] = real.size();
      j["n_gen"] = gen.size();
      session.emit(j, decimal(result.value));
    };
  });

  // lmscore
  std::string train_path, external_path, token_counts_path, save_model_path, model_path;
  LmOptions lm;
  auto* lmscore = subcommand("lmscore", "Perplexity of samples under an LM trained on real text");
  lmscore->add_option("--train", train_path, "Real training corpus (lines)");
  lmscore->add_option("--model", model_path, "Load a saved LM instead of training");
  lmscore->add_option("--samples", samples_path, "Sample corpus (lines)");
  lmscore->add_option("--external-scores", external_path,
                      "Per-sentence natural-log probabilities (logprob<TAB>ntokens)");
  lmscore->add_option("--token-counts", token_counts_path,
                      "One token count per line, for external scores without counts");
  lmscore->add_option("--save-model", save_model_path, "Write the trained LM here");
  lm.add_to(lmscore);
  lmscore->callback([&] {
    action = [&] {
      ScoreReport report;
      if (!external_path.empty()) {
        auto scores = load_external_scores(external_path);
        if (!token_counts_path.empty()) {
          const auto counts = parse_external_scores([&] {
            std::ifstream in(token_counts_path);
            if (!in) throw DataError("cannot open " + token_counts_path);
            std::string text, line;
            while (std::getline(in, line)) text += "-0\t" + line + "\n";
            return text;
          }());
          if (counts.size() != scores.size()) {
            throw DataError("token count file has " + std::to_string(counts.size()) +
                            " lines but there are " + std::to_string(scores.size()) + " scores");
          }
          for (std::size_t i = 0; i < scores.size(); ++i) scores[i].tokens = counts[i].tokens;
        }
        report = aggregate_external_scores(scores);
      } else {
        if (samples_path.empty()) throw UsageError("lmscore needs --samples or --external-scores");
        std::optional<NGramModel> model;
        if (!model_path.empty()) {
          model = NGramModel::load(model_path);
        } else if (!train_path.empty()) {
          model = NGramModel::train(load_corpus(train_path), lm.order, lm.min_count);
        } else {
          throw UsageError("lmscore needs --train or --model");
        }
        if (!save_model_path.empty()) model->save(save_model_path);
        report = lm_score(*model, load_corpus(samples_path));
      }
      auto j = score_json(report);
      j["metric"] = "lm_score";
      session.emit(j, score_text(report));
    };
  });

  // revlmscore
  std::string heldout_path;
  auto* revlm = subcommand("revlmscore",
                           "Perplexity of held-out real text under an LM trained on samples");
  revlm->add_option("--samples", samples_path, "Sample corpus (lines)")->required();
  revlm->add_option("--heldout", heldout_path, "Held-out real corpus (lines)")->required();
  lm.add_to(revlm);
  revlm->callback([&] {
    action = [&] {
      const auto report = reverse_lm_score(load_corpus(samples_path), load_corpus(heldout_path),
                                           lm.order, lm.min_count);
      auto j = score_json(report);
      j["metric"] = "reverse_lm_score";
      session.emit(j, score_text(report));
    };
  });

  // perturb
  std::string in_path, format_name = "lines";
  double dropout = 0.0, swap = 0.0;
  auto* perturb = subcommand("perturb", "Apply word dropout and word swapping to a corpus");
  perturb->add_option("--in", in_path, "Input corpus")->required();
  perturb->add_option("--out", out_path, "Output corpus")->required();
  perturb->add_option("--dropout", dropout, "Per-token removal probability")->capture_default_str();
  perturb->add_option("--swap", swap, "Fraction of positions shuffled per sentence")
      ->capture_default_str();
  perturb->add_option("--format", format_name, "lines or topic_tsv")->capture_default_str();
  perturb->callback([&] {
    action = [&] {
      const auto format = parse_corpus_format(format_name);
      const auto input = load_corpus(in_path, format);
      const auto dropped = word_dropout(input, dropout, derive_seed(session.seed(), 1));
      const auto result = word_swap(dropped, swap, derive_seed(session.seed(), 2));
      save_corpus(result, out_path, format);
      session.emit({{"sentences", result.size()},
                    {"tokens_in", input.token_count()},
                    {"tokens_out", result.token_count()},
                    {"out", out_path}},
                   std::to_string(result.size()) + " sentences -> " + out_path);
    };
  });

  // modedrop
  std::string mode_metrics = "fd,bleu,revlm";
  std::size_t keep_k = 1;
  bool sweep = false;
  int repeats = 5;
  std::size_t sample_n = 2000;
  auto* modedrop = subcommand("modedrop", "Score samples restricted to a random subset of topics");
  modedrop->add_option("--train", train_path, "Topic-labelled training corpus (topic<TAB>text)")
      ->required();
  modedrop->add_option("--reference", reference_path, "Full-topic reference corpus")->required();
  auto* keep_opt = modedrop->add_option("--keep-k", keep_k, "Number of topics kept");
  modedrop->add_flag("--sweep", sweep, "Evaluate every keep-k from 1 to the topic count")
      ->excludes(keep_opt);
  modedrop->add_option("--repeats", repeats, "Repeats averaged per keep-k")->capture_default_str();
  modedrop->add_option("--sample-n", sample_n, "Sample set size per repeat")->capture_default_str();
  modedrop->add_option("--metrics", mode_metrics, "Comma-separated metric selection")
      ->capture_default_str();
  embedder.add_to(modedrop);
  lm.add_to(modedrop);
  modedrop->callback([&] {
    action = [&] {
      const auto train = load_corpus(train_path, CorpusFormat::kTopicTsv);
      SuiteConfig cfg;
      cfg.embedder = embedder.config(session.seed());
      cfg.lm_order = lm.order;
      cfg.lm_min_count = lm.min_count;
      MetricSuite suite(load_corpus(reference_path), Corpus(), parse_metric_list(mode_metrics), cfg);
      std::vector<std::size_t> ks;
      if (sweep) {
        for (std::size_t k = 1; k <= train.topic_set().size(); ++k) ks.push_back(k);
      } else {
        ks.push_back(keep_k);
      }
      json rows = json::array();
      std::string text = "keep_k";
      for (auto m : suite.metrics()) text += "\t" + std::string(metric_name(m));
      text += "\n";
      for (auto k : ks) {
        ModeDropOptions options{k, repeats, sample_n, session.seed(), session.parallelism()};
        const auto report = mode_drop_eval(train, suite, options);
        json reps = json::array();
        for (const auto& r : report.repeats) {
          if (r.with_replacement) {
            session.log(LogLevel::kWarn, "keep_k=" + std::to_string(k) +
                                             ": filtered corpus smaller than sample size, "
                                             "sampled with replacement");
          }
          auto rj = metric_values_json(r.metrics);
          rj["topics"] = r.topics;
          rj["with_replacement"] = r.with_replacement;
          reps.push_back(std::move(rj));
        }
        rows.push_back({{"keep_k", k}, {"mean", report.mean}, {"repeats", reps}});
        text += std::to_string(k);
        for (auto m : suite.metrics()) {
          text += "\t" + decimal(report.mean.at(std::string(metric_name(m))));
        }
        text += "\n";
      }
      session.emit({{"sample_n", sample_n}, {"results", rows}}, text);
    };
  });

  // tune
  ProtocolOptions tune_opts;
  std::string space_path, objective_name = "fd", best_out, trials_csv;
  int budget = 100;
  auto* tune = subcommand("tune", "Random search over a hyperparameter space");
  tune_opts.add_to(tune, "fd");
  tune->add_option("--space", space_path, "Hyperparameter space (JSON array)")->required();
  tune->add_option("--budget", budget, "Number of trials")->capture_default_str();
  tune->add_option("--objective", objective_name, "Metric to optimize")->capture_default_str();
  tune->add_option("--best-out", best_out, "Write the best parameters here (JSON)");
  tune->add_option("--trials-csv", trials_csv, "Write one CSV row per trial here");
  tune->callback([&] {
    action = [&] {
      const auto objective = parse_metric(objective_name);
      auto selection = parse_metric_list(tune_opts.metrics);
      if (std::ranges::find(selection, objective) == selection.end()) {
        selection.push_back(objective);
      }
      const auto space = HyperparamSpace::load(space_path);
      auto built = tune_opts.build(session, selection);
      TrialSetup setup{tune_opts.samples_n, session.parallelism(), built.store.get()};
      SearchResult result;
      try {
        result = random_search(*built.model, space, *built.suite, budget, objective,
                               session.seed(), setup);
      } catch (const SearchFailed& e) {
        if (!trials_csv.empty()) write_text(trials_csv, render_trials_csv(e.trials()));
        for (const auto& t : e.trials()) {
          session.log(LogLevel::kInfo, "trial " + std::to_string(t.trial_id) + ": " +
                                           std::string(status_name(t.status)) + ": " +
                                           t.diagnostics);
        }
        throw;
      }
      std::size_t failed = 0;
      for (const auto& t : result.trials) {
        if (t.status != TrialStatus::kOk) {
          ++failed;
          session.log(LogLevel::kWarn, "trial " + std::to_string(t.trial_id) + " " +
                                           std::string(status_name(t.status)) + ": " +
                                           t.diagnostics);
        }
      }
      if (!best_out.empty()) write_text(best_out, params_to_json(result.best.params).dump(2) + "\n");
      if (!trials_csv.empty()) write_text(trials_csv, render_trials_csv(result.trials));
      json j = {{"best", to_json(result.best)},
                {"objective", objective_name},
                {"trials", result.trials.size()},
                {"failed", failed}};
      std::string text = "best trial " + std::to_string(result.best.trial_id) + " " +
                         params_to_json(result.best.params).dump() + "\n" +
                         metric_values_text(result.best.metrics);
      session.emit(j, text);
    };
  });

  // replicate
  ProtocolOptions rep_opts;
  std::string params_path, report_format = "markdown";
  int replicas = 7;
  auto* replicate = subcommand("replicate", "Rerun the best parameters and report mean ± std");
  rep_opts.add_to(replicate, "fd,bleu4,self_bleu4,unique_4grams,lm_score,reverse_lm_score");
  replicate->add_option("--params", params_path, "Best parameters (JSON object)")->required();
  replicate->add_option("--replicas", replicas, "Number of reruns")->capture_default_str();
  replicate->add_option("--format", report_format, "markdown, csv or json")->capture_default_str();
  replicate->callback([&] {
    action = [&] {
      const auto format = parse_report_format(report_format);
      auto built = rep_opts.build(session, parse_metric_list(rep_opts.metrics));
      TrialSetup setup{rep_opts.samples_n, session.parallelism(), built.store.get()};
      const auto report = replicate_best(*built.model, load_params_file(params_path), replicas,
                                         *built.suite, session.seed(), setup);
      if (report.failed > 0) {
        session.log(LogLevel::kWarn, std::to_string(report.failed) + " replicas failed");
      }
      session.emit(json::parse(render_report({report}, ReportFormat::kJson)),
                   render_report({report}, format));
    };
  });

  // report
  std::string runs_path;
  auto* report_cmd = subcommand("report", "Aggregate replicate records of a run store");
  report_cmd->add_option("--runs", runs_path, "JSON Lines run store")->required();
  report_cmd->add_option("--format", report_format, "markdown, csv or json")
      ->capture_default_str();
  report_cmd->add_option("--trials-csv", trials_csv, "Also write every record as CSV here");
  report_cmd->callback([&] {
    action = [&] {
      const auto format = parse_report_format(report_format);
      const auto records = RunStore::read(runs_path);
      if (!trials_csv.empty()) write_text(trials_csv, render_trials_csv(records));
      const auto reports = aggregate_from_store(records);
      session.emit(json::parse(render_report(reports, ReportFormat::kJson)),
                   render_report(reports, format));
    };
  });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "tgeval: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (action) action();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "tgeval: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "tgeval: usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const SearchFailed& e) {
    err << "tgeval: " << e.what() << '\n';
    return e.all_model_failures() ? kModelError : kNumericalError;
  } catch (const ModelError& e) {
    err << "tgeval: model failure: " << e.what() << '\n';
    return kModelError;
  } catch (const NumericalError& e) {
    err << "tgeval: numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DataError& e) {
    err << "tgeval: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "tgeval: error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace tgeval::cli
