#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tgeval/metrics.hpp"
#include "tgeval/model.hpp"
#include "tgeval/rng.hpp"

namespace tgeval {

struct HyperparamEntry {
  enum class Kind { kUniformReal, kLogUniformReal, kChoice };

  std::string name;
  Kind kind = Kind::kUniformReal;
  double low = 0.0;
  double high = 1.0;
  std::vector<ParamValue> choices;
};

/// Ordered list of independently sampled hyperparameters.
///
/// JSON form: [{"name": "lr", "kind": "log_uniform_real", "low": 1e-5,
/// "high": 1e-2}, {"name": "cell", "kind": "choice", "values": ["lstm",
/// "gru"]}, ...].
struct HyperparamSpace {
  std::vector<HyperparamEntry> entries;

  /// Throws UsageError on duplicate names, empty choice lists, reversed
  /// bounds or non-positive log-uniform bounds.
  void validate() const;

  static HyperparamSpace from_json(const nlohmann::json& j);
  static HyperparamSpace load(const std::filesystem::path& path);
};

ParamMap sample_params(const HyperparamSpace& space, RngSeed seed);

nlohmann::json params_to_json(const ParamMap& params);
ParamMap params_from_json(const nlohmann::json& j);

enum class TrialStatus { kOk, kModelFailed, kMetricFailed };

std::string_view status_name(TrialStatus s);
TrialStatus parse_status(std::string_view name);

struct TrialRecord {
  std::int64_t trial_id = 0;
  std::string model;
  std::string phase = "search";  // "search" or "replicate"
  ParamMap params;
  RngSeed seed{};
  std::map<std::string, double> metrics;
  TrialStatus status = TrialStatus::kOk;
  double wall_time = 0.0;  // seconds
  std::string diagnostics;
};

inline constexpr std::string_view kTrialSchema = "trial/1";

nlohmann::json to_json(const TrialRecord& r);
/// Throws DataError on a missing or unknown schema tag or malformed fields.
TrialRecord trial_from_json(const nlohmann::json& j);

/// Append-only JSON Lines file of trial records, one per line.
class RunStore {
 public:
  /// Appends to an existing file; never truncates.
  explicit RunStore(const std::filesystem::path& path);

  void append(const TrialRecord& r);
  const std::filesystem::path& path() const { return path_; }

  static std::vector<TrialRecord> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

struct TrialSetup {
  std::size_t sample_n = 10000;
  int parallelism = 1;
  RunStore* store = nullptr;
};

/// One trial: draw samples (twice when self-BLEU is selected), score them.
/// Model failures and metric failures are captured in the record.
TrialRecord run_trial(const Model& model, const ParamMap& params, const MetricSuite& suite,
                      std::size_t sample_n, RngSeed seed, std::int64_t trial_id,
                      std::string phase = "search");

struct SearchResult {
  TrialRecord best;
  std::vector<TrialRecord> trials;  // sorted by trial_id
};

/// No trial finished with status ok.
class SearchFailed : public std::runtime_error {
 public:
  SearchFailed(std::string what, std::vector<TrialRecord> trials)
      : std::runtime_error(std::move(what)), trials_(std::move(trials)) {}

  const std::vector<TrialRecord>& trials() const { return trials_; }
  bool all_model_failures() const;

 private:
  std::vector<TrialRecord> trials_;
};

/// The best of `trials` by `objective` (lower-is-better after direction
/// normalization; ties go to the lower trial id). Throws SearchFailed when
/// no trial is ok.
TrialRecord select_best(const std::vector<TrialRecord>& trials, Metric objective);

/// `budget` trials; trial i uses seed derive_seed(master, i) for both its
/// parameter draw and its samples.
SearchResult random_search(const Model& model, const HyperparamSpace& space,
                           const MetricSuite& suite, int budget, Metric objective,
                           RngSeed master, const TrialSetup& setup);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // n-1 denominator
  std::size_t n = 0;
};

struct AggregateReport {
  std::string model;
  ParamMap best_params;
  /// Canonical metric order.
  std::vector<std::pair<std::string, MetricSummary>> metrics;
  std::vector<TrialRecord> replicas;  // sorted by trial_id
  std::size_t failed = 0;
};

MetricSummary summarize(const std::vector<double>& values);

/// Aggregates ok records (sorted by trial_id first). Throws NumericalError
/// with fewer than 2 ok replicas.
AggregateReport aggregate(std::vector<TrialRecord> replicas, std::string model,
                          ParamMap best_params);

/// Replica seeds come from a stream of `master` distinct from the search
/// stream. Requires replicas >= 2.
AggregateReport replicate_best(const Model& model, const ParamMap& best_params,
                               int replicas, const MetricSuite& suite, RngSeed master,
                               const TrialSetup& setup);

/// Re-aggregates the replicate-phase records of a run store, one report per
/// model name, sorted by name. Throws DataError when there are none.
std::vector<AggregateReport> aggregate_from_store(const std::vector<TrialRecord>& records);

enum class ReportFormat { kJson, kCsv, kMarkdown };

ReportFormat parse_report_format(std::string_view name);

/// 3 significant digits, no trailing zeros ("0.273", "0.001", "28.7").
std::string format_significant(double value);

std::string render_report(const std::vector<AggregateReport>& reports, ReportFormat format);

/// One CSV row per trial (trial_id, phase, status, params..., metrics...)
/// for plotting score distributions of a search.
std::string render_trials_csv(const std::vector<TrialRecord>& trials);

}  // namespace tgeval
