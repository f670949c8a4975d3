#include "tgeval/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "tgeval/errors.hpp"
#include "tgeval/parallel.hpp"

namespace tgeval {

namespace {

using nlohmann::json;

constexpr std::uint64_t kReplicateStream = 0x7265706C69636174ULL;

ParamValue param_from_json(const json& v, const std::string& name) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw DataError("parameter '" + name + "' must be a number or a string");
}

std::string display_name(std::string_view metric) {
  if (metric == "fd") return "FD";
  if (metric == "bleu4") return "BLEU4";
  if (metric == "self_bleu4") return "Self-BLEU4";
  if (metric == "unique_4grams") return "Unique 4grams";
  if (metric == "lm_score") return "LM score";
  if (metric == "reverse_lm_score") return "Reverse LM score";
  return std::string(metric);
}

std::string full_precision(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string param_text(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return full_precision(*d);
  return std::get<std::string>(v);
}

// Metric names present across reports, canonical order.
std::vector<std::string> report_columns(const std::vector<AggregateReport>& reports) {
  std::set<std::string> present;
  for (const auto& r : reports) {
    for (const auto& [name, summary] : r.metrics) present.insert(name);
  }
  std::vector<std::string> columns;
  for (auto m : kAllMetrics) {
    const std::string name(metric_name(m));
    if (present.contains(name)) columns.push_back(name);
  }
  return columns;
}

const MetricSummary* find_summary(const AggregateReport& r, const std::string& name) {
  for (const auto& [metric, summary] : r.metrics) {
    if (metric == name) return &summary;
  }
  return nullptr;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void HyperparamSpace::validate() const {
  std::set<std::string> names;
  for (const auto& e : entries) {
    if (e.name.empty()) throw UsageError("hyperparameter with empty name");
    if (!names.insert(e.name).second) {
      throw UsageError("duplicate hyperparameter '" + e.name + "'");
    }
    switch (e.kind) {
      case HyperparamEntry::Kind::kChoice:
        if (e.choices.empty()) throw UsageError("choice list of '" + e.name + "' is empty");
        break;
      case HyperparamEntry::Kind::kLogUniformReal:
        if (!(e.low > 0.0)) {
          throw UsageError("log-uniform bounds of '" + e.name + "' must be positive");
        }
        [[fallthrough]];
      case HyperparamEntry::Kind::kUniformReal:
        if (!(std::isfinite(e.low) && std::isfinite(e.high) && e.low <= e.high)) {
          throw UsageError("bounds of '" + e.name + "' must be finite with low <= high");
        }
        break;
    }
  }
}

HyperparamSpace HyperparamSpace::from_json(const json& j) {
  if (!j.is_array()) throw UsageError("hyperparameter space must be a JSON array");
  HyperparamSpace space;
  for (const auto& item : j) {
    HyperparamEntry e;
    try {
      e.name = item.at("name").get<std::string>();
      const auto kind = item.at("kind").get<std::string>();
      if (kind == "uniform_real" || kind == "log_uniform_real") {
        e.kind = kind == "uniform_real" ? HyperparamEntry::Kind::kUniformReal
                                        : HyperparamEntry::Kind::kLogUniformReal;
        e.low = item.at("low").get<double>();
        e.high = item.at("high").get<double>();
      } else if (kind == "choice") {
        e.kind = HyperparamEntry::Kind::kChoice;
        for (const auto& v : item.at("values")) e.choices.push_back(param_from_json(v, e.name));
      } else {
        throw UsageError("unknown hyperparameter kind '" + kind + "'");
      }
    } catch (const json::exception& ex) {
      throw UsageError(std::string("malformed hyperparameter entry: ") + ex.what());
    } catch (const DataError& ex) {
      throw UsageError(ex.what());
    }
    space.entries.push_back(std::move(e));
  }
  space.validate();
  return space;
}

HyperparamSpace HyperparamSpace::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open hyperparameter space " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError("hyperparameter space " + path.string() + ": " + e.what());
  }
}

ParamMap sample_params(const HyperparamSpace& space, RngSeed seed) {
  space.validate();
  SplitMix64 rng(seed);
  ParamMap params;
  for (const auto& e : space.entries) {
    switch (e.kind) {
      case HyperparamEntry::Kind::kUniformReal:
        params[e.name] = rng.uniform(e.low, e.high);
        break;
      case HyperparamEntry::Kind::kLogUniformReal:
        params[e.name] = std::exp(rng.uniform(std::log(e.low), std::log(e.high)));
        break;
      case HyperparamEntry::Kind::kChoice:
        params[e.name] = e.choices[rng.below(e.choices.size())];
        break;
    }
  }
  return params;
}

json params_to_json(const ParamMap& params) {
  json j = json::object();
  for (const auto& [name, value] : params) {
    std::visit([&](const auto& v) { j[name] = v; }, value);
  }
  return j;
}

ParamMap params_from_json(const json& j) {
  if (!j.is_object()) throw DataError("parameters must be a JSON object");
  ParamMap params;
  for (const auto& [name, value] : j.items()) params[name] = param_from_json(value, name);
  return params;
}

std::string_view status_name(TrialStatus s) {
  switch (s) {
    case TrialStatus::kOk: return "ok";
    case TrialStatus::kModelFailed: return "model_failed";
    case TrialStatus::kMetricFailed: return "metric_failed";
  }
  return "unknown";
}

TrialStatus parse_status(std::string_view name) {
  for (auto s : {TrialStatus::kOk, TrialStatus::kModelFailed, TrialStatus::kMetricFailed}) {
    if (status_name(s) == name) return s;
  }
  throw DataError("unknown trial status '" + std::string(name) + "'");
}

json to_json(const TrialRecord& r) {
  json j;
  j["schema"] = kTrialSchema;
  j["trial_id"] = r.trial_id;
  j["model"] = r.model;
  j["phase"] = r.phase;
  j["params"] = params_to_json(r.params);
  j["seed"] = r.seed.value;
  j["metrics"] = r.metrics;
  j["status"] = status_name(r.status);
  j["wall_time"] = r.wall_time;
  j["diagnostics"] = r.diagnostics;
  return j;
}

TrialRecord trial_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kTrialSchema) {
      throw DataError("unsupported trial schema '" + j.at("schema").get<std::string>() + "'");
    }
    TrialRecord r;
    r.trial_id = j.at("trial_id").get<std::int64_t>();
    r.model = j.value("model", std::string());
    r.phase = j.at("phase").get<std::string>();
    r.params = params_from_json(j.at("params"));
    r.seed = RngSeed{j.at("seed").get<std::uint64_t>()};
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    r.status = parse_status(j.at("status").get<std::string>());
    r.wall_time = j.at("wall_time").get<double>();
    r.diagnostics = j.value("diagnostics", std::string());
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed trial record: ") + e.what());
  }
}

RunStore::RunStore(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::app) {
  if (!out_) throw DataError("cannot open run store " + path.string());
}

void RunStore::append(const TrialRecord& r) {
  const auto line = to_json(r).dump();
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw DataError("failed appending to run store " + path_.string());
}

std::vector<TrialRecord> RunStore::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open run store " + path.string());
  std::vector<TrialRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(trial_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DataError("run store line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("run store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

TrialRecord run_trial(const Model& model, const ParamMap& params, const MetricSuite& suite,
                      std::size_t sample_n, RngSeed seed, std::int64_t trial_id,
                      std::string phase) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord r;
  r.trial_id = trial_id;
  r.model = model.name();
  r.phase = std::move(phase);
  r.params = params;
  r.seed = seed;

  Corpus samples;
  Corpus second;
  const bool two_sets = suite.wants(Metric::kSelfBleu4);
  try {
    samples = model.generate(params, derive_seed(seed, 1), sample_n);
    if (two_sets) second = model.generate(params, derive_seed(seed, 2), sample_n);
  } catch (const std::exception& e) {
    r.status = TrialStatus::kModelFailed;
    r.diagnostics = e.what();
    r.wall_time = seconds_since(start);
    return r;
  }

  try {
    auto values = suite.evaluate(samples, two_sets ? &second : nullptr);
    for (const auto& [name, value] : values.values) {
      if (!std::isfinite(value)) throw NumericalError("metric " + name + " is not finite");
    }
    r.metrics = std::move(values.values);
    for (const auto& note : values.notes) {
      if (!r.diagnostics.empty()) r.diagnostics += "; ";
      r.diagnostics += note;
    }
  } catch (const std::exception& e) {
    r.status = TrialStatus::kMetricFailed;
    r.metrics.clear();
    r.diagnostics = e.what();
  }
  r.wall_time = seconds_since(start);
  return r;
}

bool SearchFailed::all_model_failures() const {
  return std::ranges::all_of(trials_, [](const TrialRecord& r) {
    return r.status == TrialStatus::kModelFailed;
  });
}

TrialRecord select_best(const std::vector<TrialRecord>& trials, Metric objective) {
  const std::string name(metric_name(objective));
  const TrialRecord* best = nullptr;
  double best_value = 0.0;
  for (const auto& t : trials) {
    if (t.status != TrialStatus::kOk) continue;
    auto it = t.metrics.find(name);
    if (it == t.metrics.end()) continue;
    const double value = objective_value(objective, it->second);
    if (best == nullptr || value < best_value ||
        (value == best_value && t.trial_id < best->trial_id)) {
      best = &t;
      best_value = value;
    }
  }
  if (best == nullptr) {
    throw SearchFailed("search failed: none of " + std::to_string(trials.size()) +
                           " trials produced an ok '" + name + "' value",
                       trials);
  }
  return *best;
}

SearchResult random_search(const Model& model, const HyperparamSpace& space,
                           const MetricSuite& suite, int budget, Metric objective,
                           RngSeed master, const TrialSetup& setup) {
  if (budget < 1) throw UsageError("search budget must be at least 1");
  if (!suite.wants(objective)) {
    throw UsageError("objective '" + std::string(metric_name(objective)) +
                     "' is not among the selected metrics");
  }
  space.validate();
  std::vector<TrialRecord> trials(static_cast<std::size_t>(budget));
  parallel_for(trials.size(), setup.parallelism, [&](std::size_t i) {
    const auto seed = derive_seed(master, i);
    const auto params = sample_params(space, derive_seed(seed, 0));
    trials[i] = run_trial(model, params, suite, setup.sample_n, seed,
                          static_cast<std::int64_t>(i), "search");
    if (setup.store != nullptr) setup.store->append(trials[i]);
  });
  SearchResult result;
  result.best = select_best(trials, objective);
  result.trials = std::move(trials);
  return result;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double squares = 0.0;
    for (double v : values) squares += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(squares / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateReport aggregate(std::vector<TrialRecord> replicas, std::string model,
                          ParamMap best_params) {
  std::ranges::sort(replicas, {}, &TrialRecord::trial_id);
  AggregateReport report;
  report.model = std::move(model);
  report.best_params = std::move(best_params);
  std::size_t ok = 0;
  for (const auto& r : replicas) {
    if (r.status == TrialStatus::kOk) {
      ++ok;
    } else {
      ++report.failed;
    }
  }
  if (ok < 2) {
    throw NumericalError("need at least 2 ok replicas to aggregate, got " + std::to_string(ok));
  }
  for (auto m : kAllMetrics) {
    const std::string name(metric_name(m));
    std::vector<double> values;
    for (const auto& r : replicas) {
      if (r.status != TrialStatus::kOk) continue;
      auto it = r.metrics.find(name);
      if (it != r.metrics.end()) values.push_back(it->second);
    }
    if (!values.empty()) report.metrics.emplace_back(name, summarize(values));
  }
  report.replicas = std::move(replicas);
  return report;
}

AggregateReport replicate_best(const Model& model, const ParamMap& best_params,
                               int replicas, const MetricSuite& suite, RngSeed master,
                               const TrialSetup& setup) {
  if (replicas < 2) throw UsageError("replicate needs at least 2 replicas");
  const RngSeed stream{mix64(master.value ^ kReplicateStream)};
  std::vector<TrialRecord> records(static_cast<std::size_t>(replicas));
  parallel_for(records.size(), setup.parallelism, [&](std::size_t i) {
    records[i] = run_trial(model, best_params, suite, setup.sample_n, derive_seed(stream, i),
                           static_cast<std::int64_t>(i), "replicate");
    if (setup.store != nullptr) setup.store->append(records[i]);
  });
  return aggregate(std::move(records), model.name(), best_params);
}

std::vector<AggregateReport> aggregate_from_store(const std::vector<TrialRecord>& records) {
  std::map<std::string, std::vector<TrialRecord>> by_model;
  for (const auto& r : records) {
    if (r.phase == "replicate") by_model[r.model].push_back(r);
  }
  if (by_model.empty()) throw DataError("run store holds no replicate records");
  std::vector<AggregateReport> reports;
  for (auto& [model, group] : by_model) {
    std::ranges::sort(group, {}, &TrialRecord::trial_id);
    auto params = group.front().params;
    reports.push_back(aggregate(std::move(group), model, std::move(params)));
  }
  return reports;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  throw UsageError("unknown report format '" + std::string(name) + "'");
}

std::string format_significant(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", value);
  return buf;
}

std::string render_report(const std::vector<AggregateReport>& reports, ReportFormat format) {
  if (reports.empty()) throw UsageError("nothing to report");
  const auto columns = report_columns(reports);
  std::ostringstream out;
  switch (format) {
    case ReportFormat::kMarkdown: {
      out << "| Model |";
      for (const auto& c : columns) {
        out << ' ' << display_name(c) << ' '
            << (higher_is_better(parse_metric(c)) ? "↑" : "↓") << " |";
      }
      out << "\n|---|";
      for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
      out << '\n';
      for (const auto& r : reports) {
        out << "| " << r.model << " |";
        for (const auto& c : columns) {
          const auto* s = find_summary(r, c);
          if (s == nullptr) {
            out << " - |";
          } else {
            out << ' ' << format_significant(s->mean) << " ± " << format_significant(s->std)
                << " |";
          }
        }
        out << '\n';
      }
      break;
    }
    case ReportFormat::kCsv: {
      out << "model,replicas,failed";
      for (const auto& c : columns) out << ',' << c << "_mean," << c << "_std";
      out << '\n';
      for (const auto& r : reports) {
        out << csv_field(r.model) << ',' << r.replicas.size() - r.failed << ',' << r.failed;
        for (const auto& c : columns) {
          const auto* s = find_summary(r, c);
          if (s == nullptr) {
            out << ",,";
          } else {
            out << ',' << full_precision(s->mean) << ',' << full_precision(s->std);
          }
        }
        out << '\n';
      }
      break;
    }
    case ReportFormat::kJson: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["model"] = r.model;
        j["best_params"] = params_to_json(r.best_params);
        j["failed"] = r.failed;
        auto metrics = nlohmann::ordered_json::object();
        for (const auto& [name, s] : r.metrics) {
          metrics[name] = {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
        }
        j["metrics"] = std::move(metrics);
        auto replicas = nlohmann::ordered_json::array();
        for (const auto& rec : r.replicas) replicas.push_back(nlohmann::ordered_json::parse(to_json(rec).dump()));
        j["replicas"] = std::move(replicas);
        arr.push_back(std::move(j));
      }
      out << arr.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

std::string render_trials_csv(const std::vector<TrialRecord>& trials) {
  std::set<std::string> param_names;
  std::set<std::string> metric_names;
  for (const auto& t : trials) {
    for (const auto& [name, v] : t.params) param_names.insert(name);
    for (const auto& [name, v] : t.metrics) metric_names.insert(name);
  }
  std::vector<std::string> metrics;
  for (auto m : kAllMetrics) {
    if (metric_names.contains(std::string(metric_name(m)))) metrics.emplace_back(metric_name(m));
  }
  std::ostringstream out;
  out << "trial_id,phase,status";
  for (const auto& p : param_names) out << ',' << csv_field(p);
  for (const auto& m : metrics) out << ',' << m;
  out << '\n';
  auto sorted = trials;
  std::ranges::stable_sort(sorted, [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.phase, a.trial_id) < std::tie(b.phase, b.trial_id);
  });
  for (const auto& t : sorted) {
    out << t.trial_id << ',' << t.phase << ',' << status_name(t.status);
    for (const auto& p : param_names) {
      auto it = t.params.find(p);
      out << ',' << (it == t.params.end() ? "" : csv_field(param_text(it->second)));
    }
    for (const auto& m : metrics) {
      auto it = t.metrics.find(m);
      out << ',' << (it == t.metrics.end() ? "" : full_precision(it->second));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace tgeval
