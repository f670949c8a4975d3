#include "tgeval/lm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tgeval/errors.hpp"

namespace tgeval {

namespace {

constexpr std::string_view kSerialMagic = "tgeval-kn-lm";
constexpr int kSerialVersion = 1;
constexpr double kFallbackDiscount = 0.75;

void append_id(std::string& key, std::uint32_t id) {
  char bytes[sizeof id];
  std::memcpy(bytes, &id, sizeof id);
  key.append(bytes, sizeof id);
}

std::string pack(std::span<const std::uint32_t> ids) {
  std::string key;
  key.reserve(ids.size() * sizeof(std::uint32_t));
  for (auto id : ids) append_id(key, id);
  return key;
}

std::vector<std::uint32_t> unpack(std::string_view key) {
  std::vector<std::uint32_t> ids(key.size() / sizeof(std::uint32_t));
  std::memcpy(ids.data(), key.data(), key.size());
  return ids;
}

bool is_reserved(std::string_view token) {
  return token == kUnk || token == kBos || token == kEos;
}

}  // namespace

NGramModel NGramModel::train(const Corpus& corpus, int order, int min_count) {
  if (order < 1 || order > kMaxOrder) {
    throw UsageError("LM order must lie in [1, " + std::to_string(kMaxOrder) + "]");
  }
  if (min_count < 1) throw UsageError("LM min count must be at least 1");
  if (corpus.empty()) throw DataError("cannot train a language model on an empty corpus");

  std::unordered_map<std::string, std::int64_t> frequency;
  for (const auto& s : corpus.sentences()) {
    for (const auto& t : s.tokens) ++frequency[t];
  }
  std::set<std::string> vocab{std::string(kUnk), std::string(kBos), std::string(kEos)};
  for (const auto& [token, count] : frequency) {
    if (count >= min_count && !is_reserved(token)) vocab.insert(token);
  }

  NGramModel model;
  model.order_ = order;
  model.min_count_ = min_count;
  model.set_vocab({vocab.begin(), vocab.end()});

  const auto n = static_cast<std::size_t>(order);
  std::unordered_map<Key, std::int64_t> top;
  std::vector<std::uint32_t> padded;
  for (const auto& s : corpus.sentences()) {
    padded.assign(n - 1, model.bos_);
    for (const auto& t : s.tokens) padded.push_back(model.id_of(t));
    padded.push_back(model.eos_);
    for (std::size_t end = n - 1; end < padded.size(); ++end) {
      ++top[pack(std::span(padded).subspan(end + 1 - n, n))];
    }
  }
  model.build(std::move(top));
  return model;
}

void NGramModel::set_vocab(std::vector<std::string> vocab) {
  vocab_ = std::move(vocab);
  ids_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    ids_.emplace(vocab_[i], static_cast<std::uint32_t>(i));
  }
  unk_ = ids_.at(std::string(kUnk));
  bos_ = ids_.at(std::string(kBos));
  eos_ = ids_.at(std::string(kEos));
}

void NGramModel::build(std::unordered_map<Key, std::int64_t> top_counts) {
  const auto n = static_cast<std::size_t>(order_);
  counts_.assign(n, {});
  contexts_.assign(n, {});
  discounts_.assign(n, kFallbackDiscount);
  counts_[n - 1] = std::move(top_counts);

  // Each distinct (k+1)-gram adds one distinct left neighbour to its suffix.
  for (std::size_t k = n - 1; k >= 1; --k) {
    for (const auto& [key, count] : counts_[k]) {
      ++counts_[k - 1][key.substr(sizeof(std::uint32_t))];
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    for (const auto& [key, count] : counts_[k]) {
      if (count == 1) ++n1;
      if (count == 2) ++n2;
      auto& ctx = contexts_[k][key.substr(0, key.size() - sizeof(std::uint32_t))];
      ctx.total += count;
      ++ctx.distinct;
    }
    if (n1 > 0 && n2 > 0) {
      discounts_[k] = static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
    }
  }
}

std::vector<std::string> NGramModel::predictable_vocab() const {
  std::vector<std::string> out;
  for (const auto& t : vocab_) {
    if (t != kBos) out.push_back(t);
  }
  return out;
}

std::uint32_t NGramModel::id_of(std::string_view token) const {
  if (token == kBos || token == kEos) return unk_;
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? unk_ : it->second;
}

bool NGramModel::is_unknown(std::string_view token) const {
  return id_of(token) == unk_;
}

double NGramModel::prob_ids(std::span<const std::uint32_t> history,
                            std::uint32_t word) const {
  const double uniform = 1.0 / static_cast<double>(vocab_.size() - 1);
  std::string key;
  double p = uniform;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(order_); ++k) {
    // History of length k-1 taken from the right end of `history`.
    const auto ctx_ids = history.subspan(history.size() - (k - 1));
    const auto& contexts = contexts_[k - 1];
    auto ctx = contexts.find(pack(ctx_ids));
    if (ctx == contexts.end()) continue;
    key = pack(ctx_ids);
    append_id(key, word);
    auto hit = counts_[k - 1].find(key);
    const double count = hit == counts_[k - 1].end() ? 0.0 : static_cast<double>(hit->second);
    const double d = discounts_[k - 1];
    const double total = static_cast<double>(ctx->second.total);
    p = std::max(count - d, 0.0) / total +
        d * static_cast<double>(ctx->second.distinct) / total * p;
  }
  return p;
}

double NGramModel::prob(std::span<const std::string> history,
                        std::string_view word) const {
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::vector<std::uint32_t> ids(width, bos_);
  const std::size_t take = std::min(width, history.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto& t = history[history.size() - take + i];
    ids[width - take + i] = t == kBos ? bos_ : t == kEos ? eos_ : id_of(t);
  }
  const auto word_id = word == kEos ? eos_ : id_of(word);
  return prob_ids(ids, word_id);
}

double NGramModel::log_prob_sentence(const Sentence& s) const {
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::vector<std::uint32_t> padded(width, bos_);
  for (const auto& t : s.tokens) padded.push_back(id_of(t));
  padded.push_back(eos_);
  double total = 0.0;
  for (std::size_t i = width; i < padded.size(); ++i) {
    total += std::log(prob_ids(std::span(padded).subspan(i - width, width), padded[i]));
  }
  return total;
}

std::vector<std::vector<std::string>> NGramModel::observed_histories() const {
  std::vector<std::vector<std::string>> out;
  for (const auto& [key, stats] : contexts_.back()) {
    std::vector<std::string> tokens;
    for (auto id : unpack(key)) tokens.push_back(vocab_[id]);
    out.push_back(std::move(tokens));
  }
  std::ranges::sort(out);
  return out;
}

std::string NGramModel::serialize() const {
  std::map<std::string, std::int64_t> sorted;
  for (const auto& [key, count] : counts_.back()) {
    std::string line;
    for (auto id : unpack(key)) {
      if (!line.empty()) line += ' ';
      line += vocab_[id];
    }
    sorted.emplace(std::move(line), count);
  }
  std::ostringstream out;
  out << kSerialMagic << ' ' << kSerialVersion << '\n'
      << "order " << order_ << '\n'
      << "min_count " << min_count_ << '\n'
      << "vocab " << vocab_.size() << '\n';
  for (const auto& t : vocab_) out << t << '\n';
  out << "ngrams " << sorted.size() << '\n';
  for (const auto& [ngram, count] : sorted) out << ngram << '\t' << count << '\n';
  return out.str();
}

NGramModel NGramModel::deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  const auto fail = [](const std::string& what) -> DataError {
    return DataError("malformed language model dump: " + what);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kSerialMagic) throw fail("bad magic line");
  if (version != kSerialVersion) {
    throw fail("unsupported version " + std::to_string(version));
  }
  std::string field;
  NGramModel model;
  std::size_t vocab_size = 0;
  if (!(in >> field >> model.order_) || field != "order") throw fail("missing order");
  if (model.order_ < 1 || model.order_ > kMaxOrder) throw fail("order out of range");
  if (!(in >> field >> model.min_count_) || field != "min_count") throw fail("missing min_count");
  if (!(in >> field >> vocab_size) || field != "vocab") throw fail("missing vocab");
  std::vector<std::string> vocab(vocab_size);
  for (auto& t : vocab) {
    if (!(in >> t)) throw fail("truncated vocabulary");
  }
  for (auto reserved : {kUnk, kBos, kEos}) {
    if (!std::ranges::binary_search(vocab, std::string(reserved))) {
      throw fail("vocabulary lacks " + std::string(reserved));
    }
  }
  if (!std::ranges::is_sorted(vocab)) throw fail("vocabulary is not sorted");
  model.set_vocab(std::move(vocab));

  std::size_t ngrams = 0;
  if (!(in >> field >> ngrams) || field != "ngrams") throw fail("missing ngrams");
  std::unordered_map<Key, std::int64_t> top;
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; i < ngrams; ++i) {
    if (!std::getline(in, line)) throw fail("truncated n-gram table");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw fail("n-gram line without count");
    const auto tokens = tokenize(std::string_view(line).substr(0, tab));
    if (static_cast<int>(tokens.size()) != model.order_) throw fail("n-gram of wrong order");
    std::vector<std::uint32_t> ids;
    for (const auto& t : tokens.tokens) {
      auto it = model.ids_.find(t);
      if (it == model.ids_.end()) throw fail("n-gram token '" + t + "' not in vocabulary");
      ids.push_back(it->second);
    }
    std::int64_t count = 0;
    const auto* begin = line.data() + tab + 1;
    const auto [end, ec] = std::from_chars(begin, line.data() + line.size(), count);
    if (ec != std::errc() || count < 1) throw fail("bad n-gram count");
    top[pack(ids)] = count;
  }
  model.build(std::move(top));
  return model;
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write language model " + path.string());
  out << serialize();
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open language model " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

ScoreReport lm_score(const NGramModel& model_trained_on_real, const Corpus& samples) {
  if (samples.empty()) throw DataError("cannot score an empty sample corpus");
  ScoreReport report;
  report.sentences = samples.size();
  std::int64_t real_tokens = 0;
  std::int64_t oov = 0;
  for (const auto& s : samples.sentences()) {
    report.total_log_prob += model_trained_on_real.log_prob_sentence(s);
    report.token_count += static_cast<std::int64_t>(s.size()) + 1;
    real_tokens += static_cast<std::int64_t>(s.size());
    for (const auto& t : s.tokens) {
      if (model_trained_on_real.is_unknown(t)) ++oov;
    }
  }
  report.per_token_ppl =
      std::exp(-report.total_log_prob / static_cast<double>(report.token_count));
  report.oov_rate = real_tokens > 0
                        ? static_cast<double>(oov) / static_cast<double>(real_tokens)
                        : 0.0;
  return report;
}

ScoreReport reverse_lm_score(const Corpus& samples, const Corpus& real_heldout,
                             int order, int min_count) {
  if (real_heldout.empty()) throw DataError("held-out corpus is empty");
  return lm_score(NGramModel::train(samples, order, min_count), real_heldout);
}

std::vector<ExternalScore> parse_external_scores(std::string_view text) {
  std::vector<ExternalScore> scores;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const auto where = "external scores line " + std::to_string(line_no);
    const auto tab = line.find('\t');
    const auto value_text = line.substr(0, tab);
    ExternalScore score;
    const auto [value_end, value_ec] = std::from_chars(
        value_text.data(), value_text.data() + value_text.size(), score.log_prob);
    if (value_ec != std::errc() || value_end != value_text.data() + value_text.size() ||
        !std::isfinite(score.log_prob)) {
      throw DataError(where + ": malformed log-probability '" + std::string(value_text) + "'");
    }
    if (score.log_prob > 0.0) {
      throw DataError(where + ": log-probability " + std::string(value_text) +
                      " is positive");
    }
    if (tab == std::string_view::npos) {
      score.tokens = -1;
    } else {
      const auto count_text = line.substr(tab + 1);
      const auto [count_end, count_ec] = std::from_chars(
          count_text.data(), count_text.data() + count_text.size(), score.tokens);
      if (count_ec != std::errc() || count_end != count_text.data() + count_text.size() ||
          score.tokens < 0) {
        throw DataError(where + ": malformed token count '" + std::string(count_text) + "'");
      }
    }
    scores.push_back(score);
  }
  return scores;
}

std::vector<ExternalScore> load_external_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open external scores " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_external_scores(buffer.str());
}

ScoreReport aggregate_external_scores(std::span<const ExternalScore> scores) {
  if (scores.empty()) throw DataError("external score list is empty");
  ScoreReport report;
  report.sentences = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].tokens < 0) {
      throw DataError("external score " + std::to_string(i + 1) +
                      " has no token count");
    }
    report.total_log_prob += scores[i].log_prob;
    report.token_count += scores[i].tokens;
  }
  if (report.token_count == 0) throw DataError("external scores cover zero tokens");
  report.per_token_ppl =
      std::exp(-report.total_log_prob / static_cast<double>(report.token_count));
  return report;
}

}  // namespace tgeval
