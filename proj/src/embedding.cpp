#include "tgeval/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "tgeval/errors.hpp"

namespace tgeval {

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    auto end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

}  // namespace

EmbeddingSet parse_embeddings(std::string_view text, std::string source_tag) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw DataError("embedding file is empty");
  const auto header = split_fields(line);
  long long rows = -1;
  long long dim = -1;
  if (header.size() == 2) {
    std::from_chars(header[0].data(), header[0].data() + header[0].size(), rows);
    std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim);
  }
  if (rows < 0 || dim < 1) {
    throw DataError("malformed embedding header '" + std::string(line) +
                    "' (expected \"<N> <dim>\")");
  }

  EmbeddingSet e;
  e.source_tag = std::move(source_tag);
  e.vectors.resize(rows, dim);
  for (long long r = 0; r < rows; ++r) {
    if (!reader.next(line)) {
      throw DataError("embedding file ends after " + std::to_string(r) +
                      " of " + std::to_string(rows) + " rows");
    }
    const auto fields = split_fields(line);
    if (static_cast<long long>(fields.size()) != dim) {
      throw DataError("embedding row " + std::to_string(r + 1) + " has " +
                      std::to_string(fields.size()) + " values, expected " +
                      std::to_string(dim));
    }
    for (long long c = 0; c < dim; ++c) {
      const auto field = fields[static_cast<std::size_t>(c)];
      double value = 0.0;
      const auto [end, ec] =
          std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || end != field.data() + field.size()) {
        throw DataError("embedding row " + std::to_string(r + 1) +
                        ": cannot parse '" + std::string(field) + "'");
      }
      if (!std::isfinite(value)) {
        throw DataError("embedding row " + std::to_string(r + 1) +
                        ": non-finite value '" + std::string(field) + "'");
      }
      e.vectors(r, c) = value;
    }
  }
  while (reader.next(line)) {
    if (!split_fields(line).empty()) {
      throw DataError("embedding file has more rows than its header declares");
    }
  }
  return e;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_embeddings(buffer.str(), path.filename().string());
}

std::string format_embeddings(const EmbeddingSet& e) {
  std::string out = std::to_string(e.size()) + " " + std::to_string(e.dim()) + "\n";
  char buf[32];
  for (Eigen::Index r = 0; r < e.size(); ++r) {
    for (Eigen::Index c = 0; c < e.dim(); ++c) {
      if (c > 0) out += ' ';
      std::snprintf(buf, sizeof buf, "%.17g", e.vectors(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_embeddings(const EmbeddingSet& e, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write embedding file " + path.string());
  out << format_embeddings(e);
  if (!out) throw DataError("failed writing embedding file " + path.string());
}

Pooling parse_pooling(std::string_view name) {
  if (name == "mean") return Pooling::kMean;
  if (name == "max") return Pooling::kMax;
  throw UsageError("unknown pooling '" + std::string(name) +
                   "' (expected mean or max)");
}

void HashEmbedderConfig::validate() const {
  if (dim < 2) throw UsageError("hash embedder dimension must be at least 2");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (char ch : bytes) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

Eigen::VectorXd feature_vector(std::string_view feature,
                               const HashEmbedderConfig& cfg) {
  SplitMix64 rng(fnv1a64(feature) ^ mix64(cfg.seed.value));
  Eigen::VectorXd v(cfg.dim);
  for (int i = 0; i < cfg.dim; i += 2) {
    double second = 0.0;
    v(i) = rng.normal_pair(second);
    if (i + 1 < cfg.dim) v(i + 1) = second;
  }
  return v;
}

EmbeddingSet hash_embed_corpus(const Corpus& c, const HashEmbedderConfig& cfg) {
  cfg.validate();
  if (c.empty()) throw DataError("cannot embed an empty corpus");

  std::unordered_map<std::string, Eigen::VectorXd> cache;
  const auto lookup = [&](const std::string& feature) -> const Eigen::VectorXd& {
    auto it = cache.find(feature);
    if (it == cache.end()) {
      it = cache.emplace(feature, feature_vector(feature, cfg)).first;
    }
    return it->second;
  };

  EmbeddingSet e;
  e.source_tag = "hash-embedder";
  e.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.size()), cfg.dim);
  Eigen::VectorXd pooled(cfg.dim);
  std::vector<std::string> features;
  for (std::size_t row = 0; row < c.size(); ++row) {
    const auto& tokens = c[row].tokens;
    if (tokens.empty()) continue;
    features.assign(tokens.begin(), tokens.end());
    if (cfg.use_bigrams) {
      for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        features.push_back(tokens[i] + ' ' + tokens[i + 1]);
      }
    }
    // Canonical summation order: a bag of features pools to the same bits
    // whatever order the sentence lists them in.
    std::sort(features.begin(), features.end());
    pooled = lookup(features.front());
    for (std::size_t i = 1; i < features.size(); ++i) {
      if (cfg.pooling == Pooling::kMean) {
        pooled += lookup(features[i]);
      } else {
        pooled = pooled.cwiseMax(lookup(features[i]));
      }
    }
    if (cfg.pooling == Pooling::kMean) {
      pooled /= static_cast<double>(features.size());
    }
    e.vectors.row(static_cast<Eigen::Index>(row)) = pooled.transpose();
  }
  return e;
}

}  // namespace tgeval
