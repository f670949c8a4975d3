#include "tgeval/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tgeval/errors.hpp"

namespace tgeval {

namespace {

// Length in bytes of the Unicode whitespace character starting at `pos`,
// or 0 if there is none there.
std::size_t whitespace_length(std::string_view s, std::size_t pos) {
  const auto byte = [&](std::size_t i) {
    return i < s.size() ? static_cast<unsigned char>(s[i]) : 0u;
  };
  const unsigned c0 = byte(pos);
  if (c0 == ' ' || (c0 >= 0x09 && c0 <= 0x0D)) return 1;
  if (c0 == 0xC2) {
    const unsigned c1 = byte(pos + 1);
    if (c1 == 0x85 || c1 == 0xA0) return 2;  // NEL, NBSP
    return 0;
  }
  if (c0 == 0xE1) {
    if (byte(pos + 1) == 0x9A && byte(pos + 2) == 0x80) return 3;  // U+1680
    return 0;
  }
  if (c0 == 0xE2) {
    const unsigned c1 = byte(pos + 1);
    const unsigned c2 = byte(pos + 2);
    if (c1 == 0x80 && ((c2 >= 0x80 && c2 <= 0x8A) ||  // U+2000..U+200A
                       c2 == 0xA8 || c2 == 0xA9 ||    // U+2028, U+2029
                       c2 == 0xAF)) {                 // U+202F
      return 3;
    }
    if (c1 == 0x81 && c2 == 0x9F) return 3;  // U+205F
    return 0;
  }
  if (c0 == 0xE3) {
    if (byte(pos + 1) == 0x80 && byte(pos + 2) == 0x80) return 3;  // U+3000
  }
  return 0;
}

void append_line(std::vector<Sentence>& sentences,
                 std::vector<std::string>& topics, std::string_view line,
                 std::size_t line_no, CorpusFormat format) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (format == CorpusFormat::kLines) {
    auto sentence = tokenize(line);
    if (!sentence.empty()) sentences.push_back(std::move(sentence));
    return;
  }
  if (line.empty()) return;
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) {
    throw DataError("topic corpus line " + std::to_string(line_no) +
                    ": missing TAB between topic and sentence");
  }
  topics.emplace_back(line.substr(0, tab));
  sentences.push_back(tokenize(line.substr(tab + 1)));
}

}  // namespace

Corpus::Corpus(std::vector<Sentence> sentences)
    : sentences_(std::move(sentences)) {}

Corpus::Corpus(std::vector<Sentence> sentences,
               std::vector<std::string> topics)
    : sentences_(std::move(sentences)), topics_(std::move(topics)) {
  if (topics_->size() != sentences_.size()) {
    throw UsageError("topic list length " + std::to_string(topics_->size()) +
                     " does not match sentence count " +
                     std::to_string(sentences_.size()));
  }
}

const std::vector<std::string>& Corpus::topics() const {
  if (!topics_) throw UsageError("corpus has no topic labels");
  return *topics_;
}

std::vector<std::string> Corpus::topic_set() const {
  std::set<std::string> labels(topics().begin(), topics().end());
  return {labels.begin(), labels.end()};
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.size();
  return n;
}

Corpus Corpus::select(const std::vector<std::size_t>& indices) const {
  std::vector<Sentence> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(sentences_.at(i));
  if (!topics_) return Corpus(std::move(out));
  std::vector<std::string> labels;
  labels.reserve(indices.size());
  for (auto i : indices) labels.push_back((*topics_)[i]);
  return Corpus(std::move(out), std::move(labels));
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "lines") return CorpusFormat::kLines;
  if (name == "topic_tsv" || name == "tsv") return CorpusFormat::kTopicTsv;
  throw UsageError("unknown corpus format '" + std::string(name) +
                   "' (expected lines or topic_tsv)");
}

Sentence tokenize(std::string_view line) {
  Sentence s;
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  while (pos < line.size()) {
    const std::size_t ws = whitespace_length(line, pos);
    if (ws > 0) {
      if (start != std::string_view::npos) {
        s.tokens.emplace_back(line.substr(start, pos - start));
        start = std::string_view::npos;
      }
      pos += ws;
    } else {
      if (start == std::string_view::npos) start = pos;
      ++pos;
    }
  }
  if (start != std::string_view::npos) s.tokens.emplace_back(line.substr(start));
  return s;
}

std::string detokenize(const Sentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += s.tokens[i];
  }
  return out;
}

Corpus parse_corpus(std::string_view text, CorpusFormat format) {
  std::vector<Sentence> sentences;
  std::vector<std::string> topics;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    append_line(sentences, topics, text.substr(start, end - start),
                ++line_no, format);
    start = end + 1;
  }
  if (format == CorpusFormat::kTopicTsv) {
    return Corpus(std::move(sentences), std::move(topics));
  }
  return Corpus(std::move(sentences));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw DataError("failed reading corpus file " + path.string());
  return parse_corpus(buffer.str(), format);
}

std::string format_corpus(const Corpus& c, CorpusFormat format) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (format == CorpusFormat::kTopicTsv) {
      out += c.topics()[i];
      out += '\t';
    }
    out += detokenize(c[i]);
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& c, const std::filesystem::path& path,
                 CorpusFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  out << format_corpus(c, format);
  if (!out) throw DataError("failed writing corpus file " + path.string());
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& c, double fraction,
                                       RngSeed seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw UsageError("split fraction must lie in (0, 1)");
  }
  if (c.empty()) throw DataError("cannot split an empty corpus");

  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  const auto first_size = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(c.size()) + 0.5));
  std::vector<std::size_t> first(order.begin(), order.begin() + first_size);
  std::vector<std::size_t> second(order.begin() + first_size, order.end());
  return {c.select(first), c.select(second)};
}

FilterResult filter_topics(const Corpus& c, const std::set<std::string>& keep) {
  const auto& labels = c.topics();
  std::vector<std::size_t> kept;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (keep.contains(labels[i])) {
      kept.push_back(i);
      seen.insert(labels[i]);
    }
  }
  FilterResult result{c.select(kept), {}};
  std::ranges::set_difference(keep, seen,
                              std::back_inserter(result.missing_topics));
  return result;
}

}  // namespace tgeval
