#include "kway/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "kway/digest.hpp"
#include "kway/error.hpp"

namespace kway::corpus {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open file: " + path);
  return in;
}

}  // namespace

std::string Vocabulary::digest() const {
  Fnv1a h;
  for (const auto& w : words) {
    h.update(w);
    h.update("\n");
  }
  return h.hex();
}

std::string EncodedCorpus::digest() const {
  Fnv1a h;
  for (const auto& doc : documents) {
    for (WordId id : doc) h.update_u64(static_cast<std::uint64_t>(id));
    h.update_u64(0xffffffffffffffffULL);  // document boundary
  }
  return h.hex();
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < n && !is_space(text[i])) ++i;
    if (i > start) {
      std::string tok(text.substr(start, i - start));
      if (lowercase) {
        for (auto& c : tok)
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      tokens.push_back(std::move(tok));
    }
  }
  return tokens;
}

std::unordered_map<std::string, std::int64_t> count_tokens(std::istream& in,
                                                           bool lowercase) {
  std::unordered_map<std::string, std::int64_t> counts;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& tok : tokenize(line, lowercase)) ++counts[tok];
  }
  return counts;
}

void merge_counts(std::unordered_map<std::string, std::int64_t>& into,
                  const std::unordered_map<std::string, std::int64_t>& from) {
  for (const auto& [word, c] : from) into[word] += c;
}

Vocabulary vocabulary_from_counts(
    const std::unordered_map<std::string, std::int64_t>& counts,
    std::int64_t min_count) {
  std::vector<std::pair<std::string, std::int64_t>> kept;
  kept.reserve(counts.size());
  for (const auto& [word, c] : counts) {
    if (c >= min_count) kept.emplace_back(word, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.min_count = min_count;
  vocab.words.reserve(kept.size());
  vocab.counts.reserve(kept.size());
  for (auto& [word, c] : kept) {
    vocab.ids.emplace(word, static_cast<WordId>(vocab.words.size()));
    vocab.words.push_back(std::move(word));
    vocab.counts.push_back(c);
  }
  return vocab;
}

Vocabulary build_vocabulary(std::istream& in, std::int64_t min_count,
                            bool lowercase) {
  return vocabulary_from_counts(count_tokens(in, lowercase), min_count);
}

EncodedCorpus encode(std::istream& in, const Vocabulary& vocab,
                     bool lowercase) {
  EncodedCorpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<WordId> doc;
    for (const auto& tok : tokenize(line, lowercase)) {
      WordId id = vocab.id_of(tok);
      if (id >= 0) doc.push_back(id);
    }
    corpus.token_count += static_cast<std::int64_t>(doc.size());
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::vector<std::span<const WordId>> windows(std::span<const WordId> doc,
                                             const WindowSpec& spec) {
  std::vector<std::span<const WordId>> out;
  for_each_window(doc, spec, [&](std::span<const WordId> w) { out.push_back(w); });
  return out;
}

void write_vocabulary(const Vocabulary& vocab, std::ostream& out) {
  for (WordId id = 0; id < vocab.size(); ++id) {
    out << vocab.words[id] << '\t' << id << '\t' << vocab.counts[id] << '\n';
  }
}

void write_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot write file: " + path);
  write_vocabulary(vocab, out);
}

Vocabulary read_vocabulary(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                             : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw format_error("vocabulary line " + std::to_string(lineno) +
                         ": expected word<TAB>id<TAB>count");
    }
    std::string word = line.substr(0, t1);
    std::int64_t id = 0, count = 0;
    try {
      id = std::stoll(line.substr(t1 + 1, t2 - t1 - 1));
      count = std::stoll(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw format_error("vocabulary line " + std::to_string(lineno) +
                         ": non-numeric id or count");
    }
    if (id != static_cast<std::int64_t>(vocab.words.size())) {
      throw format_error("vocabulary line " + std::to_string(lineno) +
                         ": ids must be dense and ordered");
    }
    if (!vocab.ids.emplace(word, static_cast<WordId>(id)).second) {
      throw format_error("vocabulary line " + std::to_string(lineno) +
                         ": duplicate word '" + word + "'");
    }
    vocab.words.push_back(std::move(word));
    vocab.counts.push_back(count);
  }
  return vocab;
}

Vocabulary read_vocabulary(const std::string& path) {
  auto in = open_or_throw(path);
  return read_vocabulary(in);
}

}  // namespace kway::corpus
