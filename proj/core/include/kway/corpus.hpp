#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kway::corpus {

using WordId = std::int32_t;

// Frequency-filtered word table. Ids are dense 0..n-1, assigned by descending
// corpus frequency with ties broken by lexicographic word order, so two runs
// over the same corpus produce byte-identical vocabulary files.
struct Vocabulary {
  std::vector<std::string> words;            // id -> word
  std::unordered_map<std::string, WordId> ids;
  std::vector<std::int64_t> counts;          // id -> corpus frequency
  std::int64_t min_count = 1;

  WordId size() const { return static_cast<WordId>(words.size()); }

  // -1 when out of vocabulary.
  WordId id_of(std::string_view w) const {
    auto it = ids.find(std::string(w));
    return it == ids.end() ? WordId{-1} : it->second;
  }

  // Fingerprint of the id->word mapping; embedding files recompute it so a
  // model can be checked against the vocabulary it was trained with.
  std::string digest() const;
};

struct EncodedCorpus {
  std::vector<std::vector<WordId>> documents;
  std::int64_t token_count = 0;

  std::string digest() const;
};

struct WindowSpec {
  int width = 10;
  int stride = 1;

  bool valid() const { return width >= 2 && stride >= 1; }
};

// Maximal runs of non-whitespace bytes; ASCII lowercasing when requested.
std::vector<std::string> tokenize(std::string_view text, bool lowercase);

// Raw token frequencies for one document stream (one document per line).
// Shards may be counted independently and merged; the merged result is
// identical to a single pass because merging is integer addition.
std::unordered_map<std::string, std::int64_t> count_tokens(std::istream& in,
                                                           bool lowercase);
void merge_counts(std::unordered_map<std::string, std::int64_t>& into,
                  const std::unordered_map<std::string, std::int64_t>& from);

Vocabulary vocabulary_from_counts(
    const std::unordered_map<std::string, std::int64_t>& counts,
    std::int64_t min_count);

Vocabulary build_vocabulary(std::istream& in, std::int64_t min_count,
                            bool lowercase = true);

// Encodes one document per line, silently dropping out-of-vocabulary tokens.
EncodedCorpus encode(std::istream& in, const Vocabulary& vocab,
                     bool lowercase = true);

// Contiguous spans of `width` ids starting at 0, stride, 2*stride, ... with
// start+width <= len. A nonempty document shorter than the width yields one
// span covering the whole document; windows never cross document boundaries.
template <class F>
void for_each_window(std::span<const WordId> doc, const WindowSpec& spec,
                     F&& fn) {
  const std::size_t len = doc.size();
  if (len == 0) return;
  const std::size_t w = static_cast<std::size_t>(spec.width);
  if (len < w) {
    fn(doc);
    return;
  }
  const std::size_t stride = static_cast<std::size_t>(spec.stride);
  for (std::size_t start = 0; start + w <= len; start += stride) {
    fn(doc.subspan(start, w));
  }
}

std::vector<std::span<const WordId>> windows(std::span<const WordId> doc,
                                             const WindowSpec& spec);

// TSV `word<TAB>id<TAB>count`, ordered by id, no header.
void write_vocabulary(const Vocabulary& vocab, std::ostream& out);
void write_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary read_vocabulary(std::istream& in);
Vocabulary read_vocabulary(const std::string& path);

}  // namespace kway::corpus
