#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kway/corpus.hpp"

namespace kway::miner {

using corpus::WordId;

// An unordered set of k distinct words together with the number of context
// windows that contain all of them. A window counts once even if a member
// word repeats inside it, so counts are monotone under subset.
struct KWaySet {
  std::vector<WordId> ids;  // strictly increasing
  std::int64_t count = 0;

  bool operator==(const KWaySet&) const = default;
};

struct FrequentSetTable {
  int k = 0;
  std::int64_t support = 1;
  corpus::WindowSpec window;
  std::string corpus_digest;
  std::vector<KWaySet> sets;  // sorted lexicographically by id tuple

  bool empty() const { return sets.empty(); }
};

struct MinerConfig {
  std::int64_t support = 1000;
  int k_max = 5;
  corpus::WindowSpec window;

  bool valid() const { return support >= 1 && k_max >= 1 && window.valid(); }
};

using Candidate = std::vector<WordId>;

// Frequent single words: support of {w} is the number of windows containing
// w at least once.
FrequentSetTable mine_level1(const corpus::EncodedCorpus& corpus,
                             const MinerConfig& cfg, int threads = 1);

// Joins pairs of frequent (k-1)-sets sharing their first k-2 ids and keeps a
// union only if every (k-1)-subset is frequent. Output is deduplicated and
// sorted.
std::vector<Candidate> generate_candidates(const FrequentSetTable& prev);

// Counts window containment for an explicit candidate list (all of one order)
// and drops candidates below the support threshold.
FrequentSetTable count_supports(const corpus::EncodedCorpus& corpus,
                                const std::vector<Candidate>& candidates,
                                const MinerConfig& cfg);

// Level-wise mining for k = 1..k_max. Emits the level-1 table (possibly
// empty), then each higher level while nonempty; stops before the first empty
// level >= 2. Every emitted table satisfies downward closure against the
// previous one.
//
// Levels >= 2 are counted by enumerating each window's k-subsets over the ids
// still alive at level k-1, sorting the packed tuples and run-length counting,
// then applying the support and closure filters. This produces exactly the
// same tables as generate_candidates + count_supports without materializing
// the candidate set, whose size at corpus scale can exceed memory.
std::vector<FrequentSetTable> mine_all(const corpus::EncodedCorpus& corpus,
                                       const MinerConfig& cfg,
                                       int threads = 1);

// Set file: header line `#kway<TAB>k=<k><TAB>support=<s><TAB>window=<W><TAB>
// stride=<st>`, then one set per line as k ascending ids and the count,
// tab-separated, sorted lexicographically by id tuple.
void write_sets(const FrequentSetTable& table, std::ostream& out);
void write_sets(const FrequentSetTable& table, const std::string& path);
FrequentSetTable read_sets(std::istream& in);
FrequentSetTable read_sets(const std::string& path);

}  // namespace kway::miner
