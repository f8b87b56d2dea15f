#include "kway/miner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "kway/error.hpp"

namespace kway::miner {

namespace {

using corpus::EncodedCorpus;
using corpus::WindowSpec;

WordId id_space(const EncodedCorpus& corpus) {
  WordId max_id = -1;
  for (const auto& doc : corpus.documents) {
    for (WordId id : doc) max_id = std::max(max_id, id);
  }
  return max_id + 1;
}

int bits_for(WordId n) {
  int b = 1;
  while ((std::int64_t{1} << b) < n) ++b;
  return b;
}

std::vector<std::pair<std::size_t, std::size_t>> doc_ranges(std::size_t n_docs,
                                                            int threads) {
  int n = std::max(1, threads);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t chunk = (n_docs + n - 1) / std::max<std::size_t>(1, n);
  for (std::size_t start = 0; start < n_docs; start += chunk) {
    ranges.emplace_back(start, std::min(n_docs, start + chunk));
  }
  if (ranges.empty()) ranges.emplace_back(0, 0);
  return ranges;
}

// Gathers the window's distinct ids that are still alive, in ascending order.
// `stamp` holds the last window ordinal each id was seen in.
void distinct_alive(std::span<const WordId> window, const std::vector<char>& alive,
                    std::vector<std::int64_t>& stamp, std::int64_t window_no,
                    std::vector<WordId>& out) {
  out.clear();
  for (WordId id : window) {
    if (alive[static_cast<std::size_t>(id)] &&
        stamp[static_cast<std::size_t>(id)] != window_no) {
      stamp[static_cast<std::size_t>(id)] = window_no;
      out.push_back(id);
    }
  }
  std::sort(out.begin(), out.end());
}

// Visits all k-combinations of the sorted id list `v`, in lexicographic order.
template <class F>
void for_each_combination(const std::vector<WordId>& v, int k,
                          std::vector<int>& idx, F&& fn) {
  const int m = static_cast<int>(v.size());
  if (m < k) return;
  idx.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// One level of subset counting: enumerate every window's k-subsets over alive
// ids into packed keys, sort, and run-length count. Packing puts the first id
// in the most significant bits so key order equals tuple order.
template <class Key>
std::vector<std::pair<Key, std::int64_t>> count_subsets_sorted(
    const EncodedCorpus& corpus, int k, int bits,
    const std::vector<char>& alive, std::int64_t support, WordId n,
    const WindowSpec& window, int threads) {
  const auto ranges = doc_ranges(corpus.documents.size(), threads);

  // Exact per-shard combination counts, so shards can fill disjoint slices of
  // one buffer without reallocation.
  constexpr unsigned __int128 kMaxLevelKeys = 4000000000ULL;
  std::vector<std::size_t> shard_sizes(ranges.size(), 0);
  auto count_shard = [&](std::size_t shard) {
    std::vector<std::int64_t> stamp(static_cast<std::size_t>(n), -1);
    std::vector<WordId> distinct;
    std::int64_t window_no = 0;
    unsigned __int128 total = 0;
    for (std::size_t di = ranges[shard].first; di < ranges[shard].second; ++di) {
      corpus::for_each_window(
          std::span<const WordId>(corpus.documents[di]), window,
          [&](std::span<const WordId> w) {
            distinct_alive(w, alive, stamp, window_no++, distinct);
            const std::size_t m = distinct.size();
            if (m >= static_cast<std::size_t>(k)) {
              unsigned __int128 c = 1;
              for (int i = 0; i < k; ++i)
                c = c * (m - static_cast<std::size_t>(i)) /
                    (static_cast<std::size_t>(i) + 1);
              total += c;
            }
          });
    }
    shard_sizes[shard] =
        total > kMaxLevelKeys ? SIZE_MAX : static_cast<std::size_t>(total);
  };

  auto run_shards = [&](auto&& fn) {
    if (ranges.size() == 1 || threads <= 1) {
      for (std::size_t s = 0; s < ranges.size(); ++s) fn(s);
      return;
    }
    std::vector<std::thread> pool;
    pool.reserve(ranges.size());
    for (std::size_t s = 0; s < ranges.size(); ++s) pool.emplace_back(fn, s);
    for (auto& t : pool) t.join();
  };

  run_shards(count_shard);

  std::vector<std::size_t> offsets(ranges.size() + 1, 0);
  for (std::size_t s = 0; s < ranges.size(); ++s) {
    if (shard_sizes[s] == SIZE_MAX ||
        offsets[s] + shard_sizes[s] > static_cast<std::size_t>(kMaxLevelKeys)) {
      throw std::invalid_argument(
          "order-" + std::to_string(k) +
          " subset enumeration too large; narrow the window or raise support");
    }
    offsets[s + 1] = offsets[s] + shard_sizes[s];
  }

  std::vector<Key> keys(offsets.back());
  auto fill_shard = [&](std::size_t shard) {
    std::vector<std::int64_t> stamp(static_cast<std::size_t>(n), -1);
    std::vector<WordId> distinct;
    std::vector<int> idx;
    std::int64_t window_no = 0;
    std::size_t pos = offsets[shard];
    for (std::size_t di = ranges[shard].first; di < ranges[shard].second; ++di) {
      corpus::for_each_window(
          std::span<const WordId>(corpus.documents[di]), window,
          [&](std::span<const WordId> w) {
            distinct_alive(w, alive, stamp, window_no++, distinct);
            for_each_combination(distinct, k, idx, [&](const std::vector<int>& c) {
              Key key = 0;
              for (int i : c)
                key = (key << bits) | static_cast<Key>(distinct[static_cast<std::size_t>(i)]);
              keys[pos++] = key;
            });
          });
    }
  };

  run_shards(fill_shard);

  std::sort(keys.begin(), keys.end());

  std::vector<std::pair<Key, std::int64_t>> counted;
  std::size_t i = 0;
  while (i < keys.size()) {
    std::size_t j = i + 1;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    if (static_cast<std::int64_t>(j - i) >= support)
      counted.emplace_back(keys[i], static_cast<std::int64_t>(j - i));
    i = j;
  }
  return counted;
}

std::vector<WordId> unpack_key(unsigned __int128 key, int k, int bits) {
  std::vector<WordId> ids(static_cast<std::size_t>(k));
  const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << bits) - 1;
  for (int i = k - 1; i >= 0; --i) {
    ids[static_cast<std::size_t>(i)] = static_cast<WordId>(key & mask);
    key >>= bits;
  }
  return ids;
}

bool tuple_less(const std::vector<WordId>& a, const std::vector<WordId>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool table_contains(const FrequentSetTable& table, const std::vector<WordId>& ids) {
  auto it = std::lower_bound(
      table.sets.begin(), table.sets.end(), ids,
      [](const KWaySet& s, const std::vector<WordId>& t) { return tuple_less(s.ids, t); });
  return it != table.sets.end() && it->ids == ids;
}

// Keeps only counted sets whose every (k-1)-subset is in the previous table;
// this is exactly the candidate predicate of the level-wise join.
FrequentSetTable assemble_level(
    const std::vector<std::pair<unsigned __int128, std::int64_t>>& counted,
    int k, int bits, const FrequentSetTable& prev, const MinerConfig& cfg,
    const std::string& digest) {
  FrequentSetTable table;
  table.k = k;
  table.support = cfg.support;
  table.window = cfg.window;
  table.corpus_digest = digest;

  std::vector<WordId> sub(static_cast<std::size_t>(k) - 1);
  for (const auto& [key, count] : counted) {
    std::vector<WordId> ids = unpack_key(key, k, bits);
    bool closed = true;
    for (int drop = 0; drop < k && closed; ++drop) {
      std::size_t w = 0;
      for (int i = 0; i < k; ++i) {
        if (i != drop) sub[w++] = ids[static_cast<std::size_t>(i)];
      }
      closed = table_contains(prev, sub);
    }
    if (closed) table.sets.push_back(KWaySet{std::move(ids), count});
  }
  return table;
}

}  // namespace

FrequentSetTable mine_level1(const EncodedCorpus& corpus, const MinerConfig& cfg,
                             int threads) {
  if (!cfg.valid()) throw std::invalid_argument("invalid miner configuration");
  const WordId n = id_space(corpus);

  const auto ranges = doc_ranges(corpus.documents.size(), threads);
  std::vector<std::vector<std::int64_t>> shard_counts(
      ranges.size(), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0));

  auto count_shard = [&](std::size_t shard) {
    auto& counts = shard_counts[shard];
    std::vector<std::int64_t> stamp(static_cast<std::size_t>(n), -1);
    std::int64_t window_no = 0;
    for (std::size_t di = ranges[shard].first; di < ranges[shard].second; ++di) {
      corpus::for_each_window(
          std::span<const WordId>(corpus.documents[di]), cfg.window,
          [&](std::span<const WordId> w) {
            for (WordId id : w) {
              if (stamp[static_cast<std::size_t>(id)] != window_no) {
                stamp[static_cast<std::size_t>(id)] = window_no;
                ++counts[static_cast<std::size_t>(id)];
              }
            }
            ++window_no;
          });
    }
  };

  if (ranges.size() == 1 || threads <= 1) {
    for (std::size_t s = 0; s < ranges.size(); ++s) count_shard(s);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < ranges.size(); ++s) pool.emplace_back(count_shard, s);
    for (auto& t : pool) t.join();
  }

  // Per-shard counts merge by integer addition; equal to a single pass.
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
  for (const auto& sc : shard_counts) {
    for (std::size_t i = 0; i < sc.size(); ++i) counts[i] += sc[i];
  }

  FrequentSetTable table;
  table.k = 1;
  table.support = cfg.support;
  table.window = cfg.window;
  table.corpus_digest = corpus.digest();
  for (WordId id = 0; id < n; ++id) {
    if (counts[static_cast<std::size_t>(id)] >= cfg.support) {
      table.sets.push_back(KWaySet{{id}, counts[static_cast<std::size_t>(id)]});
    }
  }
  return table;
}

std::vector<Candidate> generate_candidates(const FrequentSetTable& prev) {
  std::vector<Candidate> out;
  const int km1 = prev.k;
  const auto& sets = prev.sets;

  std::size_t group_start = 0;
  std::vector<WordId> sub(static_cast<std::size_t>(km1));
  while (group_start < sets.size()) {
    // Group of sets sharing their first k-2 ids.
    std::size_t group_end = group_start + 1;
    while (group_end < sets.size() &&
           std::equal(sets[group_start].ids.begin(), sets[group_start].ids.end() - 1,
                      sets[group_end].ids.begin())) {
      ++group_end;
    }
    for (std::size_t a = group_start; a < group_end; ++a) {
      for (std::size_t b = a + 1; b < group_end; ++b) {
        Candidate cand(sets[a].ids);
        cand.push_back(sets[b].ids.back());
        // Parents a and b are frequent by construction; verify the subsets
        // that drop one of the shared prefix ids.
        bool closed = true;
        for (int drop = 0; drop + 2 < static_cast<int>(cand.size()) && closed; ++drop) {
          std::size_t w = 0;
          for (std::size_t i = 0; i < cand.size(); ++i) {
            if (static_cast<int>(i) != drop) sub[w++] = cand[i];
          }
          closed = table_contains(prev, sub);
        }
        if (closed) out.push_back(std::move(cand));
      }
    }
    group_start = group_end;
  }
  return out;
}

FrequentSetTable count_supports(const EncodedCorpus& corpus,
                                const std::vector<Candidate>& candidates,
                                const MinerConfig& cfg) {
  if (!cfg.valid()) throw std::invalid_argument("invalid miner configuration");

  FrequentSetTable table;
  table.support = cfg.support;
  table.window = cfg.window;
  table.corpus_digest = corpus.digest();
  if (candidates.empty()) return table;

  const int k = static_cast<int>(candidates.front().size());
  table.k = k;
  WordId max_id = -1;
  for (const auto& cand : candidates) {
    if (static_cast<int>(cand.size()) != k)
      throw std::invalid_argument("candidates must all have the same order");
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (i > 0 && cand[i] <= cand[i - 1])
        throw std::invalid_argument("candidate ids must be strictly increasing");
      max_id = std::max(max_id, cand[i]);
    }
  }

  std::vector<Candidate> sorted(candidates);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  const WordId n = std::max(id_space(corpus), max_id + 1);
  // Only ids that occur in some candidate can matter for containment.
  std::vector<char> relevant(static_cast<std::size_t>(n), 0);
  for (const auto& cand : sorted) {
    for (WordId id : cand) relevant[static_cast<std::size_t>(id)] = 1;
  }

  std::vector<std::int64_t> counts(sorted.size(), 0);
  std::vector<std::int64_t> stamp(static_cast<std::size_t>(n), -1);
  std::vector<WordId> distinct;
  std::vector<int> idx;
  std::vector<WordId> combo(static_cast<std::size_t>(k));
  std::int64_t window_no = 0;

  for (const auto& doc : corpus.documents) {
    corpus::for_each_window(
        std::span<const WordId>(doc), cfg.window, [&](std::span<const WordId> w) {
          distinct_alive(w, relevant, stamp, window_no++, distinct);
          for_each_combination(distinct, k, idx, [&](const std::vector<int>& c) {
            for (int i = 0; i < k; ++i)
              combo[static_cast<std::size_t>(i)] =
                  distinct[static_cast<std::size_t>(c[static_cast<std::size_t>(i)])];
            auto it = std::lower_bound(sorted.begin(), sorted.end(), combo);
            if (it != sorted.end() && *it == combo)
              ++counts[static_cast<std::size_t>(it - sorted.begin())];
          });
        });
  }

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (counts[i] >= cfg.support)
      table.sets.push_back(KWaySet{sorted[i], counts[i]});
  }
  return table;
}

std::vector<FrequentSetTable> mine_all(const EncodedCorpus& corpus,
                                       const MinerConfig& cfg, int threads) {
  if (!cfg.valid()) throw std::invalid_argument("invalid miner configuration");

  std::vector<FrequentSetTable> levels;
  levels.push_back(mine_level1(corpus, cfg, threads));
  if (levels.back().empty() || cfg.k_max == 1) return levels;

  const WordId n = id_space(corpus);
  const int bits = bits_for(std::max<WordId>(n, 2));
  const std::string digest = levels.front().corpus_digest;

  for (int k = 2; k <= cfg.k_max; ++k) {
    if (bits * k > 128) {
      throw std::invalid_argument(
          "id space too large to pack order-" + std::to_string(k) + " tuples");
    }
    const FrequentSetTable& prev = levels.back();
    std::vector<char> alive(static_cast<std::size_t>(n), 0);
    for (const auto& s : prev.sets) {
      for (WordId id : s.ids) alive[static_cast<std::size_t>(id)] = 1;
    }

    FrequentSetTable table;
    if (bits * k <= 32) {
      auto counted = count_subsets_sorted<std::uint32_t>(
          corpus, k, bits, alive, cfg.support, n, cfg.window, threads);
      std::vector<std::pair<unsigned __int128, std::int64_t>> wide(counted.begin(),
                                                                   counted.end());
      table = assemble_level(wide, k, bits, prev, cfg, digest);
    } else if (bits * k <= 64) {
      auto counted = count_subsets_sorted<std::uint64_t>(
          corpus, k, bits, alive, cfg.support, n, cfg.window, threads);
      std::vector<std::pair<unsigned __int128, std::int64_t>> wide(counted.begin(),
                                                                   counted.end());
      table = assemble_level(wide, k, bits, prev, cfg, digest);
    } else {
      auto counted = count_subsets_sorted<unsigned __int128>(
          corpus, k, bits, alive, cfg.support, n, cfg.window, threads);
      table = assemble_level(counted, k, bits, prev, cfg, digest);
    }

    if (table.empty()) break;
    levels.push_back(std::move(table));
  }
  return levels;
}

void write_sets(const FrequentSetTable& table, std::ostream& out) {
  out << "#kway\tk=" << table.k << "\tsupport=" << table.support
      << "\twindow=" << table.window.width << "\tstride=" << table.window.stride
      << '\n';
  for (const auto& s : table.sets) {
    for (WordId id : s.ids) out << id << '\t';
    out << s.count << '\n';
  }
}

void write_sets(const FrequentSetTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot write file: " + path);
  write_sets(table, out);
}

namespace {

std::int64_t parse_header_field(const std::string& field, const std::string& key,
                                const std::string& context) {
  if (field.size() <= key.size() || field.compare(0, key.size(), key) != 0)
    throw format_error("set file header: expected " + key + "<value> in " + context);
  try {
    return std::stoll(field.substr(key.size()));
  } catch (const std::exception&) {
    throw format_error("set file header: non-numeric " + key + " in " + context);
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

FrequentSetTable read_sets(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw format_error("set file: missing header line");
  auto fields = split_tabs(line);
  if (fields.size() != 5 || fields[0] != "#kway")
    throw format_error("set file: malformed header: " + line);

  FrequentSetTable table;
  table.k = static_cast<int>(parse_header_field(fields[1], "k=", line));
  table.support = parse_header_field(fields[2], "support=", line);
  table.window.width =
      static_cast<int>(parse_header_field(fields[3], "window=", line));
  table.window.stride =
      static_cast<int>(parse_header_field(fields[4], "stride=", line));
  if (table.k < 1 || table.support < 1 || !table.window.valid())
    throw format_error("set file: header violates table invariants: " + line);

  std::int64_t lineno = 1;
  const KWaySet* last = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto parts = split_tabs(line);
    if (static_cast<int>(parts.size()) != table.k + 1) {
      throw format_error("set file line " + std::to_string(lineno) + ": expected " +
                         std::to_string(table.k) + " ids and a count");
    }
    KWaySet s;
    s.ids.resize(static_cast<std::size_t>(table.k));
    try {
      for (int i = 0; i < table.k; ++i)
        s.ids[static_cast<std::size_t>(i)] =
            static_cast<WordId>(std::stol(parts[static_cast<std::size_t>(i)]));
      s.count = std::stoll(parts.back());
    } catch (const std::exception&) {
      throw format_error("set file line " + std::to_string(lineno) +
                         ": non-numeric field");
    }
    if (s.ids.front() < 0)
      throw format_error("set file line " + std::to_string(lineno) +
                         ": negative word id");
    for (int i = 1; i < table.k; ++i) {
      if (s.ids[static_cast<std::size_t>(i)] <= s.ids[static_cast<std::size_t>(i - 1)])
        throw format_error("set file line " + std::to_string(lineno) +
                           ": ids not strictly increasing");
    }
    if (s.count < table.support)
      throw format_error("set file line " + std::to_string(lineno) +
                         ": count below header support");
    if (last != nullptr && !tuple_less(last->ids, s.ids))
      throw format_error("set file line " + std::to_string(lineno) +
                         ": lines not in canonical tuple order");
    table.sets.push_back(std::move(s));
    last = &table.sets.back();
  }
  return table;
}

FrequentSetTable read_sets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open file: " + path);
  return read_sets(in);
}

}  // namespace kway::miner
