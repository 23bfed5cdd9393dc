#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "driftbench/corpus.hpp"
#include "driftbench/error.hpp"
#include "driftbench/io.hpp"
#include "driftbench/parallel.hpp"

// Mutual-information feature ranking and sparse binary vectorization.

namespace driftbench {

namespace features_detail {
inline constexpr std::string_view kModule = "features";
}

struct VocabEntry {
  std::string feature;
  double mi = 0.0;  // nats

  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

/// MI-ranked feature universe. entries[i] has index i; ordering is
/// (mi descending, feature string ascending).
struct FeatureVocabulary {
  std::vector<VocabEntry> entries;

  std::size_t size() const { return entries.size(); }

  friend bool operator==(const FeatureVocabulary&,
                         const FeatureVocabulary&) = default;
};

/// Vectorized corpus: per-app strictly increasing column indices, aligned
/// with labels, timestamps and ids, in corpus (timestamp, sha256) order.
struct SparseDataset {
  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<int> labels;
  std::vector<std::int64_t> timestamps;
  std::vector<std::string> ids;  // sha256 per row
  std::uint32_t vocab_size = 0;

  std::size_t size() const { return rows.size(); }

  friend bool operator==(const SparseDataset&, const SparseDataset&) = default;
};

struct Contingency {
  // n11: feature present & label 1; n10: present & label 0;
  // n01: absent & label 1;  n00: absent & label 0.
  std::int64_t n11 = 0, n10 = 0, n01 = 0, n00 = 0;

  std::int64_t total() const { return n11 + n10 + n01 + n00; }
};

/// Counts the 2x2 presence/label table for one feature over records
/// [begin, end) of the corpus.
inline Contingency count_contingency(const RawCorpus& corpus,
                                     std::string_view feature,
                                     std::size_t begin, std::size_t end) {
  Contingency c;
  for (std::size_t i = begin; i < end; ++i) {
    const bool present = std::binary_search(
        corpus.features[i].begin(), corpus.features[i].end(), feature);
    const bool mal = corpus.records[i].label == 1;
    if (present)
      (mal ? c.n11 : c.n10)++;
    else
      (mal ? c.n01 : c.n00)++;
  }
  return c;
}

inline Contingency count_contingency(const RawCorpus& corpus,
                                     std::string_view feature) {
  return count_contingency(corpus, feature, 0, corpus.records.size());
}

/// Plug-in mutual information of a 2x2 table, in nats. Zero-count cells
/// contribute 0; the result is clamped to >= 0 against round-off. Terms are
/// accumulated in long double: near-independent tables with large counts
/// cancel heavily and plain double loses several digits there.
inline double mutual_information(std::int64_t n11, std::int64_t n10,
                                 std::int64_t n01, std::int64_t n00) {
  if (n11 < 0 || n10 < 0 || n01 < 0 || n00 < 0)
    throw Error(features_detail::kModule, "negative contingency count");
  const std::int64_t total = n11 + n10 + n01 + n00;
  if (total == 0)
    throw Error(features_detail::kModule, "empty contingency table");
  const long double t = static_cast<long double>(total);
  const long double row1 = static_cast<long double>(n11 + n10);  // present
  const long double row0 = static_cast<long double>(n01 + n00);
  const long double col1 = static_cast<long double>(n11 + n01);  // label 1
  const long double col0 = static_cast<long double>(n10 + n00);
  auto cell = [&](std::int64_t n, long double row, long double col) {
    if (n == 0) return 0.0L;
    const long double nd = static_cast<long double>(n);
    return nd / t * std::log(nd * t / (row * col));
  };
  const long double mi = cell(n11, row1, col1) + cell(n10, row1, col0) +
                         cell(n01, row0, col1) + cell(n00, row0, col0);
  return mi < 0.0L ? 0.0 : static_cast<double>(mi);
}

inline double mutual_information(const Contingency& c) {
  return mutual_information(c.n11, c.n10, c.n01, c.n00);
}

/// Ranks every distinct feature of records [begin, end) by MI with the label
/// and keeps the top_n best. Ties on MI break by ascending feature string.
inline FeatureVocabulary rank_and_select(const RawCorpus& corpus,
                                         std::size_t top_n, std::size_t begin,
                                         std::size_t end) {
  using features_detail::kModule;
  if (top_n == 0) throw Error(kModule, "top_n must be >= 1");
  if (begin >= end || end > corpus.records.size())
    throw Error(kModule, "empty training slice");

  struct Counts {
    std::int64_t present_mal = 0;
    std::int64_t present_ben = 0;
  };
  std::unordered_map<std::string_view, Counts> counts;
  std::int64_t n_mal = 0, n_ben = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const bool mal = corpus.records[i].label == 1;
    (mal ? n_mal : n_ben)++;
    for (const auto& f : corpus.features[i]) {
      auto& c = counts[f];
      (mal ? c.present_mal : c.present_ben)++;
    }
  }

  std::vector<VocabEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [feature, c] : counts)
    entries.push_back(VocabEntry{std::string(feature), 0.0});
  // Deterministic order before the parallel MI pass.
  std::sort(entries.begin(), entries.end(),
            [](const VocabEntry& a, const VocabEntry& b) {
              return a.feature < b.feature;
            });
  parallel_for(entries.size(), [&](std::size_t i) {
    const Counts& c = counts.find(entries[i].feature)->second;
    entries[i].mi = mutual_information(c.present_mal, c.present_ben,
                                       n_mal - c.present_mal,
                                       n_ben - c.present_ben);
  });
  std::stable_sort(entries.begin(), entries.end(),
                   [](const VocabEntry& a, const VocabEntry& b) {
                     if (a.mi != b.mi) return a.mi > b.mi;
                     return a.feature < b.feature;
                   });
  if (entries.size() > top_n) entries.resize(top_n);
  return FeatureVocabulary{std::move(entries)};
}

inline FeatureVocabulary rank_and_select(const RawCorpus& corpus,
                                         std::size_t top_n) {
  return rank_and_select(corpus, top_n, 0, corpus.records.size());
}

/// Maps every app onto vocabulary column indices. Out-of-vocabulary features
/// are dropped; rows come out strictly increasing.
inline SparseDataset vectorize(const RawCorpus& corpus,
                               const FeatureVocabulary& vocab) {
  std::unordered_map<std::string_view, std::uint32_t> index;
  index.reserve(vocab.entries.size());
  for (std::uint32_t i = 0; i < vocab.entries.size(); ++i)
    index.emplace(vocab.entries[i].feature, i);

  SparseDataset ds;
  ds.vocab_size = static_cast<std::uint32_t>(vocab.entries.size());
  const std::size_t n = corpus.records.size();
  ds.rows.resize(n);
  ds.labels.resize(n);
  ds.timestamps.resize(n);
  ds.ids.resize(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::uint32_t> row;
    for (const auto& f : corpus.features[i]) {
      auto it = index.find(f);
      if (it != index.end()) row.push_back(it->second);
    }
    std::sort(row.begin(), row.end());
    ds.rows[i] = std::move(row);
    ds.labels[i] = corpus.records[i].label;
    ds.timestamps[i] = corpus.records[i].timestamp;
    ds.ids[i] = corpus.records[i].sha256;
  });
  return ds;
}

// --- persistence -----------------------------------------------------------

/// TSV `index<TAB>feature<TAB>mi`, MI with 12 significant digits. Leading
/// '#' lines carry run metadata and are skipped on load.
inline std::string serialize_vocabulary(
    const FeatureVocabulary& vocab,
    const std::vector<std::string>& meta_comments = {}) {
  std::ostringstream out;
  for (const auto& m : meta_comments) out << "# " << m << "\n";
  char mi_buf[40];
  for (std::size_t i = 0; i < vocab.entries.size(); ++i) {
    std::snprintf(mi_buf, sizeof(mi_buf), "%.12g", vocab.entries[i].mi);
    out << i << '\t' << vocab.entries[i].feature << '\t' << mi_buf << "\n";
  }
  return std::move(out).str();
}

inline void save_vocabulary(const FeatureVocabulary& vocab,
                            const std::filesystem::path& path,
                            const std::vector<std::string>& meta = {}) {
  atomic_write_file(path, serialize_vocabulary(vocab, meta),
                    features_detail::kModule);
}

inline FeatureVocabulary parse_vocabulary(std::string_view text) {
  using features_detail::kModule;
  FeatureVocabulary vocab;
  for (auto line : split_lines(text)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_on(line, '\t');
    if (fields.size() != 3)
      throw Error(kModule, "vocabulary: expected 3 tab-separated fields");
    std::size_t idx = 0;
    auto [p, ec] =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(),
                        idx);
    if (ec != std::errc() || idx != vocab.entries.size())
      throw Error(kModule, "vocabulary: indices must be dense from 0");
    double mi = 0.0;
    std::sscanf(std::string(fields[2]).c_str(), "%lf", &mi);
    vocab.entries.push_back(VocabEntry{std::string(fields[1]), mi});
  }
  return vocab;
}

inline FeatureVocabulary load_vocabulary(const std::filesystem::path& path) {
  return parse_vocabulary(read_file(path, features_detail::kModule));
}

inline constexpr std::string_view kSparseFilePrefix = "driftbench-sparse v1 V=";

inline std::string serialize_sparse_dataset(
    const SparseDataset& ds, const std::vector<std::string>& meta = {}) {
  std::ostringstream out;
  for (const auto& m : meta) out << "# " << m << "\n";
  out << kSparseFilePrefix << ds.vocab_size << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.ids[i] << ' ' << ds.labels[i] << ' ' << ds.timestamps[i];
    if (!ds.rows[i].empty()) {
      out << ' ';
      for (std::size_t k = 0; k < ds.rows[i].size(); ++k) {
        if (k) out << ',';
        out << ds.rows[i][k];
      }
    }
    out << "\n";
  }
  return std::move(out).str();
}

inline void save_sparse_dataset(const SparseDataset& ds,
                                const std::filesystem::path& path,
                                const std::vector<std::string>& meta = {}) {
  atomic_write_file(path, serialize_sparse_dataset(ds, meta),
                    features_detail::kModule);
}

inline SparseDataset parse_sparse_dataset(std::string_view text) {
  using features_detail::kModule;
  SparseDataset ds;
  bool header_seen = false;
  for (auto line : split_lines(text)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.substr(0, kSparseFilePrefix.size()) != kSparseFilePrefix)
        throw Error(kModule, "sparse dataset: version-tag mismatch");
      const auto v = line.substr(kSparseFilePrefix.size());
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(),
                                     ds.vocab_size);
      if (ec != std::errc() || p != v.data() + v.size())
        throw Error(kModule, "sparse dataset: bad vocab size");
      header_seen = true;
      continue;
    }
    const auto fields = split_on(line, ' ');
    if (fields.size() != 3 && fields.size() != 4)
      throw Error(kModule, "sparse dataset: expected 3 or 4 fields");
    if (!is_lower_hex64(fields[0]))
      throw Error(kModule, "sparse dataset: malformed sha256");
    ds.ids.emplace_back(fields[0]);
    if (fields[1] == "0")
      ds.labels.push_back(0);
    else if (fields[1] == "1")
      ds.labels.push_back(1);
    else
      throw Error(kModule, "sparse dataset: bad label");
    std::int64_t ts = 0;
    auto [p, ec] =
        std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(),
                        ts);
    if (ec != std::errc() || p != fields[2].data() + fields[2].size())
      throw Error(kModule, "sparse dataset: bad timestamp");
    ds.timestamps.push_back(ts);
    std::vector<std::uint32_t> row;
    if (fields.size() == 4 && !fields[3].empty()) {
      for (auto tok : split_on(fields[3], ',')) {
        std::uint32_t idx = 0;
        auto [tp, tec] =
            std::from_chars(tok.data(), tok.data() + tok.size(), idx);
        if (tec != std::errc() || tp != tok.data() + tok.size())
          throw Error(kModule, "sparse dataset: bad column index");
        if (idx >= ds.vocab_size)
          throw Error(kModule, "sparse dataset: column index out of range");
        if (!row.empty() && idx <= row.back())
          throw Error(kModule,
                      "sparse dataset: indices must be strictly increasing");
        row.push_back(idx);
      }
    }
    ds.rows.push_back(std::move(row));
  }
  if (!header_seen)
    throw Error(kModule, "sparse dataset: version-tag mismatch");
  for (std::size_t i = 1; i < ds.size(); ++i) {
    const bool ordered =
        ds.timestamps[i - 1] < ds.timestamps[i] ||
        (ds.timestamps[i - 1] == ds.timestamps[i] &&
         ds.ids[i - 1] < ds.ids[i]);
    if (!ordered)
      throw Error(kModule,
                  "sparse dataset: rows must be strictly increasing in "
                  "(timestamp, sha256) near row " +
                      std::to_string(i));
  }
  return ds;
}

inline SparseDataset load_sparse_dataset(const std::filesystem::path& path) {
  return parse_sparse_dataset(read_file(path, features_detail::kModule));
}

}  // namespace driftbench
