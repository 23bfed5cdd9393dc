#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "driftbench/civil.hpp"
#include "driftbench/error.hpp"
#include "driftbench/io.hpp"
#include "driftbench/parallel.hpp"

// App corpus ingest and persistence.
//
// Manifest: CSV with header `sha256,label,first_seen,source`.
// Feature files: one `<sha256>.txt` per app, one `category::value` per line.
// Persisted corpus: versioned single file, layout documented in the README.

namespace driftbench {

inline constexpr std::string_view kManifestHeader =
    "sha256,label,first_seen,source";
inline constexpr std::string_view kCorpusFileHeader = "driftbench-corpus v1";

struct AppRecord {
  std::string sha256;   // 64-char lowercase hex, unique within a corpus
  std::string app_id;   // optional opaque id, empty when unknown
  std::int64_t timestamp = 0;  // days since 1970-01-01, >= 0
  int label = 0;        // 0 = benign, 1 = malware
  std::string source;   // optional market tag

  friend bool operator==(const AppRecord&, const AppRecord&) = default;
};

struct RawCorpus {
  // Sorted ascending by (timestamp, sha256). features[i] belongs to
  // records[i] and is deduplicated and sorted.
  std::vector<AppRecord> records;
  std::vector<std::vector<std::string>> features;

  friend bool operator==(const RawCorpus&, const RawCorpus&) = default;
};

namespace corpus_detail {

inline constexpr std::string_view kModule = "corpus";

inline void validate_record(const AppRecord& r, const std::string& where) {
  if (!is_lower_hex64(r.sha256))
    throw Error(kModule, where + ": malformed sha256 '" + r.sha256 + "'");
  if (r.label != 0 && r.label != 1)
    throw Error(kModule, where + ": label must be 0 or 1");
  if (r.timestamp < 0)
    throw Error(kModule, where + ": timestamp must be >= 0");
}

inline void sort_and_check_unique(std::vector<AppRecord>& records,
                                  std::vector<std::vector<std::string>>* feats) {
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].timestamp != records[b].timestamp)
      return records[a].timestamp < records[b].timestamp;
    return records[a].sha256 < records[b].sha256;
  });
  std::vector<AppRecord> sorted_records;
  sorted_records.reserve(records.size());
  std::vector<std::vector<std::string>> sorted_feats;
  if (feats) sorted_feats.reserve(feats->size());
  for (std::size_t i : order) {
    sorted_records.push_back(std::move(records[i]));
    if (feats) sorted_feats.push_back(std::move((*feats)[i]));
  }
  records = std::move(sorted_records);
  if (feats) *feats = std::move(sorted_feats);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].sha256 == records[i - 1].sha256)
      throw Error(kModule, "duplicate sha256 " + records[i].sha256);
  }
}

}  // namespace corpus_detail

/// Parses and validates a manifest CSV. Records are returned in file order;
/// every rejection names the offending 1-based file line.
inline std::vector<AppRecord> load_manifest_text(std::string_view text) {
  using corpus_detail::kModule;
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kManifestHeader)
    throw Error(kModule, "manifest line 1: expected header '" +
                             std::string(kManifestHeader) + "'");
  std::vector<AppRecord> records;
  std::unordered_map<std::string_view, std::size_t> seen;  // sha -> line
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto where = "manifest line " + std::to_string(line_no);
    std::string_view line = lines[i];
    if (line.empty()) continue;
    const auto fields = split_on(line, ',');
    if (fields.size() != 4)
      throw Error(kModule, where + ": expected 4 comma-separated fields, got " +
                               std::to_string(fields.size()));
    AppRecord r;
    r.sha256 = std::string(fields[0]);
    if (!is_lower_hex64(fields[0]))
      throw Error(kModule,
                  where + ": malformed sha256 '" + r.sha256 + "'");
    if (fields[1] == "0")
      r.label = 0;
    else if (fields[1] == "1")
      r.label = 1;
    else
      throw Error(kModule, where + ": unknown label token '" +
                               std::string(fields[1]) + "'");
    const auto day = parse_iso_date(fields[2]);
    if (!day)
      throw Error(kModule, where + ": unparseable date '" +
                               std::string(fields[2]) + "'");
    if (*day < 0)
      throw Error(kModule, where + ": date precedes 1970-01-01");
    r.timestamp = *day;
    r.source = std::string(fields[3]);
    auto [it, inserted] = seen.emplace(fields[0], line_no);
    if (!inserted)
      throw Error(kModule, where + ": duplicate sha256 '" + r.sha256 +
                               "' (first seen on line " +
                               std::to_string(it->second) + ")");
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<AppRecord> load_manifest(const std::filesystem::path& path) {
  return load_manifest_text(read_file(path, corpus_detail::kModule));
}

/// Parses one feature file body: dedups lines, rejects lines without the
/// `category::value` separator. `name` is used in error messages.
inline std::vector<std::string> parse_feature_file(std::string_view text,
                                                   const std::string& name) {
  using corpus_detail::kModule;
  std::vector<std::string> feats;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.empty()) continue;
    if (line.find("::") == std::string_view::npos)
      throw Error(kModule, name + " line " + std::to_string(i + 1) +
                               ": missing '::' separator in '" +
                               std::string(line) + "'");
    feats.emplace_back(line);
  }
  std::sort(feats.begin(), feats.end());
  feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
  return feats;
}

/// Assembles a validated corpus from parallel record/feature-set arrays.
/// Sorts by (timestamp, sha256) and enforces every corpus invariant; this is
/// also the entry point for synthetically generated corpora.
inline RawCorpus make_corpus(std::vector<AppRecord> records,
                             std::vector<std::vector<std::string>> features) {
  using corpus_detail::kModule;
  if (records.size() != features.size())
    throw Error(kModule, "records/features length mismatch");
  for (std::size_t i = 0; i < records.size(); ++i) {
    corpus_detail::validate_record(records[i], "record " + std::to_string(i));
    auto& f = features[i];
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
  }
  corpus_detail::sort_and_check_unique(records, &features);
  return RawCorpus{std::move(records), std::move(features)};
}

/// Loads `<sha256>.txt` for every record from `dir`. Missing files are
/// reported together, listing every absent hash.
inline RawCorpus load_feature_files(std::vector<AppRecord> records,
                                    const std::filesystem::path& dir) {
  using corpus_detail::kModule;
  std::vector<std::string> missing;
  for (const auto& r : records) {
    if (!std::filesystem::exists(dir / (r.sha256 + ".txt")))
      missing.push_back(r.sha256);
  }
  if (!missing.empty()) {
    std::string msg = "missing feature files for " +
                      std::to_string(missing.size()) + " app(s):";
    for (const auto& h : missing) msg += " " + h;
    throw Error(kModule, msg);
  }
  std::vector<std::vector<std::string>> features(records.size());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const std::string name = records[i].sha256 + ".txt";
    try {
      features[i] = parse_feature_file(read_file(dir / name, kModule), name);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw Error(kModule, e);
  return make_corpus(std::move(records), std::move(features));
}

inline std::string serialize_corpus(const RawCorpus& corpus,
                                    const std::vector<std::string>& meta = {}) {
  std::ostringstream out;
  for (const auto& m : meta) out << "# " << m << "\n";
  out << kCorpusFileHeader << "\n";
  out << "apps " << corpus.records.size() << "\n";
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const AppRecord& r = corpus.records[i];
    out << r.sha256 << '\t' << r.label << '\t' << r.timestamp << '\t'
        << r.source << '\t' << r.app_id << '\t' << corpus.features[i].size()
        << "\n";
    for (const auto& f : corpus.features[i]) out << f << "\n";
  }
  return std::move(out).str();
}

inline void save_corpus(const RawCorpus& corpus,
                        const std::filesystem::path& path,
                        const std::vector<std::string>& meta = {}) {
  atomic_write_file(path, serialize_corpus(corpus, meta),
                    corpus_detail::kModule);
}

inline RawCorpus parse_corpus(std::string_view text) {
  using corpus_detail::kModule;
  const auto lines = split_lines(text);
  std::size_t first = 0;  // leading '#' lines carry run metadata
  while (first < lines.size() && !lines[first].empty() &&
         lines[first][0] == '#')
    ++first;
  if (first >= lines.size() || lines[first] != kCorpusFileHeader)
    throw Error(kModule, "corpus file: version-tag mismatch (expected '" +
                             std::string(kCorpusFileHeader) + "')");
  if (first + 1 >= lines.size() || lines[first + 1].substr(0, 5) != "apps ")
    throw Error(kModule, "corpus file: missing app count");
  std::size_t count = 0;
  {
    const std::string_view n = lines[first + 1].substr(5);
    auto [p, ec] = std::from_chars(n.data(), n.data() + n.size(), count);
    if (ec != std::errc() || p != n.data() + n.size())
      throw Error(kModule, "corpus file: bad app count");
  }
  std::vector<AppRecord> records;
  records.reserve(count);
  std::vector<std::vector<std::string>> features;
  features.reserve(count);
  std::size_t pos = first + 2;
  for (std::size_t i = 0; i < count; ++i) {
    if (pos >= lines.size())
      throw Error(kModule, "corpus file: truncated at app " +
                               std::to_string(i));
    const auto fields = split_on(lines[pos], '\t');
    if (fields.size() != 6)
      throw Error(kModule, "corpus file line " + std::to_string(pos + 1) +
                               ": expected 6 tab-separated fields");
    AppRecord r;
    r.sha256 = std::string(fields[0]);
    if (fields[1] == "0")
      r.label = 0;
    else if (fields[1] == "1")
      r.label = 1;
    else
      throw Error(kModule, "corpus file line " + std::to_string(pos + 1) +
                               ": bad label");
    {
      const std::string_view t = fields[2];
      auto [p, ec] =
          std::from_chars(t.data(), t.data() + t.size(), r.timestamp);
      if (ec != std::errc() || p != t.data() + t.size())
        throw Error(kModule, "corpus file line " + std::to_string(pos + 1) +
                                 ": bad timestamp");
    }
    r.source = std::string(fields[3]);
    r.app_id = std::string(fields[4]);
    std::size_t nfeat = 0;
    {
      const std::string_view n = fields[5];
      auto [p, ec] = std::from_chars(n.data(), n.data() + n.size(), nfeat);
      if (ec != std::errc() || p != n.data() + n.size())
        throw Error(kModule, "corpus file line " + std::to_string(pos + 1) +
                                 ": bad feature count");
    }
    ++pos;
    if (pos + nfeat > lines.size())
      throw Error(kModule, "corpus file: truncated feature block for " +
                               r.sha256);
    std::vector<std::string> feats;
    feats.reserve(nfeat);
    for (std::size_t k = 0; k < nfeat; ++k)
      feats.emplace_back(lines[pos++]);
    records.push_back(std::move(r));
    features.push_back(std::move(feats));
  }
  return make_corpus(std::move(records), std::move(features));
}

inline RawCorpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path, corpus_detail::kModule));
}

}  // namespace driftbench
