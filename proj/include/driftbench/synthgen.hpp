#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "driftbench/civil.hpp"
#include "driftbench/corpus.hpp"
#include "driftbench/error.hpp"
#include "driftbench/parallel.hpp"
#include "driftbench/rng.hpp"

// Deterministic synthetic corpus generator with controllable concept drift.
// Drift rotates the informative feature block, so models and vocabularies
// trained before an event go stale after it.

namespace driftbench {

namespace synth_detail {
inline constexpr std::string_view kModule = "synthgen";
}

struct DriftEvent {
  std::int64_t day = 0;      // absolute day the rotation takes effect
  std::uint32_t rotation = 0;  // informative-block rotation amount
};

struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t n_apps = 1000;
  double malware_ratio = 0.10;
  std::uint32_t vocab_size = 64;
  std::uint32_t informative = 16;
  // Per-class presence probability per feature; filled from the knobs below
  // by apply_profile_defaults when left empty.
  std::vector<double> malware_profile;
  std::vector<double> benign_profile;
  double hi = 0.85;
  double lo = 0.05;
  double background = 0.10;
  std::vector<DriftEvent> drift;  // sorted by day
  std::int64_t start_day = days_from_civil(2012, 1, 1);
  std::int64_t span_days = 365;
};

/// Default block profiles: the first half of the informative block leans
/// malware, the second half leans benign, the rest is class-neutral noise.
inline void apply_profile_defaults(SynthSpec& spec) {
  if (!spec.malware_profile.empty()) return;
  spec.malware_profile.assign(spec.vocab_size, spec.background);
  spec.benign_profile.assign(spec.vocab_size, spec.background);
  for (std::uint32_t f = 0; f < spec.informative && f < spec.vocab_size; ++f) {
    const bool mal_block = f < spec.informative / 2;
    spec.malware_profile[f] = mal_block ? spec.hi : spec.lo;
    spec.benign_profile[f] = mal_block ? spec.lo : spec.hi;
  }
}

inline void validate_spec(const SynthSpec& spec) {
  using synth_detail::kModule;
  if (spec.n_apps == 0) throw Error(kModule, "n_apps must be > 0");
  if (spec.malware_ratio <= 0.0 || spec.malware_ratio >= 1.0)
    throw Error(kModule, "malware_ratio must be in (0, 1)");
  if (spec.vocab_size < 2) throw Error(kModule, "vocab_size must be >= 2");
  if (spec.informative > spec.vocab_size)
    throw Error(kModule, "informative block exceeds the vocabulary");
  if (spec.span_days < 1) throw Error(kModule, "span_days must be >= 1");
  if (spec.start_day < 0) throw Error(kModule, "start_day must be >= 0");
  for (const auto& d : spec.drift) {
    if (d.rotation >= spec.vocab_size)
      throw Error(kModule, "drift rotation must be < vocab_size");
  }
  if (!spec.malware_profile.empty() &&
      (spec.malware_profile.size() != spec.vocab_size ||
       spec.benign_profile.size() != spec.vocab_size))
    throw Error(kModule, "profiles must match vocab_size");
}

inline std::string synth_feature_name(std::uint32_t f) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "synth::f%05u", f);
  return buf;
}

/// Total informative-block rotation in effect on `day`.
inline std::uint32_t rotation_at(const SynthSpec& spec, std::int64_t day) {
  std::uint32_t r = 0;
  for (const auto& e : spec.drift)
    if (e.day <= day) r += e.rotation;
  return spec.informative > 0 ? r % spec.informative : 0;
}

/// Presence probability of feature f for class `label` on `day`.
inline double profile_at(const SynthSpec& spec, int label, std::uint32_t f,
                         std::int64_t day) {
  const auto& profile =
      label == 1 ? spec.malware_profile : spec.benign_profile;
  if (f >= spec.informative) return profile[f];
  const std::uint32_t r = rotation_at(spec, day);
  return profile[(f + r) % spec.informative];
}

struct SynthCorpus {
  std::vector<AppRecord> records;  // in generation (ordinal) order
  std::vector<std::vector<std::string>> features;
};

inline SynthCorpus generate(const SynthSpec& spec_in) {
  SynthSpec spec = spec_in;
  apply_profile_defaults(spec);
  validate_spec(spec);
  const std::size_t n = spec.n_apps;

  // Bernoulli labels, then flip random entries until the malware count is
  // exactly floor(n * ratio).
  std::vector<int> labels(n);
  {
    Rng rng(derive_seed(spec.seed, 0x6c61626c));
    std::size_t malware = 0;
    for (auto& l : labels) {
      l = rng.next_bernoulli(spec.malware_ratio) ? 1 : 0;
      malware += static_cast<std::size_t>(l);
    }
    const std::size_t target =
        static_cast<std::size_t>(static_cast<double>(n) * spec.malware_ratio);
    while (malware != target) {
      const std::size_t i = rng.next_below(n);
      if (malware > target && labels[i] == 1) {
        labels[i] = 0;
        --malware;
      } else if (malware < target && labels[i] == 0) {
        labels[i] = 1;
        ++malware;
      }
    }
  }

  SynthCorpus out;
  out.records.resize(n);
  out.features.resize(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng(derive_seed(spec.seed, 0x61707000ULL + i));
    AppRecord& r = out.records[i];
    {
      char sha[72];
      Rng id_rng(derive_seed(spec.seed ^ 0x8a9e1f3c5b7d2e4fULL, i));
      std::snprintf(sha, sizeof(sha), "%016llx%016llx%016llx%016llx",
                    static_cast<unsigned long long>(id_rng.next_u64()),
                    static_cast<unsigned long long>(id_rng.next_u64()),
                    static_cast<unsigned long long>(id_rng.next_u64()),
                    static_cast<unsigned long long>(id_rng.next_u64()));
      r.sha256 = sha;
    }
    r.label = labels[i];
    r.timestamp = spec.start_day + static_cast<std::int64_t>(rng.next_below(
                                       static_cast<std::uint64_t>(
                                           spec.span_days)));
    r.source = "synth";
    auto& feats = out.features[i];
    for (std::uint32_t f = 0; f < spec.vocab_size; ++f) {
      if (rng.next_bernoulli(profile_at(spec, r.label, f, r.timestamp)))
        feats.push_back(synth_feature_name(f));
    }
  });
  return out;
}

/// Generated corpus through the regular corpus validation path.
inline RawCorpus generate_corpus(const SynthSpec& spec) {
  SynthCorpus raw = generate(spec);
  return make_corpus(std::move(raw.records), std::move(raw.features));
}

inline std::string synth_manifest_csv(const SynthCorpus& corpus) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : corpus.records) {
    out += r.sha256;
    out += r.label == 1 ? ",1," : ",0,";
    out += format_iso_date(r.timestamp);
    out += ",";
    out += r.source;
    out += "\n";
  }
  return out;
}

/// Writes the manifest CSV and one feature file per app, the exact layout
/// the corpus module ingests.
inline void write_synth_corpus(const SynthSpec& spec,
                               const std::filesystem::path& dir) {
  using synth_detail::kModule;
  const SynthCorpus corpus = generate(spec);
  std::filesystem::create_directories(dir / "features");
  atomic_write_file(dir / "manifest.csv", synth_manifest_csv(corpus),
                    kModule);
  parallel_for(corpus.records.size(), [&](std::size_t i) {
    std::string body;
    for (const auto& f : corpus.features[i]) {
      body += f;
      body += "\n";
    }
    atomic_write_file(
        dir / "features" / (corpus.records[i].sha256 + ".txt"), body,
        kModule);
  });
}

}  // namespace driftbench
