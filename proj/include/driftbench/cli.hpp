#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbench/active.hpp"
#include "driftbench/corpus.hpp"
#include "driftbench/error.hpp"
#include "driftbench/features.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/models.hpp"
#include "driftbench/synthgen.hpp"
#include "driftbench/tuning.hpp"
#include "driftbench/version.hpp"
#include "driftbench/windows.hpp"

// Command implementations behind the driftbench binary. Every run writes
// self-describing outputs (tool version, config hash, master seed) via
// temp-file + rename.

namespace driftbench {

namespace cli_detail {
inline constexpr std::string_view kModule = "cli";
}

using ConfigKv = std::vector<std::pair<std::string, std::string>>;

/// Order-independent hash of the effective option set.
inline std::string config_hash(const ConfigKv& kv) {
  ConfigKv sorted = kv;
  std::sort(sorted.begin(), sorted.end());
  std::string canon;
  for (const auto& [k, v] : sorted) {
    canon += k;
    canon += '=';
    canon += v;
    canon += '\n';
  }
  return hex64(fnv1a64(canon));
}

inline std::vector<std::string> meta_comments(const std::string& hash,
                                              std::uint64_t seed) {
  return {std::string(kToolName) + " " + kVersion, "config=" + hash,
          "seed=" + std::to_string(seed)};
}

inline nlohmann::json hyperparams_json(const Hyperparams& hp) {
  nlohmann::json j;
  j["family"] = std::string(family_name(family_of(hp)));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NbParams>) {
          j["alpha"] = p.alpha;
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          j["k"] = p.k;
        } else if constexpr (std::is_same_v<T, SvmParams>) {
          j["c"] = p.c;
          j["tolerance"] = p.tolerance;
          j["max_epochs"] = p.max_epochs;
        } else if constexpr (std::is_same_v<T, RfParams>) {
          j["n_trees"] = p.n_trees;
          j["max_depth"] = p.max_depth;
          j["feature_fraction"] = p.feature_fraction;
          j["bootstrap"] = p.bootstrap;
        } else if constexpr (std::is_same_v<T, GbdtParams>) {
          j["iterations"] = p.iterations;
          j["learning_rate"] = p.learning_rate;
          j["depth"] = p.depth;
          j["l2_leaf_reg"] = p.l2_leaf_reg;
        } else if constexpr (std::is_same_v<T, MlpParams>) {
          j["hidden"] = p.hidden;
          j["learning_rate"] = p.learning_rate;
          j["epochs"] = p.epochs;
          j["batch_size"] = p.batch_size;
        }
      },
      hp);
  return j;
}

inline nlohmann::json metrics_json(const MetricRecord& m) {
  nlohmann::json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["accuracy"] = m.accuracy;
  j["fnr"] = m.fnr;
  j["fpr"] = m.fpr;
  j["precision_pct"] = format_percent(m.precision);
  j["recall_pct"] = format_percent(m.recall);
  j["f1_pct"] = format_percent(m.f1);
  j["accuracy_pct"] = format_percent(m.accuracy);
  j["fnr_pct"] = format_percent(m.fnr);
  j["fpr_pct"] = format_percent(m.fpr);
  nlohmann::json undefined = nlohmann::json::array();
  if (m.precision_undefined) undefined.push_back("precision");
  if (m.recall_undefined) undefined.push_back("recall");
  if (m.f1_undefined) undefined.push_back("f1");
  if (m.fpr_undefined) undefined.push_back("fpr");
  if (!undefined.empty()) j["undefined"] = undefined;
  return j;
}

inline nlohmann::json report_envelope(std::string_view kind,
                                      const std::string& hash,
                                      std::uint64_t seed) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["kind"] = std::string(kind);
  j["config_hash"] = hash;
  j["seed"] = seed;
  return j;
}

inline void write_json(const nlohmann::json& j,
                       const std::filesystem::path& path) {
  atomic_write_file(path, j.dump(2) + "\n", cli_detail::kModule);
}

// --- ingest ----------------------------------------------------------------

inline void cmd_ingest(const std::filesystem::path& manifest,
                       const std::filesystem::path& feature_dir,
                       const std::filesystem::path& out_dir,
                       std::uint64_t seed) {
  const ConfigKv kv = {{"cmd", "ingest"},
                       {"manifest", manifest.string()},
                       {"features", feature_dir.string()},
                       {"seed", std::to_string(seed)}};
  const auto hash = config_hash(kv);
  std::filesystem::create_directories(out_dir);
  auto records = load_manifest(manifest);
  const auto corpus = load_feature_files(std::move(records), feature_dir);
  save_corpus(corpus, out_dir / "corpus.txt", meta_comments(hash, seed));
}

// --- features ----------------------------------------------------------------

enum class MiScope { train, all };

inline MiScope parse_mi_scope(std::string_view s) {
  if (s == "train") return MiScope::train;
  if (s == "all") return MiScope::all;
  throw Error(cli_detail::kModule,
              "mi-scope must be 'train' or 'all', got '" + std::string(s) +
                  "'");
}

inline void cmd_features(const std::filesystem::path& corpus_path,
                         std::size_t top_n, MiScope scope, double train_frac,
                         const std::filesystem::path& out_dir,
                         std::uint64_t seed) {
  using cli_detail::kModule;
  if (train_frac <= 0.0 || train_frac > 1.0)
    throw Error(kModule, "train-frac must be in (0, 1]");
  const ConfigKv kv = {
      {"cmd", "features"},
      {"corpus", corpus_path.string()},
      {"top_n", std::to_string(top_n)},
      {"mi_scope", scope == MiScope::train ? "train" : "all"},
      {"train_frac", format_double(train_frac)},
      {"seed", std::to_string(seed)}};
  const auto hash = config_hash(kv);
  std::filesystem::create_directories(out_dir);

  const auto corpus = load_corpus(corpus_path);
  if (corpus.records.empty()) throw Error(kModule, "corpus is empty");
  std::size_t end = corpus.records.size();
  if (scope == MiScope::train) {
    end = static_cast<std::size_t>(
        static_cast<double>(corpus.records.size()) * train_frac);
    end = std::max<std::size_t>(1, std::min(end, corpus.records.size()));
  }
  const auto vocab = rank_and_select(corpus, top_n, 0, end);
  const auto ds = vectorize(corpus, vocab);
  const auto meta = meta_comments(hash, seed);
  save_vocabulary(vocab, out_dir / "vocab.tsv", meta);
  save_sparse_dataset(ds, out_dir / "dataset.sparse", meta);
}

// --- windows ----------------------------------------------------------------

struct WindowsOptions {
  std::size_t batch_size = 5000;
  std::size_t mal_per_batch = 300;
  std::size_t train_batches = 6;
  std::vector<Family> families = {Family::nb, Family::knn, Family::svm,
                                  Family::rf, Family::gbdt};
  double threshold = 0.5;
  std::uint64_t seed = 0;
};

inline nlohmann::json plan_json(const SparseDataset& ds,
                                const std::vector<Batch>& batches,
                                const WindowPlan& plan) {
  nlohmann::json j;
  j["batches"] = nlohmann::json::array();
  for (const auto& b : batches) {
    nlohmann::json jb;
    jb["ordinal"] = b.ordinal;
    jb["n_mal"] = b.n_mal;
    jb["n_ben"] = b.n_ben;
    jb["short"] = b.short_batch;
    jb["first_sha256"] = ds.ids[b.row_ids.front()];
    jb["first_day"] = ds.timestamps[b.row_ids.front()];
    jb["last_sha256"] = ds.ids[b.row_ids.back()];
    jb["last_day"] = ds.timestamps[b.row_ids.back()];
    j["batches"].push_back(jb);
  }
  j["windows"] = nlohmann::json::array();
  for (const auto& w : plan.windows) {
    nlohmann::json jw;
    jw["train_batches"] = w.train_batches;
    jw["val_batch"] = w.val_batch;
    jw["test_batch"] = w.test_batch;
    std::size_t train_rows = 0;
    for (auto b : w.train_batches) train_rows += batches[b].row_ids.size();
    jw["train_rows"] = train_rows;
    jw["val_rows"] = batches[w.val_batch].row_ids.size();
    jw["test_rows"] = batches[w.test_batch].row_ids.size();
    j["windows"].push_back(jw);
  }
  return j;
}

struct WindowResult {
  std::size_t window = 0;
  Family family = Family::nb;
  MetricRecord test_metrics;
  double val_f1 = 0.0;
  std::vector<double> candidate_val_f1;
  std::size_t best_candidate = 0;
};

inline std::vector<WindowResult> run_windows_experiment(
    const SparseDataset& ds, const std::vector<Batch>& batches,
    const WindowPlan& plan, const WindowsOptions& opt) {
  std::vector<WindowResult> results(plan.windows.size() *
                                    opt.families.size());
  parallel_for(plan.windows.size(), [&](std::size_t wi) {
    const auto& w = plan.windows[wi];
    std::vector<std::uint32_t> train;
    for (auto b : w.train_batches)
      train.insert(train.end(), batches[b].row_ids.begin(),
                   batches[b].row_ids.end());
    const auto& val = batches[w.val_batch].row_ids;
    const auto& test = batches[w.test_batch].row_ids;
    std::vector<int> actual;
    actual.reserve(test.size());
    for (auto r : test) actual.push_back(ds.labels[r]);

    for (std::size_t fi = 0; fi < opt.families.size(); ++fi) {
      const auto grid = default_grid(opt.families[fi]);
      const auto gs = grid_search(grid, ds, train, val,
                                  derive_seed(derive_seed(opt.seed, wi), fi));
      const auto preds = predict(score(gs.best, ds, test), opt.threshold);
      WindowResult r;
      r.window = wi;
      r.family = opt.families[fi];
      r.test_metrics = compute_metrics(confusion(actual, preds));
      r.val_f1 = gs.validation_f1[gs.best_index];
      r.candidate_val_f1 = gs.validation_f1;
      r.best_candidate = gs.best_index;
      results[wi * opt.families.size() + fi] = std::move(r);
    }
  });
  return results;
}

inline std::string windows_csv(const std::vector<WindowResult>& results,
                               const std::vector<std::string>& meta) {
  std::string out;
  for (const auto& m : meta) out += "# " + m + "\n";
  out += "window,model,precision,recall,f1,val_f1\n";
  for (const auto& r : results) {
    out += std::to_string(r.window);
    out += ',';
    out += family_name(r.family);
    out += ',';
    out += format_double(r.test_metrics.precision);
    out += ',';
    out += format_double(r.test_metrics.recall);
    out += ',';
    out += format_double(r.test_metrics.f1);
    out += ',';
    out += format_double(r.val_f1);
    out += '\n';
  }
  return out;
}

inline void cmd_windows(const std::filesystem::path& dataset_path,
                        const WindowsOptions& opt,
                        const std::filesystem::path& out_dir) {
  ConfigKv kv = {{"cmd", "windows"},
                 {"dataset", dataset_path.string()},
                 {"batch_size", std::to_string(opt.batch_size)},
                 {"mal_per_batch", std::to_string(opt.mal_per_batch)},
                 {"train_batches", std::to_string(opt.train_batches)},
                 {"threshold", format_double(opt.threshold)},
                 {"seed", std::to_string(opt.seed)}};
  std::string families;
  for (const auto f : opt.families) {
    if (!families.empty()) families += ',';
    families += family_name(f);
  }
  kv.emplace_back("families", families);
  const auto hash = config_hash(kv);
  std::filesystem::create_directories(out_dir);

  const auto ds = load_sparse_dataset(dataset_path);
  const auto batches = make_batches(ds, opt.batch_size, opt.mal_per_batch);
  const auto plan = plan_windows(batches, opt.train_batches);
  const auto results = run_windows_experiment(ds, batches, plan, opt);

  nlohmann::json j = report_envelope("windows", hash, opt.seed);
  j["config"] = {{"dataset", dataset_path.string()},
                 {"batch_size", opt.batch_size},
                 {"mal_per_batch", opt.mal_per_batch},
                 {"train_batches", opt.train_batches},
                 {"families", families},
                 {"threshold", opt.threshold}};
  j["plan"] = plan_json(ds, batches, plan);
  j["results"] = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json jr;
    jr["window"] = r.window;
    jr["model"] = std::string(family_name(r.family));
    jr["test"] = metrics_json(r.test_metrics);
    jr["val_f1"] = r.val_f1;
    jr["candidate_val_f1"] = r.candidate_val_f1;
    jr["best_candidate"] = r.best_candidate;
    j["results"].push_back(jr);
  }
  write_json(j, out_dir / "windows_report.json");
  atomic_write_file(out_dir / "windows_report.csv",
                    windows_csv(results, meta_comments(hash, opt.seed)),
                    cli_detail::kModule);
}

// --- active ----------------------------------------------------------------

struct ActiveOptions {
  std::size_t initial_span = 12;
  std::size_t budget = 50;
  Family family = Family::svm;
  bool tune = false;
  double threshold = 0.5;
  std::uint64_t seed = 0;
};

inline void cmd_active(const std::filesystem::path& dataset_path,
                       const ActiveOptions& opt,
                       const std::filesystem::path& out_dir) {
  const ConfigKv kv = {{"cmd", "active"},
                       {"dataset", dataset_path.string()},
                       {"initial_span", std::to_string(opt.initial_span)},
                       {"budget", std::to_string(opt.budget)},
                       {"family", std::string(family_name(opt.family))},
                       {"tune", opt.tune ? "1" : "0"},
                       {"threshold", format_double(opt.threshold)},
                       {"seed", std::to_string(opt.seed)}};
  const auto hash = config_hash(kv);
  std::filesystem::create_directories(out_dir);

  const auto ds = load_sparse_dataset(dataset_path);
  const auto split = plan_monthly(ds, opt.initial_span);

  ActiveConfig config;
  const auto grid = default_grid(opt.family);
  config.hyperparams = grid.candidates.front();
  if (opt.tune) config.tune_grid = grid;
  config.budget = opt.budget;
  config.threshold = opt.threshold;
  config.seed = opt.seed;
  const auto trace = run_active_loop(config, split, ds);

  nlohmann::json j = report_envelope("active", hash, opt.seed);
  j["config"] = {{"dataset", dataset_path.string()},
                 {"initial_span", opt.initial_span},
                 {"budget", opt.budget},
                 {"family", std::string(family_name(opt.family))},
                 {"tune", opt.tune},
                 {"threshold", opt.threshold}};
  j["chosen_hyperparams"] = hyperparams_json(trace.chosen);
  j["initial_train_size"] = split.initial_train.size();
  j["months"] = nlohmann::json::array();
  for (const auto& m : trace.months) {
    nlohmann::json jm;
    jm["month"] = m.tag;
    jm["confusion"] = {{"tp", m.cm.tp},
                       {"fn", m.cm.fn},
                       {"fp", m.cm.fp},
                       {"tn", m.cm.tn}};
    jm["metrics"] = metrics_json(m.metrics);
    nlohmann::json selected = nlohmann::json::array();
    for (auto r : m.selected) selected.push_back(ds.ids[r]);
    jm["selected"] = selected;
    jm["train_size_at_scoring"] = m.train_size_at_scoring;
    jm["train_size_after"] = m.train_size_after;
    j["months"].push_back(jm);
  }
  j["averages"] = {{"fnr", trace.averages.fnr},
                   {"fpr", trace.averages.fpr},
                   {"f1", trace.averages.f1},
                   {"fnr_pct", format_percent(trace.averages.fnr)},
                   {"fpr_pct", format_percent(trace.averages.fpr)},
                   {"f1_pct", format_percent(trace.averages.f1)}};
  write_json(j, out_dir / "active_report.json");
}

// --- synth -------------------------------------------------------------------

/// Flat key/value synth spec file; '#' comments and blank lines allowed.
inline SynthSpec parse_synth_spec(std::string_view text) {
  using cli_detail::kModule;
  SynthSpec spec;
  for (auto line : split_lines(text)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(kModule, "synth spec: expected key = value, got '" +
                               std::string(line) + "'");
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
      return s;
    };
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    try {
      if (key == "seed")
        spec.seed = std::stoull(value);
      else if (key == "apps")
        spec.n_apps = std::stoull(value);
      else if (key == "ratio")
        spec.malware_ratio = std::stod(value);
      else if (key == "vocab")
        spec.vocab_size = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "informative")
        spec.informative = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "hi")
        spec.hi = std::stod(value);
      else if (key == "lo")
        spec.lo = std::stod(value);
      else if (key == "background")
        spec.background = std::stod(value);
      else if (key == "start") {
        const auto day = parse_iso_date(value);
        if (!day) throw Error(kModule, "synth spec: bad start date");
        spec.start_day = *day;
      } else if (key == "span_days")
        spec.span_days = std::stoll(value);
      else if (key == "drift") {
        // comma list of <day-offset>:<rotation>
        for (auto item : split_on(value, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string_view::npos)
            throw Error(kModule,
                        "synth spec: drift items are <day>:<rotation>");
          DriftEvent e;
          e.day = std::stoll(std::string(item.substr(0, colon)));
          e.rotation = static_cast<std::uint32_t>(
              std::stoul(std::string(item.substr(colon + 1))));
          spec.drift.push_back(e);
        }
      } else {
        throw Error(kModule, "synth spec: unknown key '" + key + "'");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(kModule, "synth spec: bad value for '" + key + "'");
    }
  }
  // drift days are relative to the start day
  for (auto& e : spec.drift) e.day += spec.start_day;
  std::sort(spec.drift.begin(), spec.drift.end(),
            [](const DriftEvent& a, const DriftEvent& b) {
              return a.day < b.day;
            });
  return spec;
}

inline void cmd_synth(const std::filesystem::path& spec_path,
                      const std::filesystem::path& out_dir) {
  const auto spec_text = read_file(spec_path, cli_detail::kModule);
  const auto spec = parse_synth_spec(spec_text);
  std::filesystem::create_directories(out_dir);
  write_synth_corpus(spec, out_dir);
  // The manifest/feature-file layout is pinned by the corpus module, so run
  // metadata goes into a sidecar instead of comment lines.
  const ConfigKv kv = {{"cmd", "synth"}, {"spec", spec_text}};
  nlohmann::json j = report_envelope("synth", config_hash(kv), spec.seed);
  j["spec"] = {{"apps", spec.n_apps},
               {"malware_ratio", spec.malware_ratio},
               {"vocab_size", spec.vocab_size},
               {"informative", spec.informative},
               {"span_days", spec.span_days},
               {"start_day", spec.start_day},
               {"drift_events", spec.drift.size()}};
  write_json(j, out_dir / "synth_run.json");
}

// --- report ------------------------------------------------------------------

inline void cmd_report(const std::filesystem::path& run_dir,
                       const std::filesystem::path& out_dir,
                       std::uint64_t seed) {
  using cli_detail::kModule;
  std::vector<std::filesystem::path> report_files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(run_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name == "windows_report.json" || name == "active_report.json")
      report_files.push_back(entry.path());
  }
  std::sort(report_files.begin(), report_files.end());
  if (report_files.empty())
    throw Error(kModule, "no *_report.json files under " + run_dir.string());
  std::filesystem::create_directories(out_dir);

  const ConfigKv kv = {{"cmd", "report"},
                       {"run_dir", run_dir.string()},
                       {"seed", std::to_string(seed)}};
  const auto hash = config_hash(kv);
  const auto meta = meta_comments(hash, seed);
  nlohmann::json merged = report_envelope("report", hash, seed);
  merged["sources"] = nlohmann::json::array();
  std::string windows_rows;
  std::string active_rows;
  // window -> model -> f1, for the plot table
  std::map<std::size_t, std::map<std::string, double>> plot;
  std::set<std::string> plot_models;

  for (const auto& path : report_files) {
    const auto j = nlohmann::json::parse(read_file(path, kModule));
    nlohmann::json src;
    src["path"] = path.string();
    src["kind"] = j.value("kind", "?");
    src["config_hash"] = j.value("config_hash", "?");
    src["seed"] = j.value("seed", 0);
    src["report"] = j;
    merged["sources"].push_back(src);
    if (j.value("kind", "") == "windows") {
      for (const auto& r : j["results"]) {
        const std::size_t w = r["window"].get<std::size_t>();
        const std::string model = r["model"].get<std::string>();
        const double f1 = r["test"]["f1"].get<double>();
        windows_rows += std::to_string(w) + "," + model + "," +
                        format_double(r["test"]["precision"].get<double>()) +
                        "," +
                        format_double(r["test"]["recall"].get<double>()) +
                        "," + format_double(f1) + "," +
                        format_double(r["val_f1"].get<double>()) + "\n";
        plot[w][model] = f1;
        plot_models.insert(model);
      }
    } else if (j.value("kind", "") == "active") {
      const std::string family = j["config"]["family"].get<std::string>();
      for (const auto& m : j["months"]) {
        active_rows += m["month"].get<std::string>() + "," + family + "," +
                       format_double(m["metrics"]["fnr"].get<double>()) +
                       "," +
                       format_double(m["metrics"]["fpr"].get<double>()) +
                       "," + format_double(m["metrics"]["f1"].get<double>()) +
                       "\n";
      }
    }
  }

  write_json(merged, out_dir / "report.json");
  std::string meta_lines;
  for (const auto& m : meta) meta_lines += "# " + m + "\n";
  if (!windows_rows.empty()) {
    atomic_write_file(out_dir / "windows_summary.csv",
                      meta_lines + "window,model,precision,recall,f1,val_f1\n" +
                          windows_rows,
                      kModule);
    std::string plot_csv = meta_lines + "window";
    for (const auto& m : plot_models) plot_csv += "," + m;
    plot_csv += "\n";
    for (const auto& [w, row] : plot) {
      plot_csv += std::to_string(w);
      for (const auto& m : plot_models) {
        plot_csv += ",";
        const auto it = row.find(m);
        if (it != row.end()) plot_csv += format_double(it->second);
      }
      plot_csv += "\n";
    }
    atomic_write_file(out_dir / "plot_f1.csv", plot_csv, kModule);
  }
  if (!active_rows.empty()) {
    atomic_write_file(out_dir / "active_summary.csv",
                      meta_lines + "month,model,fnr,fpr,f1\n" + active_rows,
                      kModule);
  }
}

}  // namespace driftbench
