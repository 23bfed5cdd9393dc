// driftbench: malware-classifier benchmarking over temporally ordered
// corpora. Subcommands: synth, ingest, features, windows, active, report.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftbench/cli.hpp"
#include "driftbench/parallel.hpp"
#include "driftbench/version.hpp"

namespace {

std::vector<driftbench::Family> parse_families(const std::string& csv) {
  std::vector<driftbench::Family> families;
  for (auto item : driftbench::split_on(csv, ','))
    if (!item.empty()) families.push_back(driftbench::parse_family(item));
  if (families.empty())
    throw driftbench::Error("cli", "no model families given");
  return families;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace driftbench;

  CLI::App app{std::string(kToolName) + " " + kVersion +
               " - drift-aware malware classifier benchmarking"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key/value config file; command-line "
                                 "flags override file values");

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 0;
  app.add_option("--seed", seed, "Master seed recorded in every output");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads,
                 "Worker thread cap (0 = hardware concurrency)")
      ->envname("DRIFTBENCH_THREADS");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string synth_spec_path;
  synth->add_option("--spec", synth_spec_path, "Synth spec file")->required();

  // ingest
  auto* ingest =
      app.add_subcommand("ingest", "Validate and persist a corpus");
  std::string manifest_path, feature_dir;
  ingest->add_option("--manifest", manifest_path, "Manifest CSV")->required();
  ingest->add_option("--features-dir", feature_dir, "Feature file directory")
      ->required();

  // features
  auto* features = app.add_subcommand(
      "features", "Rank features by mutual information and vectorize");
  std::string corpus_path;
  std::size_t top_n = 2919;
  std::string mi_scope = "train";
  double train_frac = 0.75;
  features->add_option("--corpus", corpus_path, "Persisted corpus file")
      ->required();
  features->add_option("--top-n", top_n, "Vocabulary size");
  features->add_option("--mi-scope", mi_scope,
                       "MI estimation scope: train (leak-free prefix) or all");
  features->add_option("--train-frac", train_frac,
                       "Temporal prefix fraction used when --mi-scope=train");

  // windows
  auto* windows = app.add_subcommand(
      "windows", "Sliding-window benchmark over temporal batches");
  std::string windows_dataset;
  WindowsOptions wopt;
  std::string families_csv = "nb,knn,svm,rf,gbdt";
  windows->add_option("--dataset", windows_dataset, "Sparse dataset file")
      ->required();
  windows->add_option("--batch-size", wopt.batch_size, "Apps per batch");
  windows->add_option("--mal-per-batch", wopt.mal_per_batch,
                      "Malware apps per batch");
  windows->add_option("--train-batches", wopt.train_batches,
                      "Training batches per window");
  windows->add_option("--families", families_csv,
                      "Comma-separated model families");
  windows->add_option("--threshold", wopt.threshold,
                      "Malware decision threshold");

  // active
  auto* active = app.add_subcommand(
      "active", "Monthly active-learning loop with a labeling budget");
  std::string active_dataset;
  ActiveOptions aopt;
  std::string active_family = "svm";
  active->add_option("--dataset", active_dataset, "Sparse dataset file")
      ->required();
  active->add_option("--initial-months", aopt.initial_span,
                     "Calendar months in the initial training pool");
  active->add_option("--budget", aopt.budget, "Monthly labeling budget");
  active->add_option("--family", active_family, "Model family");
  active->add_flag("--tune", aopt.tune,
                   "Grid-search hyperparameters on the initial pool");
  active->add_option("--threshold", aopt.threshold,
                     "Malware decision threshold");

  // report
  auto* report = app.add_subcommand(
      "report", "Consolidate run reports into summary and plot tables");
  std::string run_dir;
  report->add_option("--run-dir", run_dir, "Directory holding *_report.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  set_max_threads(threads);
  try {
    if (synth->parsed()) {
      cmd_synth(synth_spec_path, out_dir);
      std::printf("synth: corpus written to %s\n", out_dir.c_str());
    } else if (ingest->parsed()) {
      cmd_ingest(manifest_path, feature_dir, out_dir, seed);
      std::printf("ingest: corpus written to %s/corpus.txt\n",
                  out_dir.c_str());
    } else if (features->parsed()) {
      cmd_features(corpus_path, top_n, parse_mi_scope(mi_scope), train_frac,
                   out_dir, seed);
      std::printf("features: vocab.tsv and dataset.sparse written to %s\n",
                  out_dir.c_str());
    } else if (windows->parsed()) {
      wopt.families = parse_families(families_csv);
      wopt.seed = seed;
      cmd_windows(windows_dataset, wopt, out_dir);
      std::printf("windows: report written to %s\n", out_dir.c_str());
    } else if (active->parsed()) {
      aopt.family = parse_family(active_family);
      aopt.seed = seed;
      cmd_active(active_dataset, aopt, out_dir);
      std::printf("active: report written to %s\n", out_dir.c_str());
    } else if (report->parsed()) {
      cmd_report(run_dir, out_dir, seed);
      std::printf("report: summaries written to %s\n", out_dir.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;  // runtime error
  }
  return 0;
}
