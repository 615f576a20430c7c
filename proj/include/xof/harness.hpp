#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xof/config.hpp"
#include "xof/metrics.hpp"
#include "xof/of_module.hpp"

namespace xof {

struct RunSpec {
  std::string problem = "mux-2";
  Variant variant = Variant::GCFF_NCF;
  std::uint64_t seed = 1;
  std::uint64_t trials = 10000;
  /// Population size; overrides config.N when positive.
  int population = 0;
  ExperimentConfig config;
  /// Where result files go; nothing is written when empty.
  std::filesystem::path out_dir;
  std::uint64_t snapshot_interval = 500;
  std::size_t accuracy_window = 50;
  int generality_samples = 200;
  /// Also write the OF-module trace counters to stderr.
  bool trace = false;
};

struct RunResult {
  RunSpec spec;
  std::vector<MetricsRow> rows;
  OfTrace trace;
  bool stuck = false;
  std::filesystem::path csv_path;

  double final_accuracy() const { return rows.empty() ? 0.0 : rows.back().accuracy; }
  std::optional<double> final_generality_rate() const {
    return rows.empty() ? std::nullopt : rows.back().generality_rate;
  }
  /// First snapshot trial at which moving accuracy reached `threshold`.
  std::optional<std::uint64_t> first_reaching(double threshold) const;
};

/// File stem "<problem>_<variant>_s<seed>".
std::string run_stem(const RunSpec& spec);

/// Runs one learning experiment. Snapshots are taken every
/// snapshot_interval trials and at the end. When out_dir is set, writes
/// <stem>.csv, <stem>.pop (population dump), <stem>.ol (OL dump) and
/// <stem>.summary. Throws ConfigError on invalid specs before any work.
RunResult run_experiment(const RunSpec& spec);

/// A run is stuck when every snapshot in its final 20% of trials has moving
/// accuracy within [0.45, 0.55].
bool is_stuck(const std::vector<MetricsRow>& rows, std::uint64_t total_trials);

/// Runs seeds first..last (inclusive) of the same spec, `jobs` at a time, and
/// writes <problem>_<variant>_mean.csv with the per-snapshot mean over seeds.
std::vector<RunResult> run_sweep(const RunSpec& base, std::uint64_t first_seed, std::uint64_t last_seed, int jobs = 1);

/// Row-wise mean of aligned series; generality is averaged over the seeds
/// where it is defined and left undefined when none is.
std::vector<MetricsRow> mean_series(const std::vector<std::vector<MetricsRow>>& series);

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a metrics CSV. Errors name the file and the 1-based line.
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Renders mean accuracy and generality-rate curves, one line per variant
/// (grouped by the <variant> part of "<problem>_<variant>_s<seed>.csv"), as
/// an SVG file. Undefined generality values leave gaps.
void plot_curves(const std::vector<std::filesystem::path>& csv_paths, const std::filesystem::path& out_file);

/// All run CSVs (not *_mean.csv) in a directory, sorted by name.
std::vector<std::filesystem::path> find_run_csvs(const std::filesystem::path& dir);

}  // namespace xof
