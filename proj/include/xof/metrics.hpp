#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "xof/classifier.hpp"
#include "xof/config.hpp"
#include "xof/problems.hpp"
#include "xof/random.hpp"

namespace xof {

/// Niche-sampled structural efficiency of a population.
///
/// For each sampled instance, the action set of the correct action is formed
/// and its experienced (experience >= theta_ga) and accurate (error <=
/// epsilon0) member with the highest fitness rate is picked. The mean
/// generality rate of the distinct picks is returned; nullopt when no niche
/// has a qualifying classifier.
std::optional<double> population_generality_rate(std::span<const ClassifierPtr> population, const Environment& env,
                                                 int sample_count, const ExperimentConfig& config, Rng& rng);

struct MetricsRow {
  std::uint64_t trials = 0;
  double accuracy = 0.0;
  std::optional<double> generality_rate;
  std::size_t macro_size = 0;
  std::size_t ol_size = 0;
  double mean_cf_depth = 0.0;
};

/// Moving exploit accuracy plus the learning-curve series.
class MetricsRecorder {
 public:
  explicit MetricsRecorder(std::size_t window = 50) : window_(window) {}

  void record_exploit(bool correct);
  /// Fraction correct over the last `window` exploit trials (fewer when the
  /// window is not yet full); 0 before any exploit trial.
  double moving_accuracy() const;
  std::size_t recorded() const { return recorded_; }

  void add_row(MetricsRow row);
  const std::vector<MetricsRow>& rows() const { return rows_; }

  static constexpr const char* kCsvHeader = "trials,accuracy,generality_rate,macro_size,ol_size,mean_cf_depth";
  /// Header plus one line per row; undefined generality rates are left blank.
  void write_csv(std::ostream& out) const;

 private:
  std::size_t window_;
  std::deque<bool> recent_;
  std::size_t correct_in_window_ = 0;
  std::size_t recorded_ = 0;
  std::vector<MetricsRow> rows_;
};

/// Mean depth over the CFs in the population's conditions (0 when none).
double mean_cf_depth(std::span<const ClassifierPtr> population);

}  // namespace xof
