#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xof/classifier.hpp"
#include "xof/config.hpp"
#include "xof/of_module.hpp"
#include "xof/problems.hpp"
#include "xof/random.hpp"

namespace xof {

enum class TrialMode { Explore, Exploit };

struct TrialOutcome {
  TrialMode mode = TrialMode::Explore;
  BitState state;
  int action = 0;
  int label = 0;
  bool correct = false;
  int covered = 0;
  bool ga_ran = false;
};

/// A single-step XCS whose conditions are conjunctions of code fragments.
///
/// One run owns its random stream. Randomness is consumed in trial order:
/// instance sampling, covering, action choice, GA selection, crossover,
/// mutation, deletion.
class Xcs {
 public:
  Xcs(ExperimentConfig config, const Environment& env, std::uint64_t seed);

  /// Runs the next trial; explore and exploit strictly alternate, starting
  /// with explore.
  TrialOutcome step();

  /// Samples an instance and runs one trial in the given mode.
  TrialOutcome run_trial(TrialMode mode);
  /// Same, on a given state.
  TrialOutcome run_trial_on(const BitState& state, TrialMode mode);

  /// Builds (but does not insert) a covering classifier for the state.
  ClassifierPtr cover(const BitState& state, int action);

  void update_action_set(std::span<const ClassifierPtr> aset, double reward);

  /// Niche GA in the action set, if enough time has passed since its last run.
  /// Returns whether offspring were produced.
  bool run_ga(std::span<const ClassifierPtr> aset, const BitState& state);

  /// Roulette deletion until the micro-population fits in N.
  void delete_from_population();

  /// Adds a classifier, merging into an identical rule if one exists.
  void insert(ClassifierPtr cl);

  const std::vector<ClassifierPtr>& population() const { return population_; }
  int micro_size() const { return micro_size_; }
  std::uint64_t trials() const { return trials_; }
  const ExperimentConfig& config() const { return config_; }
  const Environment& environment() const { return env_; }
  OFModule& of() { return of_; }
  const OFModule& of() const { return of_; }
  Rng& rng() { return rng_; }

  /// Builds [M] for the state (updating match counters) and covers missing
  /// actions. Exposed for tests.
  std::vector<ClassifierPtr> form_match_set(const BitState& state, int* covered = nullptr);

  /// Fitness-weighted prediction per action; NaN for actions nobody advocates.
  std::vector<double> prediction_array(std::span<const ClassifierPtr> match_set) const;

 private:
  ClassifierPtr select_parent(std::span<const ClassifierPtr> aset);
  void crossover(std::vector<CodeFragment>& a, std::vector<CodeFragment>& b);
  void mutate(std::vector<CodeFragment>& condition, const BitState& state, const NicheContext* niche);
  void end_of_trial();

  ExperimentConfig config_;
  const Environment& env_;
  Rng rng_;
  OFModule of_;
  std::vector<ClassifierPtr> population_;
  int micro_size_ = 0;
  int condition_limit_;
  std::uint64_t trials_ = 0;
};

}  // namespace xof
