#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "xof/classifier.hpp"
#include "xof/config.hpp"
#include "xof/random.hpp"

namespace xof {

/// Everything the OF module knows about one code fragment.
struct CfRecord {
  CodeFragment cf;
  double fitness = 0.0;
  /// Classifier currently defining the fitness target. For BF and SCFF this is
  /// the highest-fitness classifier containing the CF, for GCFF variants the
  /// one with the highest fitness rate.
  std::weak_ptr<const Classifier> best;
};

/// Per-variant view of how well a classifier supports its CFs.
double classifier_quality(const Classifier& cl, Variant variant);

/// True when a should replace b as a CF's best classifier: higher quality,
/// then higher numerosity, then lower complexity.
bool better_classifier(const Classifier& a, const Classifier& b, Variant variant);

/// Fitness divided by the number of CFs in the condition; the applicability
/// value each CF of cl is a candidate to receive under BF and SCFF.
/// Empty conditions yield 0 (they carry no CFs to credit).
double cf_fitness_scff(const Classifier& cl);

/// One Widrow-Hoff step of a CF-fitness towards target.
inline double cf_fitness_step(double current, double target, double beta_cf) {
  return current + beta_cf * (target - current);
}

/// The current action set as seen by the niching calibration.
class NicheContext {
 public:
  explicit NicheContext(std::span<const ClassifierPtr> aset);

  bool contains_classifier(const Classifier* cl) const { return members_.contains(cl); }
  /// Highest fitness rate among members containing the CF, or nullopt when no
  /// member contains it.
  std::optional<double> local_best_rate(const std::string& cf_key) const;

 private:
  std::unordered_set<const Classifier*> members_;
  std::unordered_map<std::string, double> best_rate_;
};

/// Counters recording which OF-module rules fired. Useful for checking that
/// variants only differ in OF behaviour.
struct OfTrace {
  std::uint64_t scff_fitness_updates = 0;
  std::uint64_t gcff_fitness_updates = 0;
  std::uint64_t simplified_ol_updates = 0;
  std::uint64_t tournament_ol_rebuilds = 0;
  std::uint64_t niche_case_best_in_niche = 0;
  std::uint64_t niche_case_absent = 0;
  std::uint64_t niche_case_scaled = 0;
  std::uint64_t generated_cfs = 0;
  std::uint64_t reused_cfs = 0;
  std::uint64_t bootstrap_leaves = 0;
};

/// The Online Feature-generation module: owns the CF registry and the
/// Observed List, scores CFs and serves CF requests from covering and the GA.
class OFModule {
 public:
  OFModule(const ExperimentConfig& config, int attribute_count);

  /// Returns a registered CF that evaluates to 1 on `state`. With probability
  /// p_new a new CF is grown, otherwise an OL entry is roulette-selected
  /// (weighted by local CF-fitness under GCFF_NCF when a niche is given).
  /// An empty OL yields a random leaf.
  CodeFragment request_cf(const BitState& state, const NicheContext* niche, Rng& rng);

  /// Combines two roulette-selected OL entries with a random function.
  CodeFragment generate_new_cf(const NicheContext* niche, Rng& rng);

  /// Registers cf (deduplicated by canonical key) and returns the registered
  /// instance.
  CodeFragment intern(const CodeFragment& cf);

  /// Moves the CF-fitness of every CF in the action set towards the value of
  /// its best classifier.
  void update_cf_fitness(std::span<const ClassifierPtr> aset);

  /// Niche-calibrated CF-fitness of a record against the current action set.
  double local_cf_fitness(const CfRecord& record, const NicheContext& niche);

  /// Selectivity-based OL maintenance for one action set. No-op for BF.
  void update_ol(std::span<const ClassifierPtr> aset);

  /// BF maintenance: replaces the OL by tournament selection over the registry.
  void rebuild_ol_by_tournament(Rng& rng);

  /// Drops registry records that are neither in the OL nor used by any
  /// classifier of the population.
  void prune(std::span<const ClassifierPtr> population);

  const CfRecord* find(const std::string& key) const;
  CfRecord* find(const std::string& key);
  bool in_ol(const std::string& key) const { return ol_.contains(key); }
  std::size_t ol_size() const { return ol_.size(); }
  std::size_t registry_size() const { return registry_.size(); }

  /// OL records sorted by descending CF-fitness (ties by key).
  std::vector<const CfRecord*> ol_by_fitness() const;
  /// Rows of "<CF notation>\t<cf_fitness>".
  void dump_ol(std::ostream& out) const;

  /// Adds every attribute in both polarities to the OL as a permanent member:
  /// the selectivity rule and BF rebuilds never drop them, so the original
  /// attributes stay available as building blocks.
  void seed_base_leaves();
  bool is_base_leaf(const std::string& key) const { return base_leaves_.contains(key); }

  /// Directly place a CF in the OL with a given fitness. Used by tests and by
  /// tools that seed an OL.
  CfRecord& insert_into_ol(const CodeFragment& cf, double fitness);

  const OfTrace& trace() const { return trace_; }
  const ExperimentConfig& config() const { return config_; }

 private:
  CfRecord& record_for(const CodeFragment& cf);
  double initial_fitness();
  const CfRecord* roulette(const NicheContext* niche, Rng& rng, const CfRecord* exclude = nullptr);

  ExperimentConfig config_;
  int attribute_count_;
  std::map<std::string, CfRecord, std::less<>> registry_;
  std::map<std::string, CfRecord*, std::less<>> ol_;
  std::unordered_set<std::string> base_leaves_;
  std::optional<double> ol_median_cache_;
  OfTrace trace_;
};

}  // namespace xof
