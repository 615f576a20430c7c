#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xof {

/// Which CF-fitness and OL maintenance scheme the OF module runs.
///
/// BF       - CF-fitness from the highest-fitness classifier (fitness per CF),
///            OL rebuilt by tournament every `bf_ol_interval` trials.
/// SCFF     - same CF-fitness, OL updated every trial by the selectivity rule.
/// GCFF     - CF-fitness tracks the best fitness rate (fitness per leaf).
/// GCFF_NCF - GCFF plus niche-calibrated CF selection.
enum class Variant { BF, SCFF, GCFF, GCFF_NCF };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

inline bool uses_rate_fitness(Variant v) { return v == Variant::GCFF || v == Variant::GCFF_NCF; }

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int N = 2000;                      // max micro-population size
  double beta = 0.2;                 // rule learning rate
  double beta_cf = 0.001;            // CF-fitness learning rate
  double chi = 0.2;                  // crossover probability
  double mu = 0.9;                   // mutation probability, per offspring
  int theta_del = 20;
  int theta_sub = 50;
  int theta_ga = 25;
  double f_init = 0.01;              // fitness of covered classifiers
  double p_init = 10.0;              // prediction of covered classifiers
  double epsilon_init = 0.0;         // error of covered classifiers
  double p_spec = 0.25;              // per-slot probability when covering
  int max_condition_len = 0;         // 0: twice the attribute count
  double epsilon0 = 10.0;
  double alpha = 0.1;
  double nu = 5.0;
  double delta = 0.1;
  double reward = 1000.0;
  double tournament_fraction = 0.4;
  double ga_fitness_reduction = 0.1;
  bool ga_subsumption = true;
  double ol_selectivity = 0.9;
  double niche_discount = 0.1;       // local CF-fitness factor for CFs absent from [A]
  int max_depth = 20;
  double p_new = 0.5;                // probability a CF request grows a new CF
  int bf_ol_interval = 500;
  int bf_tournament_size = 4;
  int bf_ol_capacity = 50;
  int registry_prune_interval = 500;
  Variant variant = Variant::GCFF_NCF;

  /// Resolved condition length cap for a problem with n attributes.
  int condition_limit(int attribute_count) const {
    return max_condition_len > 0 ? max_condition_len : 2 * attribute_count;
  }

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  /// Sets one field by name (names as declared above; "variant" takes a
  /// variant name). Throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
};

/// Reads a flat "key = value" file. '#' starts a comment.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

}  // namespace xof
