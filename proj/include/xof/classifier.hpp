#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xof/bit_state.hpp"
#include "xof/cf_tree.hpp"

namespace xof {

/// Rate computations treat an empty condition as having this complexity.
inline constexpr int kComplexityFloor = 1;

/// An XCS rule whose condition is a conjunction of code fragments.
///
/// The condition and action are fixed at construction; the learning
/// parameters are plain data updated by the learner.
class Classifier {
 public:
  Classifier(std::vector<CodeFragment> condition, int action);

  const std::vector<CodeFragment>& condition() const { return condition_; }
  int action() const { return action_; }
  /// Sum of leaf counts over the condition.
  int complexity() const { return complexity_; }
  /// Canonical keys of the condition, sorted. Used for subsumption and for
  /// detecting identical rules.
  const std::vector<std::string>& sorted_keys() const { return sorted_keys_; }
  bool contains(const std::string& cf_key) const;
  bool same_rule(const Classifier& other) const {
    return action_ == other.action_ && sorted_keys_ == other.sorted_keys_;
  }

  double prediction = 10.0;
  double error = 0.0;
  double fitness = 0.01;
  int numerosity = 1;
  int experience = 0;
  double action_set_size = 1.0;
  std::uint64_t matches = 0;
  std::uint64_t no_matches = 0;
  std::uint64_t ga_timestamp = 0;

 private:
  std::vector<CodeFragment> condition_;
  std::vector<std::string> sorted_keys_;
  int action_;
  int complexity_ = 0;
};

using ClassifierPtr = std::shared_ptr<Classifier>;

bool matches(const Classifier& cl, const BitState& state);

/// Fitness per unit of complexity.
double fitness_rate(const Classifier& cl);

/// Empirical match frequency; nullopt before the first observation.
std::optional<double> generality(const Classifier& cl);

/// Generality per unit of complexity; nullopt before the first observation.
std::optional<double> generality_rate(const Classifier& cl);

/// Structural subsumption: general is experienced and accurate, advocates the
/// same action, and its condition keys are a sub-multiset of specific's.
bool does_subsume(const Classifier& general, const Classifier& specific, int theta_sub, double epsilon0);

/// True when every condition key of general also occurs in specific.
bool is_more_general(const Classifier& general, const Classifier& specific);

/// Condition in CF notation joined by ",".
std::string condition_string(const Classifier& cl);

/// One population-dump line:
/// condition ":" action, then p, ε, F, numerosity, experience, generality,
/// complexity separated by tabs. Generality is blank when undefined.
std::string dump_line(const Classifier& cl);

}  // namespace xof
