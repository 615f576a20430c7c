#include "xof/classifier.hpp"

#include <algorithm>
#include <cstdio>

namespace xof {

Classifier::Classifier(std::vector<CodeFragment> condition, int action)
    : condition_(std::move(condition)), action_(action) {
  sorted_keys_.reserve(condition_.size());
  for (const CodeFragment& cf : condition_) {
    complexity_ += cf.complexity();
    sorted_keys_.push_back(cf.key());
  }
  std::sort(sorted_keys_.begin(), sorted_keys_.end());
}

bool Classifier::contains(const std::string& cf_key) const {
  return std::binary_search(sorted_keys_.begin(), sorted_keys_.end(), cf_key);
}

bool matches(const Classifier& cl, const BitState& state) {
  for (const CodeFragment& cf : cl.condition()) {
    if (!cf.evaluate(state)) return false;
  }
  return true;
}

double fitness_rate(const Classifier& cl) {
  return cl.fitness / std::max(cl.complexity(), kComplexityFloor);
}

std::optional<double> generality(const Classifier& cl) {
  const std::uint64_t seen = cl.matches + cl.no_matches;
  if (seen == 0) return std::nullopt;
  return static_cast<double>(cl.matches) / static_cast<double>(seen);
}

std::optional<double> generality_rate(const Classifier& cl) {
  auto g = generality(cl);
  if (!g) return std::nullopt;
  return *g / std::max(cl.complexity(), kComplexityFloor);
}

bool is_more_general(const Classifier& general, const Classifier& specific) {
  const auto& g = general.sorted_keys();
  const auto& s = specific.sorted_keys();
  return std::includes(s.begin(), s.end(), g.begin(), g.end());
}

bool does_subsume(const Classifier& general, const Classifier& specific, int theta_sub, double epsilon0) {
  return general.action() == specific.action() && general.experience > theta_sub && general.error < epsilon0 &&
         is_more_general(general, specific);
}

std::string condition_string(const Classifier& cl) {
  std::string s;
  for (std::size_t i = 0; i < cl.condition().size(); ++i) {
    if (i) s += ',';
    s += cl.condition()[i].to_string();
  }
  return s;
}

std::string dump_line(const Classifier& cl) {
  char buf[256];
  const auto g = generality(cl);
  std::string gen;
  if (g) {
    std::snprintf(buf, sizeof buf, "%.6f", *g);
    gen = buf;
  }
  std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\t%.6f\t%d\t%d\t", cl.prediction, cl.error, cl.fitness, cl.numerosity,
                cl.experience);
  return condition_string(cl) + ":" + std::to_string(cl.action()) + buf + gen + "\t" + std::to_string(cl.complexity());
}

}  // namespace xof
