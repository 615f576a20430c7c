#include "xof/metrics.hpp"

#include <cstdio>
#include <unordered_set>

namespace xof {

std::optional<double> population_generality_rate(std::span<const ClassifierPtr> population, const Environment& env,
                                                 int sample_count, const ExperimentConfig& config, Rng& rng) {
  std::unordered_set<const Classifier*> picked;
  std::vector<const Classifier*> order;
  for (int s = 0; s < sample_count; ++s) {
    const BitState state = env.sample(rng);
    const int correct = env.label(state);
    const Classifier* best = nullptr;
    for (const ClassifierPtr& cl : population) {
      if (cl->action() != correct) continue;
      if (cl->experience < config.theta_ga || cl->error > config.epsilon0) continue;
      if (!matches(*cl, state)) continue;
      if (!best || fitness_rate(*cl) > fitness_rate(*best)) best = cl.get();
    }
    if (best && picked.insert(best).second) order.push_back(best);
  }
  double sum = 0.0;
  int counted = 0;
  for (const Classifier* cl : order) {
    if (auto rate = generality_rate(*cl)) {
      sum += *rate;
      ++counted;
    }
  }
  if (counted == 0) return std::nullopt;
  return sum / counted;
}

double mean_cf_depth(std::span<const ClassifierPtr> population) {
  double total = 0.0;
  std::size_t count = 0;
  for (const ClassifierPtr& cl : population) {
    for (const CodeFragment& cf : cl->condition()) {
      total += cf.depth();
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

void MetricsRecorder::record_exploit(bool correct) {
  recent_.push_back(correct);
  correct_in_window_ += correct ? 1 : 0;
  if (recent_.size() > window_) {
    correct_in_window_ -= recent_.front() ? 1 : 0;
    recent_.pop_front();
  }
  ++recorded_;
}

double MetricsRecorder::moving_accuracy() const {
  if (recent_.empty()) return 0.0;
  return static_cast<double>(correct_in_window_) / static_cast<double>(recent_.size());
}

void MetricsRecorder::add_row(MetricsRow row) { rows_.push_back(row); }

void MetricsRecorder::write_csv(std::ostream& out) const {
  out << kCsvHeader << '\n';
  char buf[64];
  for (const MetricsRow& r : rows_) {
    out << r.trials << ',';
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy);
    out << buf << ',';
    if (r.generality_rate) {
      std::snprintf(buf, sizeof buf, "%.8f", *r.generality_rate);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.4f", r.mean_cf_depth);
    out << ',' << r.macro_size << ',' << r.ol_size << ',' << buf << '\n';
  }
}

}  // namespace xof
