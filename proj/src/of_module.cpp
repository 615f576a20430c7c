#include "xof/of_module.hpp"

#include <algorithm>
#include <cstdio>

namespace xof {

double cf_fitness_scff(const Classifier& cl) {
  if (cl.condition().empty()) return 0.0;
  return cl.fitness / static_cast<double>(cl.condition().size());
}

double classifier_quality(const Classifier& cl, Variant variant) {
  return uses_rate_fitness(variant) ? fitness_rate(cl) : cl.fitness;
}

bool better_classifier(const Classifier& a, const Classifier& b, Variant variant) {
  const double qa = classifier_quality(a, variant);
  const double qb = classifier_quality(b, variant);
  if (qa != qb) return qa > qb;
  if (a.numerosity != b.numerosity) return a.numerosity > b.numerosity;
  return a.complexity() < b.complexity();
}

namespace {

/// Value a CF receives from its best classifier.
double target_value(const Classifier& best, Variant variant) {
  return uses_rate_fitness(variant) ? fitness_rate(best) : cf_fitness_scff(best);
}

/// Quality used by the selectivity rule when collecting CFs for the OL.
double ol_quality(const Classifier& cl, Variant variant) {
  return uses_rate_fitness(variant) ? fitness_rate(cl) : cf_fitness_scff(cl);
}

bool alive(const Classifier& cl) { return cl.numerosity > 0; }

}  // namespace

NicheContext::NicheContext(std::span<const ClassifierPtr> aset) {
  for (const ClassifierPtr& cl : aset) {
    members_.insert(cl.get());
    const double rate = fitness_rate(*cl);
    for (const std::string& key : cl->sorted_keys()) {
      auto [it, inserted] = best_rate_.try_emplace(key, rate);
      if (!inserted) it->second = std::max(it->second, rate);
    }
  }
}

std::optional<double> NicheContext::local_best_rate(const std::string& cf_key) const {
  auto it = best_rate_.find(cf_key);
  if (it == best_rate_.end()) return std::nullopt;
  return it->second;
}

OFModule::OFModule(const ExperimentConfig& config, int attribute_count)
    : config_(config), attribute_count_(attribute_count) {}

const CfRecord* OFModule::find(const std::string& key) const {
  auto it = registry_.find(key);
  return it == registry_.end() ? nullptr : &it->second;
}

CfRecord* OFModule::find(const std::string& key) {
  auto it = registry_.find(key);
  return it == registry_.end() ? nullptr : &it->second;
}

double OFModule::initial_fitness() {
  if (ol_.empty()) return 0.01;
  if (!ol_median_cache_) {
    std::vector<double> values;
    values.reserve(ol_.size());
    for (const auto& [key, rec] : ol_) values.push_back(rec->fitness);
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double median = values[mid];
    if (values.size() % 2 == 0) {
      const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
      median = 0.5 * (median + lower);
    }
    ol_median_cache_ = median;
  }
  return *ol_median_cache_;
}

CfRecord& OFModule::record_for(const CodeFragment& cf) {
  auto it = registry_.find(cf.key());
  if (it != registry_.end()) return it->second;
  const double f0 = initial_fitness();
  return registry_.emplace(cf.key(), CfRecord{cf, f0, {}}).first->second;
}

CodeFragment OFModule::intern(const CodeFragment& cf) { return record_for(cf).cf; }

CfRecord& OFModule::insert_into_ol(const CodeFragment& cf, double fitness) {
  CfRecord& rec = record_for(cf);
  rec.fitness = fitness;
  ol_[rec.cf.key()] = &rec;
  ol_median_cache_.reset();
  return rec;
}

void OFModule::seed_base_leaves() {
  for (int a = 0; a < attribute_count_; ++a) {
    for (bool negated : {false, true}) {
      CfRecord& rec = record_for(CodeFragment::leaf(a, negated));
      ol_[rec.cf.key()] = &rec;
      base_leaves_.insert(rec.cf.key());
    }
  }
  ol_median_cache_.reset();
}

double OFModule::local_cf_fitness(const CfRecord& record, const NicheContext& niche) {
  auto best = record.best.lock();
  if (best && alive(*best) && niche.contains_classifier(best.get())) {
    ++trace_.niche_case_best_in_niche;
    return record.fitness;
  }
  const auto local = niche.local_best_rate(record.cf.key());
  if (!local) {
    ++trace_.niche_case_absent;
    return config_.niche_discount * record.fitness;
  }
  ++trace_.niche_case_scaled;
  // The stored best can be stale; the global best is never below the local one.
  const double global = std::max(best && alive(*best) ? fitness_rate(*best) : 0.0, *local);
  if (global <= 0.0) return 0.0;
  return record.fitness * (*local / global);
}

const CfRecord* OFModule::roulette(const NicheContext* niche, Rng& rng, const CfRecord* exclude) {
  std::vector<const CfRecord*> entries;
  std::vector<double> weights;
  entries.reserve(ol_.size());
  weights.reserve(ol_.size());
  double total = 0.0;
  const bool calibrate = niche != nullptr && config_.variant == Variant::GCFF_NCF;
  for (const auto& [key, rec] : ol_) {
    if (rec == exclude) continue;
    const double w = std::max(0.0, calibrate ? local_cf_fitness(*rec, *niche) : rec->fitness);
    entries.push_back(rec);
    weights.push_back(w);
    total += w;
  }
  if (entries.empty()) return nullptr;
  if (total <= 0.0) return entries[rng.below(entries.size())];
  double spin = rng.uniform() * total;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    spin -= weights[i];
    if (spin < 0.0 && weights[i] > 0.0) return entries[i];
  }
  // Rounding left the spin just past the end: take the last positive weight.
  for (std::size_t i = entries.size(); i-- > 0;) {
    if (weights[i] > 0.0) return entries[i];
  }
  return entries.back();
}

CodeFragment OFModule::generate_new_cf(const NicheContext* niche, Rng& rng) {
  ++trace_.generated_cfs;
  const CfRecord* first = roulette(niche, rng);
  CodeFragment a = first ? first->cf : CodeFragment::random_leaf(attribute_count_, rng);
  const CfRecord* second = first ? roulette(niche, rng, first) : nullptr;
  CodeFragment b = second ? second->cf : CodeFragment::random_leaf(attribute_count_, rng);
  const Function f = kAllFunctions[rng.below(4)];

  auto combined = combine(a, b, f, config_.max_depth);
  if (!combined) {
    // Too deep: shrink the deeper operand to a leaf, then both.
    CodeFragment& deeper = a.depth() >= b.depth() ? a : b;
    deeper = CodeFragment::random_leaf(attribute_count_, rng);
    combined = combine(a, b, f, config_.max_depth);
  }
  if (!combined) {
    combined = combine(CodeFragment::random_leaf(attribute_count_, rng),
                       CodeFragment::random_leaf(attribute_count_, rng), f, config_.max_depth);
  }
  return intern(*combined);
}

CodeFragment OFModule::request_cf(const BitState& state, const NicheContext* niche, Rng& rng) {
  CodeFragment cf = [&] {
    if (ol_.empty()) {
      ++trace_.bootstrap_leaves;
      return CodeFragment::random_leaf(attribute_count_, rng);
    }
    if (rng.chance(config_.p_new)) return generate_new_cf(niche, rng);
    ++trace_.reused_cfs;
    return roulette(niche, rng)->cf;
  }();
  return intern(force_match(cf, state));
}

void OFModule::update_cf_fitness(std::span<const ClassifierPtr> aset) {
  const Variant variant = config_.variant;
  // Best classifier per CF within the action set.
  std::map<std::string, const ClassifierPtr*, std::less<>> local_best;
  for (const ClassifierPtr& cl : aset) {
    for (const CodeFragment& cf : cl->condition()) {
      auto [it, inserted] = local_best.try_emplace(cf.key(), &cl);
      if (!inserted && better_classifier(*cl, **it->second, variant)) it->second = &cl;
    }
  }
  for (const auto& [key, cl_ptr] : local_best) {
    const ClassifierPtr& local = *cl_ptr;
    CfRecord& rec = record_for(*std::find_if(local->condition().begin(), local->condition().end(),
                                             [&](const CodeFragment& cf) { return cf.key() == key; }));
    std::shared_ptr<const Classifier> best = local;
    if (auto stored = rec.best.lock(); stored && alive(*stored) && better_classifier(*stored, *local, variant)) {
      best = stored;
    }
    rec.best = best;
    rec.fitness = cf_fitness_step(rec.fitness, target_value(*best, variant), config_.beta_cf);
    if (uses_rate_fitness(variant)) {
      ++trace_.gcff_fitness_updates;
    } else {
      ++trace_.scff_fitness_updates;
    }
  }
  if (!local_best.empty()) ol_median_cache_.reset();
}

void OFModule::update_ol(std::span<const ClassifierPtr> aset) {
  if (config_.variant == Variant::BF || aset.empty()) return;
  ++trace_.simplified_ol_updates;
  double max_quality = 0.0;
  for (const ClassifierPtr& cl : aset) max_quality = std::max(max_quality, ol_quality(*cl, config_.variant));
  const double threshold = config_.ol_selectivity * max_quality;

  std::vector<const CodeFragment*> keep;
  std::vector<const CodeFragment*> outdated;
  for (const ClassifierPtr& cl : aset) {
    auto& dest = ol_quality(*cl, config_.variant) >= threshold ? keep : outdated;
    for (const CodeFragment& cf : cl->condition()) dest.push_back(&cf);
  }
  std::unordered_set<std::string_view> kept_keys;
  for (const CodeFragment* cf : keep) {
    CfRecord& rec = record_for(*cf);
    ol_[rec.cf.key()] = &rec;
    kept_keys.insert(rec.cf.key());
  }
  for (const CodeFragment* cf : outdated) {
    if (kept_keys.contains(cf->key()) || base_leaves_.contains(cf->key())) continue;
    if (auto it = ol_.find(cf->key()); it != ol_.end()) ol_.erase(it);
  }
  ol_median_cache_.reset();
}

void OFModule::rebuild_ol_by_tournament(Rng& rng) {
  ++trace_.tournament_ol_rebuilds;
  std::vector<CfRecord*> candidates;
  candidates.reserve(registry_.size());
  for (auto& [key, rec] : registry_) candidates.push_back(&rec);
  ol_.clear();
  ol_median_cache_.reset();
  for (const std::string& key : base_leaves_) ol_[key] = &registry_.find(key)->second;
  if (candidates.empty()) return;
  const std::size_t target =
      std::min<std::size_t>(static_cast<std::size_t>(config_.bf_ol_capacity) + base_leaves_.size(), candidates.size());
  // Tournaments can keep returning the same winners; cap the attempts.
  const std::size_t max_attempts = 20 * target + 100;
  for (std::size_t attempt = 0; attempt < max_attempts && ol_.size() < target; ++attempt) {
    CfRecord* winner = nullptr;
    for (int i = 0; i < config_.bf_tournament_size; ++i) {
      CfRecord* c = candidates[rng.below(candidates.size())];
      if (!winner || c->fitness > winner->fitness) winner = c;
    }
    ol_[winner->cf.key()] = winner;
  }
}

void OFModule::prune(std::span<const ClassifierPtr> population) {
  std::unordered_set<std::string_view> used;
  for (const ClassifierPtr& cl : population) {
    for (const std::string& key : cl->sorted_keys()) used.insert(key);
  }
  for (auto it = registry_.begin(); it != registry_.end();) {
    if (!ol_.contains(it->first) && !used.contains(it->first)) {
      it = registry_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<const CfRecord*> OFModule::ol_by_fitness() const {
  std::vector<const CfRecord*> rows;
  rows.reserve(ol_.size());
  for (const auto& [key, rec] : ol_) rows.push_back(rec);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CfRecord* a, const CfRecord* b) { return a->fitness > b->fitness; });
  return rows;
}

void OFModule::dump_ol(std::ostream& out) const {
  char buf[64];
  for (const CfRecord* rec : ol_by_fitness()) {
    std::snprintf(buf, sizeof buf, "%.6f", rec->fitness);
    out << rec->cf.to_string() << '\t' << buf << '\n';
  }
}

}  // namespace xof
