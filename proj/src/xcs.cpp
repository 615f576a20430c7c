#include "xof/xcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace xof {

namespace {

void remove_duplicates(std::vector<CodeFragment>& condition) {
  std::vector<CodeFragment> unique;
  unique.reserve(condition.size());
  for (const CodeFragment& cf : condition) {
    if (std::find(unique.begin(), unique.end(), cf) == unique.end()) unique.push_back(cf);
  }
  condition = std::move(unique);
}

}  // namespace

Xcs::Xcs(ExperimentConfig config, const Environment& env, std::uint64_t seed)
    : config_(config),
      env_(env),
      rng_(seed),
      of_(config, env.attribute_count()),
      condition_limit_(config.condition_limit(env.attribute_count())) {
  config_.validate();
  of_.seed_base_leaves();
}

TrialOutcome Xcs::step() { return run_trial(trials_ % 2 == 0 ? TrialMode::Explore : TrialMode::Exploit); }

TrialOutcome Xcs::run_trial(TrialMode mode) { return run_trial_on(env_.sample(rng_), mode); }

ClassifierPtr Xcs::cover(const BitState& state, int action) {
  std::vector<CodeFragment> condition;
  for (int slot = 0; slot < condition_limit_; ++slot) {
    if (rng_.chance(config_.p_spec)) condition.push_back(of_.request_cf(state, nullptr, rng_));
  }
  remove_duplicates(condition);
  auto cl = std::make_shared<Classifier>(std::move(condition), action);
  cl->prediction = config_.p_init;
  cl->error = config_.epsilon_init;
  cl->fitness = config_.f_init;
  cl->ga_timestamp = trials_;
  return cl;
}

void Xcs::insert(ClassifierPtr cl) {
  for (const ClassifierPtr& existing : population_) {
    if (existing->same_rule(*cl)) {
      existing->numerosity += cl->numerosity;
      micro_size_ += cl->numerosity;
      return;
    }
  }
  micro_size_ += cl->numerosity;
  population_.push_back(std::move(cl));
}

std::vector<ClassifierPtr> Xcs::form_match_set(const BitState& state, int* covered) {
  std::vector<ClassifierPtr> match_set;
  for (const ClassifierPtr& cl : population_) {
    if (matches(*cl, state)) {
      ++cl->matches;
      match_set.push_back(cl);
    } else {
      ++cl->no_matches;
    }
  }
  int n_covered = 0;
  for (;;) {
    std::vector<bool> present(static_cast<std::size_t>(env_.action_count()), false);
    for (const ClassifierPtr& cl : match_set) present[static_cast<std::size_t>(cl->action())] = true;
    bool missing = false;
    for (int a = 0; a < env_.action_count(); ++a) {
      if (present[static_cast<std::size_t>(a)]) continue;
      missing = true;
      ClassifierPtr cl = cover(state, a);
      cl->matches = 1;
      micro_size_ += 1;
      population_.push_back(cl);
      match_set.push_back(cl);
      ++n_covered;
    }
    if (!missing) break;
    delete_from_population();
    std::erase_if(match_set, [](const ClassifierPtr& cl) { return cl->numerosity == 0; });
  }
  if (covered) *covered = n_covered;
  return match_set;
}

std::vector<double> Xcs::prediction_array(std::span<const ClassifierPtr> match_set) const {
  const auto n = static_cast<std::size_t>(env_.action_count());
  std::vector<double> weighted(n, 0.0);
  std::vector<double> fitness(n, 0.0);
  std::vector<int> count(n, 0);
  std::vector<double> plain(n, 0.0);
  for (const ClassifierPtr& cl : match_set) {
    const auto a = static_cast<std::size_t>(cl->action());
    weighted[a] += cl->prediction * cl->fitness;
    fitness[a] += cl->fitness;
    plain[a] += cl->prediction;
    ++count[a];
  }
  std::vector<double> pa(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t a = 0; a < n; ++a) {
    if (count[a] == 0) continue;
    pa[a] = fitness[a] > 0.0 ? weighted[a] / fitness[a] : plain[a] / count[a];
  }
  return pa;
}

TrialOutcome Xcs::run_trial_on(const BitState& state, TrialMode mode) {
  TrialOutcome out;
  out.mode = mode;
  out.state = state;
  out.label = env_.label(state);

  std::vector<ClassifierPtr> match_set = form_match_set(state, &out.covered);

  if (mode == TrialMode::Explore) {
    out.action = rng_.below(env_.action_count());
  } else {
    const std::vector<double> pa = prediction_array(match_set);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> ties;
    for (int a = 0; a < env_.action_count(); ++a) {
      const double v = pa[static_cast<std::size_t>(a)];
      if (std::isnan(v)) continue;
      if (v > best) {
        best = v;
        ties.assign(1, a);
      } else if (v == best) {
        ties.push_back(a);
      }
    }
    out.action = ties.size() == 1 ? ties.front() : ties[static_cast<std::size_t>(rng_.below(static_cast<int>(ties.size())))];
  }
  out.correct = out.action == out.label;

  std::vector<ClassifierPtr> action_set;
  for (const ClassifierPtr& cl : match_set) {
    if (cl->action() == out.action) action_set.push_back(cl);
  }

  if (mode == TrialMode::Explore) {
    update_action_set(action_set, out.correct ? config_.reward : 0.0);
    of_.update_ol(action_set);
    out.ga_ran = run_ga(action_set, state);
  } else {
    of_.update_ol(action_set);
  }

  ++trials_;
  end_of_trial();
  return out;
}

void Xcs::end_of_trial() {
  if (config_.variant == Variant::BF && trials_ % static_cast<std::uint64_t>(config_.bf_ol_interval) == 0) {
    of_.rebuild_ol_by_tournament(rng_);
  }
  if (trials_ % static_cast<std::uint64_t>(config_.registry_prune_interval) == 0) of_.prune(population_);
}

void Xcs::update_action_set(std::span<const ClassifierPtr> aset, double reward) {
  if (aset.empty()) return;
  int set_numerosity = 0;
  for (const ClassifierPtr& cl : aset) set_numerosity += cl->numerosity;

  for (const ClassifierPtr& cl : aset) {
    ++cl->experience;
    const double exp = cl->experience;
    const double rate = exp < 1.0 / config_.beta ? 1.0 / exp : config_.beta;
    cl->prediction += rate * (reward - cl->prediction);
    cl->error += rate * (std::abs(reward - cl->prediction) - cl->error);
    cl->action_set_size += rate * (set_numerosity - cl->action_set_size);
  }

  std::vector<double> accuracy;
  accuracy.reserve(aset.size());
  double accuracy_sum = 0.0;
  for (const ClassifierPtr& cl : aset) {
    const double k =
        cl->error < config_.epsilon0 ? 1.0 : config_.alpha * std::pow(cl->error / config_.epsilon0, -config_.nu);
    accuracy.push_back(k);
    accuracy_sum += k * cl->numerosity;
  }
  for (std::size_t i = 0; i < aset.size(); ++i) {
    Classifier& cl = *aset[i];
    cl.fitness += config_.beta * (accuracy[i] * cl.numerosity / accuracy_sum - cl.fitness);
  }

  of_.update_cf_fitness(aset);
}

ClassifierPtr Xcs::select_parent(std::span<const ClassifierPtr> aset) {
  // Each micro-classifier joins the tournament with probability tau; the
  // winner has the highest per-micro fitness.
  ClassifierPtr winner;
  double best = -1.0;
  for (const ClassifierPtr& cl : aset) {
    const double join = 1.0 - std::pow(1.0 - config_.tournament_fraction, cl->numerosity);
    if (!rng_.chance(join)) continue;
    const double f = cl->fitness / cl->numerosity;
    if (f > best) {
      best = f;
      winner = cl;
    }
  }
  if (!winner) winner = aset[static_cast<std::size_t>(rng_.below(static_cast<int>(aset.size())))];
  return winner;
}

void Xcs::crossover(std::vector<CodeFragment>& a, std::vector<CodeFragment>& b) {
  const std::size_t len = std::max(a.size(), b.size());
  std::vector<std::optional<CodeFragment>> slots_a(len);
  std::vector<std::optional<CodeFragment>> slots_b(len);
  for (std::size_t i = 0; i < a.size(); ++i) slots_a[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) slots_b[i] = b[i];
  for (std::size_t i = 0; i < len; ++i) {
    if (rng_.coin()) std::swap(slots_a[i], slots_b[i]);
  }
  a.clear();
  b.clear();
  for (auto& s : slots_a) {
    if (s) a.push_back(*s);
  }
  for (auto& s : slots_b) {
    if (s) b.push_back(*s);
  }
  remove_duplicates(a);
  remove_duplicates(b);
}

void Xcs::mutate(std::vector<CodeFragment>& condition, const BitState& state, const NicheContext* niche) {
  enum class Edit { Add, Remove, Replace };
  std::vector<Edit> options;
  if (static_cast<int>(condition.size()) < condition_limit_) options.push_back(Edit::Add);
  if (!condition.empty()) {
    options.push_back(Edit::Remove);
    options.push_back(Edit::Replace);
  }
  if (options.empty()) return;
  switch (options[static_cast<std::size_t>(rng_.below(static_cast<int>(options.size())))]) {
    case Edit::Add:
      condition.push_back(of_.request_cf(state, niche, rng_));
      break;
    case Edit::Remove:
      condition.erase(condition.begin() + rng_.below(static_cast<int>(condition.size())));
      break;
    case Edit::Replace:
      condition[static_cast<std::size_t>(rng_.below(static_cast<int>(condition.size())))] =
          of_.request_cf(state, niche, rng_);
      break;
  }
  remove_duplicates(condition);
}

bool Xcs::run_ga(std::span<const ClassifierPtr> aset, const BitState& state) {
  if (aset.empty()) return false;
  double stamp_sum = 0.0;
  double num_sum = 0.0;
  for (const ClassifierPtr& cl : aset) {
    stamp_sum += static_cast<double>(cl->ga_timestamp) * cl->numerosity;
    num_sum += cl->numerosity;
  }
  if (static_cast<double>(trials_) - stamp_sum / num_sum <= config_.theta_ga) return false;
  for (const ClassifierPtr& cl : aset) cl->ga_timestamp = trials_;

  std::optional<NicheContext> niche;
  if (config_.variant == Variant::GCFF_NCF) niche.emplace(aset);
  const NicheContext* niche_ptr = niche ? &*niche : nullptr;

  const ClassifierPtr parents[2] = {select_parent(aset), select_parent(aset)};
  std::vector<CodeFragment> conditions[2] = {parents[0]->condition(), parents[1]->condition()};
  double prediction[2], error[2], fitness[2];
  for (int i = 0; i < 2; ++i) {
    prediction[i] = parents[i]->prediction;
    error[i] = parents[i]->error;
    fitness[i] = parents[i]->fitness / parents[i]->numerosity;
  }
  if (rng_.chance(config_.chi)) {
    crossover(conditions[0], conditions[1]);
    const double p = 0.5 * (prediction[0] + prediction[1]);
    const double e = 0.5 * (error[0] + error[1]);
    const double f = 0.5 * (fitness[0] + fitness[1]);
    for (int i = 0; i < 2; ++i) {
      prediction[i] = p;
      error[i] = e;
      fitness[i] = f;
    }
  }
  for (auto& condition : conditions) {
    if (rng_.chance(config_.mu)) mutate(condition, state, niche_ptr);
  }

  for (int i = 0; i < 2; ++i) {
    auto child = std::make_shared<Classifier>(std::move(conditions[i]), parents[i]->action());
    child->prediction = prediction[i];
    child->error = error[i];
    child->fitness = fitness[i] * config_.ga_fitness_reduction;
    child->action_set_size = parents[i]->action_set_size;
    child->ga_timestamp = trials_;
    child->matches = 1;
    if (config_.ga_subsumption) {
      bool absorbed = false;
      for (const ClassifierPtr& parent : parents) {
        if (does_subsume(*parent, *child, config_.theta_sub, config_.epsilon0)) {
          ++parent->numerosity;
          ++micro_size_;
          absorbed = true;
          break;
        }
      }
      if (absorbed) continue;
    }
    insert(std::move(child));
  }
  delete_from_population();
  return true;
}

void Xcs::delete_from_population() {
  if (micro_size_ <= config_.N) return;
  while (micro_size_ > config_.N) {
    double fitness_sum = 0.0;
    for (const ClassifierPtr& cl : population_) fitness_sum += cl->fitness;
    const double mean_fitness = fitness_sum / micro_size_;

    std::vector<double> votes;
    votes.reserve(population_.size());
    double vote_sum = 0.0;
    for (const ClassifierPtr& cl : population_) {
      double vote = cl->action_set_size * cl->numerosity;
      const double micro_fitness = cl->fitness / cl->numerosity;
      if (cl->experience > config_.theta_del && micro_fitness < config_.delta * mean_fitness) {
        vote *= mean_fitness / std::max(micro_fitness, 1e-12);
      }
      votes.push_back(vote);
      vote_sum += vote;
    }
    std::size_t victim = population_.size();
    double spin = rng_.uniform() * vote_sum;
    for (std::size_t i = 0; i < votes.size(); ++i) {
      spin -= votes[i];
      if (spin < 0.0 && votes[i] > 0.0) {
        victim = i;
        break;
      }
    }
    if (victim == population_.size()) {
      // Rounding pushed the spin past the end.
      for (std::size_t i = votes.size(); i-- > 0;) {
        if (votes[i] > 0.0) {
          victim = i;
          break;
        }
      }
      if (victim == population_.size()) victim = votes.size() - 1;
    }
    Classifier& cl = *population_[victim];
    --cl.numerosity;
    --micro_size_;
    if (cl.numerosity == 0) population_.erase(population_.begin() + static_cast<std::ptrdiff_t>(victim));
  }
}

}  // namespace xof
