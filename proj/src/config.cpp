#include "xof/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

namespace xof {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  }
}

int to_int(std::string_view key, std::string_view value) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects a boolean, got '" + std::string(value) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto real = [&t](const char* name, double ExperimentConfig::*field) {
      t[name] = [field](ExperimentConfig& c, std::string_view k, std::string_view v) { c.*field = to_double(k, v); };
    };
    auto integer = [&t](const char* name, int ExperimentConfig::*field) {
      t[name] = [field](ExperimentConfig& c, std::string_view k, std::string_view v) { c.*field = to_int(k, v); };
    };
    integer("N", &ExperimentConfig::N);
    real("beta", &ExperimentConfig::beta);
    real("beta_cf", &ExperimentConfig::beta_cf);
    real("chi", &ExperimentConfig::chi);
    real("mu", &ExperimentConfig::mu);
    integer("theta_del", &ExperimentConfig::theta_del);
    integer("theta_sub", &ExperimentConfig::theta_sub);
    integer("theta_ga", &ExperimentConfig::theta_ga);
    real("f_init", &ExperimentConfig::f_init);
    real("p_init", &ExperimentConfig::p_init);
    real("epsilon_init", &ExperimentConfig::epsilon_init);
    real("p_spec", &ExperimentConfig::p_spec);
    integer("max_condition_len", &ExperimentConfig::max_condition_len);
    real("epsilon0", &ExperimentConfig::epsilon0);
    real("alpha", &ExperimentConfig::alpha);
    real("nu", &ExperimentConfig::nu);
    real("delta", &ExperimentConfig::delta);
    real("reward", &ExperimentConfig::reward);
    real("tournament_fraction", &ExperimentConfig::tournament_fraction);
    real("ga_fitness_reduction", &ExperimentConfig::ga_fitness_reduction);
    real("ol_selectivity", &ExperimentConfig::ol_selectivity);
    real("niche_discount", &ExperimentConfig::niche_discount);
    integer("max_depth", &ExperimentConfig::max_depth);
    real("p_new", &ExperimentConfig::p_new);
    integer("bf_ol_interval", &ExperimentConfig::bf_ol_interval);
    integer("bf_tournament_size", &ExperimentConfig::bf_tournament_size);
    integer("bf_ol_capacity", &ExperimentConfig::bf_ol_capacity);
    integer("registry_prune_interval", &ExperimentConfig::registry_prune_interval);
    t["ga_subsumption"] = [](ExperimentConfig& c, std::string_view k, std::string_view v) {
      c.ga_subsumption = to_bool(k, v);
    };
    t["variant"] = [](ExperimentConfig& c, std::string_view, std::string_view v) { c.variant = parse_variant(v); };
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

bool is_rate(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::BF: return "BF";
    case Variant::SCFF: return "SCFF";
    case Variant::GCFF: return "GCFF";
    case Variant::GCFF_NCF: return "GCFF_NCF";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::BF, Variant::SCFF, Variant::GCFF, Variant::GCFF_NCF}) {
    if (variant_name(v) == name) return v;
  }
  if (name == "GCFF-NCF") return Variant::GCFF_NCF;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected BF, SCFF, GCFF or GCFF_NCF)");
}

void ExperimentConfig::validate() const {
  require(N > 0, "N must be positive");
  for (auto [name, v] : {std::pair{"beta", beta}, {"beta_cf", beta_cf}, {"chi", chi}, {"mu", mu}, {"p_spec", p_spec},
                         {"alpha", alpha}, {"delta", delta}, {"tournament_fraction", tournament_fraction},
                         {"ga_fitness_reduction", ga_fitness_reduction}, {"ol_selectivity", ol_selectivity},
                         {"niche_discount", niche_discount}, {"p_new", p_new}, {"f_init", f_init}}) {
    require(is_rate(v), std::string(name) + " must lie in [0,1]");
  }
  require(beta > 0.0, "beta must be positive");
  require(max_depth >= 1 && max_depth <= 62, "max_depth must lie in [1,62]");
  require(max_condition_len >= 0, "max_condition_len must be non-negative");
  require(epsilon0 > 0.0, "epsilon0 must be positive");
  require(nu > 0.0, "nu must be positive");
  require(reward > 0.0, "reward must be positive");
  require(theta_del >= 0 && theta_sub >= 0 && theta_ga >= 0, "thresholds must be non-negative");
  require(bf_ol_interval > 0 && bf_tournament_size > 0 && bf_ol_capacity > 0, "BF OL settings must be positive");
  require(registry_prune_interval > 0, "registry_prune_interval must be positive");
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("config: unknown key '" + std::string(key) + "'");
  it->second(*this, key, trim(value));
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config: " + path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    base.set(trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  base.validate();
  return base;
}

}  // namespace xof
