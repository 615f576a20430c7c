// Command-line driver: single runs, seed sweeps, plots and the oracle check.

#include <charconv>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "xof/harness.hpp"
#include "xof/oracle.hpp"

namespace {

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;
};

SeedRange parse_seed_range(const std::string& text) {
  auto parse = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw CLI::ValidationError("--seeds", "expected <k>..<m>, got '" + text + "'");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = parse(text);
    return {v, v};
  }
  SeedRange r{parse(std::string_view(text).substr(0, dots)), parse(std::string_view(text).substr(dots + 2))};
  if (r.last < r.first) throw CLI::ValidationError("--seeds", "empty range '" + text + "'");
  return r;
}

void add_run_options(CLI::App& cmd, xof::RunSpec& spec, std::string& variant, std::string& config_path) {
  cmd.add_option("--problem", spec.problem, "parity-<n>, mux-<k>, hmux18 or hmaj18")->required();
  cmd.add_option("--variant", variant, "BF, SCFF, GCFF or GCFF_NCF")->required();
  cmd.add_option("--trials", spec.trials, "total trials (explore + exploit)")->required();
  cmd.add_option("--pop", spec.population, "population size N")->required();
  cmd.add_option("--config", config_path, "key = value file overriding defaults");
  cmd.add_option("--out", spec.out_dir, "output directory")->required();
  cmd.add_option("--snapshot", spec.snapshot_interval, "trials between metric snapshots");
  cmd.add_option("--samples", spec.generality_samples, "instances sampled per generality snapshot");
  cmd.add_flag("--trace", spec.trace, "print which OF-module rules fired");
}

void finish_spec(xof::RunSpec& spec, const std::string& variant, const std::string& config_path) {
  spec.variant = xof::parse_variant(variant);
  if (!config_path.empty()) spec.config = xof::load_config(config_path);
  xof::make_environment(spec.problem);
}

void print_summary(const xof::RunResult& r) {
  const auto g = r.final_generality_rate();
  std::cout << xof::run_stem(r.spec) << ": accuracy=" << r.final_accuracy()
            << " generality_rate=" << (g ? std::to_string(*g) : std::string("n/a"))
            << (r.stuck ? " STUCK" : "") << "  -> " << r.csv_path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XCS with code-fragment conditions: experiment driver"};
  app.require_subcommand(1);

  xof::RunSpec run_spec;
  std::string run_variant, run_config;
  std::uint64_t run_seed = 1;
  auto* run = app.add_subcommand("run", "single learning run");
  add_run_options(*run, run_spec, run_variant, run_config);
  run->add_option("--seed", run_seed, "random seed")->required();

  xof::RunSpec sweep_spec;
  std::string sweep_variant, sweep_config, seeds = "1..5";
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run a range of seeds and write a mean curve");
  add_run_options(*sweep, sweep_spec, sweep_variant, sweep_config);
  sweep->add_option("--seeds", seeds, "seed range <k>..<m>")->required();
  sweep->add_option("--jobs", jobs, "runs executed concurrently");

  std::string plot_in, plot_out;
  auto* plot = app.add_subcommand("plot", "render accuracy and generality-rate curves as SVG");
  plot->add_option("--in", plot_in, "directory of run CSVs")->required();
  plot->add_option("--out", plot_out, "output SVG file")->required();

  std::uint64_t oracle_seed = 2024;
  int oracle_count = 1000;
  auto* oracle_check = app.add_subcommand("oracle-check", "compare the evaluator with the truth-table oracle");
  oracle_check->add_option("--seed", oracle_seed, "random seed");
  oracle_check->add_option("--count", oracle_count, "random CFs per suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      finish_spec(run_spec, run_variant, run_config);
      run_spec.seed = run_seed;
      print_summary(xof::run_experiment(run_spec));
    } else if (*sweep) {
      finish_spec(sweep_spec, sweep_variant, sweep_config);
      const SeedRange range = parse_seed_range(seeds);
      for (const auto& r : xof::run_sweep(sweep_spec, range.first, range.last, jobs)) print_summary(r);
    } else if (*plot) {
      xof::plot_curves(xof::find_run_csvs(plot_in), plot_out);
      std::cout << "wrote " << plot_out << '\n';
    } else if (*oracle_check) {
      bool ok = true;
      for (const auto& suite : xof::oracle::run_oracle_check(oracle_seed, oracle_count)) {
        std::cout << suite.name << ": " << suite.passed << " passed, " << suite.failed << " failed\n";
        ok = ok && suite.failed == 0;
      }
      return ok ? 0 : 1;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const xof::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
