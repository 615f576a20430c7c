#include "xof/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "xof/problems.hpp"
#include "xof/xcs.hpp"

namespace xof {

namespace fs = std::filesystem;

namespace {

// Metrics sampling uses its own stream so that measuring does not perturb
// learning.
constexpr std::uint64_t kMetricsStreamSalt = 0x9e3779b97f4a7c15ULL;

void write_trace(std::ostream& out, const OfTrace& t) {
  out << "scff_fitness_updates=" << t.scff_fitness_updates << '\n'
      << "gcff_fitness_updates=" << t.gcff_fitness_updates << '\n'
      << "simplified_ol_updates=" << t.simplified_ol_updates << '\n'
      << "tournament_ol_rebuilds=" << t.tournament_ol_rebuilds << '\n'
      << "niche_case_best_in_niche=" << t.niche_case_best_in_niche << '\n'
      << "niche_case_absent=" << t.niche_case_absent << '\n'
      << "niche_case_scaled=" << t.niche_case_scaled << '\n'
      << "generated_cfs=" << t.generated_cfs << '\n'
      << "reused_cfs=" << t.reused_cfs << '\n'
      << "bootstrap_leaves=" << t.bootstrap_leaves << '\n';
}

std::string format_double(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::optional<std::uint64_t> RunResult::first_reaching(double threshold) const {
  for (const MetricsRow& r : rows) {
    if (r.accuracy >= threshold) return r.trials;
  }
  return std::nullopt;
}

std::string run_stem(const RunSpec& spec) {
  return spec.problem + "_" + std::string(variant_name(spec.variant)) + "_s" + std::to_string(spec.seed);
}

bool is_stuck(const std::vector<MetricsRow>& rows, std::uint64_t total_trials) {
  const double start = 0.8 * static_cast<double>(total_trials);
  bool any = false;
  for (const MetricsRow& r : rows) {
    if (static_cast<double>(r.trials) < start) continue;
    any = true;
    if (r.accuracy < 0.45 || r.accuracy > 0.55) return false;
  }
  return any;
}

RunResult run_experiment(const RunSpec& spec) {
  if (spec.trials == 0) throw ConfigError("run: trials must be positive");
  if (spec.snapshot_interval == 0) throw ConfigError("run: snapshot interval must be positive");
  const auto env = make_environment(spec.problem);
  ExperimentConfig config = spec.config;
  config.variant = spec.variant;
  if (spec.population > 0) config.N = spec.population;
  config.validate();

  Xcs xcs(config, *env, spec.seed);
  Rng metrics_rng(spec.seed ^ kMetricsStreamSalt);
  MetricsRecorder recorder(spec.accuracy_window);

  for (std::uint64_t t = 1; t <= spec.trials; ++t) {
    const TrialOutcome outcome = xcs.step();
    if (outcome.mode == TrialMode::Exploit) recorder.record_exploit(outcome.correct);
    if (t % spec.snapshot_interval == 0 || t == spec.trials) {
      MetricsRow row;
      row.trials = t;
      row.accuracy = recorder.moving_accuracy();
      row.generality_rate =
          population_generality_rate(xcs.population(), *env, spec.generality_samples, config, metrics_rng);
      row.macro_size = xcs.population().size();
      row.ol_size = xcs.of().ol_size();
      row.mean_cf_depth = mean_cf_depth(xcs.population());
      recorder.add_row(row);
    }
  }

  RunResult result;
  result.spec = spec;
  result.rows = recorder.rows();
  result.trace = xcs.of().trace();
  result.stuck = is_stuck(result.rows, spec.trials);

  if (spec.trace) {
    std::cerr << "[trace " << run_stem(spec) << "]\n";
    write_trace(std::cerr, result.trace);
  }

  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    const std::string stem = run_stem(spec);
    result.csv_path = spec.out_dir / (stem + ".csv");
    {
      std::ofstream out(result.csv_path, std::ios::binary);
      recorder.write_csv(out);
    }
    {
      std::ofstream out(spec.out_dir / (stem + ".pop"), std::ios::binary);
      for (const ClassifierPtr& cl : xcs.population()) out << dump_line(*cl) << '\n';
    }
    {
      std::ofstream out(spec.out_dir / (stem + ".ol"), std::ios::binary);
      xcs.of().dump_ol(out);
    }
    {
      std::ofstream out(spec.out_dir / (stem + ".summary"), std::ios::binary);
      const auto g = result.final_generality_rate();
      out << "problem=" << spec.problem << '\n'
          << "variant=" << variant_name(spec.variant) << '\n'
          << "seed=" << spec.seed << '\n'
          << "trials=" << spec.trials << '\n'
          << "N=" << config.N << '\n'
          << "final_accuracy=" << format_double(result.final_accuracy()) << '\n'
          << "final_generality_rate=" << (g ? format_double(*g, "%.8f") : std::string()) << '\n'
          << "stuck=" << (result.stuck ? "yes" : "no") << '\n';
      write_trace(out, result.trace);
    }
  }
  return result;
}

std::vector<MetricsRow> mean_series(const std::vector<std::vector<MetricsRow>>& series) {
  std::vector<MetricsRow> mean;
  if (series.empty()) return mean;
  std::size_t len = series.front().size();
  for (const auto& s : series) len = std::min(len, s.size());
  for (std::size_t i = 0; i < len; ++i) {
    MetricsRow row;
    row.trials = series.front()[i].trials;
    double acc = 0.0, depth = 0.0, macro = 0.0, ol = 0.0, gen = 0.0;
    int gen_count = 0;
    for (const auto& s : series) {
      acc += s[i].accuracy;
      depth += s[i].mean_cf_depth;
      macro += static_cast<double>(s[i].macro_size);
      ol += static_cast<double>(s[i].ol_size);
      if (s[i].generality_rate) {
        gen += *s[i].generality_rate;
        ++gen_count;
      }
    }
    const double k = static_cast<double>(series.size());
    row.accuracy = acc / k;
    row.mean_cf_depth = depth / k;
    row.macro_size = static_cast<std::size_t>(std::lround(macro / k));
    row.ol_size = static_cast<std::size_t>(std::lround(ol / k));
    if (gen_count > 0) row.generality_rate = gen / gen_count;
    mean.push_back(row);
  }
  return mean;
}

std::vector<RunResult> run_sweep(const RunSpec& base, std::uint64_t first_seed, std::uint64_t last_seed, int jobs) {
  if (last_seed < first_seed) throw ConfigError("sweep: empty seed range");
  // Validate once up front so a bad spec fails before any thread starts.
  make_environment(base.problem);
  const std::size_t count = static_cast<std::size_t>(last_seed - first_seed + 1);
  std::vector<RunResult> results(count);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        RunSpec spec = base;
        spec.seed = first_seed + i;
        results[i] = run_experiment(spec);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);

  if (!base.out_dir.empty()) {
    std::vector<std::vector<MetricsRow>> series;
    for (const RunResult& r : results) series.push_back(r.rows);
    MetricsRecorder aggregate;
    for (const MetricsRow& row : mean_series(series)) aggregate.add_row(row);
    std::ofstream out(base.out_dir / (base.problem + "_" + std::string(variant_name(base.variant)) + "_mean.csv"),
                      std::ios::binary);
    aggregate.write_csv(out);
  }
  return results;
}

std::vector<MetricsRow> read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  auto fail = [&](int line_no, const std::string& what) -> CsvError {
    return CsvError(path.string() + ": row " + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw fail(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != MetricsRecorder::kCsvHeader) throw fail(line_no, "unexpected header '" + line + "'");

  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) throw fail(line_no, "expected 6 fields, got " + std::to_string(cells.size()));
    try {
      MetricsRow row;
      std::size_t used = 0;
      row.trials = std::stoull(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("trials");
      row.accuracy = std::stod(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("accuracy");
      if (!cells[2].empty()) {
        row.generality_rate = std::stod(cells[2], &used);
        if (used != cells[2].size()) throw std::invalid_argument("generality_rate");
      }
      row.macro_size = std::stoull(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument("macro_size");
      row.ol_size = std::stoull(cells[4], &used);
      if (used != cells[4].size()) throw std::invalid_argument("ol_size");
      row.mean_cf_depth = std::stod(cells[5], &used);
      if (used != cells[5].size()) throw std::invalid_argument("mean_cf_depth");
      rows.push_back(row);
    } catch (const std::exception&) {
      throw fail(line_no, "malformed value in '" + line + "'");
    }
  }
  return rows;
}

std::vector<fs::path> find_run_csvs(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path& p = entry.path();
    if (p.extension() != ".csv") continue;
    if (p.stem().string().ends_with("_mean")) continue;
    paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

namespace {

std::string variant_of(const fs::path& csv) {
  // <problem>_<variant>_s<seed>; the variant itself may contain '_'.
  const std::string stem = csv.stem().string();
  const auto seed_pos = stem.rfind("_s");
  const auto problem_end = stem.find('_');
  if (seed_pos == std::string::npos || problem_end == std::string::npos || problem_end >= seed_pos) return stem;
  return stem.substr(problem_end + 1, seed_pos - problem_end - 1);
}

struct Panel {
  std::string title;
  double y_max;
  int top;
};

}  // namespace

void plot_curves(const std::vector<fs::path>& csv_paths, const fs::path& out_file) {
  if (csv_paths.empty()) throw CsvError("plot: no CSV files given");
  std::map<std::string, std::vector<std::vector<MetricsRow>>> by_variant;
  for (const fs::path& p : csv_paths) by_variant[variant_of(p)].push_back(read_metrics_csv(p));

  std::map<std::string, std::vector<MetricsRow>> curves;
  std::uint64_t max_trials = 1;
  double max_gen = 0.0;
  for (const auto& [variant, series] : by_variant) {
    curves[variant] = mean_series(series);
    for (const MetricsRow& r : curves[variant]) {
      max_trials = std::max(max_trials, r.trials);
      if (r.generality_rate) max_gen = std::max(max_gen, *r.generality_rate);
    }
  }
  if (max_gen <= 0.0) max_gen = 1.0;

  constexpr int width = 900, panel_h = 300, left = 70, right = 160, gap = 60;
  const int plot_w = width - left - right;
  const Panel panels[2] = {{"Accuracy", 1.0, 40}, {"Generality rate", max_gen * 1.1, 40 + panel_h + gap}};
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ofstream out(out_file, std::ios::binary);
  if (!out) throw CsvError("plot: cannot write " + out_file.string());
  const int height = 40 + 2 * panel_h + gap + 50;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int pi = 0; pi < 2; ++pi) {
    const Panel& panel = panels[pi];
    const int bottom = panel.top + panel_h;
    out << "<text x=\"" << left << "\" y=\"" << panel.top - 10 << "\" font-weight=\"bold\">" << panel.title
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << panel.top << "\" width=\"" << plot_w << "\" height=\"" << panel_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
      const double v = panel.y_max * tick / 4.0;
      const int y = bottom - panel_h * tick / 4;
      out << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
          << format_double(v, pi == 0 ? "%.2f" : "%.4f") << "</text>\n";
      const auto t = static_cast<std::uint64_t>(static_cast<double>(max_trials) * tick / 4.0);
      out << "<text x=\"" << left + plot_w * tick / 4 << "\" y=\"" << bottom + 16 << "\" text-anchor=\"middle\">" << t
          << "</text>\n";
    }
    std::size_t ci = 0;
    for (const auto& [variant, rows] : curves) {
      const char* color = colors[ci++ % std::size(colors)];
      std::string points;
      auto flush = [&] {
        if (!points.empty()) {
          out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points
              << "\"/>\n";
        }
        points.clear();
      };
      for (const MetricsRow& r : rows) {
        std::optional<double> v = pi == 0 ? std::optional<double>(r.accuracy) : r.generality_rate;
        if (!v) {
          flush();
          continue;
        }
        const double x = left + plot_w * static_cast<double>(r.trials) / static_cast<double>(max_trials);
        const double y = bottom - panel_h * std::clamp(*v / panel.y_max, 0.0, 1.0);
        points += format_double(x, "%.1f") + "," + format_double(y, "%.1f") + " ";
      }
      flush();
      if (pi == 0) {
        const int ly = panel.top + 20 + 18 * static_cast<int>(ci - 1);
        out << "<line x1=\"" << left + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 30
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + plot_w + 36 << "\" y=\"" << ly + 4 << "\">" << variant << "</text>\n";
      }
    }
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">instances (explore + exploit trials)</text>\n</svg>\n";
}

}  // namespace xof
