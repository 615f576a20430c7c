#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "xof/harness.hpp"

using namespace xof;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("xof_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

RunSpec small_spec(const fs::path& out) {
  RunSpec spec;
  spec.problem = "mux-2";
  spec.variant = Variant::GCFF_NCF;
  spec.seed = 3;
  spec.trials = 3000;
  spec.population = 300;
  spec.out_dir = out;
  return spec;
}

}  // namespace

TEST_CASE("a run writes its result files") {
  const fs::path dir = fresh_dir("run");
  const RunResult r = run_experiment(small_spec(dir));
  CHECK(r.csv_path == dir / "mux-2_GCFF_NCF_s3.csv");
  for (const char* ext : {".csv", ".pop", ".ol", ".summary"}) CHECK(fs::exists(dir / ("mux-2_GCFF_NCF_s3" + std::string(ext))));
  CHECK(r.rows.size() == 6);
  CHECK(r.rows.back().trials == 3000);
  CHECK(slurp(r.csv_path).starts_with("trials,accuracy,generality_rate,macro_size,ol_size,mean_cf_depth\n"));
  const auto rows = read_metrics_csv(r.csv_path);
  REQUIRE(rows.size() == r.rows.size());
  CHECK(rows.back().accuracy == doctest::Approx(r.final_accuracy()).epsilon(1e-6));
  CHECK(slurp(dir / "mux-2_GCFF_NCF_s3.summary").find("stuck=no") != std::string::npos);
}

TEST_CASE("identical specs give byte-identical output") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  run_experiment(small_spec(a));
  run_experiment(small_spec(b));
  for (const char* ext : {".csv", ".pop", ".ol"}) {
    CHECK(slurp(a / ("mux-2_GCFF_NCF_s3" + std::string(ext))) == slurp(b / ("mux-2_GCFF_NCF_s3" + std::string(ext))));
  }
  RunSpec other = small_spec(b);
  other.seed = 4;
  run_experiment(other);
  CHECK(slurp(a / "mux-2_GCFF_NCF_s3.csv") != slurp(b / "mux-2_GCFF_NCF_s4.csv"));
}

TEST_CASE("a sweep writes every run and the mean curve") {
  const fs::path dir = fresh_dir("sweep");
  RunSpec spec = small_spec(dir);
  spec.trials = 1000;
  const auto results = run_sweep(spec, 1, 5, 2);
  REQUIRE(results.size() == 5);
  for (int s = 1; s <= 5; ++s) CHECK(fs::exists(dir / ("mux-2_GCFF_NCF_s" + std::to_string(s) + ".csv")));
  CHECK(fs::exists(dir / "mux-2_GCFF_NCF_mean.csv"));
  CHECK(find_run_csvs(dir).size() == 5);

  // Parallel runs match sequential ones.
  RunSpec single = spec;
  single.seed = 4;
  single.out_dir = fresh_dir("sweep_single");
  run_experiment(single);
  CHECK(slurp(dir / "mux-2_GCFF_NCF_s4.csv") == slurp(single.out_dir / "mux-2_GCFF_NCF_s4.csv"));

  const auto mean = read_metrics_csv(dir / "mux-2_GCFF_NCF_mean.csv");
  REQUIRE(mean.size() == results[0].rows.size());
  double acc = 0.0;
  for (const auto& r : results) acc += r.rows.back().accuracy;
  CHECK(mean.back().accuracy == doctest::Approx(acc / 5).epsilon(1e-6));
}

TEST_CASE("mean series") {
  std::vector<MetricsRow> a{{500, 0.4, std::nullopt, 10, 5, 1.0}, {1000, 0.8, 0.02, 12, 6, 2.0}};
  std::vector<MetricsRow> b{{500, 0.6, std::nullopt, 20, 7, 3.0}, {1000, 1.0, std::nullopt, 14, 8, 2.0}};
  const auto m = mean_series({a, b});
  REQUIRE(m.size() == 2);
  CHECK(m[0].accuracy == doctest::Approx(0.5));
  CHECK_FALSE(m[0].generality_rate);
  CHECK(*m[1].generality_rate == doctest::Approx(0.02));
  CHECK(m[1].macro_size == 13);
  CHECK(m[0].mean_cf_depth == doctest::Approx(2.0));
}

TEST_CASE("stuck detection") {
  std::vector<MetricsRow> rows;
  for (std::uint64_t t = 1000; t <= 10000; t += 1000) rows.push_back({t, 0.5, std::nullopt, 0, 0, 0.0});
  CHECK(is_stuck(rows, 10000));
  rows[8].accuracy = 0.56;
  CHECK_FALSE(is_stuck(rows, 10000));
  rows[8].accuracy = 0.45;
  rows[1].accuracy = 1.0;  // outside the final 20%
  CHECK(is_stuck(rows, 10000));
  CHECK_FALSE(is_stuck({}, 10000));
}

TEST_CASE("first trial reaching an accuracy") {
  RunResult r;
  r.rows = {{500, 0.6, std::nullopt, 0, 0, 0.0}, {1000, 0.995, std::nullopt, 0, 0, 0.0}, {1500, 1.0, 0.1, 0, 0, 0.0}};
  CHECK(*r.first_reaching(0.99) == 1000);
  CHECK(*r.first_reaching(1.0) == 1500);
  CHECK_FALSE(r.first_reaching(1.01));
}

TEST_CASE("malformed CSV files name the offending line") {
  const fs::path dir = fresh_dir("bad_csv");
  const fs::path bad = dir / "p_GCFF_s1.csv";
  {
    std::ofstream out(bad);
    out << "trials,accuracy,generality_rate,macro_size,ol_size,mean_cf_depth\n500,0.5,,10,3,1.0\n1000,abc,,10,3,1.0\n";
  }
  try {
    read_metrics_csv(bad);
    FAIL("expected a CsvError");
  } catch (const CsvError& e) {
    const std::string what = e.what();
    CHECK(what.find("p_GCFF_s1.csv") != std::string::npos);
    CHECK(what.find("3") != std::string::npos);
  }
  {
    std::ofstream out(bad);
    out << "wrong,header\n";
  }
  CHECK_THROWS_AS(read_metrics_csv(bad), CsvError);
  {
    std::ofstream out(bad);
    out << "trials,accuracy,generality_rate,macro_size,ol_size,mean_cf_depth\n500,0.5,,10\n";
  }
  CHECK_THROWS_AS(read_metrics_csv(bad), CsvError);
  CHECK_THROWS_AS(read_metrics_csv(dir / "missing.csv"), CsvError);
}

TEST_CASE("plots") {
  const fs::path dir = fresh_dir("plot");
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name);
    out << "trials,accuracy,generality_rate,macro_size,ol_size,mean_cf_depth\n" << body;
  };

  SUBCASE("one CSV gives one line per panel") {
    write("parity-7_GCFF_s1.csv", "500,0.5,0.01,10,3,1.0\n1000,0.7,0.02,10,3,1.0\n");
    plot_curves(find_run_csvs(dir), dir / "out.svg");
    const std::string svg = slurp(dir / "out.svg");
    CHECK(svg.starts_with("<svg"));
    CHECK(count(svg, "<polyline") == 2);
    CHECK(count(svg, ">GCFF</text>") == 1);
  }

  SUBCASE("four variants give four labelled lines") {
    for (const char* v : {"BF", "SCFF", "GCFF", "GCFF_NCF"}) {
      write(std::string("parity-7_") + v + "_s1.csv", "500,0.5,0.01,10,3,1.0\n1000,0.7,0.02,10,3,1.0\n");
      write(std::string("parity-7_") + v + "_s2.csv", "500,0.6,0.03,10,3,1.0\n1000,0.8,0.04,10,3,1.0\n");
    }
    plot_curves(find_run_csvs(dir), dir / "out.svg");
    const std::string svg = slurp(dir / "out.svg");
    CHECK(count(svg, "<polyline") == 8);
    for (const char* v : {">BF<", ">SCFF<", ">GCFF<", ">GCFF_NCF<"}) CHECK(count(svg, v) == 1);
  }

  SUBCASE("undefined generality leaves a gap") {
    write("parity-7_GCFF_s1.csv",
          "500,0.5,0.01,10,3,1.0\n1000,0.6,0.02,10,3,1.0\n1500,0.7,,10,3,1.0\n2000,0.8,0.03,10,3,1.0\n"
          "2500,0.9,0.04,10,3,1.0\n");
    plot_curves(find_run_csvs(dir), dir / "out.svg");
    const std::string svg = slurp(dir / "out.svg");
    // Accuracy is one line; generality splits in two around the blank cell.
    CHECK(count(svg, "<polyline") == 3);
  }

  SUBCASE("no input") { CHECK_THROWS_AS(plot_curves({}, dir / "out.svg"), CsvError); }
}

TEST_CASE("variants differ only in the OF module rules that fire") {
  RunSpec spec = small_spec({});
  spec.trials = 2000;
  std::map<Variant, OfTrace> traces;
  for (Variant v : {Variant::BF, Variant::SCFF, Variant::GCFF, Variant::GCFF_NCF}) {
    spec.variant = v;
    traces[v] = run_experiment(spec).trace;
  }
  CHECK(traces[Variant::BF].tournament_ol_rebuilds == 4);
  CHECK(traces[Variant::BF].simplified_ol_updates == 0);
  CHECK(traces[Variant::BF].scff_fitness_updates > 0);
  CHECK(traces[Variant::BF].gcff_fitness_updates == 0);

  CHECK(traces[Variant::SCFF].tournament_ol_rebuilds == 0);
  CHECK(traces[Variant::SCFF].simplified_ol_updates > 0);
  CHECK(traces[Variant::SCFF].scff_fitness_updates > 0);
  CHECK(traces[Variant::SCFF].gcff_fitness_updates == 0);

  CHECK(traces[Variant::GCFF].gcff_fitness_updates > 0);
  CHECK(traces[Variant::GCFF].scff_fitness_updates == 0);
  CHECK(traces[Variant::GCFF].niche_case_best_in_niche + traces[Variant::GCFF].niche_case_absent +
            traces[Variant::GCFF].niche_case_scaled ==
        0);

  CHECK(traces[Variant::GCFF_NCF].gcff_fitness_updates > 0);
  CHECK(traces[Variant::GCFF_NCF].niche_case_best_in_niche > 0);
  CHECK(traces[Variant::GCFF_NCF].niche_case_absent > 0);
}

TEST_CASE("invalid run specs") {
  RunSpec spec = small_spec({});
  spec.problem = "parity-99";
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);
  spec = small_spec({});
  spec.trials = 0;
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);
}
