#include <cmath>
#include <sstream>

#include "doctest.h"
#include "xof/of_module.hpp"
#include "xof/oracle.hpp"

using namespace xof;

namespace {

ExperimentConfig config_for(Variant v, double p_new = 0.0) {
  ExperimentConfig c;
  c.variant = v;
  c.p_new = p_new;
  return c;
}

ClassifierPtr rule(std::vector<std::string> cfs, double fitness, int action = 1) {
  std::vector<CodeFragment> condition;
  for (const auto& text : cfs) condition.push_back(parse_cf(text));
  auto cl = std::make_shared<Classifier>(std::move(condition), action);
  cl->fitness = fitness;
  return cl;
}

}  // namespace

TEST_CASE("SCFF value") {
  CHECK(cf_fitness_scff(*rule({"D0", "D1", "D2"}, 0.6)) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(cf_fitness_scff(*rule({"D0", "D1×D2"}, 0.0)) == 0.0);
  CHECK(cf_fitness_scff(*rule({}, 0.9)) == 0.0);
}

TEST_CASE("Widrow-Hoff CF-fitness step") {
  CHECK(cf_fitness_step(0.05, 0.10, 0.001) == doctest::Approx(0.05005).epsilon(1e-12));
  CHECK(cf_fitness_step(0.07, 0.07, 0.001) == 0.07);
  double f = 0.0;
  int steps = 0;
  while (std::abs(f - 0.3) >= 1e-6) {
    f = cf_fitness_step(f, 0.3, 0.001);
    ++steps;
  }
  // The error shrinks by (1 - beta_cf) per step.
  CHECK(steps == static_cast<int>(std::ceil(std::log(1e-6 / 0.3) / std::log(0.999))));
}

TEST_CASE("GCFF targets penalise complexity at equal fitness") {
  const auto small = rule({"D0×D1"}, 0.4);
  const auto bloated = rule({"(D0×D1)∧(D2∨(!D2))"}, 0.4);
  CHECK(fitness_rate(*bloated) < fitness_rate(*small));
  CHECK(better_classifier(*small, *bloated, Variant::GCFF));
  // Under plain fitness the two tie; numerosity then complexity break it.
  CHECK(better_classifier(*small, *bloated, Variant::SCFF));
  bloated->numerosity = 2;
  CHECK(better_classifier(*bloated, *small, Variant::SCFF));
}

TEST_CASE("CF-fitness update tracks the best classifier in the action set") {
  OFModule of(config_for(Variant::GCFF), 4);
  of.insert_into_ol(parse_cf("D0"), 0.05);
  const auto a = rule({"D0"}, 0.10);        // rate 0.10
  const auto b = rule({"D0", "D1"}, 0.2);     // rate 0.10, higher complexity
  const auto c = rule({"D0", "D3"}, 0.04);    // rate 0.02
  const std::vector<ClassifierPtr> aset{c, b, a};
  of.update_cf_fitness(aset);
  const CfRecord* rec = of.find(parse_cf("D0").key());
  REQUIRE(rec);
  CHECK(rec->fitness == doctest::Approx(0.05005).epsilon(1e-12));
  CHECK(rec->best.lock() == a);  // tie on rate goes to the lower complexity
  CHECK(of.trace().gcff_fitness_updates == 3);

  OFModule scff(config_for(Variant::SCFF), 4);
  scff.insert_into_ol(parse_cf("D0"), 0.0);
  scff.update_cf_fitness(aset);
  // Best by fitness is b with 0.2 over 2 CFs.
  CHECK(scff.find(parse_cf("D0").key())->fitness == doctest::Approx(0.001 * 0.1).epsilon(1e-12));
  CHECK(scff.trace().scff_fitness_updates == 3);
  CHECK(scff.trace().gcff_fitness_updates == 0);
}

TEST_CASE("stored best survives while it stays better") {
  OFModule of(config_for(Variant::GCFF), 4);
  const auto global = rule({"D0"}, 0.2);
  const auto local = rule({"D0", "D1"}, 0.2);
  of.update_cf_fitness(std::vector<ClassifierPtr>{global});
  of.update_cf_fitness(std::vector<ClassifierPtr>{local});
  CHECK(of.find(parse_cf("D0").key())->best.lock() == global);
  global->numerosity = 0;  // deleted from the population
  of.update_cf_fitness(std::vector<ClassifierPtr>{local});
  CHECK(of.find(parse_cf("D0").key())->best.lock() == local);
}

TEST_CASE("niching cases") {
  OFModule of(config_for(Variant::GCFF_NCF), 4);
  const auto in_niche = rule({"D0"}, 0.10);
  const std::vector<ClassifierPtr> aset{in_niche};
  of.update_cf_fitness(aset);
  CfRecord* d0 = of.find(parse_cf("D0").key());
  d0->fitness = 0.07;
  const NicheContext niche(aset);

  SUBCASE("best classifier in the niche") { CHECK(of.local_cf_fitness(*d0, niche) == 0.07); }

  SUBCASE("absent from the niche") {
    CfRecord& d3 = of.insert_into_ol(parse_cf("D3"), 0.08);
    CHECK(of.local_cf_fitness(d3, niche) == doctest::Approx(0.008).epsilon(1e-12));
  }

  SUBCASE("present but best elsewhere") {
    OFModule other(config_for(Variant::GCFF_NCF), 4);
    const auto global = rule({"D1"}, 0.10);  // rate 0.10
    other.update_cf_fitness(std::vector<ClassifierPtr>{global});
    CfRecord* d1 = other.find(parse_cf("D1").key());
    d1->fitness = 0.06;
    const auto local = rule({"D1", "D2"}, 0.10);  // rate 0.05
    const std::vector<ClassifierPtr> here{local};
    CHECK(other.local_cf_fitness(*d1, NicheContext(here)) == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(other.trace().niche_case_scaled == 1);
  }

  SUBCASE("zero global rate") {
    OFModule other(config_for(Variant::GCFF_NCF), 4);
    const auto zero = rule({"D1"}, 0.0);
    other.update_cf_fitness(std::vector<ClassifierPtr>{zero});
    const auto local = rule({"D1", "D2"}, 0.0);
    const std::vector<ClassifierPtr> here{local};
    CHECK(other.local_cf_fitness(*other.find(parse_cf("D1").key()), NicheContext(here)) == 0.0);
  }
}

TEST_CASE("CF requests") {
  Rng rng(3);
  const BitState state = BitState::parse("1100");

  SUBCASE("empty OL yields a matching leaf") {
    OFModule of(config_for(Variant::GCFF), 4);
    for (int i = 0; i < 50; ++i) {
      const CodeFragment cf = of.request_cf(state, nullptr, rng);
      CHECK(cf.is_leaf());
      CHECK(cf.evaluate(state));
    }
    CHECK(of.trace().bootstrap_leaves == 50);
  }

  SUBCASE("roulette ignores zero weights") {
    OFModule of(config_for(Variant::GCFF), 4);
    of.insert_into_ol(parse_cf("D0∧D1"), 0.9);
    of.insert_into_ol(parse_cf("D2∨D3"), 0.0);
    for (int i = 0; i < 500; ++i) CHECK(of.request_cf(state, nullptr, rng) == parse_cf("D0∧D1"));
  }

  SUBCASE("requested CFs are forced to match") {
    OFModule of(config_for(Variant::GCFF, 0.5), 4);
    of.seed_base_leaves();
    for (int i = 0; i < 500; ++i) CHECK(of.request_cf(state, nullptr, rng).evaluate(state));
    CHECK(of.trace().generated_cfs > 0);
    CHECK(of.trace().reused_cfs > 0);
  }

  SUBCASE("niche calibration weights absent CFs by the discount") {
    OFModule of(config_for(Variant::GCFF_NCF), 4);
    const auto member = rule({"D0"}, 0.5);
    const std::vector<ClassifierPtr> aset{member};
    of.update_cf_fitness(aset);
    of.find(parse_cf("D0").key())->fitness = 0.5;
    of.insert_into_ol(parse_cf("D0"), 0.5);
    of.insert_into_ol(parse_cf("D1"), 0.5);
    const NicheContext niche(aset);
    int d1 = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) d1 += of.request_cf(state, &niche, rng) == parse_cf("D1");
    // Weights 0.5 and 0.05.
    CHECK(static_cast<double>(d1) / draws == doctest::Approx(0.05 / 0.55).epsilon(0.1));

    // Without a niche the global weights apply.
    int global_d1 = 0;
    for (int i = 0; i < draws; ++i) global_d1 += of.request_cf(state, nullptr, rng) == parse_cf("D1");
    CHECK(static_cast<double>(global_d1) / draws == doctest::Approx(0.5).epsilon(0.05));
  }
}

TEST_CASE("generating new CFs") {
  Rng rng(17);
  SUBCASE("two leaves in the OL") {
    OFModule of(config_for(Variant::GCFF), 2);
    of.insert_into_ol(parse_cf("D0"), 0.1);
    of.insert_into_ol(parse_cf("D1"), 0.1);
    for (int i = 0; i < 100; ++i) {
      const CodeFragment cf = of.generate_new_cf(nullptr, rng);
      CHECK(cf.depth() == 1);
      CHECK(cf.complexity() == 2);
      CHECK(cf.max_attribute() == 1);
      CHECK(cf.key().find("D0") != std::string::npos);
      CHECK(cf.key().find("D1") != std::string::npos);
    }
  }

  SUBCASE("operands at the depth limit fall back to leaves") {
    ExperimentConfig c = config_for(Variant::GCFF);
    c.max_depth = 3;
    OFModule of(c, 8);
    of.insert_into_ol(parse_cf("((D0∧D1)∧D2)∧D3"), 0.1);
    of.insert_into_ol(parse_cf("((D4∨D5)∨D6)∨D7"), 0.1);
    for (int i = 0; i < 200; ++i) {
      const CodeFragment cf = of.generate_new_cf(nullptr, rng);
      CHECK(cf.depth() <= 3);
      CHECK(of.find(cf.key()) != nullptr);
    }
  }

  SUBCASE("combined complexity is the sum of the operands") {
    OFModule of(config_for(Variant::GCFF), 6);
    of.insert_into_ol(parse_cf("D0×D1"), 0.1);
    of.insert_into_ol(parse_cf("(D2∧D3)∨D4"), 0.1);
    for (int i = 0; i < 50; ++i) CHECK(of.generate_new_cf(nullptr, rng).complexity() == 5);
  }

  SUBCASE("new CFs start at the OL median") {
    OFModule of(config_for(Variant::GCFF), 6);
    CHECK(of.intern(parse_cf("D5")) == parse_cf("D5"));
    CHECK(of.find("D5")->fitness == 0.01);
    of.insert_into_ol(parse_cf("D0"), 0.1);
    of.insert_into_ol(parse_cf("D1"), 0.3);
    of.insert_into_ol(parse_cf("D2"), 0.2);
    of.intern(parse_cf("D3×D4"));
    CHECK(of.find(parse_cf("D3×D4").key())->fitness == doctest::Approx(0.2));
  }
}

TEST_CASE("selectivity rule") {
  OFModule of(config_for(Variant::GCFF), 6);
  const auto top = rule({"D0"}, 0.10);       // rate 0.100
  const auto near = rule({"D1"}, 0.095);     // rate 0.095
  const auto low = rule({"D2×D3"}, 0.10);    // rate 0.050
  of.update_ol(std::vector<ClassifierPtr>{top, near, low});
  CHECK(of.in_ol("D0"));
  CHECK(of.in_ol("D1"));
  CHECK_FALSE(of.in_ol(parse_cf("D2×D3").key()));
  CHECK(of.ol_size() == 2);

  SUBCASE("single classifier always enters") {
    of.update_ol(std::vector<ClassifierPtr>{low});
    CHECK(of.in_ol(parse_cf("D2×D3").key()));
  }

  SUBCASE("outdated CFs leave and return with their own niche") {
    const auto better = rule({"D4"}, 0.5);
    of.update_ol(std::vector<ClassifierPtr>{better, near});
    CHECK_FALSE(of.in_ol("D1"));
    CHECK(of.in_ol("D4"));
    CHECK(of.in_ol("D0"));  // not carried by this niche
    of.update_ol(std::vector<ClassifierPtr>{near});
    CHECK(of.in_ol("D1"));
  }

  SUBCASE("a CF kept by one classifier is not removed by another") {
    const auto shared_top = rule({"D5", "D1"}, 0.4);  // rate 0.2
    of.update_ol(std::vector<ClassifierPtr>{shared_top, near});
    CHECK(of.in_ol("D1"));
  }

  SUBCASE("base leaves are permanent") {
    OFModule seeded(config_for(Variant::GCFF), 3);
    seeded.seed_base_leaves();
    CHECK(seeded.ol_size() == 6);
    seeded.update_ol(std::vector<ClassifierPtr>{rule({"D0×D1"}, 0.9), rule({"D2"}, 0.01)});
    CHECK(seeded.in_ol("D2"));
    CHECK(seeded.is_base_leaf("!D2"));
    CHECK(seeded.ol_size() == 7);
  }
}

TEST_CASE("SCFF selectivity uses the per-CF value") {
  OFModule of(config_for(Variant::SCFF), 6);
  const auto two = rule({"D0", "D1"}, 0.4);  // 0.2 per CF
  const auto one = rule({"D2"}, 0.19);       // 0.19
  const auto weak = rule({"D3"}, 0.1);       // 0.1
  of.update_ol(std::vector<ClassifierPtr>{two, one, weak});
  CHECK(of.in_ol("D0"));
  CHECK(of.in_ol("D1"));
  CHECK(of.in_ol("D2"));
  CHECK_FALSE(of.in_ol("D3"));
}

TEST_CASE("BF maintenance") {
  ExperimentConfig c = config_for(Variant::BF);
  c.bf_ol_capacity = 3;
  OFModule of(c, 4);
  of.seed_base_leaves();
  of.update_ol(std::vector<ClassifierPtr>{rule({"D0×D1"}, 0.9)});
  CHECK(of.ol_size() == 8);
  CHECK(of.trace().simplified_ol_updates == 0);

  for (const char* text : {"D0×D1", "D1×D2", "D2×D3", "D0∧D3", "D1∨D2"}) of.intern(parse_cf(text));
  of.find(parse_cf("D0×D1").key())->fitness = 5.0;
  Rng rng(1);
  of.rebuild_ol_by_tournament(rng);
  CHECK(of.ol_size() <= 8 + 3);
  CHECK(of.ol_size() > 8);
  for (int a = 0; a < 4; ++a) CHECK(of.in_ol("D" + std::to_string(a)));
  CHECK(of.in_ol(parse_cf("D0×D1").key()));
  CHECK(of.trace().tournament_ol_rebuilds == 1);
}

TEST_CASE("registry pruning") {
  OFModule of(config_for(Variant::GCFF), 4);
  of.insert_into_ol(parse_cf("D0"), 0.1);
  of.intern(parse_cf("D1×D2"));
  of.intern(parse_cf("D2∧D3"));
  const auto user = rule({"D2∧D3"}, 0.1);
  of.prune(std::vector<ClassifierPtr>{user});
  CHECK(of.find("D0"));
  CHECK(of.find(parse_cf("D2∧D3").key()));
  CHECK_FALSE(of.find(parse_cf("D1×D2").key()));
  CHECK(of.registry_size() == 2);
}

TEST_CASE("OL dump is sorted by fitness") {
  OFModule of(config_for(Variant::GCFF), 4);
  of.insert_into_ol(parse_cf("D0"), 0.01);
  of.insert_into_ol(parse_cf("(!((!D3)×D2))∧D1"), 0.157);
  of.insert_into_ol(parse_cf("!D2"), 0.05);
  std::ostringstream out;
  of.dump_ol(out);
  const std::string top = parse_cf("(!((!D3)×D2))∧D1").to_string();
  CHECK(out.str() == top + "\t0.157000\n!D2\t0.050000\nD0\t0.010000\n");
}
