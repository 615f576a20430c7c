#include "doctest.h"
#include "xof/classifier.hpp"
#include "xof/oracle.hpp"

using namespace xof;

namespace {

Classifier make(std::vector<std::string> cfs, int action = 1) {
  std::vector<CodeFragment> condition;
  for (const auto& text : cfs) condition.push_back(parse_cf(text));
  return Classifier(std::move(condition), action);
}

Classifier experienced_accurate(Classifier cl) {
  cl.experience = 100;
  cl.error = 0.0;
  return cl;
}

}  // namespace

TEST_CASE("matching is a conjunction") {
  CHECK(matches(make({}), BitState::parse("0101")));
  CHECK_FALSE(matches(make({"D0"}), BitState::parse("01")));
  CHECK(matches(make({"D0", "!D1"}), BitState::parse("10")));
  CHECK_FALSE(matches(make({"D0", "!D1"}), BitState::parse("11")));
}

TEST_CASE("complexity sums over the condition") {
  CHECK(make({}).complexity() == 0);
  CHECK(make({"D0", "D1×D2", "(!((!D3)×D4))×D5"}).complexity() == 6);
}

TEST_CASE("fitness rate") {
  Classifier a = make({"D0×D1", "D2∧D3", "D4"});
  a.fitness = 0.5;
  CHECK(fitness_rate(a) == doctest::Approx(0.1).epsilon(1e-12));

  Classifier b(std::vector<CodeFragment>{oracle::parity_chain(0, 11)}, 1);
  b.fitness = 1.0;
  CHECK(fitness_rate(b) == doctest::Approx(1.0 / 11.0).epsilon(1e-12));

  b.fitness = 0.0;
  CHECK(fitness_rate(b) == 0.0);
}

TEST_CASE("generality and generality rate") {
  Classifier chain(std::vector<CodeFragment>{oracle::parity_chain(0, 11)}, 1);
  CHECK_FALSE(generality(chain));
  CHECK_FALSE(generality_rate(chain));
  chain.matches = 500;
  chain.no_matches = 500;
  CHECK(*generality(chain) == doctest::Approx(0.5));
  CHECK(*generality_rate(chain) == doctest::Approx(0.5 / 11).epsilon(1e-12));
  CHECK(*generality_rate(chain) == doctest::Approx(0.04545).epsilon(1e-4));

  Classifier all = make({"D0∨(!D0)"});
  all.matches = 64;
  CHECK(*generality_rate(all) == doctest::Approx(0.5));  // complexity 2

  Classifier always = make({"D0"});
  always.matches = 64;
  CHECK(*generality_rate(always) == 1.0);

  Classifier never = make({"D0"});
  never.no_matches = 100;
  CHECK(*generality_rate(never) == 0.0);
}

TEST_CASE("rates do not depend on condition order") {
  Classifier a = make({"D0×D1", "D2", "!D3"});
  Classifier b = make({"!D3", "D2", "D1×D0"});
  a.fitness = b.fitness = 0.3;
  a.matches = b.matches = 3;
  a.no_matches = b.no_matches = 9;
  CHECK(fitness_rate(a) == fitness_rate(b));
  CHECK(*generality_rate(a) == *generality_rate(b));
  CHECK(a.same_rule(b));
}

TEST_CASE("subsumption") {
  const int theta_sub = 50;
  const double eps0 = 10.0;
  const Classifier empty = experienced_accurate(make({}));
  CHECK(does_subsume(empty, make({"D3"}), theta_sub, eps0));
  CHECK(does_subsume(empty, make({"D0", "D1×D2"}), theta_sub, eps0));

  const Classifier d0 = experienced_accurate(make({"D0"}));
  CHECK(does_subsume(d0, make({"D0", "D1×D2"}), theta_sub, eps0));
  CHECK(does_subsume(d0, make({"D2×D1", "D0"}), theta_sub, eps0));
  CHECK_FALSE(does_subsume(d0, make({"D1"}), theta_sub, eps0));
  CHECK_FALSE(does_subsume(d0, make({"D0"}, 0), theta_sub, eps0));

  Classifier young = d0;
  young.experience = theta_sub;
  CHECK_FALSE(does_subsume(young, make({"D0", "D1"}), theta_sub, eps0));
  Classifier inaccurate = d0;
  inaccurate.error = eps0;
  CHECK_FALSE(does_subsume(inaccurate, make({"D0", "D1"}), theta_sub, eps0));
}

TEST_CASE("population dump line") {
  Classifier cl = make({"D0×D1", "!D2"}, 0);
  cl.prediction = 1000.0;
  cl.fitness = 0.25;
  cl.numerosity = 3;
  cl.experience = 42;
  cl.matches = 1;
  cl.no_matches = 3;
  CHECK(condition_string(cl) == "D0×D1,!D2");
  CHECK(dump_line(cl) == "D0×D1,!D2:0\t1000.000000\t0.000000\t0.250000\t3\t42\t0.250000\t3");
  Classifier fresh = make({"D1"});
  CHECK(dump_line(fresh).ends_with("\t0\t\t1"));
}
