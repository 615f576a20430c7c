#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xof/cf_tree.hpp"
#include "xof/classifier.hpp"
#include "xof/random.hpp"

namespace xof::oracle {

inline constexpr int kMaxOracleAttributes = 22;

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The full truth table of a Boolean function of n attributes. Entry i is the
/// value on the state whose bit j is attribute D<j> (D0 least significant).
class TruthTable {
 public:
  TruthTable(int n, bool fill);

  int n() const { return n_; }
  std::uint64_t size() const { return std::uint64_t{1} << n_; }
  bool at(std::uint64_t index) const { return (words_[index >> 6] >> (index & 63)) & 1U; }
  void set(std::uint64_t index, bool value);
  std::uint64_t count_ones() const;

  TruthTable operator~() const;
  TruthTable& operator&=(const TruthTable& other);
  friend TruthTable operator&(TruthTable a, const TruthTable& b) { return a &= b; }
  friend bool operator==(const TruthTable&, const TruthTable&) = default;

  /// Rows as '0'/'1', index 0 first.
  std::string to_string() const;

  std::vector<std::uint64_t>& words() { return words_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  void clear_tail();

  int n_;
  std::vector<std::uint64_t> words_;
};

/// Table of attribute D<attribute> over n attributes.
TruthTable attribute_table(int attribute, int n);

/// Evaluates cf on all 2^n states with a recursive table-level evaluator that
/// shares no code with CodeFragment::evaluate. Throws OracleError when n is
/// above kMaxOracleAttributes or a leaf is out of range.
TruthTable truth_table(const CodeFragment& cf, int n);

/// Table of states matched by the conjunction of the condition.
TruthTable match_table(const Classifier& cl, int n);

/// Exact fraction of the 2^n states matched by cl.
double exact_generality(const Classifier& cl, int n);

bool semantically_equal(const CodeFragment& a, const CodeFragment& b, int n);

/// Analytic or brute-force optimum of the per-rule generality rate among
/// accurate rules. "parity-<n>" gives 0.5/n; "hmux18" and "hmaj18" are
/// searched exhaustively over conjunctions of optimal chunk CFs.
double optimal_generality_rate(std::string_view problem);

/// Brute-force search used by optimal_generality_rate for the hierarchical
/// problems: every conjunction of {absent, chunk parity CF, its negation} per
/// chunk, both actions, exact evaluation over all 2^18 states.
double hierarchical_optimum_by_search(std::string_view problem);

/// The right-leaning XOR chain over D<first>..D<first+count-1> with a NOT on
/// every inner link, as used to cover parity: (!(...!(D0×D1)×D2...)×Dk).
CodeFragment parity_chain(int first, int count);

/// Random tree for property checks: internal nodes down to max_depth with
/// random functions and NOT flags at any node.
CodeFragment random_cf(int n, int max_depth, Rng& rng);

struct SuiteResult {
  std::string name;
  std::uint64_t passed = 0;
  std::uint64_t failed = 0;
};

/// Runs the equivalence suites (evaluator vs truth table, negation,
/// structural invariants, subsumption soundness).
std::vector<SuiteResult> run_oracle_check(std::uint64_t seed, int cf_count);

}  // namespace xof::oracle
