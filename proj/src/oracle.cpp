#include "xof/oracle.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <functional>
#include <memory>

#include "xof/problems.hpp"

namespace xof::oracle {

TruthTable::TruthTable(int n, bool fill) : n_(n) {
  if (n < 0 || n > kMaxOracleAttributes) {
    throw OracleError("truth table over " + std::to_string(n) + " attributes is too large");
  }
  words_.assign(static_cast<std::size_t>((size() + 63) / 64), fill ? ~std::uint64_t{0} : 0);
  clear_tail();
}

void TruthTable::clear_tail() {
  const std::uint64_t used = size() % 64;
  if (used != 0) words_.back() &= (std::uint64_t{1} << used) - 1;
}

void TruthTable::set(std::uint64_t index, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (index & 63);
  if (value) {
    words_[index >> 6] |= mask;
  } else {
    words_[index >> 6] &= ~mask;
  }
}

std::uint64_t TruthTable::count_ones() const {
  std::uint64_t total = 0;
  for (std::uint64_t w : words_) total += static_cast<std::uint64_t>(std::popcount(w));
  return total;
}

TruthTable TruthTable::operator~() const {
  TruthTable t = *this;
  for (auto& w : t.words_) w = ~w;
  t.clear_tail();
  return t;
}

TruthTable& TruthTable::operator&=(const TruthTable& other) {
  if (other.n_ != n_) throw OracleError("truth tables of different sizes");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

std::string TruthTable::to_string() const {
  std::string s;
  s.reserve(size());
  for (std::uint64_t i = 0; i < size(); ++i) s += at(i) ? '1' : '0';
  return s;
}

TruthTable attribute_table(int attribute, int n) {
  if (attribute < 0 || attribute >= n) throw OracleError("attribute D" + std::to_string(attribute) + " out of range");
  TruthTable t(n, false);
  for (std::uint64_t i = 0; i < t.size(); ++i) {
    if ((i >> attribute) & 1U) t.set(i, true);
  }
  return t;
}

namespace {

// Tree rebuilt from the postfix tokens so the oracle evaluates by structural
// recursion rather than by replaying the token stream.
struct OracleNode {
  CfToken token;
  std::unique_ptr<OracleNode> left;
  std::unique_ptr<OracleNode> right;
};

std::unique_ptr<OracleNode> rebuild(std::span<const CfToken> tokens, std::size_t& pos) {
  if (pos == 0) throw OracleError("malformed token sequence");
  auto node = std::make_unique<OracleNode>();
  node->token = tokens[--pos];
  if (!node->token.is_leaf) {
    node->right = rebuild(tokens, pos);
    node->left = rebuild(tokens, pos);
  }
  return node;
}

TruthTable table_of(const OracleNode& node, int n) {
  TruthTable result(n, false);
  if (node.token.is_leaf) {
    result = attribute_table(node.token.attribute, n);
  } else {
    const TruthTable l = table_of(*node.left, n);
    const TruthTable r = table_of(*node.right, n);
    auto& out = result.words();
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::uint64_t a = l.words()[i];
      const std::uint64_t b = r.words()[i];
      switch (node.token.function) {
        case Function::And: out[i] = a & b; break;
        case Function::Or: out[i] = a | b; break;
        case Function::Nand: out[i] = ~(a & b); break;
        case Function::Xor: out[i] = a ^ b; break;
      }
    }
    // Nand can set bits past the end; round-trip through ~~ clears them.
    result = ~~result;
  }
  return node.token.negated ? ~result : result;
}

}  // namespace

TruthTable truth_table(const CodeFragment& cf, int n) {
  if (n > kMaxOracleAttributes) throw OracleError("refusing to enumerate 2^" + std::to_string(n) + " states");
  const auto tokens = cf.tokens();
  std::size_t pos = tokens.size();
  auto root = rebuild(tokens, pos);
  if (pos != 0) throw OracleError("malformed token sequence");
  return table_of(*root, n);
}

TruthTable match_table(const Classifier& cl, int n) {
  TruthTable t(n, true);
  for (const CodeFragment& cf : cl.condition()) t &= truth_table(cf, n);
  return t;
}

double exact_generality(const Classifier& cl, int n) {
  const TruthTable t = match_table(cl, n);
  return static_cast<double>(t.count_ones()) / static_cast<double>(t.size());
}

bool semantically_equal(const CodeFragment& a, const CodeFragment& b, int n) {
  return truth_table(a, n) == truth_table(b, n);
}

CodeFragment parity_chain(int first, int count) {
  if (count < 1) throw OracleError("parity chain needs at least one attribute");
  CodeFragment chain = CodeFragment::leaf(first);
  for (int i = 1; i < count; ++i) {
    const CodeFragment link = i == 1 ? chain : negate(chain);
    chain = *combine(link, CodeFragment::leaf(first + i), Function::Xor, 62);
  }
  return chain;
}

double hierarchical_optimum_by_search(std::string_view problem) {
  auto env = make_environment(problem);
  if (env->attribute_count() != 18) throw OracleError("hierarchical search expects an 18-bit problem");
  const int n = 18;
  TruthTable label(n, false);
  for (std::uint64_t i = 0; i < label.size(); ++i) label.set(i, env->label(BitState(i, n)) == 1);
  const TruthTable not_label = ~label;

  std::vector<TruthTable> chunk_tables[2];
  for (int c = 0; c < 6; ++c) {
    const CodeFragment cf = *combine(*combine(CodeFragment::leaf(3 * c), CodeFragment::leaf(3 * c + 1), Function::Xor, 62),
                                     CodeFragment::leaf(3 * c + 2), Function::Xor, 62);
    chunk_tables[0].push_back(truth_table(cf, n));
    chunk_tables[1].push_back(truth_table(negate(cf), n));
  }

  double best = 0.0;
  int choice[6];
  for (int code = 0; code < 729; ++code) {
    int rest = code;
    int used = 0;
    TruthTable matched(n, true);
    for (int c = 0; c < 6; ++c) {
      choice[c] = rest % 3;
      rest /= 3;
      if (choice[c] == 0) continue;
      matched &= chunk_tables[choice[c] - 1][static_cast<std::size_t>(c)];
      ++used;
    }
    const std::uint64_t hits = matched.count_ones();
    if (hits == 0 || used == 0) continue;
    const bool accurate = (matched & not_label).count_ones() == 0 || (matched & label).count_ones() == 0;
    if (!accurate) continue;
    const double rate = static_cast<double>(hits) / static_cast<double>(matched.size()) / (3.0 * used);
    best = std::max(best, rate);
  }
  return best;
}

double optimal_generality_rate(std::string_view problem) {
  if (problem.starts_with("parity-")) {
    const std::string_view digits = problem.substr(7);
    int n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || n < 2) {
      throw OracleError("unsupported problem '" + std::string(problem) + "'");
    }
    return 0.5 / n;
  }
  if (problem == "hmux18" || problem == "hmaj18") return hierarchical_optimum_by_search(problem);
  throw OracleError("no optimal generality rate for '" + std::string(problem) + "'");
}

CodeFragment random_cf(int n, int max_depth, Rng& rng) {
  std::vector<CfToken> tokens;
  std::function<void(int)> grow = [&](int depth) {
    CfToken t;
    t.negated = rng.coin();
    if (depth >= max_depth || rng.chance(0.3)) {
      t.is_leaf = true;
      t.attribute = static_cast<std::uint16_t>(rng.below(n));
      tokens.push_back(t);
      return;
    }
    grow(depth + 1);
    grow(depth + 1);
    t.is_leaf = false;
    t.function = kAllFunctions[rng.below(4)];
    tokens.push_back(t);
  };
  grow(0);
  return CodeFragment::from_tokens(tokens);
}

std::vector<SuiteResult> run_oracle_check(std::uint64_t seed, int cf_count) {
  constexpr int n = 8;
  Rng rng(seed);
  SuiteResult eval{"evaluator vs truth table"};
  SuiteResult structure{"structural invariants"};
  SuiteResult negation{"negation complements"};
  SuiteResult subsumption{"subsumption soundness"};

  std::vector<CodeFragment> pool;
  for (int i = 0; i < cf_count; ++i) {
    const CodeFragment cf = random_cf(n, 6, rng);
    pool.push_back(cf);
    const TruthTable table = truth_table(cf, n);
    bool agree = true;
    for (std::uint64_t s = 0; s < table.size(); ++s) agree &= cf.evaluate(BitState(s, n)) == table.at(s);
    ++(agree ? eval.passed : eval.failed);

    const bool shape_ok = cf.complexity() == cf.internal_count() + 1 && cf.depth() <= 6;
    ++(shape_ok ? structure.passed : structure.failed);

    const CodeFragment neg = negate(cf);
    const bool neg_ok = neg.complexity() == cf.complexity() && neg.depth() == cf.depth() &&
                        truth_table(neg, n) == ~table && truth_table(negate(neg), n) == table;
    ++(neg_ok ? negation.passed : negation.failed);
  }

  for (int i = 0; i < cf_count && !pool.empty(); ++i) {
    std::vector<CodeFragment> specific;
    const int len = 1 + rng.below(4);
    for (int j = 0; j < len; ++j) specific.push_back(pool[rng.below(pool.size())]);
    std::vector<CodeFragment> general;
    for (const CodeFragment& cf : specific) {
      if (rng.coin()) general.push_back(cf);
    }
    Classifier g(general, 1);
    Classifier s(specific, 1);
    g.experience = 100;
    g.error = 0.0;
    if (!does_subsume(g, s, 50, 10.0)) {
      ++subsumption.failed;
      continue;
    }
    const bool sound = (match_table(s, n) & ~match_table(g, n)).count_ones() == 0;
    ++(sound ? subsumption.passed : subsumption.failed);
  }
  return {eval, structure, negation, subsumption};
}

}  // namespace xof::oracle
