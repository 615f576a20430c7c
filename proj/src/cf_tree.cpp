#include "xof/cf_tree.hpp"

#include <algorithm>
#include <cctype>

#include "xof/random.hpp"

namespace xof {

namespace {

// The evaluator keeps pending operands in the bits of one word, so the tree
// must stay shallow enough for the postfix stack to fit.
constexpr int kHardDepthLimit = 62;

struct Subtree {
  std::vector<CfToken> tokens;
  std::string key;
  int depth = 0;
};

std::string leaf_key(const CfToken& t) {
  std::string k = t.negated ? "!D" : "D";
  k += std::to_string(t.attribute);
  return k;
}

}  // namespace

std::string_view function_symbol(Function f) {
  switch (f) {
    case Function::And: return "∧";
    case Function::Or: return "∨";
    case Function::Nand: return " nand ";
    case Function::Xor: return "×";
  }
  return "?";
}

std::string_view function_name(Function f) {
  switch (f) {
    case Function::And: return "and";
    case Function::Or: return "or";
    case Function::Nand: return "nand";
    case Function::Xor: return "xor";
  }
  return "?";
}

Function function_from_name(std::string_view name) {
  for (Function f : kAllFunctions) {
    if (function_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown function '" + std::string(name) + "'");
}

CodeFragment CodeFragment::build(std::vector<CfToken> tokens) {
  if (tokens.empty()) throw CfStructureError("code fragment: empty token sequence");
  std::vector<Subtree> stack;
  int leaves = 0;
  int max_attr = 0;
  for (const CfToken& t : tokens) {
    if (t.is_leaf) {
      ++leaves;
      max_attr = std::max<int>(max_attr, t.attribute);
      stack.push_back(Subtree{{t}, leaf_key(t), 0});
      continue;
    }
    if (stack.size() < 2) throw CfStructureError("code fragment: operator without two operands");
    Subtree right = std::move(stack.back());
    stack.pop_back();
    Subtree left = std::move(stack.back());
    stack.pop_back();
    if (right.key < left.key) std::swap(left, right);

    Subtree node;
    node.depth = 1 + std::max(left.depth, right.depth);
    node.key.reserve(left.key.size() + right.key.size() + 8);
    if (t.negated) node.key += '!';
    node.key += function_name(t.function);
    node.key += '(';
    node.key += left.key;
    node.key += ',';
    node.key += right.key;
    node.key += ')';
    node.tokens = std::move(left.tokens);
    node.tokens.insert(node.tokens.end(), right.tokens.begin(), right.tokens.end());
    node.tokens.push_back(t);
    stack.push_back(std::move(node));
  }
  if (stack.size() != 1) throw CfStructureError("code fragment: tokens do not form a single tree");
  if (stack.back().depth > kHardDepthLimit) throw CfStructureError("code fragment: tree too deep");

  auto impl = std::make_shared<Impl>();
  impl->tokens = std::move(stack.back().tokens);
  impl->key = std::move(stack.back().key);
  impl->complexity = leaves;
  impl->depth = stack.back().depth;
  impl->max_attribute = max_attr;
  return CodeFragment(std::move(impl));
}

CodeFragment CodeFragment::leaf(int attribute, bool negated) {
  if (attribute < 0 || attribute >= kMaxAttributes) throw CfStructureError("code fragment: attribute index out of range");
  CfToken t;
  t.is_leaf = true;
  t.negated = negated;
  t.attribute = static_cast<std::uint16_t>(attribute);
  return build({t});
}

CodeFragment CodeFragment::random_leaf(int attribute_count, Rng& rng) {
  const int attr = rng.below(attribute_count);
  return leaf(attr, rng.coin());
}

CodeFragment CodeFragment::from_tokens(std::span<const CfToken> tokens) {
  return build(std::vector<CfToken>(tokens.begin(), tokens.end()));
}

namespace {
constexpr int kMemoMaxAttributes = 12;
}

bool CodeFragment::evaluate_tokens(std::uint64_t bits) const {
  std::uint64_t stack = 0;
  for (const CfToken& t : impl_->tokens) {
    if (t.is_leaf) {
      const std::uint64_t v = ((bits >> t.attribute) & 1U) ^ static_cast<std::uint64_t>(t.negated);
      stack = (stack << 1) | v;
    } else {
      const bool b = stack & 1U;
      const bool a = (stack >> 1) & 1U;
      stack >>= 2;
      const bool v = apply_function(t.function, a, b) != t.negated;
      stack = (stack << 1) | static_cast<std::uint64_t>(v);
    }
  }
  return stack & 1U;
}

bool CodeFragment::evaluate(const BitState& state) const {
  if (impl_->max_attribute >= state.size()) {
    throw CfStructureError("code fragment " + key() + " reads an attribute outside the state");
  }
  const int n = state.size();
  if (n > kMemoMaxAttributes) return evaluate_tokens(state.bits());
  int built = impl_->memo_size.load(std::memory_order_acquire);
  if (built < 0) {
    std::lock_guard lock(impl_->memo_mutex);
    built = impl_->memo_size.load(std::memory_order_relaxed);
    if (built < 0) {
      const std::uint64_t count = std::uint64_t{1} << n;
      impl_->memo.assign((count + 63) / 64, 0);
      for (std::uint64_t s = 0; s < count; ++s) {
        if (evaluate_tokens(s)) impl_->memo[s / 64] |= std::uint64_t{1} << (s % 64);
      }
      impl_->memo_size.store(n, std::memory_order_release);
      built = n;
    }
  }
  if (built != n) return evaluate_tokens(state.bits());
  const std::uint64_t s = state.bits();
  return (impl_->memo[s / 64] >> (s % 64)) & 1U;
}

std::string CodeFragment::to_string() const {
  // Each entry: rendered body and whether it is an internal node.
  struct Part {
    std::string text;
    bool internal;
    bool negated;
  };
  auto wrap = [](const Part& p) {
    // Rendering of a node that appears as an operand.
    std::string s = p.text;
    if (p.internal) s = "(" + s + ")";
    if (p.negated) s = "(!" + s + ")";
    return s;
  };
  std::vector<Part> stack;
  for (const CfToken& t : impl_->tokens) {
    if (t.is_leaf) {
      stack.push_back({"D" + std::to_string(t.attribute), false, t.negated});
      continue;
    }
    Part right = std::move(stack.back());
    stack.pop_back();
    Part left = std::move(stack.back());
    stack.pop_back();
    stack.push_back({wrap(left) + std::string(function_symbol(t.function)) + wrap(right), true, t.negated});
  }
  const Part& root = stack.back();
  if (!root.negated) return root.text;
  return root.internal ? "!(" + root.text + ")" : "!" + root.text;
}

bool eval_cf(const CodeFragment& cf, const BitState& state) { return cf.evaluate(state); }

CodeFragment negate(const CodeFragment& cf) {
  std::vector<CfToken> tokens(cf.tokens().begin(), cf.tokens().end());
  tokens.back().negated = !tokens.back().negated;
  return CodeFragment::build(std::move(tokens));
}

std::optional<CodeFragment> combine(const CodeFragment& a, const CodeFragment& b, Function f, int max_depth) {
  if (1 + std::max(a.depth(), b.depth()) > std::min(max_depth, kHardDepthLimit)) return std::nullopt;
  std::vector<CfToken> tokens;
  tokens.reserve(a.tokens().size() + b.tokens().size() + 1);
  tokens.insert(tokens.end(), a.tokens().begin(), a.tokens().end());
  tokens.insert(tokens.end(), b.tokens().begin(), b.tokens().end());
  CfToken op;
  op.is_leaf = false;
  op.function = f;
  tokens.push_back(op);
  return CodeFragment::build(std::move(tokens));
}

namespace {

class NotationParser {
 public:
  explicit NotationParser(std::string_view text) : text_(text) {}

  CodeFragment parse() {
    CodeFragment cf = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return cf;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw CfStructureError("cannot parse '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  std::optional<Function> binary_operator() {
    if (consume("×") || consume("^")) return Function::Xor;
    if (consume("∧") || consume("&")) return Function::And;
    if (consume("∨") || consume("|")) return Function::Or;
    if (consume("nand")) return Function::Nand;
    return std::nullopt;
  }

  CodeFragment expression() {
    CodeFragment lhs = unary();
    while (auto f = binary_operator()) {
      CodeFragment rhs = unary();
      auto node = combine(lhs, rhs, *f, kHardDepthLimit);
      if (!node) fail("expression too deep");
      lhs = *node;
    }
    return lhs;
  }

  CodeFragment unary() {
    if (consume("!") || consume("~")) return negate(unary());
    if (consume("(")) {
      CodeFragment inner = expression();
      if (!consume(")")) fail("expected ')'");
      return inner;
    }
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == 'D') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected attribute index after 'D'");
      return CodeFragment::leaf(std::stoi(std::string(text_.substr(start, pos_ - start))));
    }
    fail("expected '!', '(' or D<k>");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

CodeFragment parse_cf(std::string_view text) { return NotationParser(text).parse(); }

}  // namespace xof
