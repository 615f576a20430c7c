#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xof/bit_state.hpp"

namespace xof {

class Rng;

/// Binary functions available to internal nodes. NOT is not a node: it is a
/// flag carried by every node.
enum class Function : std::uint8_t { And, Or, Nand, Xor };

inline constexpr Function kAllFunctions[] = {Function::And, Function::Or, Function::Nand, Function::Xor};

std::string_view function_symbol(Function f);
std::string_view function_name(Function f);
Function function_from_name(std::string_view name);

inline constexpr bool apply_function(Function f, bool a, bool b) {
  switch (f) {
    case Function::And: return a && b;
    case Function::Or: return a || b;
    case Function::Nand: return !(a && b);
    case Function::Xor: return a != b;
  }
  return false;
}

/// Raised when a tree refers to attributes the state does not have, or when
/// textual notation cannot be parsed.
class CfStructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One node of a code fragment in postfix order.
struct CfToken {
  bool is_leaf = true;
  bool negated = false;
  Function function = Function::And;  // internal nodes only
  std::uint16_t attribute = 0;        // leaves only

  friend bool operator==(const CfToken&, const CfToken&) = default;
};

/// An immutable Boolean expression tree over input attributes.
///
/// The tree is stored as a postfix token sequence. Children of every internal
/// node are kept in canonical order (smaller canonical key first), so two
/// fragments with the same key also have identical tokens. Copies share the
/// underlying storage.
class CodeFragment {
 public:
  /// Single-attribute fragment D<attribute>, optionally negated.
  static CodeFragment leaf(int attribute, bool negated = false);

  /// Leaf over a uniformly random attribute with a uniformly random NOT flag.
  static CodeFragment random_leaf(int attribute_count, Rng& rng);

  /// Builds a fragment from postfix tokens. Throws CfStructureError when the
  /// tokens do not describe exactly one binary tree.
  static CodeFragment from_tokens(std::span<const CfToken> tokens);

  std::span<const CfToken> tokens() const { return impl_->tokens; }
  /// Number of leaves; NOT flags are not counted.
  int complexity() const { return impl_->complexity; }
  /// Edges on the longest root-to-leaf path; a leaf has depth 0.
  int depth() const { return impl_->depth; }
  int max_attribute() const { return impl_->max_attribute; }
  bool root_negated() const { return impl_->tokens.back().negated; }
  bool is_leaf() const { return impl_->tokens.size() == 1; }
  int internal_count() const { return static_cast<int>(impl_->tokens.size()) - impl_->complexity; }
  const std::string& key() const { return impl_->key; }

  bool evaluate(const BitState& state) const;

  /// Infix notation, e.g. "(!((!D3)×D4))×D5".
  std::string to_string() const;

  /// Same identity as canonical key equality.
  friend bool operator==(const CodeFragment& a, const CodeFragment& b) {
    return a.impl_ == b.impl_ || a.impl_->key == b.impl_->key;
  }

 private:
  struct Impl {
    std::vector<CfToken> tokens;
    std::string key;
    int complexity = 0;
    int depth = 0;
    int max_attribute = 0;
    // Truth table over states of memo_size attributes, filled on first use.
    // Built once; states of any other size are evaluated directly.
    mutable std::atomic<int> memo_size{-1};
    mutable std::vector<std::uint64_t> memo;
    mutable std::mutex memo_mutex;
  };

  bool evaluate_tokens(std::uint64_t bits) const;

  explicit CodeFragment(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  static CodeFragment build(std::vector<CfToken> tokens);

  std::shared_ptr<const Impl> impl_;

  friend CodeFragment negate(const CodeFragment& cf);
  friend std::optional<CodeFragment> combine(const CodeFragment& a, const CodeFragment& b, Function f, int max_depth);
};

bool eval_cf(const CodeFragment& cf, const BitState& state);

inline int complexity(const CodeFragment& cf) { return cf.complexity(); }

/// Flips the NOT flag on the root.
CodeFragment negate(const CodeFragment& cf);

inline const std::string& canonical_key(const CodeFragment& cf) { return cf.key(); }

/// Internal(f, a, b) with an un-negated root, or nullopt when the result would
/// be deeper than max_depth.
std::optional<CodeFragment> combine(const CodeFragment& a, const CodeFragment& b, Function f, int max_depth);

/// Parses infix notation as produced by to_string(). Besides the
/// symbols (×, ∧, ∨, nand) the ASCII aliases ^, &, | are accepted.
CodeFragment parse_cf(std::string_view text);

/// Returns cf if it evaluates to 1 on the state, otherwise its negation.
inline CodeFragment force_match(const CodeFragment& cf, const BitState& state) {
  return cf.evaluate(state) ? cf : negate(cf);
}

}  // namespace xof
