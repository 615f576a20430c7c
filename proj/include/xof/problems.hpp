#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "xof/bit_state.hpp"
#include "xof/config.hpp"
#include "xof/random.hpp"

namespace xof {

/// A single-step Boolean classification problem. Stateless: labels are a pure
/// function of the state and sampling is uniform over {0,1}^n.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::string name() const = 0;
  virtual int attribute_count() const = 0;
  virtual int label(const BitState& state) const = 0;
  int action_count() const { return 2; }

  BitState sample(Rng& rng) const {
    const int n = attribute_count();
    const std::uint64_t bits = n == 64 ? rng.next() : rng.next() >> (64 - n);
    return BitState(bits, n);
  }

 protected:
  void check_length(const BitState& state) const;
};

/// 1 iff the number of ones is even (or odd, with even_is_one = false).
class EvenParity final : public Environment {
 public:
  explicit EvenParity(int n, bool even_is_one = true);
  std::string name() const override { return "parity-" + std::to_string(n_); }
  int attribute_count() const override { return n_; }
  int label(const BitState& state) const override;

 private:
  int n_;
  bool even_is_one_;
};

/// k address bits (first bit most significant) followed by 2^k data bits.
class Multiplexer final : public Environment {
 public:
  explicit Multiplexer(int address_bits);
  std::string name() const override { return "mux-" + std::to_string(k_); }
  int attribute_count() const override { return k_ + (1 << k_); }
  int label(const BitState& state) const override;

 private:
  int k_;
};

/// Six meta-bits, m_i = D_{3i} xor D_{3i+1} xor D_{3i+2}.
int hierarchical_meta_bits(const BitState& state);

/// 6-bit multiplexer over the meta-bits: m0 m1 address, m2..m5 data.
class HierarchicalMultiplexer18 final : public Environment {
 public:
  std::string name() const override { return "hmux18"; }
  int attribute_count() const override { return 18; }
  int label(const BitState& state) const override;
};

/// Majority over the six meta-bits. Exactly three ones is labelled
/// `tie_label` (0: strict majority).
class HierarchicalMajorityOn18 final : public Environment {
 public:
  explicit HierarchicalMajorityOn18(int tie_label = 0) : tie_label_(tie_label) {}
  std::string name() const override { return "hmaj18"; }
  int attribute_count() const override { return 18; }
  int label(const BitState& state) const override;

 private:
  int tie_label_;
};

/// "parity-<n>", "mux-<k>", "hmux18" or "hmaj18". Throws ConfigError otherwise.
std::unique_ptr<Environment> make_environment(std::string_view name);

}  // namespace xof
