#include "xof/problems.hpp"

#include <bit>
#include <charconv>

namespace xof {

void Environment::check_length(const BitState& state) const {
  if (state.size() != attribute_count()) {
    throw ConfigError(name() + ": expected " + std::to_string(attribute_count()) + " attributes, got " +
                      std::to_string(state.size()));
  }
}

EvenParity::EvenParity(int n, bool even_is_one) : n_(n), even_is_one_(even_is_one) {
  if (n < 2 || n > kMaxAttributes) throw ConfigError("parity: n must lie in [2,64]");
}

int EvenParity::label(const BitState& state) const {
  check_length(state);
  const bool even = std::popcount(state.bits()) % 2 == 0;
  return even == even_is_one_ ? 1 : 0;
}

Multiplexer::Multiplexer(int address_bits) : k_(address_bits) {
  if (k_ < 1 || k_ + (1 << k_) > kMaxAttributes) throw ConfigError("mux: unsupported address width");
}

int Multiplexer::label(const BitState& state) const {
  check_length(state);
  int address = 0;
  for (int i = 0; i < k_; ++i) address = (address << 1) | static_cast<int>(state[i]);
  return state[k_ + address] ? 1 : 0;
}

int hierarchical_meta_bits(const BitState& state) {
  int meta = 0;
  for (int i = 0; i < 6; ++i) {
    const bool m = state[3 * i] ^ state[3 * i + 1] ^ state[3 * i + 2];
    meta |= static_cast<int>(m) << i;
  }
  return meta;
}

int HierarchicalMultiplexer18::label(const BitState& state) const {
  check_length(state);
  const int meta = hierarchical_meta_bits(state);
  const int address = ((meta & 1) << 1) | ((meta >> 1) & 1);
  return (meta >> (2 + address)) & 1;
}

int HierarchicalMajorityOn18::label(const BitState& state) const {
  check_length(state);
  const int ones = std::popcount(static_cast<unsigned>(hierarchical_meta_bits(state)));
  if (ones == 3) return tie_label_;
  return ones > 3 ? 1 : 0;
}

namespace {

int suffix_number(std::string_view name, std::string_view prefix) {
  const std::string_view digits = name.substr(prefix.size());
  int v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw ConfigError("unknown problem '" + std::string(name) + "'");
  }
  return v;
}

}  // namespace

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "hmux18") return std::make_unique<HierarchicalMultiplexer18>();
  if (name == "hmaj18") return std::make_unique<HierarchicalMajorityOn18>();
  if (name.starts_with("parity-")) return std::make_unique<EvenParity>(suffix_number(name, "parity-"));
  if (name.starts_with("mux-")) return std::make_unique<Multiplexer>(suffix_number(name, "mux-"));
  throw ConfigError("unknown problem '" + std::string(name) + "' (expected parity-<n>, mux-<k>, hmux18 or hmaj18)");
}

}  // namespace xof
