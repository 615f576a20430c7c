#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xof {

inline constexpr int kMaxAttributes = 64;

/// A Boolean environment state of up to 64 attributes.
///
/// Attribute D<i> is stored in bit i, so `bits()` doubles as the state index
/// used by truth tables (D0 is the least-significant bit).
class BitState {
 public:
  constexpr BitState() = default;
  constexpr BitState(std::uint64_t bits, int size) : bits_(bits), size_(size) {
    if (size < 0 || size > kMaxAttributes) {
      throw std::invalid_argument("BitState: size out of range");
    }
    if (size < kMaxAttributes) bits_ &= (std::uint64_t{1} << size) - 1;
  }

  /// Parses "0110..." where character i is attribute D<i>. '|' and ' ' are
  /// ignored so that "00|1000" reads as a 6-bit multiplexer state.
  static BitState parse(std::string_view text) {
    std::uint64_t bits = 0;
    int n = 0;
    for (char c : text) {
      if (c == '|' || c == ' ') continue;
      if (c != '0' && c != '1') throw std::invalid_argument("BitState: bad character in '" + std::string(text) + "'");
      if (n == kMaxAttributes) throw std::invalid_argument("BitState: too many attributes");
      if (c == '1') bits |= std::uint64_t{1} << n;
      ++n;
    }
    return BitState(bits, n);
  }

  constexpr bool operator[](int i) const { return (bits_ >> i) & 1U; }
  constexpr int size() const { return size_; }
  constexpr std::uint64_t bits() const { return bits_; }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(size_), '0');
    for (int i = 0; i < size_; ++i) {
      if ((*this)[i]) s[static_cast<std::size_t>(i)] = '1';
    }
    return s;
  }

  friend constexpr bool operator==(const BitState&, const BitState&) = default;

 private:
  std::uint64_t bits_ = 0;
  int size_ = 0;
};

}  // namespace xof
