#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "hist4lt/error.hpp"

namespace hist4lt {

// Field widths of the two tree layouts, most significant field first.
//
//   4LT: L_{1/2}:6 | L_{1/4}:5 | L_{3/4}:5 | L_{1/8}:4 | L_{3/8}:4 | L_{5/8}:4 | L_{7/8}:4   (32 bits)
//   3LT: 0:1 | L_{1/2}:11 | L_{1/4}:10 | L_{3/4}:10                                         (31 bits used)
inline constexpr std::array<unsigned, 7> kTree4Widths{6, 5, 5, 4, 4, 4, 4};
inline constexpr std::array<unsigned, 3> kTree3Widths{11, 10, 10};

using Tree4Fields = std::array<std::uint32_t, 7>;
using Tree3Fields = std::array<std::uint32_t, 3>;

constexpr std::uint32_t field_max(unsigned width) { return (std::uint32_t{1} << width) - 1; }

// One 32-bit word holding the quantized partial sums of a 3- or 4-level tree index.
class PackedTreeIndex {
 public:
  constexpr PackedTreeIndex() = default;
  constexpr explicit PackedTreeIndex(std::uint32_t word) : word_(word) {}

  constexpr std::uint32_t word() const { return word_; }

  static PackedTreeIndex pack_4lt(const Tree4Fields& fields) { return PackedTreeIndex{pack(fields, kTree4Widths, 32)}; }

  static PackedTreeIndex pack_3lt(const Tree3Fields& fields) { return PackedTreeIndex{pack(fields, kTree3Widths, 31)}; }

  constexpr Tree4Fields fields_4lt() const { return unpack<7>(kTree4Widths, 32); }

  // Throws if the spare top bit is set: such a word is not a 3LT index.
  Tree3Fields fields_3lt() const {
    if (word_ >> 31) throw ConfigError("3LT word has the spare bit 31 set");
    return unpack<3>(kTree3Widths, 31);
  }

  constexpr std::array<std::uint8_t, 4> to_big_endian() const {
    return {static_cast<std::uint8_t>(word_ >> 24), static_cast<std::uint8_t>(word_ >> 16),
            static_cast<std::uint8_t>(word_ >> 8), static_cast<std::uint8_t>(word_)};
  }

  static constexpr PackedTreeIndex from_big_endian(const std::array<std::uint8_t, 4>& bytes) {
    return PackedTreeIndex{(std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                           (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]}};
  }

  std::string to_hex() const {
    char buf[9];
    std::snprintf(buf, sizeof(buf), "%08x", word_);
    return buf;
  }

  static PackedTreeIndex from_hex(std::string_view hex) {
    if (hex.size() != 8) throw ParseError("packed tree word must be 8 hex digits, got '" + std::string(hex) + "'");
    std::uint32_t word = 0;
    for (char ch : hex) {
      word <<= 4;
      if (ch >= '0' && ch <= '9') {
        word |= static_cast<std::uint32_t>(ch - '0');
      } else if (ch >= 'a' && ch <= 'f') {
        word |= static_cast<std::uint32_t>(ch - 'a' + 10);
      } else if (ch >= 'A' && ch <= 'F') {
        word |= static_cast<std::uint32_t>(ch - 'A' + 10);
      } else {
        throw ParseError("invalid hex digit in '" + std::string(hex) + "'");
      }
    }
    return PackedTreeIndex{word};
  }

  friend constexpr bool operator==(PackedTreeIndex, PackedTreeIndex) = default;

 private:
  template <std::size_t N>
  static std::uint32_t pack(const std::array<std::uint32_t, N>& fields, const std::array<unsigned, N>& widths,
                            unsigned total_bits) {
    std::uint32_t word = 0;
    unsigned shift = total_bits;
    for (std::size_t k = 0; k < N; ++k) {
      if (fields[k] > field_max(widths[k])) {
        throw ConfigError("tree field " + std::to_string(k) + " value " + std::to_string(fields[k]) +
                          " exceeds its " + std::to_string(widths[k]) + "-bit width");
      }
      shift -= widths[k];
      word |= fields[k] << shift;
    }
    return word;
  }

  template <std::size_t N>
  constexpr std::array<std::uint32_t, N> unpack(const std::array<unsigned, N>& widths, unsigned total_bits) const {
    std::array<std::uint32_t, N> fields{};
    unsigned shift = total_bits;
    for (std::size_t k = 0; k < N; ++k) {
      shift -= widths[k];
      fields[k] = (word_ >> shift) & field_max(widths[k]);
    }
    return fields;
  }

  std::uint32_t word_ = 0;
};

}  // namespace hist4lt
