#pragma once

// Allowable colouring words: the states of every transfer operator.
//
// A word of length L over k colours is packed into a 64-bit code with
// position 0 in the most significant field, so numeric order of codes is
// lexicographic order of words (colour 1 < 2 < ... < k).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caplab/constraint.hpp"

namespace caplab {

enum class Boundary { open, periodic };

const char* to_string(Boundary b);
Boundary parse_boundary(const std::string& text);

/// Size limits applied before anything large is materialized.
struct GuardLimits {
  double max_states = 2147483648.0;   // 2^31
  double oracle_work = 1073741824.0;  // 2^30 partial assignments
  /// Defaults, overridden by CAPACITY_LAB_WORK_LIMIT when set.
  static GuardLimits from_environment();
};

enum class WordKind { chain, slab, helical };

/// How a word's positions map onto the lattice.
///  chain:   n1 cells along axis 1 (boundary b1).
///  slab:    n1 x n2 cells, row-major; rows run along axis 1, rows stack
///           along axis 2 (boundaries b1, b2).
///  helical: n1*n2 cells chained along axis 1 with the axis-2 condition
///           between positions i and i + n1.
struct WordShape {
  WordKind kind = WordKind::chain;
  int n1 = 0;
  int n2 = 1;
  Boundary b1 = Boundary::open;
  Boundary b2 = Boundary::open;

  int cells() const noexcept { return n1 * n2; }
  std::string describe() const;
  bool operator==(const WordShape&) const = default;
};

/// Bit packing of words; position 0 sits in the most significant field.
class WordCodec {
 public:
  WordCodec(int colours, int length);

  int length() const noexcept { return length_; }
  int bits() const noexcept { return bits_; }
  std::uint64_t colour_mask() const noexcept { return (std::uint64_t{1} << bits_) - 1; }
  /// Mask covering `cells` trailing positions.
  std::uint64_t tail_mask(int cells) const noexcept {
    const int b = cells * bits_;
    return b >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << b) - 1;
  }

  Colour colour(std::uint64_t code, int pos) const noexcept {
    return static_cast<Colour>((code >> (bits_ * (length_ - 1 - pos))) & colour_mask());
  }
  std::uint64_t encode(std::span<const Colour> word) const;
  std::vector<Colour> decode(std::uint64_t code) const;
  /// Drop position 0 and append `c` at the end.
  std::uint64_t shift_append(std::uint64_t code, Colour c) const noexcept {
    return ((code << bits_) & tail_mask(length_)) | static_cast<std::uint64_t>(c);
  }

 private:
  int length_;
  int bits_;
};

/// Sorted, duplicate-free list of words with an index lookup.
class StateSpace {
 public:
  StateSpace(int colours, WordShape shape, std::vector<std::uint64_t> sorted_codes);

  std::size_t size() const noexcept { return codes_.size(); }
  int colours() const noexcept { return colours_; }
  int length() const noexcept { return codec_.length(); }
  const WordShape& shape() const noexcept { return shape_; }
  const WordCodec& codec() const noexcept { return codec_; }

  std::uint64_t code(std::size_t i) const { return codes_[i]; }
  const std::vector<std::uint64_t>& codes() const noexcept { return codes_; }
  Colour colour(std::size_t i, int pos) const { return codec_.colour(codes_[i], pos); }
  std::vector<Colour> word(std::size_t i) const { return codec_.decode(codes_[i]); }
  std::optional<std::size_t> index_of(std::uint64_t code) const;
  /// Index of a word given as 1-based text, e.g. "122".
  std::optional<std::size_t> index_of(const std::string& word) const;

  /// 1-based rendering: "122" for k <= 9, "1.2.2" otherwise.
  std::string format(std::size_t i) const;

 private:
  int colours_;
  WordShape shape_;
  WordCodec codec_;
  std::vector<std::uint64_t> codes_;
};

std::string format_word(std::span<const Colour> word, int colours);
std::vector<Colour> parse_word(const std::string& text, int colours);

/// Exact count of open Gamma-chains of length n (floating, for guards).
double projected_chain_count(const ConstraintGraph& g, int n);

StateSpace enumerate_words(const ConstraintGraph& g, int n, Boundary boundary,
                           const GuardLimits& guards = GuardLimits::from_environment());

/// (Gamma_1, Gamma_2)-allowable colourings of an n1 x n2 slab.
StateSpace enumerate_slab_words(const ConstraintSystem& sys, int n1, int n2, Boundary b1, Boundary b2,
                                const GuardLimits& guards = GuardLimits::from_environment());

/// Gamma_1-chains of length n1*n2 with (w(i), w(i+n1)) in E_2.
StateSpace enumerate_helical_slab_words(const ConstraintSystem& sys, int n1, int n2,
                                        const GuardLimits& guards = GuardLimits::from_environment());

}  // namespace caplab
