#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fleetline/qr/reed_solomon.hpp"

namespace fleetline::qr {

enum class EcLevel { L, M, Q, H };

inline constexpr EcLevel kAllEcLevels[] = {EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H};
inline constexpr int kMinVersion = 1;
inline constexpr int kMaxVersion = 4;

char ec_level_name(EcLevel ec) noexcept;

// Square module grid; true = dark.
class QrMatrix {
 public:
  explicit QrMatrix(int version);

  int version() const noexcept { return version_; }
  int side() const noexcept { return side_; }

  bool get(int row, int col) const { return cells_[index(row, col)] != 0; }
  void set(int row, int col, bool dark) { cells_[index(row, col)] = dark ? 1 : 0; }
  void flip(int row, int col) { cells_[index(row, col)] ^= 1; }

  friend bool operator==(const QrMatrix&, const QrMatrix&) = default;

 private:
  std::size_t index(int row, int col) const;

  int version_;
  int side_;
  std::vector<std::uint8_t> cells_;
};

// Block layout of one (version, EC level) pair. Versions 1..4 use equal
// sized blocks only.
struct BlockLayout {
  int total_codewords;
  int ec_per_block;
  int blocks;
  int data_per_block;

  int data_codewords() const noexcept { return blocks * data_per_block; }
};

BlockLayout block_layout(int version, EcLevel ec);

// Largest byte-mode payload for the pair: 4 mode bits and an 8-bit count
// precede the data.
std::size_t byte_capacity(int version, EcLevel ec);

// Throws Error{InvalidParam} for a bad version, Error{CapacityError} if the
// payload does not fit.
QrMatrix qr_encode(std::span<const std::uint8_t> payload, int version, EcLevel ec);

// Throws Error{FormatError}, Error{UncorrectableError} or Error{SegmentError}.
Bytes qr_decode(const QrMatrix& matrix);

// Lower-level pieces, exposed for verification.
namespace detail {

// Data codewords (segment, terminator, padding) before error correction.
Bytes build_data_codewords(std::span<const std::uint8_t> payload, int version, EcLevel ec);

// Interleaved data + EC codewords in placement order.
Bytes interleave_with_ec(std::span<const std::uint8_t> data, int version, EcLevel ec);

// Matrix holding function patterns and the given codewords, unmasked and
// without format information.
QrMatrix place_codewords(std::span<const std::uint8_t> codewords, int version);

// For each bit of the codeword stream (MSB first per byte), its
// (row, col) position.
std::vector<std::pair<int, int>> codeword_bit_positions(int version);

bool is_function_module(int version, int row, int col);

bool mask_bit(int mask, int row, int col) noexcept;
void apply_mask(QrMatrix& m, int mask);

// Writes both copies of the 15-bit format word and the dark module.
void draw_format_bits(QrMatrix& m, EcLevel ec, int mask);

std::uint16_t format_bits(EcLevel ec, int mask) noexcept;

// Standard four-rule penalty score of a fully drawn symbol.
int penalty_score(const QrMatrix& m);

}  // namespace detail

}  // namespace fleetline::qr
