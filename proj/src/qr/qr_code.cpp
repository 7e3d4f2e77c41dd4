#include "fleetline/qr/qr_code.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdlib>
#include <limits>
#include <string>

#include "fleetline/error.hpp"

namespace fleetline::qr {

namespace {

void check_version(int version) {
  if (version < kMinVersion || version > kMaxVersion) {
    fail(ErrorCode::InvalidParam, "QR version must be in 1..4, got " + std::to_string(version));
  }
}

int side_for(int version) noexcept { return 17 + 4 * version; }

int ec_index(EcLevel ec) noexcept { return static_cast<int>(ec); }

// Two-bit EC indicator used in the format word.
int ec_format_bits(EcLevel ec) noexcept {
  switch (ec) {
    case EcLevel::L: return 1;
    case EcLevel::M: return 0;
    case EcLevel::Q: return 3;
    case EcLevel::H: return 2;
  }
  return 0;
}

// ISO/IEC 18004 table 9, versions 1..4: {EC codewords per block, blocks}.
constexpr std::array<std::array<std::array<int, 2>, 4>, 4> kEcTable = {{
    {{{7, 1}, {10, 1}, {13, 1}, {17, 1}}},
    {{{10, 1}, {16, 1}, {22, 1}, {28, 1}}},
    {{{15, 1}, {26, 1}, {18, 2}, {22, 2}}},
    {{{20, 1}, {18, 2}, {26, 2}, {16, 4}}},
}};
constexpr std::array<int, 4> kTotalCodewords = {26, 44, 70, 100};

class BitWriter {
 public:
  void append(unsigned value, int bits) {
    for (int i = bits - 1; i >= 0; --i) bits_.push_back(((value >> i) & 1U) != 0);
  }
  std::size_t size() const noexcept { return bits_.size(); }
  Bytes to_bytes() const {
    Bytes out(bits_.size() / 8, 0);
    for (std::size_t i = 0; i < out.size() * 8; ++i) {
      if (bits_[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
    }
    return out;
  }

 private:
  std::vector<bool> bits_;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::size_t remaining() const noexcept { return bytes_.size() * 8 - pos_; }
  unsigned read(int bits) {
    unsigned v = 0;
    for (int i = 0; i < bits; ++i, ++pos_) {
      v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1U);
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

using FunctionMap = std::vector<std::uint8_t>;

void mark_finder(QrMatrix& m, FunctionMap& fn, int top, int left) {
  const int side = m.side();
  for (int dr = -1; dr <= 7; ++dr) {
    for (int dc = -1; dc <= 7; ++dc) {
      const int r = top + dr;
      const int c = left + dc;
      if (r < 0 || c < 0 || r >= side || c >= side) continue;
      const bool in_ring = dr >= 0 && dr <= 6 && dc >= 0 && dc <= 6 &&
                           (dr == 0 || dr == 6 || dc == 0 || dc == 6);
      const bool in_core = dr >= 2 && dr <= 4 && dc >= 2 && dc <= 4;
      m.set(r, c, in_ring || in_core);
      fn[static_cast<std::size_t>(r * side + c)] = 1;
    }
  }
}

// Draws every function pattern and reserves the format areas. Returns the
// map of function modules.
FunctionMap draw_function_patterns(QrMatrix& m) {
  const int side = m.side();
  FunctionMap fn(static_cast<std::size_t>(side * side), 0);
  auto mark = [&](int r, int c, bool dark) {
    m.set(r, c, dark);
    fn[static_cast<std::size_t>(r * side + c)] = 1;
  };

  for (int i = 0; i < side; ++i) {
    mark(6, i, i % 2 == 0);
    mark(i, 6, i % 2 == 0);
  }
  mark_finder(m, fn, 0, 0);
  mark_finder(m, fn, 0, side - 7);
  mark_finder(m, fn, side - 7, 0);

  if (m.version() >= 2) {
    const int center = side - 7;
    for (int dr = -2; dr <= 2; ++dr) {
      for (int dc = -2; dc <= 2; ++dc) {
        mark(center + dr, center + dc, std::max(std::abs(dr), std::abs(dc)) != 1);
      }
    }
  }

  for (int i = 0; i <= 8; ++i) {
    if (i != 6) {
      mark(8, i, false);
      mark(i, 8, false);
    }
  }
  for (int i = 0; i < 8; ++i) mark(8, side - 1 - i, false);
  for (int i = 0; i < 7; ++i) mark(side - 1 - i, 8, false);
  mark(side - 8, 8, true);
  return fn;
}

const FunctionMap& function_map(int version) {
  static const std::array<FunctionMap, 4> maps = [] {
    std::array<FunctionMap, 4> out;
    for (int v = kMinVersion; v <= kMaxVersion; ++v) {
      QrMatrix scratch(v);
      out[static_cast<std::size_t>(v - 1)] = draw_function_patterns(scratch);
    }
    return out;
  }();
  return maps[static_cast<std::size_t>(version - 1)];
}

// Column-pair zigzag from the bottom-right corner, skipping the vertical
// timing column.
std::vector<std::pair<int, int>> zigzag_positions(int version) {
  const int side = side_for(version);
  const FunctionMap& fn = function_map(version);
  std::vector<std::pair<int, int>> out;
  for (int right = side - 1; right >= 1; right -= 2) {
    if (right == 6) right = 5;
    const bool upward = ((right + 1) & 2) == 0;
    for (int vert = 0; vert < side; ++vert) {
      const int row = upward ? side - 1 - vert : vert;
      for (int j = 0; j < 2; ++j) {
        const int col = right - j;
        if (!fn[static_cast<std::size_t>(row * side + col)]) out.emplace_back(row, col);
      }
    }
  }
  return out;
}

int hamming15(unsigned a, unsigned b) noexcept { return std::popcount((a ^ b) & 0x7FFFU); }

struct FormatInfo {
  EcLevel ec;
  int mask;
};

FormatInfo read_format(const QrMatrix& m) {
  const int side = m.side();
  if (!m.get(side - 8, 8)) fail(ErrorCode::FormatError, "dark module missing");

  unsigned first = 0;
  unsigned second = 0;
  auto put = [](unsigned& word, int bit, bool dark) {
    if (dark) word |= 1U << bit;
  };
  for (int i = 0; i <= 5; ++i) put(first, i, m.get(i, 8));
  put(first, 6, m.get(7, 8));
  put(first, 7, m.get(8, 8));
  put(first, 8, m.get(8, 7));
  for (int i = 9; i < 15; ++i) put(first, i, m.get(8, 14 - i));
  for (int i = 0; i < 8; ++i) put(second, i, m.get(8, side - 1 - i));
  for (int i = 8; i < 15; ++i) put(second, i, m.get(side - 15 + i, 8));

  int best_distance = std::numeric_limits<int>::max();
  FormatInfo best{EcLevel::L, 0};
  for (EcLevel ec : kAllEcLevels) {
    for (int mask = 0; mask < 8; ++mask) {
      const unsigned word = detail::format_bits(ec, mask);
      const int d = std::min(hamming15(word, first), hamming15(word, second));
      if (d < best_distance) {
        best_distance = d;
        best = {ec, mask};
      }
    }
  }
  // Distinct format words differ in at least 7 bits, so 3 is unambiguous.
  if (best_distance > 3) fail(ErrorCode::FormatError, "format information unreadable");
  return best;
}

}  // namespace

char ec_level_name(EcLevel ec) noexcept { return "LMQH"[ec_index(ec)]; }

QrMatrix::QrMatrix(int version) : version_(version), side_(0) {
  check_version(version);
  side_ = side_for(version);
  cells_.assign(static_cast<std::size_t>(side_ * side_), 0);
}

std::size_t QrMatrix::index(int row, int col) const {
  if (row < 0 || col < 0 || row >= side_ || col >= side_) {
    fail(ErrorCode::OutOfRange, "module index out of range");
  }
  return static_cast<std::size_t>(row * side_ + col);
}

BlockLayout block_layout(int version, EcLevel ec) {
  check_version(version);
  const auto& entry = kEcTable[static_cast<std::size_t>(version - 1)]
                              [static_cast<std::size_t>(ec_index(ec))];
  const int total = kTotalCodewords[static_cast<std::size_t>(version - 1)];
  const int ec_per_block = entry[0];
  const int blocks = entry[1];
  return BlockLayout{total, ec_per_block, blocks, total / blocks - ec_per_block};
}

std::size_t byte_capacity(int version, EcLevel ec) {
  const BlockLayout layout = block_layout(version, ec);
  return static_cast<std::size_t>((layout.data_codewords() * 8 - 12) / 8);
}

QrMatrix qr_encode(std::span<const std::uint8_t> payload, int version, EcLevel ec) {
  check_version(version);
  const Bytes data = detail::build_data_codewords(payload, version, ec);
  const Bytes codewords = detail::interleave_with_ec(data, version, ec);
  const QrMatrix base = detail::place_codewords(codewords, version);

  QrMatrix best = base;
  int best_score = std::numeric_limits<int>::max();
  for (int mask = 0; mask < 8; ++mask) {
    QrMatrix candidate = base;
    detail::apply_mask(candidate, mask);
    detail::draw_format_bits(candidate, ec, mask);
    const int score = detail::penalty_score(candidate);
    if (score < best_score) {
      best_score = score;
      best = std::move(candidate);
    }
  }
  return best;
}

Bytes qr_decode(const QrMatrix& matrix) {
  const int version = matrix.version();
  const FormatInfo format = read_format(matrix);
  const BlockLayout layout = block_layout(version, format.ec);

  // Read raw codewords, undoing the mask as we go.
  const auto positions = detail::codeword_bit_positions(version);
  Bytes raw(static_cast<std::size_t>(layout.total_codewords), 0);
  for (std::size_t i = 0; i < raw.size() * 8; ++i) {
    const auto [row, col] = positions[i];
    if (matrix.get(row, col) != detail::mask_bit(format.mask, row, col)) {
      raw[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
    }
  }

  // De-interleave and correct each block.
  const auto blocks = static_cast<std::size_t>(layout.blocks);
  const auto dpb = static_cast<std::size_t>(layout.data_per_block);
  const auto epb = static_cast<std::size_t>(layout.ec_per_block);
  Bytes data;
  data.reserve(blocks * dpb);
  for (std::size_t b = 0; b < blocks; ++b) {
    Bytes block;
    block.reserve(dpb + epb);
    for (std::size_t i = 0; i < dpb; ++i) block.push_back(raw[i * blocks + b]);
    for (std::size_t i = 0; i < epb; ++i) block.push_back(raw[blocks * dpb + i * blocks + b]);
    const Bytes corrected = rs_decode_correct(block, layout.ec_per_block);
    data.insert(data.end(), corrected.begin(), corrected.end());
  }

  BitReader reader(data);
  const unsigned mode = reader.read(4);
  if (mode != 0b0100) fail(ErrorCode::SegmentError, "unsupported segment mode " + std::to_string(mode));
  const std::size_t count = reader.read(8);
  if (count > byte_capacity(version, format.ec) || reader.remaining() < count * 8) {
    fail(ErrorCode::SegmentError, "byte count exceeds symbol capacity");
  }
  Bytes payload(count);
  for (auto& byte : payload) byte = static_cast<std::uint8_t>(reader.read(8));

  // What follows must be the terminator and standard padding.
  const std::size_t terminator = std::min<std::size_t>(4, reader.remaining());
  if (reader.read(static_cast<int>(terminator)) != 0) {
    fail(ErrorCode::SegmentError, "malformed terminator");
  }
  const std::size_t align = reader.remaining() % 8;
  if (reader.read(static_cast<int>(align)) != 0) fail(ErrorCode::SegmentError, "malformed padding");
  for (unsigned pad = 0xEC; reader.remaining() >= 8; pad ^= 0xEC ^ 0x11) {
    if (reader.read(8) != pad) fail(ErrorCode::SegmentError, "malformed pad bytes");
  }
  return payload;
}

namespace detail {

Bytes build_data_codewords(std::span<const std::uint8_t> payload, int version, EcLevel ec) {
  const std::size_t capacity = byte_capacity(version, ec);
  if (payload.size() > capacity) {
    fail(ErrorCode::CapacityError, "payload of " + std::to_string(payload.size()) +
                                       " bytes exceeds capacity " + std::to_string(capacity) +
                                       " of version " + std::to_string(version) + "-" +
                                       ec_level_name(ec));
  }
  const std::size_t capacity_bits =
      static_cast<std::size_t>(block_layout(version, ec).data_codewords()) * 8;

  BitWriter bits;
  bits.append(0b0100, 4);
  bits.append(static_cast<unsigned>(payload.size()), 8);
  for (std::uint8_t b : payload) bits.append(b, 8);
  bits.append(0, static_cast<int>(std::min<std::size_t>(4, capacity_bits - bits.size())));
  bits.append(0, static_cast<int>((8 - bits.size() % 8) % 8));
  for (unsigned pad = 0xEC; bits.size() < capacity_bits; pad ^= 0xEC ^ 0x11) bits.append(pad, 8);
  return bits.to_bytes();
}

Bytes interleave_with_ec(std::span<const std::uint8_t> data, int version, EcLevel ec) {
  const BlockLayout layout = block_layout(version, ec);
  if (data.size() != static_cast<std::size_t>(layout.data_codewords())) {
    fail(ErrorCode::InvalidParam, "data codeword count does not match layout");
  }
  const auto blocks = static_cast<std::size_t>(layout.blocks);
  const auto dpb = static_cast<std::size_t>(layout.data_per_block);

  std::vector<Bytes> parities;
  for (std::size_t b = 0; b < blocks; ++b) {
    parities.push_back(rs_generate_parity(data.subspan(b * dpb, dpb), layout.ec_per_block));
  }
  Bytes out;
  out.reserve(static_cast<std::size_t>(layout.total_codewords));
  for (std::size_t i = 0; i < dpb; ++i) {
    for (std::size_t b = 0; b < blocks; ++b) out.push_back(data[b * dpb + i]);
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(layout.ec_per_block); ++i) {
    for (std::size_t b = 0; b < blocks; ++b) out.push_back(parities[b][i]);
  }
  return out;
}

QrMatrix place_codewords(std::span<const std::uint8_t> codewords, int version) {
  QrMatrix m(version);
  draw_function_patterns(m);
  const auto positions = codeword_bit_positions(version);
  // Remainder modules past the codeword stream stay light.
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const bool dark = i / 8 < codewords.size() && ((codewords[i / 8] >> (7 - i % 8)) & 1U) != 0;
    m.set(positions[i].first, positions[i].second, dark);
  }
  return m;
}

std::vector<std::pair<int, int>> codeword_bit_positions(int version) {
  check_version(version);
  static const std::array<std::vector<std::pair<int, int>>, 4> cache = [] {
    std::array<std::vector<std::pair<int, int>>, 4> out;
    for (int v = kMinVersion; v <= kMaxVersion; ++v) {
      out[static_cast<std::size_t>(v - 1)] = zigzag_positions(v);
    }
    return out;
  }();
  return cache[static_cast<std::size_t>(version - 1)];
}

bool is_function_module(int version, int row, int col) {
  check_version(version);
  const int side = side_for(version);
  return function_map(version)[static_cast<std::size_t>(row * side + col)] != 0;
}

bool mask_bit(int mask, int row, int col) noexcept {
  const int r = row;
  const int c = col;
  switch (mask) {
    case 0: return (r + c) % 2 == 0;
    case 1: return r % 2 == 0;
    case 2: return c % 3 == 0;
    case 3: return (r + c) % 3 == 0;
    case 4: return (r / 2 + c / 3) % 2 == 0;
    case 5: return (r * c) % 2 + (r * c) % 3 == 0;
    case 6: return ((r * c) % 2 + (r * c) % 3) % 2 == 0;
    case 7: return ((r + c) % 2 + (r * c) % 3) % 2 == 0;
    default: return false;
  }
}

void apply_mask(QrMatrix& m, int mask) {
  const FunctionMap& fn = function_map(m.version());
  const int side = m.side();
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      if (!fn[static_cast<std::size_t>(r * side + c)] && mask_bit(mask, r, c)) m.flip(r, c);
    }
  }
}

std::uint16_t format_bits(EcLevel ec, int mask) noexcept {
  const unsigned data = static_cast<unsigned>(ec_format_bits(ec) << 3 | mask);
  unsigned rem = data;
  for (int i = 0; i < 10; ++i) rem = (rem << 1) ^ ((rem >> 9) * 0x537U);
  return static_cast<std::uint16_t>(((data << 10) | (rem & 0x3FFU)) ^ 0x5412U);
}

void draw_format_bits(QrMatrix& m, EcLevel ec, int mask) {
  const unsigned bits = format_bits(ec, mask);
  const int side = m.side();
  auto bit = [bits](int i) { return ((bits >> i) & 1U) != 0; };

  for (int i = 0; i <= 5; ++i) m.set(i, 8, bit(i));
  m.set(7, 8, bit(6));
  m.set(8, 8, bit(7));
  m.set(8, 7, bit(8));
  for (int i = 9; i < 15; ++i) m.set(8, 14 - i, bit(i));

  for (int i = 0; i < 8; ++i) m.set(8, side - 1 - i, bit(i));
  for (int i = 8; i < 15; ++i) m.set(side - 15 + i, 8, bit(i));
  m.set(side - 8, 8, true);
}

int penalty_score(const QrMatrix& m) {
  const int side = m.side();
  int score = 0;

  auto line_penalty = [&](auto at) {
    // Rule 1: runs of five or more.
    int run = 1;
    for (int i = 1; i <= side; ++i) {
      if (i < side && at(i) == at(i - 1)) {
        ++run;
      } else {
        if (run >= 5) score += 3 + (run - 5);
        run = 1;
      }
    }
    // Rule 3: finder-like 1:1:3:1:1 with four light modules on one side.
    static constexpr std::array<bool, 11> kLeft = {1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0};
    static constexpr std::array<bool, 11> kRight = {0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1};
    for (int i = 0; i + 11 <= side; ++i) {
      bool left = true;
      bool right = true;
      for (int k = 0; k < 11; ++k) {
        const bool v = at(i + k);
        left = left && v == kLeft[static_cast<std::size_t>(k)];
        right = right && v == kRight[static_cast<std::size_t>(k)];
      }
      if (left) score += 40;
      if (right) score += 40;
    }
  };

  for (int r = 0; r < side; ++r) line_penalty([&](int c) { return m.get(r, c); });
  for (int c = 0; c < side; ++c) line_penalty([&](int r) { return m.get(r, c); });

  // Rule 2: 2x2 blocks of one colour.
  for (int r = 0; r + 1 < side; ++r) {
    for (int c = 0; c + 1 < side; ++c) {
      const bool v = m.get(r, c);
      if (v == m.get(r, c + 1) && v == m.get(r + 1, c) && v == m.get(r + 1, c + 1)) score += 3;
    }
  }

  // Rule 4: deviation of the dark ratio from 50%, in 5% steps.
  int dark = 0;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) dark += m.get(r, c) ? 1 : 0;
  }
  const int total = side * side;
  score += 10 * (std::abs(dark * 20 - total * 10) / total);
  return score;
}

}  // namespace detail

}  // namespace fleetline::qr
