#include "fleetline/qr/pbm.hpp"

#include <cctype>
#include <vector>

#include "fleetline/error.hpp"

namespace fleetline::qr {

std::string to_pbm(const QrMatrix& matrix) {
  const int side = matrix.side();
  const int full = side + 2 * kQuietZone;
  std::string out = "P1\n" + std::to_string(full) + " " + std::to_string(full) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(full * (full + 1)));
  for (int r = -kQuietZone; r < side + kQuietZone; ++r) {
    for (int c = -kQuietZone; c < side + kQuietZone; ++c) {
      const bool inside = r >= 0 && c >= 0 && r < side && c < side;
      out.push_back(inside && matrix.get(r, c) ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

namespace {

class PbmScanner {
 public:
  explicit PbmScanner(std::string_view text) : text_(text) {}

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int() {
    skip_space_and_comments();
    int value = 0;
    std::size_t digits = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      ++pos_;
      if (++digits > 6) fail(ErrorCode::FormatError, "PBM dimension too large");
    }
    if (digits == 0) fail(ErrorCode::FormatError, "PBM: expected integer");
    return value;
  }

  bool read_bit() {
    skip_space_and_comments();
    if (pos_ >= text_.size()) fail(ErrorCode::FormatError, "PBM: truncated raster");
    const char ch = text_[pos_++];
    if (ch != '0' && ch != '1') fail(ErrorCode::FormatError, "PBM: unexpected raster character");
    return ch == '1';
  }

  bool consume(std::string_view token) {
    skip_space_and_comments();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

int version_for_side(int side) {
  if (side < 21 || side > 33 || (side - 17) % 4 != 0) return 0;
  return (side - 17) / 4;
}

}  // namespace

QrMatrix from_pbm(std::string_view text) {
  PbmScanner scan(text);
  if (!scan.consume("P1")) fail(ErrorCode::FormatError, "not a plain PBM (P1) image");
  const int width = scan.read_int();
  const int height = scan.read_int();
  if (width != height) fail(ErrorCode::FormatError, "QR image must be square");

  std::vector<bool> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = scan.read_bit();

  auto border_is_light = [&] {
    for (int r = 0; r < width; ++r) {
      for (int c = 0; c < width; ++c) {
        const bool border = r < kQuietZone || c < kQuietZone || r >= width - kQuietZone ||
                            c >= width - kQuietZone;
        if (border && pixels[static_cast<std::size_t>(r * width + c)]) return false;
      }
    }
    return true;
  };

  // A bare 29-module symbol has the same size as a 21-module one plus quiet
  // zone; the finder patterns make the border dark in the bare case.
  int offset = 0;
  int version = version_for_side(width - 2 * kQuietZone);
  if (version != 0 && border_is_light()) {
    offset = kQuietZone;
  } else {
    version = version_for_side(width);
  }
  if (version == 0) {
    fail(ErrorCode::FormatError, "image size " + std::to_string(width) + " is not a version 1..4 symbol");
  }

  QrMatrix matrix(version);
  for (int r = 0; r < matrix.side(); ++r) {
    for (int c = 0; c < matrix.side(); ++c) {
      const auto idx = static_cast<std::size_t>((r + offset) * width + (c + offset));
      matrix.set(r, c, pixels[idx]);
    }
  }
  return matrix;
}

}  // namespace fleetline::qr
