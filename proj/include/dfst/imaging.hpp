#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dfst/planes.hpp"

namespace dfst::imaging {

/// 8-bit RGB image, row-major, interleaved R,G,B.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h);
  Image(int w, int h, std::array<std::uint8_t, 3> fill);

  bool empty() const { return width == 0 || height == 0; }

  std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  /// ITU-R BT.601 luminance in [0, 255].
  double gray(int x, int y) const;

  bool operator==(const Image&) const = default;
};

/// Axis-aligned box in center convention. Pixel (x, y) covers [x, x+1) x [y, y+1).
struct BoundingBox {
  double cx = 0;
  double cy = 0;
  double w = 0;
  double h = 0;

  static BoundingBox from_top_left(double x, double y, double w, double h) {
    return {x + w / 2, y + h / 2, w, h};
  }

  double left() const { return cx - w / 2; }
  double top() const { return cy - h / 2; }
  double right() const { return cx + w / 2; }
  double bottom() const { return cy + h / 2; }
  double area() const { return w * h; }

  /// Finite with positive extent.
  bool valid() const;

  bool operator==(const BoundingBox&) const = default;
};

/// Integer pixel rectangle covered by a box: x0 = floor(left + 0.5), width = round(w).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
};

PixelRect pixel_rect(const BoundingBox& box);

inline constexpr int kColorNames = 10;
inline constexpr int kCnRows = 32768;

/// RGB -> distribution over 10 color names, over the 32x32x32 quantized cube.
class CnTable {
 public:
  /// Takes ownership of kCnRows * kColorNames values; validates ranges and row sums.
  explicit CnTable(std::vector<double> values);

  std::span<const double, kColorNames> row(int index) const {
    return std::span<const double, kColorNames>(values_.data() + static_cast<std::size_t>(index) * kColorNames,
                                                kColorNames);
  }
  std::size_t rows() const { return values_.size() / kColorNames; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Loads a CSV (32768 lines x 10 decimals) or, for a ".bin" file name,
/// 32768*10 raw little-endian float64 values.
CnTable load_cn_table(const std::filesystem::path& path);

/// Writes the CSV form accepted by load_cn_table, or raw little-endian doubles for ".bin".
void save_cn_table(const CnTable& table, const std::filesystem::path& path);

/// Deterministic prototype-based table: soft assignment of every quantized
/// color to ten reference colors. Used when no published table is at hand.
CnTable synthetic_cn_table();

constexpr int cn_index(int r, int g, int b) { return r / 8 + 32 * (g / 8) + 1024 * (b / 8); }

/// Crop of round(w) x round(h) pixels around the box center; outside pixels
/// replicate the nearest border pixel.
Image extract_patch(const Image& img, const BoundingBox& box);

/// Bilinear resample with half-pixel centers and edge clamping; results are
/// rounded half away from zero.
Image resize_bilinear(const Image& img, int out_w, int out_h);

/// Resamples the box region to out_w x out_h without rounding the box to
/// whole pixels: every output cell averages a grid of bilinear taps spread
/// over its footprint (one tap when upsampling). Outside pixels replicate
/// the border.
Image sample_patch(const Image& img, const BoundingBox& box, int out_w, int out_h);

/// Separable Hann window, value 1 along a dimension of length 1.
RealPlane hann_window(int h, int w);

/// Luminance plus ten color-name channels, each Hann-windowed.
struct FeatureMap {
  int height = 0;
  int width = 0;
  std::vector<RealPlane> channels;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c);

  int num_channels() const { return static_cast<int>(channels.size()); }
  RealPlane& channel(int c) { return channels[static_cast<std::size_t>(c)]; }
  const RealPlane& channel(int c) const { return channels[static_cast<std::size_t>(c)]; }
};

inline constexpr int kFeatureChannels = 1 + kColorNames;

FeatureMap build_feature_map(const Image& patch, const CnTable& cn);

namespace serial {
/// Single-threaded reference for build_feature_map.
FeatureMap build_feature_map(const Image& patch, const CnTable& cn);
}  // namespace serial

/// PNG/JPEG decode to RGB.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);

}  // namespace dfst::imaging
