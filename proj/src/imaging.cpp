#include "dfst/imaging.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "dfst/errors.hpp"

namespace dfst::imaging {

Image::Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

Image::Image(int w, int h, std::array<std::uint8_t, 3> fill) : Image(w, h) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

double Image::gray(int x, int y) const {
  const std::uint8_t* p = at(x, y);
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

bool BoundingBox::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) && w > 0 && h > 0;
}

PixelRect pixel_rect(const BoundingBox& box) {
  PixelRect r;
  r.width = static_cast<int>(std::lround(box.w));
  r.height = static_cast<int>(std::lround(box.h));
  r.x0 = static_cast<int>(std::floor(box.cx - box.w / 2 + 0.5));
  r.y0 = static_cast<int>(std::floor(box.cy - box.h / 2 + 0.5));
  return r;
}

// ---------------------------------------------------------------------------
// Color-name table

CnTable::CnTable(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(kCnRows) * kColorNames) {
    throw DataError("row count mismatch: expected " + std::to_string(kCnRows) + " rows of " +
                    std::to_string(kColorNames) + " values");
  }
  for (int r = 0; r < kCnRows; ++r) {
    double sum = 0;
    for (double v : row(r)) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("probability out of [0,1] at row " + std::to_string(r));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-3) {
      throw DataError("row not a distribution: row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

namespace {

std::vector<double> read_cn_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open color-name table: " + path.string());

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(kCnRows) * kColorNames);
  std::string line;
  int line_no = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    int cols = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::string field = line.substr(pos, end - pos);
      const auto first = field.find_first_not_of(" \t");
      const auto last = field.find_last_not_of(" \t");
      if (first == std::string::npos) throw DataError("malformed row at line " + std::to_string(line_no));
      field = field.substr(first, last - first + 1);
      double v = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError("malformed row at line " + std::to_string(line_no));
      }
      values.push_back(v);
      ++cols;
      pos = end + 1;
    }
    if (cols != kColorNames) {
      throw DataError("malformed row at line " + std::to_string(line_no) + ": expected " +
                      std::to_string(kColorNames) + " columns, got " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows != kCnRows) {
    throw DataError("row count mismatch: expected " + std::to_string(kCnRows) + ", got " + std::to_string(rows));
  }
  return values;
}

std::vector<double> read_cn_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open color-name table: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t expected = static_cast<std::size_t>(kCnRows) * kColorNames * sizeof(double);
  if (bytes.size() != expected) {
    throw DataError("row count mismatch: binary table has " + std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected));
  }
  std::vector<double> values(static_cast<std::size_t>(kCnRows) * kColorNames);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

}  // namespace

CnTable load_cn_table(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("color-name table not found: " + path.string());
  if (path.extension() == ".bin") return CnTable(read_cn_bin(path));
  return CnTable(read_cn_csv(path));
}

void save_cn_table(const CnTable& table, const std::filesystem::path& path) {
  if (path.extension() == ".bin") {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw DataError("cannot write color-name table: " + path.string());
    for (std::size_t r = 0; r < table.rows(); ++r) {
      for (double v : table.row(static_cast<int>(r))) {
        auto bytes = std::bit_cast<std::array<char, 8>>(v);
        if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
        bin.write(bytes.data(), 8);
      }
    }
    if (!bin) throw DataError("failed writing color-name table: " + path.string());
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write color-name table: " + path.string());
  out.precision(9);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto row = table.row(static_cast<int>(r));
    for (int c = 0; c < kColorNames; ++c) {
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing color-name table: " + path.string());
}

CnTable synthetic_cn_table() {
  // black, blue, green, grey, orange, pink, purple, red, white, yellow
  static constexpr std::array<std::array<double, 3>, kColorNames> kPrototypes{{
      {0, 0, 0},
      {20, 40, 220},
      {30, 160, 40},
      {128, 128, 128},
      {250, 140, 20},
      {250, 160, 200},
      {130, 30, 150},
      {210, 20, 20},
      {255, 255, 255},
      {245, 235, 30},
  }};
  constexpr double kTemperature = 2.0 * 45.0 * 45.0;

  std::vector<double> values(static_cast<std::size_t>(kCnRows) * kColorNames);
  for (int b = 0; b < 32; ++b) {
    for (int g = 0; g < 32; ++g) {
      for (int r = 0; r < 32; ++r) {
        const double rgb[3] = {8.0 * r + 3.5, 8.0 * g + 3.5, 8.0 * b + 3.5};
        std::array<double, kColorNames> logits{};
        for (int k = 0; k < kColorNames; ++k) {
          double d2 = 0;
          for (int c = 0; c < 3; ++c) d2 += (rgb[c] - kPrototypes[k][c]) * (rgb[c] - kPrototypes[k][c]);
          logits[k] = -d2 / kTemperature;
        }
        const double top = *std::max_element(logits.begin(), logits.end());
        double sum = 0;
        for (double& l : logits) sum += (l = std::exp(l - top));
        double* row = values.data() + static_cast<std::size_t>(r + 32 * g + 1024 * b) * kColorNames;
        for (int k = 0; k < kColorNames; ++k) row[k] = logits[k] / sum;
      }
    }
  }
  return CnTable(std::move(values));
}

// ---------------------------------------------------------------------------
// Geometry

Image extract_patch(const Image& img, const BoundingBox& box) {
  const PixelRect r = pixel_rect(box);
  if (r.width < 1 || r.height < 1) throw DataError("degenerate box: extent rounds to zero");
  if (img.empty()) throw DataError("extract_patch on empty image");

  Image out(r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    const int sy = std::clamp(r.y0 + y, 0, img.height - 1);
    for (int x = 0; x < r.width; ++x) {
      const int sx = std::clamp(r.x0 + x, 0, img.width - 1);
      const std::uint8_t* s = img.at(sx, sy);
      std::uint8_t* d = out.at(x, y);
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];
    }
  }
  return out;
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw DataError("resize_bilinear: output extent must be >= 1");
  if (img.empty()) throw DataError("resize_bilinear on empty image");
  if (out_w == img.width && out_h == img.height) return img;

  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
      double src = (o + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const int i0 = static_cast<int>(std::floor(src));
      const int i1 = std::min(i0 + 1, in - 1);
      t[static_cast<std::size_t>(o)] = {i0, i1, src - i0};
    }
    return t;
  };
  const auto tx = taps(img.width, out_w);
  const auto ty = taps(img.height, out_h);

  Image out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      const std::uint8_t* p00 = img.at(vx.i0, vy.i0);
      const std::uint8_t* p01 = img.at(vx.i1, vy.i0);
      const std::uint8_t* p10 = img.at(vx.i0, vy.i1);
      const std::uint8_t* p11 = img.at(vx.i1, vy.i1);
      std::uint8_t* d = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + vx.frac * (p01[c] - p00[c]);
        const double bot = p10[c] + vx.frac * (p11[c] - p10[c]);
        const double v = top + vy.frac * (bot - top);
        d[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

Image sample_patch(const Image& img, const BoundingBox& box, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw DataError("sample_patch: output extent must be >= 1");
  if (!box.valid()) throw DataError("sample_patch: invalid box");
  if (img.empty()) throw DataError("sample_patch on empty image");

  const double cell_w = box.w / out_w;
  const double cell_h = box.h / out_h;
  const int taps_x = std::max(1, static_cast<int>(std::ceil(cell_w - 1e-9)));
  const int taps_y = std::max(1, static_cast<int>(std::ceil(cell_h - 1e-9)));
  const double left = box.left();
  const double top = box.top();
  const double max_x = img.width - 1;
  const double max_y = img.height - 1;

  Image out(out_w, out_h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc[3] = {0, 0, 0};
      for (int ty = 0; ty < taps_y; ++ty) {
        // Continuous coordinate minus 0.5 gives the pixel-index coordinate.
        const double py = std::clamp(top + (y + (ty + 0.5) / taps_y) * cell_h - 0.5, 0.0, max_y);
        const int y0 = static_cast<int>(std::floor(py));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = py - y0;
        for (int tx = 0; tx < taps_x; ++tx) {
          const double px = std::clamp(left + (x + (tx + 0.5) / taps_x) * cell_w - 0.5, 0.0, max_x);
          const int x0 = static_cast<int>(std::floor(px));
          const int x1 = std::min(x0 + 1, img.width - 1);
          const double fx = px - x0;
          const std::uint8_t* p00 = img.at(x0, y0);
          const std::uint8_t* p01 = img.at(x1, y0);
          const std::uint8_t* p10 = img.at(x0, y1);
          const std::uint8_t* p11 = img.at(x1, y1);
          for (int c = 0; c < 3; ++c) {
            const double t = p00[c] + fx * (p01[c] - p00[c]);
            const double b = p10[c] + fx * (p11[c] - p10[c]);
            acc[c] += t + fy * (b - t);
          }
        }
      }
      std::uint8_t* d = out.at(x, y);
      const double n = static_cast<double>(taps_x) * taps_y;
      for (int c = 0; c < 3; ++c) d[c] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[c] / n), 0L, 255L));
    }
  }
  return out;
}

RealPlane hann_window(int h, int w) {
  auto hann = [](int n) {
    Eigen::VectorXd v(n);
    if (n == 1) {
      v(0) = 1.0;
      return v;
    }
    for (int k = 0; k < n; ++k) v(k) = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / (n - 1)));
    return v;
  };
  return hann(h) * hann(w).transpose();
}

// ---------------------------------------------------------------------------
// Features

FeatureMap::FeatureMap(int h, int w, int c)
    : height(h), width(w), channels(static_cast<std::size_t>(c), RealPlane::Zero(h, w)) {}

FeatureMap build_feature_map(const Image& patch, const CnTable& cn) {
  if (patch.empty()) throw DataError("build_feature_map on empty patch");
  const int h = patch.height;
  const int w = patch.width;
  FeatureMap map(h, w, kFeatureChannels);
  const RealPlane window = hann_window(h, w);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = patch.at(x, y);
      map.channel(0)(y, x) = patch.gray(x, y) / 255.0 - 0.5;
      const auto probs = cn.row(cn_index(p[0], p[1], p[2]));
      for (int k = 0; k < kColorNames; ++k) map.channel(1 + k)(y, x) = probs[k];
    }
  }

  // Channels are independent; each one's mean is a serial sum so the result
  // does not depend on the thread count.
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kFeatureChannels; ++c) {
    RealPlane& ch = map.channel(c);
    if (c > 0) ch.array() -= ch.mean();
    ch.array() *= window.array();
  }
  return map;
}

FeatureMap serial::build_feature_map(const Image& patch, const CnTable& cn) {
  if (patch.empty()) throw DataError("build_feature_map on empty patch");
  FeatureMap map(patch.height, patch.width, kFeatureChannels);
  const RealPlane window = hann_window(patch.height, patch.width);
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      const std::uint8_t* p = patch.at(x, y);
      map.channel(0)(y, x) = patch.gray(x, y) / 255.0 - 0.5;
      const auto probs = cn.row(cn_index(p[0], p[1], p[2]));
      for (int k = 0; k < kColorNames; ++k) map.channel(1 + k)(y, x) = probs[k];
    }
  }
  for (int c = 0; c < kFeatureChannels; ++c) {
    RealPlane& ch = map.channel(c);
    if (c > 0) ch.array() -= ch.mean();
    ch.array() *= window.array();
  }
  return map;
}

// ---------------------------------------------------------------------------
// Codecs

Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot decode image: " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  Image img(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y) {
    std::copy_n(rgb.ptr<std::uint8_t>(y), static_cast<std::size_t>(rgb.cols) * 3, img.at(0, y));
  }
  return img;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write image: " + path.string());
}

}  // namespace dfst::imaging
