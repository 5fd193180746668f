#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "dfst/errors.hpp"
#include "dfst/harness.hpp"

namespace dfst::harness {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

/// Smooth pseudo-random texture: a few seeded plane waves.
class WaveTexture {
 public:
  WaveTexture(std::uint64_t seed, int waves, double min_period, double max_period) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> period(min_period, max_period);
    for (int i = 0; i < waves; ++i) {
      const double a = angle(rng);
      const double k = 2.0 * std::numbers::pi / period(rng);
      waves_.push_back({k * std::cos(a), k * std::sin(a), angle(rng)});
    }
  }

  /// Value in [-1, 1].
  double at(double x, double y) const {
    double v = 0;
    for (const auto& w : waves_) v += std::sin(w.kx * x + w.ky * y + w.phase);
    return v / static_cast<double>(waves_.size());
  }

 private:
  struct Wave {
    double kx, ky, phase;
  };
  std::vector<Wave> waves_;
};

double overlap_1d(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

/// Fraction of pixel (x, y) covered by the box.
double coverage(const BoundingBox& b, int x, int y) {
  return overlap_1d(x, x + 1.0, b.left(), b.right()) * overlap_1d(y, y + 1.0, b.top(), b.bottom());
}

/// Pattern in box-normalized coordinates, so it scales with the box.
double box_pattern(const BoundingBox& b, double px, double py) {
  const double u = (px - b.left()) / b.w;
  const double v = (py - b.top()) / b.h;
  const double stripes = std::sin(2.0 * std::numbers::pi * 2.5 * u) * std::cos(2.0 * std::numbers::pi * 1.5 * v);
  const double ring = std::cos(2.0 * std::numbers::pi * 2.0 * std::hypot(u - 0.5, v - 0.5));
  return 0.8 + 0.12 * stripes + 0.08 * ring;  // in [0.6, 1.0]
}

void paint_box(std::vector<double>& canvas, int width, int height, const BoundingBox& b, const Rgb& color,
               bool textured) {
  const int x0 = std::max(0, static_cast<int>(std::floor(b.left())));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(b.right())));
  const int y0 = std::max(0, static_cast<int>(std::floor(b.top())));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(b.bottom())));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double a = coverage(b, x, y);
      if (a <= 0) continue;
      const double gain = textured ? box_pattern(b, x + 0.5, y + 0.5) : 1.0;
      double* px = canvas.data() + 3 * (static_cast<std::size_t>(y) * width + x);
      for (int c = 0; c < 3; ++c) px[c] = (1.0 - a) * px[c] + a * gain * color[static_cast<std::size_t>(c)];
    }
  }
}

Rgb rgb_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("color must be a 3-element array");
  Rgb c{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int v = j.at(i).get<int>();
    if (v < 0 || v > 255) throw DataError("color component out of [0, 255]");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

}  // namespace

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.name = j.value("name", s.name);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.frames = j.value("frames", s.frames);
    s.target_w = j.value("target_w", s.target_w);
    s.target_h = j.value("target_h", s.target_h);
    if (j.contains("start_cx")) s.start_cx = j.at("start_cx").get<double>();
    if (j.contains("start_cy")) s.start_cy = j.at("start_cy").get<double>();
    if (j.contains("target_color")) s.target_color = rgb_from_json(j.at("target_color"));
    s.target_texture = j.value("target_texture", s.target_texture);
    s.velocity_x = j.value("velocity_x", s.velocity_x);
    s.velocity_y = j.value("velocity_y", s.velocity_y);
    s.scale_rate = j.value("scale_rate", s.scale_rate);
    s.textured_background = j.value("textured_background", s.textured_background);
    if (j.contains("background_color")) s.background_color = rgb_from_json(j.at("background_color"));
    s.illumination_ramp = j.value("illumination_ramp", s.illumination_ramp);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.seed = j.value("seed", s.seed);
    if (j.contains("distractor") && !j.at("distractor").is_null()) {
      const auto& d = j.at("distractor");
      Distractor dist;
      dist.offset_x = d.value("offset_x", dist.offset_x);
      dist.offset_y = d.value("offset_y", dist.offset_y);
      dist.velocity_x = d.value("velocity_x", dist.velocity_x);
      dist.velocity_y = d.value("velocity_y", dist.velocity_y);
      dist.w = d.value("w", dist.w);
      dist.h = d.value("h", dist.h);
      if (d.contains("color")) dist.color = rgb_from_json(d.at("color"));
      dist.textured = d.value("textured", dist.textured);
      s.distractor = dist;
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json j = {
      {"name", s.name},
      {"width", s.width},
      {"height", s.height},
      {"frames", s.frames},
      {"target_w", s.target_w},
      {"target_h", s.target_h},
      {"target_color", s.target_color},
      {"target_texture", s.target_texture},
      {"velocity_x", s.velocity_x},
      {"velocity_y", s.velocity_y},
      {"scale_rate", s.scale_rate},
      {"textured_background", s.textured_background},
      {"background_color", s.background_color},
      {"illumination_ramp", s.illumination_ramp},
      {"noise_sigma", s.noise_sigma},
      {"seed", s.seed},
  };
  if (s.start_cx) j["start_cx"] = *s.start_cx;
  if (s.start_cy) j["start_cy"] = *s.start_cy;
  if (s.distractor) {
    const Distractor& d = *s.distractor;
    j["distractor"] = {{"offset_x", d.offset_x},     {"offset_y", d.offset_y}, {"velocity_x", d.velocity_x},
                       {"velocity_y", d.velocity_y}, {"w", d.w},               {"h", d.h},
                       {"color", d.color},           {"textured", d.textured}};
  }
  return j;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open synthetic spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("synthetic spec is not valid JSON: " + std::string(e.what()));
  }
  return synth_spec_from_json(j);
}

BoundingBox synth_box(const SynthSpec& spec, int frame) {
  const double grow = std::pow(1.0 + spec.scale_rate, frame);
  return {spec.start_cx.value_or(spec.width / 2.0) + spec.velocity_x * frame,
          spec.start_cy.value_or(spec.height / 2.0) + spec.velocity_y * frame, spec.target_w * grow,
          spec.target_h * grow};
}

Sequence synth_sequence(const SynthSpec& spec) {
  if (spec.width < 8 || spec.height < 8) throw DataError("synthetic spec: frame must be at least 8x8");
  if (spec.frames < 1) throw DataError("synthetic spec: need at least one frame");
  if (!(spec.target_w > 0 && spec.target_h > 0)) throw DataError("synthetic spec: target extent must be positive");

  Sequence seq;
  seq.name = spec.name;
  for (int t = 0; t < spec.frames; ++t) {
    const BoundingBox b = synth_box(spec, t);
    if (!b.valid()) throw DataError("synthetic spec: target box degenerates");
    const double inside = overlap_1d(b.left(), b.right(), 0.0, spec.width) * overlap_1d(b.top(), b.bottom(), 0.0, spec.height);
    if (inside < 0.5 * b.area()) {
      throw DataError("synthetic spec: target is less than half inside the frame at frame " + std::to_string(t + 1));
    }
    seq.groundtruth.push_back(b);
  }

  const WaveTexture texture(spec.seed, 6, 9.0, 40.0);
  const WaveTexture tint(spec.seed ^ 0x9e3779b97f4a7c15ULL, 3, 30.0, 90.0);
  std::vector<double> background(static_cast<std::size_t>(spec.width) * spec.height * 3);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double* px = background.data() + 3 * (static_cast<std::size_t>(y) * spec.width + x);
      const double v = spec.textured_background ? texture.at(x, y) : 0.0;
      const double hue = spec.textured_background ? tint.at(x, y) : 0.0;
      for (int c = 0; c < 3; ++c) {
        const double shift = 25.0 * hue * (c == 0 ? 1.0 : c == 1 ? -0.5 : -0.5);
        px[c] = spec.background_color[static_cast<std::size_t>(c)] + 60.0 * v + shift;
      }
    }
  }

  std::mt19937_64 noise_rng(spec.seed + 7);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
  for (int t = 0; t < spec.frames; ++t) {
    std::vector<double> canvas = background;
    const BoundingBox& b = seq.groundtruth[static_cast<std::size_t>(t)];
    if (spec.distractor) {
      const Distractor& d = *spec.distractor;
      const BoundingBox& b0 = seq.groundtruth.front();
      const BoundingBox db{b0.cx + d.offset_x + d.velocity_x * t, b0.cy + d.offset_y + d.velocity_y * t, d.w, d.h};
      paint_box(canvas, spec.width, spec.height, db, d.color, d.textured);
    }
    paint_box(canvas, spec.width, spec.height, b, spec.target_color, spec.target_texture);

    const double gain = std::max(0.0, 1.0 + spec.illumination_ramp * t);
    Image img(spec.width, spec.height);
    for (std::size_t i = 0; i < canvas.size(); ++i) {
      double v = canvas[i] * gain;
      if (spec.noise_sigma > 0) v += noise(noise_rng);
      img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

}  // namespace dfst::harness
