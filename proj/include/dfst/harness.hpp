#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfst/featselect.hpp"
#include "dfst/imaging.hpp"
#include "dfst/tracker.hpp"

namespace dfst::harness {

using imaging::BoundingBox;
using imaging::Image;

// ---------------------------------------------------------------------------
// Sequences

/// Frames are either decoded lazily from `frame_paths` or held in `frames`.
struct Sequence {
  std::string name;
  std::vector<std::filesystem::path> frame_paths;
  std::vector<Image> frames;
  /// Rectified, center convention. Entries may be invalid (NaN / zero size)
  /// for frames without annotation.
  std::vector<BoundingBox> groundtruth;

  std::size_t size() const { return frames.empty() ? frame_paths.size() : frames.size(); }
  Image frame(std::size_t index) const;
};

/// Axis-aligned hull of a 4-corner polygon. Throws DataError on zero area.
BoundingBox polygon_to_rect(const std::array<double, 8>& p);

/// One annotation line: 4 values (x,y,w,h top-left) or 8 (polygon). NaN
/// entries or zero extent yield an invalid box instead of an error.
BoundingBox parse_box_line(const std::string& line);

/// Reads a groundtruth / results file, one box per non-empty line.
std::vector<BoundingBox> read_boxes(const std::filesystem::path& path);

/// Directory of image files (sorted by name, optionally under color/) plus groundtruth.txt.
Sequence load_sequence(const std::filesystem::path& dir);

/// PNG frames 00000001.png... plus groundtruth.txt (top-left convention).
void write_sequence(const Sequence& seq, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Metrics

double iou(const BoundingBox& a, const BoundingBox& b);
double center_error(const BoundingBox& a, const BoundingBox& b);

struct MetricsReport {
  double mean_iou = 0;
  double precision_20 = 0;
  int failures = 0;
  int frames_evaluated = 0;
};

/// Frames 2..N with a valid annotation.
MetricsReport evaluate(const std::vector<BoundingBox>& predicted, const std::vector<BoundingBox>& groundtruth);

// ---------------------------------------------------------------------------
// Synthetic sequences

/// Second object with its own motion: its center starts at the target's
/// first-frame center plus the offset and moves with its own velocity.
struct Distractor {
  double offset_x = 0;  // pixels
  double offset_y = 0;
  double velocity_x = 0;  // pixels / frame
  double velocity_y = 0;
  double w = 20;
  double h = 20;
  std::array<std::uint8_t, 3> color{40, 120, 40};
  bool textured = true;
};

struct SynthSpec {
  std::string name = "synthetic";
  int width = 320;
  int height = 240;
  int frames = 60;
  double target_w = 40;
  double target_h = 40;
  std::optional<double> start_cx;  // frame center when unset
  std::optional<double> start_cy;
  std::array<std::uint8_t, 3> target_color{200, 40, 40};
  bool target_texture = true;
  double velocity_x = 0;  // pixels / frame
  double velocity_y = 0;
  double scale_rate = 0;  // per-frame relative growth of each side
  bool textured_background = true;
  std::array<std::uint8_t, 3> background_color{110, 110, 110};
  double illumination_ramp = 0;  // per-frame relative brightness change
  std::optional<Distractor> distractor;
  double noise_sigma = 0;
  std::uint64_t seed = 1;
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);
SynthSpec load_synth_spec(const std::filesystem::path& path);

/// Exact ground truth: target center c0 + t v, sides s0 (1 + rate)^t.
BoundingBox synth_box(const SynthSpec& spec, int frame);

/// Deterministic rendering; throws DataError when the target leaves the frame
/// by more than half its area.
Sequence synth_sequence(const SynthSpec& spec);

// ---------------------------------------------------------------------------
// Configuration

/// Flat key/value settings, keys mirroring TrackerConfig ("scale." prefix for
/// the box-adaptation block).
using Settings = std::map<std::string, std::string>;

/// JSON object for ".json", otherwise `key = value` lines with '#' comments.
Settings load_settings(const std::filesystem::path& path);

/// Throws UsageError on unknown keys or unparsable values.
void apply_settings(cft::TrackerConfig& cfg, const Settings& settings);

/// "key=value" from the command line.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

nlohmann::json to_json(const cft::TrackerConfig& cfg);

// ---------------------------------------------------------------------------
// Running

struct RunOptions {
  bool record_rankings = false;
};

struct RunResult {
  std::vector<BoundingBox> boxes;
  std::vector<double> per_frame_iou;  // NaN where the annotation is invalid
  /// Tracker-only, frames 2..N, excluding decode time.
  double fps = 0;
  double fps_end_to_end = 0;
  nlohmann::json config_snapshot;
  std::vector<featselect::Ranking> rankings;  // one per frame when recorded
  /// Projection state after every frame when recorded; used by contract checks.
  std::vector<cft::ProjectionState> projections;
};

/// Tracking only: receives the first annotation and the frames, nothing else.
RunResult track_frames(const Sequence& frames, const BoundingBox& first_box, const cft::TrackerConfig& cfg,
                       std::shared_ptr<const imaging::CnTable> cn, const RunOptions& options = {});

/// track_frames on the first annotation, then per-frame IoU against the annotations.
RunResult run_tracker(const Sequence& seq, const cft::TrackerConfig& cfg, std::shared_ptr<const imaging::CnTable> cn,
                      const RunOptions& options = {});

MetricsReport evaluate(const RunResult& result, const Sequence& seq);

// ---------------------------------------------------------------------------
// Output

/// "x,y,w,h" top-left convention with two decimals, one line per frame.
void write_results(const std::vector<BoundingBox>& boxes, const std::filesystem::path& path);

nlohmann::json report_json(const MetricsReport& report, const RunResult* result);
void write_report(const MetricsReport& report, const RunResult* result, const std::filesystem::path& path);

/// frame, fisher x F, p-value x F, pearson x F, energies x F, selected indices.
std::string ranking_csv_line(int frame, const featselect::Ranking& ranking);

/// Each frame with the annotation (green) and the prediction (red) as 2-px rectangles.
void render_overlay(const Sequence& seq, const RunResult& result, const std::filesystem::path& out_dir);

/// Draws a 2-px rectangle outline in place.
void draw_box(Image& img, const BoundingBox& box, std::array<std::uint8_t, 3> color);

}  // namespace dfst::harness
