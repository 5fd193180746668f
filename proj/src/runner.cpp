#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dfst/errors.hpp"
#include "dfst/harness.hpp"

namespace dfst::harness {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rate(std::size_t frames, double seconds) {
  return static_cast<double>(frames) / std::max(seconds, 1e-9);
}

}  // namespace

RunResult track_frames(const Sequence& frames, const BoundingBox& first_box, const cft::TrackerConfig& cfg,
                       std::shared_ptr<const imaging::CnTable> cn, const RunOptions& options) {
  if (frames.size() < 2) throw DataError("a sequence needs at least 2 frames");
  RunResult out;
  out.config_snapshot = to_json(cfg);

  const auto wall_start = Clock::now();
  cft::TrackerState state = cft::init(frames.frame(0), first_box, cfg, std::move(cn));
  out.boxes.push_back(first_box);
  if (options.record_rankings) {
    out.rankings.push_back(state.last_ranking);
    out.projections.push_back(state.projection);
  }

  double tracking_seconds = 0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const Image frame = frames.frame(i);
    const auto step_start = Clock::now();
    out.boxes.push_back(cft::track_step(state, frame));
    tracking_seconds += seconds_since(step_start);
    if (options.record_rankings) {
      out.rankings.push_back(state.last_ranking);
      out.projections.push_back(state.projection);
    }
  }
  out.fps = rate(frames.size() - 1, tracking_seconds);
  out.fps_end_to_end = rate(frames.size(), seconds_since(wall_start));
  return out;
}

RunResult run_tracker(const Sequence& seq, const cft::TrackerConfig& cfg, std::shared_ptr<const imaging::CnTable> cn,
                      const RunOptions& options) {
  if (seq.groundtruth.size() != seq.size()) throw DataError("count mismatch between frames and groundtruth");
  if (seq.groundtruth.empty() || !seq.groundtruth.front().valid()) {
    throw DataError("first groundtruth box is not valid");
  }
  RunResult out = track_frames(seq, seq.groundtruth.front(), cfg, std::move(cn), options);
  out.per_frame_iou.reserve(out.boxes.size());
  for (std::size_t i = 0; i < out.boxes.size(); ++i) {
    out.per_frame_iou.push_back(seq.groundtruth[i].valid() ? iou(out.boxes[i], seq.groundtruth[i])
                                                           : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

MetricsReport evaluate(const RunResult& result, const Sequence& seq) { return evaluate(result.boxes, seq.groundtruth); }

// ---------------------------------------------------------------------------

void write_results(const std::vector<BoundingBox>& boxes, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::fixed << std::setprecision(2);
  for (const auto& b : boxes) out << b.left() << ',' << b.top() << ',' << b.w << ',' << b.h << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

nlohmann::json report_json(const MetricsReport& report, const RunResult* result) {
  nlohmann::json j = {
      {"mean_iou", report.mean_iou},
      {"precision_20", report.precision_20},
      {"failures", report.failures},
      {"frames_evaluated", report.frames_evaluated},
  };
  if (result) {
    j["fps"] = result->fps;
    j["fps_end_to_end"] = result->fps_end_to_end;
    j["config"] = result->config_snapshot;
  }
  return j;
}

void write_report(const MetricsReport& report, const RunResult* result, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << report_json(report, result).dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

std::string ranking_csv_line(int frame, const featselect::Ranking& r) {
  std::ostringstream out;
  out << frame;
  out << std::setprecision(9);
  for (const Eigen::VectorXd* v : {&r.metrics.fisher, &r.metrics.ttest_p, &r.metrics.pearson, &r.energies}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) out << ',' << (*v)(i);
  }
  for (int idx : r.selected) out << ',' << idx;
  return out.str();
}

void draw_box(Image& img, const BoundingBox& box, std::array<std::uint8_t, 3> color) {
  if (!box.valid()) return;
  const int x0 = static_cast<int>(std::lround(box.left()));
  const int y0 = static_cast<int>(std::lround(box.top()));
  const int x1 = static_cast<int>(std::lround(box.right())) - 1;
  const int y1 = static_cast<int>(std::lround(box.bottom())) - 1;
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    std::uint8_t* p = img.at(x, y);
    p[0] = color[0];
    p[1] = color[1];
    p[2] = color[2];
  };
  for (int t = 0; t < 2; ++t) {
    for (int x = x0; x <= x1; ++x) {
      put(x, y0 + t);
      put(x, y1 - t);
    }
    for (int y = y0; y <= y1; ++y) {
      put(x0 + t, y);
      put(x1 - t, y);
    }
  }
}

void render_overlay(const Sequence& seq, const RunResult& result, const fs::path& out_dir) {
  if (result.boxes.size() != seq.size()) throw DataError("render_overlay: result and sequence differ in length");
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    Image img = seq.frame(i);
    if (i < seq.groundtruth.size()) draw_box(img, seq.groundtruth[i], {0, 220, 0});
    draw_box(img, result.boxes[i], {230, 0, 0});
    std::ostringstream name;
    name << std::setw(8) << std::setfill('0') << (i + 1) << ".png";
    imaging::save_image(img, out_dir / name.str());
  }
}

}  // namespace dfst::harness
