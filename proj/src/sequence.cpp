#include <algorithm>
#include <cctype>
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

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_image_file(const fs::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double parse_number(const std::string& field) {
  std::string t;
  for (char c : field) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  if (t.empty()) throw DataError("empty field");
  const std::string l = lower(t);
  if (l == "nan" || l == "-nan") return kNaN;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw DataError("not a number: '" + t + "'");
  }
  if (used != t.size()) throw DataError("not a number: '" + t + "'");
  return v;
}

}  // namespace

Image Sequence::frame(std::size_t index) const {
  if (index >= size()) throw DataError("frame index " + std::to_string(index) + " out of range");
  if (!frames.empty()) return frames[index];
  try {
    return imaging::load_image(frame_paths[index]);
  } catch (const DataError& e) {
    throw DataError("frame " + std::to_string(index + 1) + ": " + e.what());
  }
}

BoundingBox polygon_to_rect(const std::array<double, 8>& p) {
  for (double v : p) {
    if (!std::isfinite(v)) throw DataError("polygon has non-finite coordinates");
  }
  const double x0 = std::min({p[0], p[2], p[4], p[6]});
  const double x1 = std::max({p[0], p[2], p[4], p[6]});
  const double y0 = std::min({p[1], p[3], p[5], p[7]});
  const double y1 = std::max({p[1], p[3], p[5], p[7]});
  if (!(x1 > x0 && y1 > y0)) throw DataError("polygon has zero area");
  return {(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
}

BoundingBox parse_box_line(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) v.push_back(parse_number(field));

  const bool any_nan = std::any_of(v.begin(), v.end(), [](double x) { return std::isnan(x); });
  if (v.size() == 4) {
    if (any_nan) return {kNaN, kNaN, kNaN, kNaN};
    return BoundingBox::from_top_left(v[0], v[1], v[2], v[3]);
  }
  if (v.size() == 8) {
    if (any_nan) return {kNaN, kNaN, kNaN, kNaN};
    std::array<double, 8> p{};
    std::copy(v.begin(), v.end(), p.begin());
    try {
      return polygon_to_rect(p);
    } catch (const DataError&) {
      return {p[0], p[1], 0.0, 0.0};  // degenerate annotation, excluded from metrics
    }
  }
  throw DataError("expected 4 or 8 comma-separated values, got " + std::to_string(v.size()));
}

std::vector<BoundingBox> read_boxes(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<BoundingBox> boxes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      boxes.push_back(parse_box_line(line));
    } catch (const DataError& e) {
      throw DataError(path.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return boxes;
}

Sequence load_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("sequence directory not found: " + dir.string());
  const fs::path gt = dir / "groundtruth.txt";
  if (!fs::exists(gt)) throw DataError("missing groundtruth.txt in " + dir.string());

  Sequence seq;
  seq.name = dir.filename().string();
  if (seq.name.empty()) seq.name = dir.parent_path().filename().string();
  seq.frame_paths = list_images(dir);
  if (seq.frame_paths.empty()) seq.frame_paths = list_images(dir / "color");
  seq.groundtruth = read_boxes(gt);

  if (seq.frame_paths.size() != seq.groundtruth.size()) {
    throw DataError("count mismatch: " + std::to_string(seq.frame_paths.size()) + " frames but " +
                    std::to_string(seq.groundtruth.size()) + " groundtruth lines");
  }
  if (seq.size() < 2) throw DataError("a sequence needs at least 2 frames");
  if (!seq.groundtruth.front().valid()) throw DataError("first groundtruth box is not valid");
  return seq;
}

void write_sequence(const Sequence& seq, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::ostringstream name;
    name << std::setw(8) << std::setfill('0') << (i + 1) << ".png";
    imaging::save_image(seq.frame(i), dir / name.str());
  }
  write_results(seq.groundtruth, dir / "groundtruth.txt");
}

// ---------------------------------------------------------------------------

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (a == b) return a.area() > 0 ? 1.0 : 0.0;
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double center_error(const BoundingBox& a, const BoundingBox& b) { return std::hypot(a.cx - b.cx, a.cy - b.cy); }

MetricsReport evaluate(const std::vector<BoundingBox>& predicted, const std::vector<BoundingBox>& groundtruth) {
  if (predicted.size() != groundtruth.size()) {
    throw DataError("count mismatch: " + std::to_string(predicted.size()) + " predictions vs " +
                    std::to_string(groundtruth.size()) + " groundtruth boxes");
  }
  MetricsReport r;
  double iou_sum = 0;
  int precise = 0;
  for (std::size_t i = 1; i < predicted.size(); ++i) {
    if (!groundtruth[i].valid()) continue;
    const double o = predicted[i].valid() ? iou(predicted[i], groundtruth[i]) : 0.0;
    iou_sum += o;
    if (o == 0.0) ++r.failures;
    if (predicted[i].valid() && center_error(predicted[i], groundtruth[i]) < 20.0) ++precise;
    ++r.frames_evaluated;
  }
  if (r.frames_evaluated > 0) {
    r.mean_iou = iou_sum / r.frames_evaluated;
    r.precision_20 = static_cast<double>(precise) / r.frames_evaluated;
  }
  return r;
}

}  // namespace dfst::harness
