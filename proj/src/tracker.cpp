#include "dfst/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "dfst/errors.hpp"

namespace dfst::cft {

namespace {

int odd_extent(double cells) {
  int n = static_cast<int>(std::lround(cells));
  if (n % 2 == 0) --n;
  return std::max(n, 3);
}

std::vector<int> to_feature_space(const std::vector<int>& channels) {
  std::vector<int> out;
  out.reserve(channels.size());
  for (int c : channels) out.push_back(c - 1);
  return out;
}

void refresh_projection(TrackerState& s, const imaging::FeatureMap& features) {
  const Eigen::MatrixXd cov = compute_covariance(features, s.selected);
  s.projection = update_projection(s.projection, cov, to_feature_space(s.selected), s.config.lr_dim,
                                   s.config.compressed_dim);
}

std::optional<scale::Dictionary> make_dictionary(const TrackerConfig& cfg, const imaging::Image& frame,
                                                 const imaging::BoundingBox& box) {
  const Eigen::VectorXd seed = scale::patch_vector(frame, box, cfg.scale.patch_side);
  if (seed.norm() == 0.0) return std::nullopt;  // flat target: nothing to reconstruct
  const std::vector<Eigen::VectorXd> seeds{seed};
  return scale::init_dictionary(seeds, cfg.scale.atoms, cfg.scale.sparsity, cfg.scale.max_iters,
                                cfg.scale.rng_seed);
}

}  // namespace

void TrackerConfig::validate() const {
  auto fail = [](const std::string& what) { throw UsageError("invalid tracker config: " + what); };
  if (!(lr_appearance > 0 && lr_appearance <= 1)) fail("lr_appearance must be in (0, 1]");
  if (!(lr_dim > 0 && lr_dim <= 1)) fail("lr_dim must be in (0, 1]");
  if (compressed_dim < 1) fail("compressed_dim must be >= 1");
  if (num_selected < compressed_dim) fail("num_selected must be >= compressed_dim");
  if (num_selected > imaging::kColorNames) fail("num_selected exceeds the color-name channel count");
  if (!(kernel_sigma > 0)) fail("kernel_sigma must be positive");
  if (!(label_sigma_factor > 0)) fail("label_sigma_factor must be positive");
  if (!(lambda_reg >= 1e-4)) fail("lambda_reg must be >= 1e-4");
  if (padding && !(*padding >= 0)) fail("padding must be non-negative");
  if (inffs_decay && !(*inffs_decay > 0)) fail("inffs_decay must be positive");
  if (max_template_cells < 3) fail("max_template_cells must be >= 3");
  if (scale.atoms < 1) fail("scale.atoms must be >= 1");
  if (scale.max_iters < 1) fail("scale.max_iters must be >= 1");
  if (!(scale.sparsity >= 0)) fail("scale.sparsity must be non-negative");
  if (scale.patch_side < 2) fail("scale.patch_side must be >= 2");
  if (std::find(scale.scales.begin(), scale.scales.end(), 1.0) == scale.scales.end()) fail("scale.scales must contain 1.0");
  if (std::find(scale.shifts.begin(), scale.shifts.end(), 0.0) == scale.shifts.end()) fail("scale.shifts must contain 0");
  if (!(scale.damping >= 0 && scale.damping <= 1)) fail("scale.damping must be in [0, 1]");
}

double estimate_padding(double frame_w, double frame_h, const imaging::BoundingBox& box) {
  if (!(box.area() > 0)) throw DataError("estimate_padding: box area must be positive");
  return std::clamp(0.5 * std::sqrt((frame_w * frame_h) / box.area()), 1.5, 3.0);
}

imaging::BoundingBox clip_to_frame(const imaging::BoundingBox& box, int frame_w, int frame_h) {
  const double l = std::max(box.left(), 0.0);
  const double t = std::max(box.top(), 0.0);
  const double r = std::min(box.right(), static_cast<double>(frame_w));
  const double b = std::min(box.bottom(), static_cast<double>(frame_h));
  if (!(r - l >= 1.0 && b - t >= 1.0)) throw DataError("box does not overlap the frame");
  return {(l + r) / 2, (t + b) / 2, r - l, b - t};
}

imaging::BoundingBox search_window(const imaging::BoundingBox& box, double padding) {
  return {box.cx, box.cy, box.w * (1.0 + padding), box.h * (1.0 + padding)};
}

imaging::FeatureMap window_features(const TrackerState& state, const imaging::Image& frame,
                                    const imaging::BoundingBox& box) {
  const imaging::Image patch =
      imaging::sample_patch(frame, search_window(box, state.padding), state.template_w, state.template_h);
  return imaging::build_feature_map(patch, *state.cn);
}

imaging::BoundingBox target_in_cells(const TrackerState& state) {
  const double w = state.template_w / (1.0 + state.padding);
  const double h = state.template_h / (1.0 + state.padding);
  return {state.template_w / 2.0, state.template_h / 2.0, w, h};
}

std::vector<int> selected_color_channels(const featselect::Ranking& ranking, int k) {
  std::vector<int> out;
  for (int idx : ranking.order) {
    if (static_cast<int>(out.size()) == k) break;
    if (idx != 0) out.push_back(idx);
  }
  return out;
}

featselect::Ranking rank_window(const TrackerState& state, const imaging::FeatureMap& features) {
  const featselect::ClassSamples samples = featselect::label_samples(features, target_in_cells(state));
  featselect::Ranking r = featselect::rank_features(samples, features.num_channels(), state.config.inffs_decay);
  r.selected = selected_color_channels(r, state.config.num_selected);
  return r;
}

imaging::FeatureMap compressed_appearance(const TrackerState& state) {
  return project_features(state.appearance, state.selected, state.projection.basis);
}

TrackerState init(const imaging::Image& frame, const imaging::BoundingBox& box, const TrackerConfig& config,
                  std::shared_ptr<const imaging::CnTable> cn) {
  config.validate();
  if (!cn) throw DataError("color-name table absent");
  if (frame.empty()) throw DataError("init: empty frame");
  if (!box.valid()) throw DataError("init: degenerate box");

  TrackerState s;
  s.config = config;
  s.cn = std::move(cn);
  s.position = clip_to_frame(box, frame.width, frame.height);
  s.padding = config.padding.value_or(estimate_padding(frame.width, frame.height, s.position));

  const imaging::BoundingBox window = search_window(s.position, s.padding);
  const double shrink = std::min(1.0, config.max_template_cells / std::max(window.w, window.h));
  s.template_w = odd_extent(window.w * shrink);
  s.template_h = odd_extent(window.h * shrink);

  const imaging::BoundingBox target = target_in_cells(s);
  s.label = gaussian_label(s.template_h, s.template_w, target.h, target.w, config.label_sigma_factor);

  const imaging::FeatureMap features = window_features(s, frame, s.position);
  s.last_ranking = rank_window(s, features);
  s.selected = s.last_ranking.selected;
  s.projection = make_projection(imaging::kColorNames);
  refresh_projection(s, features);

  s.appearance = features;
  s.alpha_hat = train(compressed_appearance(s), s.label, config.kernel_sigma, config.lambda_reg);

  if (config.scale_adapt) s.dictionary = make_dictionary(config, frame, s.position);
  s.frames_seen = 1;
  return s;
}

imaging::BoundingBox track_step(TrackerState& s, const imaging::Image& frame) {
  if (s.frames_seen == 0) throw UsageError("track_step on an uninitialized tracker");
  if (frame.empty()) throw DataError("track_step: empty frame");
  const TrackerConfig& cfg = s.config;

  // Localize with the selection and basis learned up to the previous frame.
  const imaging::FeatureMap search = window_features(s, frame, s.position);
  ResponseMap resp = detect(compressed_appearance(s), s.alpha_hat,
                            project_features(search, s.selected, s.projection.basis), cfg.kernel_sigma);
  if (cfg.microshift) std::tie(resp.subcell_dy, resp.subcell_dx) = micro_shift(resp);

  const imaging::BoundingBox window = search_window(s.position, s.padding);
  imaging::BoundingBox box = s.position;
  box.cx += resp.displacement_x() * window.w / s.template_w;
  box.cy += resp.displacement_y() * window.h / s.template_h;

  if (s.dictionary) {
    const scale::CandidateSet cands = scale::generate_candidates(box, cfg.scale.scales, cfg.scale.shifts);
    const scale::Selection pick = scale::select_box(frame, cands, *s.dictionary, cfg.scale.patch_side);
    box.cx = pick.candidate.box.cx;
    box.cy = pick.candidate.box.cy;
    box.w = std::max(1.0, cfg.scale.damping * box.w + (1.0 - cfg.scale.damping) * pick.candidate.box.w);
    box.h = std::max(1.0, cfg.scale.damping * box.h + (1.0 - cfg.scale.damping) * pick.candidate.box.h);
  }
  if (!box.valid()) throw NumericError("track_step: estimated box is not finite");
  s.position = box;

  // Re-rank on the frame just tracked and update the model there.
  const imaging::FeatureMap features = window_features(s, frame, s.position);
  s.last_ranking = rank_window(s, features);
  s.selected = s.last_ranking.selected;
  refresh_projection(s, features);

  s.appearance = blend(s.appearance, features, cfg.lr_appearance);
  const ComplexPlane fresh_alpha = train(project_features(features, s.selected, s.projection.basis), s.label,
                                         cfg.kernel_sigma, cfg.lambda_reg);
  s.alpha_hat = blend(s.alpha_hat, fresh_alpha, cfg.lr_appearance);

  if (s.dictionary) {
    const Eigen::VectorXd v = scale::patch_vector(frame, s.position, cfg.scale.patch_side);
    if (v.norm() > 0) scale::dict_update(*s.dictionary, v);
  }
  ++s.frames_seen;
  return s.position;
}

}  // namespace dfst::cft
