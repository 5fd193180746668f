#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dfst/correlation.hpp"
#include "dfst/featselect.hpp"
#include "dfst/imaging.hpp"
#include "dfst/projection.hpp"
#include "dfst/scale.hpp"

namespace dfst::cft {

struct ScaleConfig {
  int atoms = 250;
  int max_iters = 200;
  double sparsity = 0.05;
  int patch_side = 16;
  std::vector<double> scales{0.95, 1.0, 1.05};
  std::vector<double> shifts{-2.0, 0.0, 2.0};
  /// Weight of the previous extent when accepting a new one.
  double damping = 0.6;
  std::uint64_t rng_seed = 1;
};

struct TrackerConfig {
  double lr_appearance = 0.005;
  double lr_dim = 0.1;
  int num_selected = 8;
  int compressed_dim = 4;
  double kernel_sigma = 0.2;
  double label_sigma_factor = 0.1;
  double lambda_reg = 1e-2;
  /// Unset: estimated from the frame / box area ratio at init.
  std::optional<double> padding;
  /// Unset: 0.9 / spectral radius of the feature graph.
  std::optional<double> inffs_decay;
  bool microshift = true;
  bool scale_adapt = true;
  int max_template_cells = 96;
  ScaleConfig scale;

  /// Throws UsageError naming the first offending field.
  void validate() const;
};

/// One tracked sequence. Owned by a single run; copyable, never shared mutably.
struct TrackerState {
  TrackerConfig config;
  std::shared_ptr<const imaging::CnTable> cn;

  imaging::BoundingBox position;
  double padding = 0;
  /// Odd feature-grid extent, fixed at init.
  int template_h = 0;
  int template_w = 0;
  RealPlane label;

  /// Learned appearance over all channels, blended with lr_appearance.
  imaging::FeatureMap appearance;
  ComplexPlane alpha_hat;
  ProjectionState projection;
  /// Channel indices (1..10) feeding the projection, in rank order.
  std::vector<int> selected;

  featselect::Ranking last_ranking;
  std::optional<scale::Dictionary> dictionary;
  int frames_seen = 0;
};

/// clamp(0.5 * sqrt(frame area / box area), 1.5, 3.0).
double estimate_padding(double frame_w, double frame_h, const imaging::BoundingBox& box);

/// Box intersected with the frame. Throws DataError when nothing is left.
imaging::BoundingBox clip_to_frame(const imaging::BoundingBox& box, int frame_w, int frame_h);

/// Search window around a target box: extent times (1 + padding).
imaging::BoundingBox search_window(const imaging::BoundingBox& box, double padding);

/// Feature map of the search window around `box`, resampled to the template grid.
imaging::FeatureMap window_features(const TrackerState& state, const imaging::Image& frame,
                                    const imaging::BoundingBox& box);

/// Target rectangle in feature-cell coordinates of the template grid.
imaging::BoundingBox target_in_cells(const TrackerState& state);

/// Ranks all channels on the window around `box` and picks num_selected
/// color-name channels (luminance is always kept separately).
featselect::Ranking rank_window(const TrackerState& state, const imaging::FeatureMap& features);
std::vector<int> selected_color_channels(const featselect::Ranking& ranking, int k);

/// Learned appearance projected with the current selection and basis.
imaging::FeatureMap compressed_appearance(const TrackerState& state);

TrackerState init(const imaging::Image& frame, const imaging::BoundingBox& box, const TrackerConfig& config,
                  std::shared_ptr<const imaging::CnTable> cn);

/// Localize with the current model, optionally adapt the box, then update
/// selection, projection and model on the new frame. Returns the final box.
imaging::BoundingBox track_step(TrackerState& state, const imaging::Image& frame);

}  // namespace dfst::cft
