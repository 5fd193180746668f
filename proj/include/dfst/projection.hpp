#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dfst/imaging.hpp"

namespace dfst::cft {

/// Adaptive low-dimensional projection of the color channels.
///
/// Each update forms R = C + H, where C is the covariance of the current
/// appearance over the active features and H is the accumulated
/// B diag(lambda) B^T of earlier bases, and keeps the eigenvectors of R with
/// the largest eigenvalues. H is an exponential moving average with rate
/// lr_dim so that it stays bounded.
///
/// H lives in the full feature space (all color names) so that it remains
/// meaningful when the active subset changes from frame to frame; the basis
/// rows follow `features`.
struct ProjectionState {
  Eigen::MatrixXd basis;    // |features| x D2, orthonormal columns
  Eigen::VectorXd weights;  // D2, eigenvalues of the kept directions
  Eigen::MatrixXd history;  // N x N, symmetric PSD
  std::vector<int> features;

  int input_dim() const { return static_cast<int>(basis.rows()); }
  int output_dim() const { return static_cast<int>(basis.cols()); }
  bool initialized() const { return basis.size() > 0; }
};

/// Fresh state over an N-dimensional feature space (zero history).
ProjectionState make_projection(int full_dim);

/// Covariance (normalized by H*W) of the listed channels across all cells.
Eigen::MatrixXd compute_covariance(const imaging::FeatureMap& features, std::span<const int> channels);
Eigen::MatrixXd compute_covariance(const imaging::FeatureMap& features);

/// One update with covariance `cov` over the feature subset `features`
/// (indices into the history space). Basis columns are sign-aligned with the
/// previous basis where the two share support.
ProjectionState update_projection(const ProjectionState& proj, const Eigen::MatrixXd& cov,
                                  std::span<const int> features, double lr_dim, int d2);

/// Same, with every history dimension active in order.
ProjectionState update_projection(const ProjectionState& proj, const Eigen::MatrixXd& cov, double lr_dim, int d2);

/// Channel 0 is copied; channels 1..D2 are basis^T applied to the channels
/// listed in `selected` (one per basis row).
imaging::FeatureMap project_features(const imaging::FeatureMap& features, std::span<const int> selected,
                                     const Eigen::MatrixXd& basis);

}  // namespace dfst::cft
