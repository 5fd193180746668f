#include "dfst/projection.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dfst/errors.hpp"

namespace dfst::cft {

ProjectionState make_projection(int full_dim) {
  ProjectionState p;
  p.history = Eigen::MatrixXd::Zero(full_dim, full_dim);
  return p;
}

Eigen::MatrixXd compute_covariance(const imaging::FeatureMap& features, std::span<const int> channels) {
  const Eigen::Index cells = static_cast<Eigen::Index>(features.height) * features.width;
  if (cells < 2) throw DataError("compute_covariance: need at least 2 cells");
  const auto d = static_cast<Eigen::Index>(channels.size());
  Eigen::MatrixXd data(cells, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const int c = channels[static_cast<std::size_t>(k)];
    if (c < 0 || c >= features.num_channels()) throw DataError("compute_covariance: channel out of range");
    data.col(k) = features.channel(c).reshaped<Eigen::RowMajor>();
  }
  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;
  Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(cells);
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd compute_covariance(const imaging::FeatureMap& features) {
  std::vector<int> all(static_cast<std::size_t>(features.num_channels()));
  std::iota(all.begin(), all.end(), 0);
  return compute_covariance(features, all);
}

ProjectionState update_projection(const ProjectionState& proj, const Eigen::MatrixXd& cov,
                                  std::span<const int> features, double lr_dim, int d2) {
  const auto d1 = static_cast<Eigen::Index>(features.size());
  const Eigen::Index n = proj.history.rows();
  if (cov.rows() != d1 || cov.cols() != d1) throw DataError("update_projection: covariance is not D1 x D1");
  if (d2 < 1 || d2 > d1) throw UsageError("update_projection: D2 = " + std::to_string(d2) + " outside [1, D1]");
  if (!cov.allFinite()) throw NumericError("update_projection: non-finite covariance");
  for (int f : features) {
    if (f < 0 || f >= n) throw DataError("update_projection: feature index out of range");
  }

  Eigen::MatrixXd r = cov;
  for (Eigen::Index a = 0; a < d1; ++a) {
    for (Eigen::Index b = 0; b < d1; ++b) r(a, b) += proj.history(features[a], features[b]);
  }
  r = 0.5 * (r + r.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  if (es.info() != Eigen::Success) throw NumericError("update_projection: eigendecomposition failed");

  ProjectionState out;
  out.features.assign(features.begin(), features.end());
  out.basis.resize(d1, d2);
  out.weights.resize(d2);
  // Eigenvalues come back ascending.
  for (int j = 0; j < d2; ++j) {
    const Eigen::Index src = d1 - 1 - j;
    out.basis.col(j) = es.eigenvectors().col(src);
    out.weights(j) = std::max(0.0, es.eigenvalues()(src));
  }

  if (proj.initialized()) {
    // Eigenvectors are defined up to sign; keep the orientation of the previous basis.
    const int shared_cols = std::min(d2, proj.output_dim());
    for (int j = 0; j < shared_cols; ++j) {
      double dot = 0;
      for (Eigen::Index a = 0; a < d1; ++a) {
        for (Eigen::Index b = 0; b < proj.input_dim(); ++b) {
          if (proj.features[static_cast<std::size_t>(b)] == features[a]) dot += out.basis(a, j) * proj.basis(b, j);
        }
      }
      if (dot < 0) out.basis.col(j) = -out.basis.col(j);
    }
  }

  const Eigen::MatrixXd local = out.basis * out.weights.asDiagonal() * out.basis.transpose();
  out.history = (1.0 - lr_dim) * proj.history;
  for (Eigen::Index a = 0; a < d1; ++a) {
    for (Eigen::Index b = 0; b < d1; ++b) out.history(features[a], features[b]) += lr_dim * local(a, b);
  }
  out.history = 0.5 * (out.history + out.history.transpose());
  return out;
}

ProjectionState update_projection(const ProjectionState& proj, const Eigen::MatrixXd& cov, double lr_dim, int d2) {
  std::vector<int> all(static_cast<std::size_t>(proj.history.rows()));
  std::iota(all.begin(), all.end(), 0);
  return update_projection(proj, cov, all, lr_dim, d2);
}

imaging::FeatureMap project_features(const imaging::FeatureMap& features, std::span<const int> selected,
                                     const Eigen::MatrixXd& basis) {
  if (basis.rows() != static_cast<Eigen::Index>(selected.size())) {
    throw DataError("project_features: basis rows do not match the selected channels");
  }
  for (int c : selected) {
    if (c <= 0 || c >= features.num_channels()) {
      throw DataError("project_features: selected channel " + std::to_string(c) + " out of range");
    }
  }
  const int d2 = static_cast<int>(basis.cols());
  imaging::FeatureMap out(features.height, features.width, 1 + d2);
  out.channel(0) = features.channel(0);
  for (int j = 0; j < d2; ++j) {
    RealPlane& dst = out.channel(1 + j);
    for (std::size_t s = 0; s < selected.size(); ++s) {
      const double w = basis(static_cast<Eigen::Index>(s), j);
      if (w != 0.0) dst += w * features.channel(selected[s]);
    }
  }
  return out;
}

}  // namespace dfst::cft
