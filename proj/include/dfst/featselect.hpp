#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dfst/imaging.hpp"

/// Supervised per-frame feature ranking.
///
/// Target cells are positives, the surrounding window cells negatives. Each
/// feature gets three separation scores (Fisher ratio, two-sided t-test
/// p-value, Pearson correlation with the +/-1 label) which are fused into a
/// single relevance vector s. The rank-one graph A = s s^T is then scored by
/// summing path weights of every length, S = sum_l r^l A^l = (I - rA)^-1 - I,
/// and features are ranked by the row sums of S.
namespace dfst::featselect {

/// Rows are samples, columns are features.
struct ClassSamples {
  Eigen::MatrixXd positives;
  Eigen::MatrixXd negatives;

  int num_features() const { return static_cast<int>(positives.cols()); }
};

struct MetricScores {
  Eigen::VectorXd fisher;
  Eigen::VectorXd ttest_p;
  Eigen::VectorXd pearson;
  Eigen::VectorXd fused;
};

struct Ranking {
  MetricScores metrics;
  Eigen::MatrixXd adjacency;
  Eigen::VectorXd energies;
  std::vector<int> order;
  std::vector<int> selected;
};

/// Fisher score for zero total variance with distinct means.
inline constexpr double kFisherSeparableSentinel = 1e12;

/// Cells whose centers fall inside `target` (feature-cell coordinates) are
/// positives; every other cell of the map is a negative.
ClassSamples label_samples(const imaging::FeatureMap& map, const imaging::BoundingBox& target);

Eigen::VectorXd fisher_scores(const ClassSamples& samples);
Eigen::VectorXd ttest_scores(const ClassSamples& samples);
Eigen::VectorXd pearson_scores(const ClassSamples& samples);

/// Mean of max-normalized Fisher, 1 - p and |pearson|; every entry in [0, 1].
Eigen::VectorXd fuse_scores(const MetricScores& m);

MetricScores compute_metrics(const ClassSamples& samples);

Eigen::MatrixXd build_adjacency(const Eigen::VectorXd& s);

double spectral_radius(const Eigen::MatrixXd& a);

/// Row sums of (I - rA)^-1 - I. With no decay given, r = 0.9 / rho(A).
/// Throws NumericError when r * rho(A) >= 1.
Eigen::VectorXd inffs_energies(const Eigen::MatrixXd& a, std::optional<double> decay = std::nullopt);

/// The path-sum matrix itself; energies are its row sums.
Eigen::MatrixXd inffs_path_sums(const Eigen::MatrixXd& a, double decay);

/// Indices of the k largest energies, descending, ties to the lower index.
std::vector<int> select_top_k(const Eigen::VectorXd& energies, int k);

/// Full pipeline from labelled samples to ranking; `selected` holds the first k of `order`.
Ranking rank_features(const ClassSamples& samples, int k, std::optional<double> decay = std::nullopt);

}  // namespace dfst::featselect
