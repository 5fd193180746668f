#include "dfst/featselect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "dfst/errors.hpp"

namespace dfst::featselect {

namespace {

struct ColumnStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;  // unbiased
};

ColumnStats column_stats(const Eigen::MatrixXd& x) {
  ColumnStats s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean().transpose();
  s.var = ((x.rowwise() - s.mean.transpose()).array().square().colwise().sum() / (n - 1.0)).transpose();
  return s;
}

void require_two_per_class(const ClassSamples& samples) {
  if (samples.positives.rows() < 2 || samples.negatives.rows() < 2) {
    throw DataError("each class needs at least 2 samples (got " + std::to_string(samples.positives.rows()) + " and " +
                    std::to_string(samples.negatives.rows()) + ")");
  }
  if (samples.positives.cols() != samples.negatives.cols() || samples.positives.cols() < 1) {
    throw DataError("class sample matrices disagree on feature count");
  }
}

}  // namespace

ClassSamples label_samples(const imaging::FeatureMap& map, const imaging::BoundingBox& target) {
  const imaging::PixelRect r = imaging::pixel_rect(target);
  const int x0 = std::max(r.x0, 0);
  const int y0 = std::max(r.y0, 0);
  const int x1 = std::min(r.x0 + r.width, map.width);
  const int y1 = std::min(r.y0 + r.height, map.height);
  const int npos = std::max(0, x1 - x0) * std::max(0, y1 - y0);
  const int nneg = map.width * map.height - npos;
  if (npos == 0) throw DataError("label_samples: target does not cover any cell");
  if (nneg == 0) throw DataError("label_samples: no background cells around the target");

  const int f = map.num_channels();
  ClassSamples s;
  s.positives.resize(npos, f);
  s.negatives.resize(nneg, f);
  int ip = 0;
  int in = 0;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const bool inside = x >= x0 && x < x1 && y >= y0 && y < y1;
      Eigen::MatrixXd& dst = inside ? s.positives : s.negatives;
      const int row = inside ? ip++ : in++;
      for (int c = 0; c < f; ++c) dst(row, c) = map.channel(c)(y, x);
    }
  }
  return s;
}

Eigen::VectorXd fisher_scores(const ClassSamples& samples) {
  require_two_per_class(samples);
  const ColumnStats a = column_stats(samples.positives);
  const ColumnStats b = column_stats(samples.negatives);
  Eigen::VectorXd p(samples.num_features());
  for (int i = 0; i < p.size(); ++i) {
    const double diff = a.mean(i) - b.mean(i);
    const double denom = a.var(i) + b.var(i);
    if (denom > 0) {
      p(i) = diff * diff / denom;
    } else {
      p(i) = diff == 0.0 ? 0.0 : kFisherSeparableSentinel;
    }
  }
  return p;
}

Eigen::VectorXd ttest_scores(const ClassSamples& samples) {
  require_two_per_class(samples);
  const ColumnStats a = column_stats(samples.positives);
  const ColumnStats b = column_stats(samples.negatives);
  const double n1 = static_cast<double>(samples.positives.rows());
  const double n2 = static_cast<double>(samples.negatives.rows());
  const boost::math::students_t dist(n1 + n2 - 2.0);

  Eigen::VectorXd p(samples.num_features());
  for (int i = 0; i < p.size(); ++i) {
    const double diff = a.mean(i) - b.mean(i);
    const double se = std::sqrt(a.var(i) / n1 + b.var(i) / n2);
    if (se > 0) {
      const double t = std::abs(diff / se);
      p(i) = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
    } else {
      p(i) = diff == 0.0 ? 1.0 : 0.0;
    }
  }
  return p;
}

Eigen::VectorXd pearson_scores(const ClassSamples& samples) {
  const Eigen::Index n1 = samples.positives.rows();
  const Eigen::Index n2 = samples.negatives.rows();
  const int f = samples.num_features();
  const double n = static_cast<double>(n1 + n2);

  Eigen::VectorXd labels(n1 + n2);
  labels.head(n1).setOnes();
  labels.tail(n2).setConstant(-1.0);
  const Eigen::VectorXd lc = labels.array() - labels.mean();
  const double lss = lc.squaredNorm();

  Eigen::VectorXd c = Eigen::VectorXd::Zero(f);
  for (int i = 0; i < f; ++i) {
    Eigen::VectorXd x(n1 + n2);
    x.head(n1) = samples.positives.col(i);
    x.tail(n2) = samples.negatives.col(i);
    const double mean = x.sum() / n;
    const Eigen::VectorXd xc = x.array() - mean;
    const double xss = xc.squaredNorm();
    if (xss > 0 && lss > 0) c(i) = std::clamp(xc.dot(lc) / std::sqrt(xss * lss), -1.0, 1.0);
  }
  return c;
}

Eigen::VectorXd fuse_scores(const MetricScores& m) {
  const Eigen::Index f = m.fisher.size();
  if (m.ttest_p.size() != f || m.pearson.size() != f) throw DataError("fuse_scores: metric vectors differ in length");
  const double top = f > 0 ? m.fisher.maxCoeff() : 0.0;
  Eigen::VectorXd s(f);
  for (Eigen::Index i = 0; i < f; ++i) {
    const double fisher_term = top > 0 ? m.fisher(i) / top : 0.0;
    const double ttest_term = 1.0 - m.ttest_p(i);
    const double pearson_term = std::abs(m.pearson(i));
    s(i) = std::clamp((fisher_term + ttest_term + pearson_term) / 3.0, 0.0, 1.0);
  }
  return s;
}

MetricScores compute_metrics(const ClassSamples& samples) {
  MetricScores m;
  m.fisher = fisher_scores(samples);
  m.ttest_p = ttest_scores(samples);
  m.pearson = pearson_scores(samples);
  m.fused = fuse_scores(m);
  return m;
}

Eigen::MatrixXd build_adjacency(const Eigen::VectorXd& s) {
  if ((s.array() < 0).any()) throw DataError("build_adjacency: relevance vector has a negative entry");
  return s * s.transpose();
}

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  if (a == a.transpose()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd inffs_path_sums(const Eigen::MatrixXd& a, double decay) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DataError("inffs: adjacency must be square");
  if (!a.allFinite()) throw NumericError("inffs: non-finite adjacency");
  const double rho = spectral_radius(a);
  if (decay * rho >= 1.0) {
    throw NumericError("inffs: decay " + std::to_string(decay) + " violates r * rho(A) < 1 (rho = " +
                       std::to_string(rho) + "); I - rA is singular or the path series diverges");
  }
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(ident - decay * a);
  if (!lu.isInvertible()) throw NumericError("inffs: I - rA is singular");
  Eigen::MatrixXd s = lu.solve(ident) - ident;
  // Round-off can leave entries of order -1e-17 where the exact value is 0.
  return s.cwiseMax(0.0);
}

Eigen::VectorXd inffs_energies(const Eigen::MatrixXd& a, std::optional<double> decay) {
  const double rho = spectral_radius(a);
  if (rho == 0.0) return Eigen::VectorXd::Zero(a.rows());
  const double r = decay.value_or(0.9 / rho);
  return inffs_path_sums(a, r).rowwise().sum();
}

std::vector<int> select_top_k(const Eigen::VectorXd& energies, int k) {
  const int f = static_cast<int>(energies.size());
  if (k < 1 || k > f) {
    throw UsageError("select_top_k: k = " + std::to_string(k) + " outside [1, " + std::to_string(f) + "]");
  }
  std::vector<int> idx(static_cast<std::size_t>(f));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return energies(a) > energies(b); });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

Ranking rank_features(const ClassSamples& samples, int k, std::optional<double> decay) {
  if (k < 1 || k > samples.num_features()) {
    throw UsageError("rank_features: k = " + std::to_string(k) + " outside [1, " +
                     std::to_string(samples.num_features()) + "]");
  }
  Ranking r;
  r.metrics = compute_metrics(samples);
  r.adjacency = build_adjacency(r.metrics.fused);
  r.energies = inffs_energies(r.adjacency, decay);
  r.order = select_top_k(r.energies, static_cast<int>(r.energies.size()));
  r.selected.assign(r.order.begin(), r.order.begin() + k);
  return r;
}

}  // namespace dfst::featselect
