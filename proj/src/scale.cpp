#include "dfst/scale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dfst/errors.hpp"

namespace dfst::scale {

namespace {

constexpr double kCodeTolerance = 1e-6;
constexpr int kMaxCodeSweeps = 1000;
constexpr double kAtomTolerance = 1e-7;
constexpr double kMinCodeMass = 1e-10;
constexpr double kTieTolerance = 1e-9;

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

void refresh_gram(Dictionary& dict) { dict.gram = dict.atoms.transpose() * dict.atoms; }

double candidate_error(const imaging::Image& frame, const Candidate& c, const Dictionary& dict, int side) {
  return reconstruction_error(patch_vector(frame, c.box, side), dict);
}

Selection pick(const CandidateSet& cands, const std::vector<double>& errors) {
  const double best = *std::min_element(errors.begin(), errors.end());
  std::size_t chosen = cands.items.size();
  for (std::size_t i = 0; i < cands.items.size(); ++i) {
    if (errors[i] > best + kTieTolerance) continue;
    if (chosen == cands.items.size()) {
      chosen = i;
      continue;
    }
    const Candidate& a = cands.items[i];
    const Candidate& b = cands.items[chosen];
    const double sa = std::abs(a.scale - 1.0);
    const double sb = std::abs(b.scale - 1.0);
    if (sa < sb || (sa == sb && std::hypot(a.dx, a.dy) < std::hypot(b.dx, b.dy))) chosen = i;
  }
  return {cands.items[chosen], errors[chosen]};
}

void require_candidates(const CandidateSet& cands) {
  if (cands.items.empty()) throw DataError("select_box: empty candidate set");
}

}  // namespace

Eigen::VectorXd patch_vector(const imaging::Image& frame, const imaging::BoundingBox& box, int side) {
  if (side < 1) throw UsageError("patch_vector: side must be >= 1");
  if (!box.valid()) throw DataError("patch_vector: degenerate box");
  const imaging::Image patch = imaging::sample_patch(frame, box, side, side);
  Eigen::VectorXd v(static_cast<Eigen::Index>(side) * side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) v(y * side + x) = patch.gray(x, y);
  }
  v.array() -= v.mean();
  const double n = v.norm();
  // Pure rounding residue of a flat patch stays well below this.
  if (n < 1e-9) return Eigen::VectorXd::Zero(v.size());
  return v / n;
}

Eigen::VectorXd sparse_code(const Eigen::VectorXd& x, const Dictionary& dict) {
  if (x.size() != dict.dim()) throw DataError("sparse_code: vector length differs from atom length");
  if (x.norm() > 1.0 + 1e-9) throw DataError("sparse_code: input norm exceeds 1");
  const int k = dict.size();
  const double lambda = dict.sparsity;

  Eigen::VectorXd code = Eigen::VectorXd::Zero(k);
  // residual correlation: D^T x - G code
  Eigen::VectorXd corr = dict.atoms.transpose() * x;
  for (int sweep = 0; sweep < kMaxCodeSweeps; ++sweep) {
    double max_change = 0;
    for (int j = 0; j < k; ++j) {
      const double gjj = dict.gram(j, j);
      if (gjj <= 0) continue;
      const double old = code(j);
      const double fresh = soft_threshold(corr(j) + gjj * old, lambda) / gjj;
      const double delta = fresh - old;
      if (delta != 0.0) {
        corr.noalias() -= delta * dict.gram.col(j);
        code(j) = fresh;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < kCodeTolerance) break;
  }
  return code;
}

double reconstruction_error(const Eigen::VectorXd& x, const Dictionary& dict) {
  const Eigen::VectorXd code = sparse_code(x, dict);
  return (x - dict.atoms * code).squaredNorm();
}

Dictionary init_dictionary(std::span<const Eigen::VectorXd> seeds, int atoms, double sparsity, int max_iters,
                           std::uint64_t rng_seed) {
  if (atoms < 1) throw UsageError("init_dictionary: need at least one atom");
  if (seeds.empty()) throw DataError("init_dictionary: no seed patches");
  const Eigen::Index m = seeds.front().size();
  if (m < 1) throw DataError("init_dictionary: empty seed patch");

  Dictionary d;
  d.sparsity = sparsity;
  d.max_iters = max_iters;
  d.atoms.resize(m, atoms);
  int filled = 0;
  for (const auto& s : seeds) {
    if (s.size() != m) throw DataError("init_dictionary: seed patches differ in length");
    const double n = s.norm();
    if (n == 0.0 || filled == atoms) continue;
    d.atoms.col(filled++) = s / n;
  }
  if (filled == 0) throw DataError("init_dictionary: all seed patches are zero");

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (filled < atoms) {
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = normal(rng);
    const double n = v.norm();
    if (n == 0.0) continue;
    d.atoms.col(filled++) = v / n;
  }

  d.acc_codes = Eigen::MatrixXd::Zero(atoms, atoms);
  d.acc_data = Eigen::MatrixXd::Zero(m, atoms);
  refresh_gram(d);
  return d;
}

double surrogate_objective(const Dictionary& dict) {
  if (dict.seen == 0) return 0.0;
  const Eigen::MatrixXd gram = dict.atoms.transpose() * dict.atoms;
  const double quad = gram.cwiseProduct(dict.acc_codes).sum();
  const double lin = dict.atoms.cwiseProduct(dict.acc_data).sum();
  return (0.5 * dict.acc_sq_norm - lin + 0.5 * quad + dict.sparsity * dict.acc_l1) / static_cast<double>(dict.seen);
}

void dict_update_with_code(Dictionary& dict, const Eigen::VectorXd& x, const Eigen::VectorXd& code,
                           const SweepObserver& observer) {
  if (x.size() != dict.dim() || code.size() != dict.size()) throw DataError("dict_update: dimension mismatch");
  dict.acc_codes.noalias() += code * code.transpose();
  dict.acc_data.noalias() += x * code.transpose();
  dict.acc_sq_norm += x.squaredNorm();
  dict.acc_l1 += code.lpNorm<1>();
  ++dict.seen;
  if (observer) observer(dict, 0);

  const int k = dict.size();
  std::vector<std::vector<int>> support(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    if (dict.acc_codes(j, j) <= kMinCodeMass) continue;
    for (int i = 0; i < k; ++i) {
      if (dict.acc_codes(i, j) != 0.0) support[static_cast<std::size_t>(j)].push_back(i);
    }
  }

  Eigen::VectorXd u(dict.dim());
  for (int sweep = 1; sweep <= dict.max_iters; ++sweep) {
    double max_change = 0;
    for (int j = 0; j < k; ++j) {
      const double ajj = dict.acc_codes(j, j);
      if (ajj <= kMinCodeMass) continue;
      u = dict.acc_data.col(j);
      for (int i : support[static_cast<std::size_t>(j)]) u.noalias() -= dict.acc_codes(i, j) * dict.atoms.col(i);
      u = u / ajj + dict.atoms.col(j);
      const double n = u.norm();
      if (!(n > 0)) continue;
      u /= n;
      max_change = std::max(max_change, (u - dict.atoms.col(j)).cwiseAbs().maxCoeff());
      dict.atoms.col(j) = u;
    }
    if (observer) observer(dict, sweep);
    if (max_change < kAtomTolerance) break;
  }
  refresh_gram(dict);
}

void dict_update(Dictionary& dict, const Eigen::VectorXd& x, const SweepObserver& observer) {
  dict_update_with_code(dict, x, sparse_code(x, dict), observer);
}

CandidateSet generate_candidates(const imaging::BoundingBox& box, std::span<const double> scales,
                                 std::span<const double> shifts) {
  if (scales.empty() || shifts.empty()) throw UsageError("generate_candidates: empty scale or shift list");
  CandidateSet set;
  set.items.reserve(scales.size() * shifts.size() * shifts.size());
  for (double s : scales) {
    if (!(s > 0)) throw UsageError("generate_candidates: scales must be positive");
    for (double dy : shifts) {
      for (double dx : shifts) {
        Candidate c;
        c.scale = s;
        c.dx = dx;
        c.dy = dy;
        c.box = {box.cx + dx, box.cy + dy, box.w * s, box.h * s};
        set.items.push_back(c);
      }
    }
  }
  return set;
}

Selection select_box(const imaging::Image& frame, const CandidateSet& cands, const Dictionary& dict, int side) {
  require_candidates(cands);
  const int n = static_cast<int>(cands.items.size());
  std::vector<double> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    errors[static_cast<std::size_t>(i)] = candidate_error(frame, cands.items[static_cast<std::size_t>(i)], dict, side);
  }
  return pick(cands, errors);
}

namespace serial {

Selection select_box(const imaging::Image& frame, const CandidateSet& cands, const Dictionary& dict, int side) {
  require_candidates(cands);
  std::vector<double> errors;
  errors.reserve(cands.items.size());
  for (const auto& c : cands.items) errors.push_back(candidate_error(frame, c, dict, side));
  return pick(cands, errors);
}

}  // namespace serial

}  // namespace dfst::scale
