#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dfst/imaging.hpp"

/// Bounding-box adaptation by online dictionary learning.
///
/// Target patches are coded over a learned dictionary with an l1 penalty;
/// among boxes around the current estimate (several positions and scales)
/// the one whose patch is reconstructed best wins. The dictionary follows the
/// online scheme of accumulating A = sum a a^T and B = sum x a^T and refining
/// atoms by block coordinate descent on the resulting surrogate.
namespace dfst::scale {

struct Dictionary {
  Eigen::MatrixXd atoms;      // m x K, unit-norm columns
  Eigen::MatrixXd gram;       // K x K, atoms^T atoms
  Eigen::MatrixXd acc_codes;  // K x K, sum of a a^T
  Eigen::MatrixXd acc_data;   // m x K, sum of x a^T
  double acc_sq_norm = 0;     // sum of |x|^2
  double acc_l1 = 0;          // sum of |a|_1
  long seen = 0;
  double sparsity = 0.05;
  int max_iters = 200;

  int dim() const { return static_cast<int>(atoms.rows()); }
  int size() const { return static_cast<int>(atoms.cols()); }
};

/// Grayscale crop resampled to side x side, flattened row-major, mean removed
/// and scaled to unit norm. A constant patch gives the zero vector.
Eigen::VectorXd patch_vector(const imaging::Image& frame, const imaging::BoundingBox& box, int side);

/// Lasso by cyclic coordinate descent with soft thresholding; stops when the
/// largest coordinate change drops below 1e-6 or after 1000 sweeps.
Eigen::VectorXd sparse_code(const Eigen::VectorXd& x, const Dictionary& dict);

/// |x - D a|^2 with a = sparse_code(x, D).
double reconstruction_error(const Eigen::VectorXd& x, const Dictionary& dict);

/// Seed patches first, then seeded pseudo-random unit columns up to K.
Dictionary init_dictionary(std::span<const Eigen::VectorXd> seeds, int atoms, double sparsity, int max_iters,
                           std::uint64_t rng_seed);

/// Average over seen samples of 0.5 |x - D a|^2 + lambda |a|_1, with the codes
/// fixed at the values computed when each sample arrived.
double surrogate_objective(const Dictionary& dict);

/// Called with sweep = 0 after the accumulators absorb the new sample and
/// then after every column sweep.
using SweepObserver = std::function<void(const Dictionary&, int sweep)>;

/// Codes x, accumulates, then refines the atoms.
void dict_update(Dictionary& dict, const Eigen::VectorXd& x, const SweepObserver& observer = {});

/// As dict_update with a caller-supplied code.
void dict_update_with_code(Dictionary& dict, const Eigen::VectorXd& x, const Eigen::VectorXd& code,
                           const SweepObserver& observer = {});

struct Candidate {
  imaging::BoundingBox box;
  double scale = 1.0;
  double dx = 0;
  double dy = 0;
};

struct CandidateSet {
  std::vector<Candidate> items;
};

/// Cartesian product scale x dx x dy; scaling keeps the center, then the box is shifted.
CandidateSet generate_candidates(const imaging::BoundingBox& box, std::span<const double> scales,
                                 std::span<const double> shifts);

struct Selection {
  Candidate candidate;
  double error = 0;
};

/// Candidate with the smallest reconstruction error; within 1e-9 of the best
/// the scale nearest 1, then the shift nearest 0, then the earliest wins.
Selection select_box(const imaging::Image& frame, const CandidateSet& cands, const Dictionary& dict, int side);

namespace serial {

Selection select_box(const imaging::Image& frame, const CandidateSet& cands, const Dictionary& dict, int side);

}  // namespace serial

}  // namespace dfst::scale
