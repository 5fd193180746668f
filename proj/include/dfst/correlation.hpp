#pragma once

#include <utility>

#include "dfst/imaging.hpp"
#include "dfst/planes.hpp"

namespace dfst::cft {

using imaging::FeatureMap;

/// Gaussian regression target peaking (value 1) at cell (h/2, w/2), with
/// sigma = factor * sqrt(target_h * target_w) and circular distances.
RealPlane gaussian_label(int h, int w, double target_h, double target_w, double factor);

/// Row/column the label peaks at; displacements are measured from here.
inline std::pair<int, int> label_center(int h, int w) { return {h / 2, w / 2}; }

/// k(t) = exp(-max(0, |x|^2 + |z|^2 - 2 sum_c corr(x_c, z_c)(t)) / (sigma^2 H W C))
/// with corr computed in the Fourier domain. Channels are transformed in parallel
/// and summed in channel order.
RealPlane gaussian_kernel_correlation(const FeatureMap& x, const FeatureMap& z, double sigma);

/// Ridge solution in the Fourier domain: dft2(y) / (dft2(k_xx) + lambda).
ComplexPlane train(const FeatureMap& x, const RealPlane& y, double sigma, double lambda);

struct ResponseMap {
  RealPlane values;
  int peak_row = 0;
  int peak_col = 0;
  /// Peak position relative to the label center, wrapped to [-H/2, H/2) x [-W/2, W/2).
  int shift_row = 0;
  int shift_col = 0;
  /// Filled by micro_shift.
  double subcell_dy = 0;
  double subcell_dx = 0;

  double displacement_y() const { return shift_row + subcell_dy; }
  double displacement_x() const { return shift_col + subcell_dx; }
};

/// real(idft2(dft2(k_xz) * alpha_hat)) and its integer peak (first maximum in
/// row-major order).
ResponseMap detect(const FeatureMap& model, const ComplexPlane& alpha_hat, const FeatureMap& features,
                   double sigma);

/// Separable quadratic fit through the peak and its axis neighbours. Returns
/// (dy, dx), each clamped to [-0.5, 0.5]; 0 on a border or for flat curvature.
std::pair<double, double> micro_shift(const ResponseMap& resp);

/// Vertex offset of the parabola through (-1, prev), (0, mid), (1, next).
double parabolic_offset(double prev, double mid, double next);

FeatureMap blend(const FeatureMap& model, const FeatureMap& fresh, double lr);
ComplexPlane blend(const ComplexPlane& model, const ComplexPlane& fresh, double lr);

namespace serial {

/// Single-threaded reference for the channel loop above.
RealPlane gaussian_kernel_correlation(const FeatureMap& x, const FeatureMap& z, double sigma);

}  // namespace serial

}  // namespace dfst::cft
