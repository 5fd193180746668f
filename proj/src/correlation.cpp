#include "dfst/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dfst/errors.hpp"
#include "dfst/fft.hpp"

namespace dfst::cft {

namespace {

void require_same_shape(const FeatureMap& x, const FeatureMap& z) {
  if (x.height != z.height || x.width != z.width || x.num_channels() != z.num_channels()) {
    throw DataError("feature maps differ in shape");
  }
  if (x.num_channels() == 0 || x.height < 1 || x.width < 1) throw DataError("empty feature map");
}

double squared_norm(const FeatureMap& x) {
  double s = 0;
  for (const auto& ch : x.channels) s += ch.squaredNorm();
  return s;
}

RealPlane kernel_from_cross(const FeatureMap& x, const FeatureMap& z, const ComplexPlane& cross_sum, double sigma) {
  const RealPlane cross = idft2_real(cross_sum);
  const double xx = squared_norm(x);
  const double zz = squared_norm(z);
  const double scale = sigma * sigma * static_cast<double>(x.height) * x.width * x.num_channels();
  RealPlane k(x.height, x.width);
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    const double d = std::max(0.0, xx + zz - 2.0 * cross.data()[i]);
    k.data()[i] = std::exp(-d / scale);
  }
  return k;
}

ComplexPlane cross_spectrum(const RealPlane& x, const RealPlane& z) {
  return dft2(x).conjugate().cwiseProduct(dft2(z));
}

}  // namespace

RealPlane gaussian_label(int h, int w, double target_h, double target_w, double factor) {
  if (h < 1 || w < 1) throw DataError("gaussian_label: empty extent");
  const double sigma = factor * std::sqrt(target_h * target_w);
  if (!(sigma > 0)) throw DataError("gaussian_label: label width must be positive");
  const auto [cr, cc] = label_center(h, w);
  auto circ = [](int i, int c, int n) {
    const int d = std::abs(i - c);
    return static_cast<double>(std::min(d, n - d));
  };
  RealPlane y(h, w);
  for (int i = 0; i < h; ++i) {
    const double di = circ(i, cr, h);
    for (int j = 0; j < w; ++j) {
      const double dj = circ(j, cc, w);
      y(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  }
  return y;
}

RealPlane gaussian_kernel_correlation(const FeatureMap& x, const FeatureMap& z, double sigma) {
  require_same_shape(x, z);
  if (!(sigma > 0)) throw DataError("kernel sigma must be positive");
  const int nc = x.num_channels();
  std::vector<ComplexPlane> per_channel(static_cast<std::size_t>(nc));

#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < nc; ++c) {
    per_channel[static_cast<std::size_t>(c)] = cross_spectrum(x.channel(c), z.channel(c));
  }

  ComplexPlane sum = per_channel[0];
  for (int c = 1; c < nc; ++c) sum += per_channel[static_cast<std::size_t>(c)];
  return kernel_from_cross(x, z, sum, sigma);
}

namespace serial {

RealPlane gaussian_kernel_correlation(const FeatureMap& x, const FeatureMap& z, double sigma) {
  require_same_shape(x, z);
  if (!(sigma > 0)) throw DataError("kernel sigma must be positive");
  ComplexPlane sum = cross_spectrum(x.channel(0), z.channel(0));
  for (int c = 1; c < x.num_channels(); ++c) sum += cross_spectrum(x.channel(c), z.channel(c));
  return kernel_from_cross(x, z, sum, sigma);
}

}  // namespace serial

ComplexPlane train(const FeatureMap& x, const RealPlane& y, double sigma, double lambda) {
  if (y.rows() != x.height || y.cols() != x.width) throw DataError("train: label and features differ in extent");
  if (!(lambda > 0)) throw DataError("train: lambda must be positive");
  const ComplexPlane kf = dft2(gaussian_kernel_correlation(x, x, sigma));
  const ComplexPlane yf = dft2(y);
  return yf.array() / (kf.array() + lambda);
}

ResponseMap detect(const FeatureMap& model, const ComplexPlane& alpha_hat, const FeatureMap& features,
                   double sigma) {
  require_same_shape(model, features);
  if (alpha_hat.rows() != model.height || alpha_hat.cols() != model.width) {
    throw DataError("detect: filter and features differ in extent");
  }
  const ComplexPlane kf = dft2(gaussian_kernel_correlation(model, features, sigma));
  ResponseMap r;
  r.values = idft2_real(kf.cwiseProduct(alpha_hat));

  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < r.values.rows(); ++i) {
    for (int j = 0; j < r.values.cols(); ++j) {
      if (r.values(i, j) > best) {
        best = r.values(i, j);
        r.peak_row = i;
        r.peak_col = j;
      }
    }
  }
  if (!std::isfinite(best)) throw NumericError("detect: response map is not finite");

  const int h = static_cast<int>(r.values.rows());
  const int w = static_cast<int>(r.values.cols());
  const auto [cr, cc] = label_center(h, w);
  auto wrap = [](int d, int n) {
    d %= n;
    if (d >= (n + 1) / 2) d -= n;
    if (d < -(n / 2)) d += n;
    return d;
  };
  r.shift_row = wrap(r.peak_row - cr, h);
  r.shift_col = wrap(r.peak_col - cc, w);
  return r;
}

double parabolic_offset(double prev, double mid, double next) {
  const double denom = 2.0 * (prev - 2.0 * mid + next);
  if (!std::isfinite(denom)) return 0.0;
  // No interior maximum: step half a cell toward the larger neighbour.
  if (denom >= 0.0) return next > prev ? 0.5 : (prev > next ? -0.5 : 0.0);
  return std::clamp((prev - next) / denom, -0.5, 0.5);
}

std::pair<double, double> micro_shift(const ResponseMap& resp) {
  const auto& v = resp.values;
  const int i = resp.peak_row;
  const int j = resp.peak_col;
  double dy = 0;
  double dx = 0;
  if (i > 0 && i + 1 < v.rows()) dy = parabolic_offset(v(i - 1, j), v(i, j), v(i + 1, j));
  if (j > 0 && j + 1 < v.cols()) dx = parabolic_offset(v(i, j - 1), v(i, j), v(i, j + 1));
  return {dy, dx};
}

FeatureMap blend(const FeatureMap& model, const FeatureMap& fresh, double lr) {
  require_same_shape(model, fresh);
  FeatureMap out = model;
  for (int c = 0; c < out.num_channels(); ++c) {
    out.channel(c) = (1.0 - lr) * model.channel(c) + lr * fresh.channel(c);
  }
  return out;
}

ComplexPlane blend(const ComplexPlane& model, const ComplexPlane& fresh, double lr) {
  if (model.rows() != fresh.rows() || model.cols() != fresh.cols()) throw DataError("blend: shape mismatch");
  return (1.0 - lr) * model + lr * fresh;
}

}  // namespace dfst::cft
