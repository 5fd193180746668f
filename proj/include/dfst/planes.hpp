#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dfst {

/// Row-major 2-D grids. Row-major keeps the memory layout compatible with
/// cv::Mat headers used by the DFT wrapper.
using RealPlane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexPlane =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace dfst
