#include "dfst/fft.hpp"

#include <opencv2/core.hpp>

#include "dfst/errors.hpp"

namespace dfst::cft {

namespace {

cv::Mat header(const RealPlane& x) {
  return cv::Mat(static_cast<int>(x.rows()), static_cast<int>(x.cols()), CV_64FC1, const_cast<double*>(x.data()));
}

cv::Mat header(const ComplexPlane& x) {
  return cv::Mat(static_cast<int>(x.rows()), static_cast<int>(x.cols()), CV_64FC2,
                 const_cast<std::complex<double>*>(x.data()));
}

void run_dft(const cv::Mat& in, ComplexPlane& out, int flags) {
  if (in.rows < 1 || in.cols < 1) throw DataError("dft2: empty input");
  cv::Mat dst = header(out);
  const void* before = dst.data;
  cv::dft(in, dst, flags);
  if (dst.data != before) throw NumericError("dft2: output buffer was reallocated");
}

}  // namespace

ComplexPlane dft2(const RealPlane& x) {
  ComplexPlane out(x.rows(), x.cols());
  run_dft(header(x), out, cv::DFT_COMPLEX_OUTPUT);
  return out;
}

ComplexPlane dft2(const ComplexPlane& x) {
  ComplexPlane out(x.rows(), x.cols());
  run_dft(header(x), out, 0);
  return out;
}

ComplexPlane idft2(const ComplexPlane& spectrum) {
  ComplexPlane out(spectrum.rows(), spectrum.cols());
  run_dft(header(spectrum), out, cv::DFT_INVERSE | cv::DFT_SCALE);
  return out;
}

RealPlane idft2_real(const ComplexPlane& spectrum) { return idft2(spectrum).real(); }

}  // namespace dfst::cft
