#pragma once

#include "dfst/planes.hpp"

namespace dfst::cft {

/// Unnormalized forward 2-D DFT; idft2 carries the 1/(H*W) factor so that
/// idft2(dft2(x)) == x.
ComplexPlane dft2(const RealPlane& x);
ComplexPlane dft2(const ComplexPlane& x);
ComplexPlane idft2(const ComplexPlane& spectrum);

/// Real part of idft2.
RealPlane idft2_real(const ComplexPlane& spectrum);

}  // namespace dfst::cft
