#pragma once

#include "csfall/frame.hpp"

namespace csfall {

// Mean squared pixel difference on the 0-255 scale, no clamping.
double mse(const Frame& a, const Frame& b);

// 10*log10(255^2 / MSE); identical frames return the 99.0 dB sentinel
// (the ratio is undefined at MSE == 0).
double psnr(const Frame& a, const Frame& b);

}  // namespace csfall
