#pragma once

#include <span>

#include "risp/image.hpp"

namespace risp {

// Peak signal-to-noise ratio for unit-range data: 10 * log10(1 / MSE).
// Identical inputs return +infinity; aggregation layers treat that as a
// sentinel and exclude it from means.
double psnr(std::span<const double> a, std::span<const double> b);
double psnr(const PackedRaw& a, const PackedRaw& b);

// Structural similarity on one plane: 11x11 Gaussian window, sigma 1.5,
// K1 = 0.01, K2 = 0.03, dynamic range 1, mirror (reflect-101) borders.
// Requires both sides of the plane to be at least the window size.
double ssim_plane(std::span<const double> a, std::span<const double> b, int height, int width);

// Packed-RAW SSIM: per-channel result averaged over the four channels.
double ssim(const PackedRaw& a, const PackedRaw& b);

}  // namespace risp
