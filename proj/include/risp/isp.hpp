#pragma once

#include <array>
#include <span>

#include "risp/image.hpp"

namespace risp {

// Per-device rendering parameters.  RAW codes are assumed black/white level
// corrected already, so the defaults make the level stage a no-op.
struct IspMetadata {
    std::array<double, 3> wb_gains{1.0, 1.0, 1.0};
    std::array<double, 9> ccm{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
    int black_level = 0;
    int white_level = 4095;

    // Throws on non-positive gains, a near-singular ccm, or bad levels.
    void validate() const;

    static IspMetadata identity() { return IspMetadata{}; }

    // Gentle gains and a diagonally dominant ccm sized so RAW values in
    // [0.02, 0.98] never clip on the forward path.
    static IspMetadata synthetic_default();
};

// Global color transform rgb_linear = M * raw_linear (row-major M).
struct ColorTransform {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    void validate() const;  // throws SingularMatrixError below |det| = 1e-10
};

enum class TransferDirection { decode, encode };

// Standard sRGB electro-optical transfer.  Inputs are clamped to [0, 1].
// decode: x <= 0.04045 -> x / 12.92, else ((x + 0.055) / 1.055)^2.4.
double srgb_transfer(double x, TransferDirection dir);

enum class GammaDirection { apply, invert };

// Pure power curve G(x) = x^gamma on [0, 1]; invert uses exponent 1/gamma.
double power_gamma(double x, double gamma, GammaDirection dir);

enum class ColorDirection { forward, inverse };

// In-place white balance + color matrix over interleaved linear RGB triples.
// forward: out = ccm * (wb .* in); inverse: out = (ccm^-1 * in) ./ wb.
// No clamping here; the pipelines clamp after calling.
void linear_color(std::span<double> interleaved_rgb, const IspMetadata& meta, ColorDirection dir);

// RGGB mosaic -> full-resolution linear RGB.  Sampled sites keep their own
// value; missing colors are averaged from the 2- or 4-neighbor stencil with
// mirror (reflect-101) borders, which preserves Bayer phase.  Needs dims >= 4.
RgbImage bilinear_demosaic(const Mosaic& mosaic);

// Simulated rendering: levels -> unpack -> demosaic -> color -> clamp ->
// sRGB encode -> 8-bit quantize.  Output is 2x the packed resolution.
RgbImage forward_isp(const PackedRaw& raw, const IspMetadata& meta);

// Closed-form inversion: sRGB decode -> inverse color -> clamp -> RGGB
// subsample at the native sites (no interpolation) -> 12-bit quantize.
PackedRaw inverse_isp(const RgbImage& rgb, const IspMetadata& meta);

// inverse_isp without the final quantize12; used by augmented prediction
// paths that average several reconstructions before quantizing once.
PackedRaw inverse_isp_continuous(const RgbImage& rgb, const IspMetadata& meta);

}  // namespace risp
