#include "risp/isp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "risp/bayer.hpp"
#include "risp/error.hpp"

namespace risp {

namespace {

constexpr double kDetThreshold = 1e-10;

double det3(const std::array<double, 9>& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

std::array<double, 9> invert3(const std::array<double, 9>& m, const char* what) {
    if (std::fabs(det3(m)) <= kDetThreshold) {
        throw SingularMatrixError(std::string(what) + ": |det| <= 1e-10, matrix not invertible");
    }
    Eigen::Matrix3d e;
    e << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
    const Eigen::Matrix3d inv = e.inverse();
    return {inv(0, 0), inv(0, 1), inv(0, 2),
            inv(1, 0), inv(1, 1), inv(1, 2),
            inv(2, 0), inv(2, 1), inv(2, 2)};
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

inline double quantize8(double x) { return std::round(clamp01(x) * 255.0) / 255.0; }

}  // namespace

void IspMetadata::validate() const {
    for (double g : wb_gains) {
        if (!std::isfinite(g) || g <= 0.0) throw DomainError("IspMetadata: wb gains must be positive");
    }
    for (double c : ccm) {
        if (!std::isfinite(c)) throw DomainError("IspMetadata: ccm entries must be finite");
    }
    if (std::fabs(det3(ccm)) <= kDetThreshold) {
        throw SingularMatrixError("IspMetadata: ccm is not invertible (|det| <= 1e-10)");
    }
    if (black_level < 0 || white_level > 4095 || black_level >= white_level) {
        throw DomainError("IspMetadata: levels must satisfy 0 <= black < white <= 4095");
    }
}

IspMetadata IspMetadata::synthetic_default() {
    IspMetadata meta;
    meta.wb_gains = {1.02, 1.0, 1.03};
    meta.ccm = {0.94, 0.06, -0.01,
                0.04, 0.92, 0.03,
                -0.02, 0.05, 0.93};
    return meta;
}

void ColorTransform::validate() const {
    for (double c : m) {
        if (!std::isfinite(c)) throw DomainError("ColorTransform: entries must be finite");
    }
    if (std::fabs(det3(m)) <= kDetThreshold) {
        throw SingularMatrixError("ColorTransform: matrix is not invertible (|det| <= 1e-10)");
    }
}

double srgb_transfer(double x, TransferDirection dir) {
    if (!std::isfinite(x)) throw DomainError("srgb_transfer: sample is not finite");
    const double v = clamp01(x);
    // 1.0 is a fixed point of both curves; computed naively the encode side
    // drifts one ulp low (1.055 - 0.055 != 1 in doubles).
    if (v == 1.0) return 1.0;
    if (dir == TransferDirection::decode) {
        return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
    }
    return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double power_gamma(double x, double gamma, GammaDirection dir) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError("power_gamma: input must be finite and >= 0");
    if (!std::isfinite(gamma) || gamma <= 0.0) throw DomainError("power_gamma: gamma must be positive");
    const double e = dir == GammaDirection::apply ? gamma : 1.0 / gamma;
    if (e == 1.0) return x;
    return std::pow(x, e);
}

void linear_color(std::span<double> interleaved_rgb, const IspMetadata& meta, ColorDirection dir) {
    if (interleaved_rgb.size() % 3 != 0) {
        throw DimensionError("linear_color: sample count must be a multiple of 3");
    }
    meta.validate();
    const std::array<double, 3>& g = meta.wb_gains;
    if (dir == ColorDirection::forward) {
        const std::array<double, 9>& m = meta.ccm;
        for (std::size_t p = 0; p < interleaved_rgb.size(); p += 3) {
            const double r = interleaved_rgb[p] * g[0];
            const double gg = interleaved_rgb[p + 1] * g[1];
            const double b = interleaved_rgb[p + 2] * g[2];
            interleaved_rgb[p] = m[0] * r + m[1] * gg + m[2] * b;
            interleaved_rgb[p + 1] = m[3] * r + m[4] * gg + m[5] * b;
            interleaved_rgb[p + 2] = m[6] * r + m[7] * gg + m[8] * b;
        }
    } else {
        const std::array<double, 9> inv = invert3(meta.ccm, "linear_color");
        for (std::size_t p = 0; p < interleaved_rgb.size(); p += 3) {
            const double r = interleaved_rgb[p];
            const double gg = interleaved_rgb[p + 1];
            const double b = interleaved_rgb[p + 2];
            interleaved_rgb[p] = (inv[0] * r + inv[1] * gg + inv[2] * b) / g[0];
            interleaved_rgb[p + 1] = (inv[3] * r + inv[4] * gg + inv[5] * b) / g[1];
            interleaved_rgb[p + 2] = (inv[6] * r + inv[7] * gg + inv[8] * b) / g[2];
        }
    }
}

RgbImage bilinear_demosaic(const Mosaic& mosaic) {
    const int h = mosaic.height;
    const int w = mosaic.width;
    if (h < 4 || w < 4) {
        throw DimensionError("bilinear_demosaic: dims must be >= 4, got " +
                             std::to_string(h) + "x" + std::to_string(w));
    }
    // Mirror about the border pixel; a step of 2 keeps the Bayer phase.
    auto reflect = [](int idx, int n) { return idx < 0 ? -idx : (idx >= n ? 2 * n - 2 - idx : idx); };
    auto m = [&](int i, int j) { return mosaic.at(reflect(i, h), reflect(j, w)); };

    std::vector<double> out(static_cast<std::size_t>(h) * w * 3);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const std::size_t d = (static_cast<std::size_t>(i) * w + j) * 3;
            const double v = mosaic.at(i, j);
            // Pairwise sums so constant inputs reproduce exactly.
            const double ortho = ((m(i - 1, j) + m(i + 1, j)) + (m(i, j - 1) + m(i, j + 1))) * 0.25;
            const double diag = ((m(i - 1, j - 1) + m(i - 1, j + 1)) +
                                 (m(i + 1, j - 1) + m(i + 1, j + 1))) * 0.25;
            const double horiz = (m(i, j - 1) + m(i, j + 1)) * 0.5;
            const double vert = (m(i - 1, j) + m(i + 1, j)) * 0.5;
            if (i % 2 == 0 && j % 2 == 0) {          // R site
                out[d] = v;
                out[d + 1] = ortho;
                out[d + 2] = diag;
            } else if (i % 2 == 0) {                 // G1 site: R left/right, B above/below
                out[d] = horiz;
                out[d + 1] = v;
                out[d + 2] = vert;
            } else if (j % 2 == 0) {                 // G2 site: R above/below, B left/right
                out[d] = vert;
                out[d + 1] = v;
                out[d + 2] = horiz;
            } else {                                 // B site
                out[d] = diag;
                out[d + 1] = ortho;
                out[d + 2] = v;
            }
        }
    }
    return RgbImage(h, w, std::move(out));
}

RgbImage forward_isp(const PackedRaw& raw, const IspMetadata& meta) {
    meta.validate();
    PackedRaw leveled = raw;
    if (meta.black_level != 0 || meta.white_level != 4095) {
        const double black = meta.black_level;
        const double range = meta.white_level - meta.black_level;
        for (double& v : leveled.samples) v = clamp01((v * 4095.0 - black) / range);
    }
    const Mosaic mosaic = unpack_rggb(leveled);
    RgbImage lin = bilinear_demosaic(mosaic);
    linear_color(lin.samples, meta, ColorDirection::forward);
    for (double& v : lin.samples) v = quantize8(srgb_transfer(clamp01(v), TransferDirection::encode));
    return RgbImage(lin.height, lin.width, std::move(lin.samples));
}

PackedRaw inverse_isp_continuous(const RgbImage& rgb, const IspMetadata& meta) {
    meta.validate();
    std::vector<double> lin(rgb.samples.size());
    for (std::size_t i = 0; i < lin.size(); ++i) {
        lin[i] = srgb_transfer(rgb.samples[i], TransferDirection::decode);
    }
    linear_color(lin, meta, ColorDirection::inverse);
    for (double& v : lin) v = clamp01(v);

    const int ph = rgb.height / 2;
    const int pw = rgb.width / 2;
    auto pixel = [&](int i, int j, int c) {
        return lin[(static_cast<std::size_t>(i) * rgb.width + j) * 3 + c];
    };
    std::vector<double> out(static_cast<std::size_t>(ph) * pw * PackedRaw::kChannels);
    for (int i = 0; i < ph; ++i) {
        for (int j = 0; j < pw; ++j) {
            const std::size_t d = (static_cast<std::size_t>(i) * pw + j) * PackedRaw::kChannels;
            out[d + kR] = pixel(2 * i, 2 * j, 0);
            out[d + kG1] = pixel(2 * i, 2 * j + 1, 1);
            out[d + kG2] = pixel(2 * i + 1, 2 * j, 1);
            out[d + kB] = pixel(2 * i + 1, 2 * j + 1, 2);
        }
    }
    if (meta.black_level != 0 || meta.white_level != 4095) {
        const double black = meta.black_level;
        const double range = meta.white_level - meta.black_level;
        for (double& v : out) v = clamp01((v * range + black) / 4095.0);
    }
    return PackedRaw(ph, pw, std::move(out));
}

PackedRaw inverse_isp(const RgbImage& rgb, const IspMetadata& meta) {
    return quantize12(inverse_isp_continuous(rgb, meta));
}

}  // namespace risp
