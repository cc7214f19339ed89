#include "risp/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "risp/accum.hpp"
#include "risp/error.hpp"

namespace risp {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;  // (K2 * L)^2

std::array<double, kWindow> gaussian_kernel() {
    std::array<double, kWindow> k{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

inline int reflect(int idx, int n) { return idx < 0 ? -idx : (idx >= n ? 2 * n - 2 - idx : idx); }

// Separable Gaussian blur with mirror (reflect-101) borders.
std::vector<double> blur(const std::vector<double>& src, int h, int w) {
    static const std::array<double, kWindow> k = gaussian_kernel();
    std::vector<double> tmp(src.size()), out(src.size());
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int u = 0; u < kWindow; ++u) {
                acc += k[u] * src[static_cast<std::size_t>(i) * w + reflect(j + u - kWindow / 2, w)];
            }
            tmp[static_cast<std::size_t>(i) * w + j] = acc;
        }
    }
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int u = 0; u < kWindow; ++u) {
                acc += k[u] * tmp[static_cast<std::size_t>(reflect(i + u - kWindow / 2, h)) * w + j];
            }
            out[static_cast<std::size_t>(i) * w + j] = acc;
        }
    }
    return out;
}

}  // namespace

double psnr(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("psnr: inputs differ in length");
    if (a.empty()) throw DimensionError("psnr: inputs are empty");
    StableSum s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s.add(d * d);
    }
    const double mse = s.mean();
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double psnr(const PackedRaw& a, const PackedRaw& b) {
    if (a.height != b.height || a.width != b.width) {
        throw DimensionError("psnr: image dimensions differ");
    }
    return psnr(std::span<const double>(a.samples), std::span<const double>(b.samples));
}

double ssim_plane(std::span<const double> a, std::span<const double> b, int height, int width) {
    if (height < kWindow || width < kWindow) {
        throw DimensionError("ssim: image sides must be >= 11");
    }
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (a.size() != n || b.size() != n) throw DimensionError("ssim: plane size mismatch");

    std::vector<double> va(a.begin(), a.end());
    std::vector<double> vb(b.begin(), b.end());
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = va[i] * va[i];
        bb[i] = vb[i] * vb[i];
        ab[i] = va[i] * vb[i];
    }
    const std::vector<double> mu_a = blur(va, height, width);
    const std::vector<double> mu_b = blur(vb, height, width);
    const std::vector<double> s_aa = blur(aa, height, width);
    const std::vector<double> s_bb = blur(bb, height, width);
    const std::vector<double> s_ab = blur(ab, height, width);

    StableSum sum;
    for (std::size_t i = 0; i < n; ++i) {
        const double var_a = s_aa[i] - mu_a[i] * mu_a[i];
        const double var_b = s_bb[i] - mu_b[i] * mu_b[i];
        const double cov = s_ab[i] - mu_a[i] * mu_b[i];
        const double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cov + kC2);
        const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (var_a + var_b + kC2);
        sum.add(num / den);
    }
    return sum.mean();
}

double ssim(const PackedRaw& a, const PackedRaw& b) {
    if (a.height != b.height || a.width != b.width) {
        throw DimensionError("ssim: image dimensions differ");
    }
    const std::size_t n = static_cast<std::size_t>(a.height) * a.width;
    std::vector<double> pa(n), pb(n);
    double total = 0.0;
    for (int c = 0; c < PackedRaw::kChannels; ++c) {
        for (std::size_t p = 0; p < n; ++p) {
            pa[p] = a.samples[p * PackedRaw::kChannels + c];
            pb[p] = b.samples[p * PackedRaw::kChannels + c];
        }
        total += ssim_plane(pa, pb, a.height, a.width);
    }
    return total / PackedRaw::kChannels;
}

}  // namespace risp
