#pragma once

#include <cstddef>
#include <vector>

namespace risp {

enum class BayerPattern { rggb };

// Full-resolution single-plane Bayer mosaic, row-major, values in [0, 1].
// Dimensions must be even and positive: the RGGB period is 2x2.
struct Mosaic {
    int height = 0;
    int width = 0;
    BayerPattern pattern = BayerPattern::rggb;
    std::vector<double> samples;  // height * width

    Mosaic() = default;
    Mosaic(int h, int w, std::vector<double> s);

    static Mosaic zeros(int h, int w);
    static Mosaic constant(int h, int w, double value);

    double at(int i, int j) const { return samples[static_cast<std::size_t>(i) * width + j]; }
    double& at(int i, int j) { return samples[static_cast<std::size_t>(i) * width + j]; }
};

// Half-resolution packed RAW: four interleaved channels per 2x2 mosaic block
// in the fixed order R, G1, G2, B.  Values in [0, 1] (12-bit codes / 4095
// once quantized; intermediate results may sit between code levels).
struct PackedRaw {
    static constexpr int kChannels = 4;

    int height = 0;
    int width = 0;
    std::vector<double> samples;  // height * width * 4, row-major interleaved

    PackedRaw() = default;
    PackedRaw(int h, int w, std::vector<double> s);

    static PackedRaw zeros(int h, int w);
    static PackedRaw constant(int h, int w, double value);

    std::size_t index(int i, int j, int c) const {
        return (static_cast<std::size_t>(i) * width + j) * kChannels + c;
    }
    double at(int i, int j, int c) const { return samples[index(i, j, c)]; }
    double& at(int i, int j, int c) { return samples[index(i, j, c)]; }
};

// Interleaved RGB image, values in [0, 1].  Dimensions must be even and
// positive so the image stays aligned to the packed-RAW grid (2x the packed
// resolution).  The payload is sRGB-encoded along the public pipeline
// boundaries; a few internal steps reuse the container for linear RGB.
struct RgbImage {
    static constexpr int kChannels = 3;

    int height = 0;
    int width = 0;
    std::vector<double> samples;  // height * width * 3, row-major interleaved

    RgbImage() = default;
    RgbImage(int h, int w, std::vector<double> s);

    static RgbImage zeros(int h, int w);
    static RgbImage constant(int h, int w, double r, double g, double b);

    std::size_t index(int i, int j, int c) const {
        return (static_cast<std::size_t>(i) * width + j) * kChannels + c;
    }
    double at(int i, int j, int c) const { return samples[index(i, j, c)]; }
    double& at(int i, int j, int c) { return samples[index(i, j, c)]; }
};

}  // namespace risp
