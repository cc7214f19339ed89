#include "risp/image.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "risp/error.hpp"

namespace risp {

namespace {

void check_dims(int h, int w, bool even_required, const char* what) {
    if (h <= 0 || w <= 0) {
        throw DimensionError(std::string(what) + ": dimensions must be positive, got " +
                             std::to_string(h) + "x" + std::to_string(w));
    }
    if (even_required && (h % 2 != 0 || w % 2 != 0)) {
        throw DimensionError(std::string(what) + ": dimensions must be even, got " +
                             std::to_string(h) + "x" + std::to_string(w));
    }
}

void check_payload(const std::vector<double>& s, std::size_t expected, const char* what) {
    if (s.size() != expected) {
        throw DimensionError(std::string(what) + ": sample count " + std::to_string(s.size()) +
                             " does not match dimensions (expected " + std::to_string(expected) + ")");
    }
    for (double v : s) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw DomainError(std::string(what) + ": samples must be finite and in [0, 1]");
        }
    }
}

}  // namespace

Mosaic::Mosaic(int h, int w, std::vector<double> s) : height(h), width(w), samples(std::move(s)) {
    check_dims(h, w, true, "Mosaic");
    check_payload(samples, static_cast<std::size_t>(h) * w, "Mosaic");
}

Mosaic Mosaic::zeros(int h, int w) { return constant(h, w, 0.0); }

Mosaic Mosaic::constant(int h, int w, double value) {
    return Mosaic(h, w, std::vector<double>(static_cast<std::size_t>(h) * w, value));
}

PackedRaw::PackedRaw(int h, int w, std::vector<double> s) : height(h), width(w), samples(std::move(s)) {
    check_dims(h, w, false, "PackedRaw");
    check_payload(samples, static_cast<std::size_t>(h) * w * kChannels, "PackedRaw");
}

PackedRaw PackedRaw::zeros(int h, int w) { return constant(h, w, 0.0); }

PackedRaw PackedRaw::constant(int h, int w, double value) {
    return PackedRaw(h, w, std::vector<double>(static_cast<std::size_t>(h) * w * kChannels, value));
}

RgbImage::RgbImage(int h, int w, std::vector<double> s) : height(h), width(w), samples(std::move(s)) {
    check_dims(h, w, true, "RgbImage");
    check_payload(samples, static_cast<std::size_t>(h) * w * kChannels, "RgbImage");
}

RgbImage RgbImage::zeros(int h, int w) { return constant(h, w, 0.0, 0.0, 0.0); }

RgbImage RgbImage::constant(int h, int w, double r, double g, double b) {
    std::vector<double> s(static_cast<std::size_t>(h) * w * kChannels);
    for (std::size_t p = 0; p < s.size(); p += kChannels) {
        s[p + 0] = r;
        s[p + 1] = g;
        s[p + 2] = b;
    }
    return RgbImage(h, w, std::move(s));
}

}  // namespace risp
