#include "risp/bayer.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "risp/error.hpp"

namespace risp {

namespace {

// Each dihedral element acts on centered coordinates as a signed permutation
// matrix [[a, b], [c, d]] mapping destination position to source position.
struct SignedPerm {
    int a, b, c, d;

    friend bool operator==(const SignedPerm&, const SignedPerm&) = default;
};

SignedPerm mul(const SignedPerm& x, const SignedPerm& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

SignedPerm matrix_of(Dihedral t) {
    SignedPerm m{1, 0, 0, 1};
    if (t.transpose()) m = mul(m, SignedPerm{0, 1, 1, 0});
    if (t.flip_rows()) m = mul(m, SignedPerm{-1, 0, 0, 1});
    if (t.flip_cols()) m = mul(m, SignedPerm{1, 0, 0, -1});
    return m;
}

Dihedral index_of(const SignedPerm& m) {
    for (int i = 0; i < Dihedral::kCount; ++i) {
        if (matrix_of(Dihedral{i}) == m) return Dihedral{i};
    }
    throw DomainError("signed permutation is not a dihedral element");
}

void check_index(Dihedral t) {
    if (t.index < 0 || t.index >= Dihedral::kCount) {
        throw DomainError("dihedral index must be in [0, 8), got " + std::to_string(t.index));
    }
}

// Source position for destination (i, j) of a transformed h x w image.
// Derived from applying transpose, then row flip, then column flip.
inline void source_of(Dihedral t, int h, int w, int i, int j, int& si, int& sj) {
    if (!t.transpose()) {
        si = t.flip_rows() ? h - 1 - i : i;
        sj = t.flip_cols() ? w - 1 - j : j;
    } else {
        // Output is w x h; i indexes [0, w), j indexes [0, h).
        si = t.flip_cols() ? h - 1 - j : j;
        sj = t.flip_rows() ? w - 1 - i : i;
    }
}

// Generic spatial gather over an interleaved image.
std::vector<double> transform_plane(const std::vector<double>& src, int h, int w, int ch, Dihedral t) {
    const int oh = t.transpose() ? w : h;
    const int ow = t.transpose() ? h : w;
    std::vector<double> dst(src.size());
    for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
            int si, sj;
            source_of(t, h, w, i, j, si, sj);
            const std::size_t d = (static_cast<std::size_t>(i) * ow + j) * ch;
            const std::size_t s = (static_cast<std::size_t>(si) * w + sj) * ch;
            for (int c = 0; c < ch; ++c) dst[d + c] = src[s + c];
        }
    }
    return dst;
}

// How one flip step permutes the packed channels: source channel per output
// channel, for transpose, row flip and column flip respectively.
constexpr std::array<int, 4> kTransposeSrc{0, 2, 1, 3};
constexpr std::array<int, 4> kFlipRowsSrc{2, 3, 0, 1};
constexpr std::array<int, 4> kFlipColsSrc{1, 0, 3, 2};

}  // namespace

Dihedral compose(Dihedral first, Dihedral then) {
    check_index(first);
    check_index(then);
    return index_of(mul(matrix_of(first), matrix_of(then)));
}

Dihedral inverse(Dihedral t) {
    check_index(t);
    const SignedPerm m = matrix_of(t);
    return index_of(SignedPerm{m.a, m.c, m.b, m.d});  // orthogonal: inverse = transpose
}

PackedRaw pack_rggb(const Mosaic& mosaic) {
    const int ph = mosaic.height / 2;
    const int pw = mosaic.width / 2;
    std::vector<double> out(static_cast<std::size_t>(ph) * pw * PackedRaw::kChannels);
    for (int i = 0; i < ph; ++i) {
        for (int j = 0; j < pw; ++j) {
            const std::size_t d = (static_cast<std::size_t>(i) * pw + j) * PackedRaw::kChannels;
            out[d + kR] = mosaic.at(2 * i, 2 * j);
            out[d + kG1] = mosaic.at(2 * i, 2 * j + 1);
            out[d + kG2] = mosaic.at(2 * i + 1, 2 * j);
            out[d + kB] = mosaic.at(2 * i + 1, 2 * j + 1);
        }
    }
    return PackedRaw(ph, pw, std::move(out));
}

Mosaic unpack_rggb(const PackedRaw& packed) {
    const int h = packed.height * 2;
    const int w = packed.width * 2;
    std::vector<double> out(static_cast<std::size_t>(h) * w);
    for (int i = 0; i < packed.height; ++i) {
        for (int j = 0; j < packed.width; ++j) {
            out[static_cast<std::size_t>(2 * i) * w + 2 * j] = packed.at(i, j, kR);
            out[static_cast<std::size_t>(2 * i) * w + 2 * j + 1] = packed.at(i, j, kG1);
            out[static_cast<std::size_t>(2 * i + 1) * w + 2 * j] = packed.at(i, j, kG2);
            out[static_cast<std::size_t>(2 * i + 1) * w + 2 * j + 1] = packed.at(i, j, kB);
        }
    }
    return Mosaic(h, w, std::move(out));
}

Mosaic dihedral_mosaic(const Mosaic& m, Dihedral t) {
    check_index(t);
    const int oh = t.transpose() ? m.width : m.height;
    const int ow = t.transpose() ? m.height : m.width;
    return Mosaic(oh, ow, transform_plane(m.samples, m.height, m.width, 1, t));
}

RgbImage dihedral_rgb(const RgbImage& img, Dihedral t) {
    check_index(t);
    const int oh = t.transpose() ? img.width : img.height;
    const int ow = t.transpose() ? img.height : img.width;
    return RgbImage(oh, ow, transform_plane(img.samples, img.height, img.width, RgbImage::kChannels, t));
}

int dihedral_channel_source(Dihedral t, int c) {
    check_index(t);
    if (c < 0 || c >= PackedRaw::kChannels) throw DomainError("packed channel out of range");
    // Steps compose in application order; sources chain in the same order.
    int src = c;
    if (t.flip_cols()) src = kFlipColsSrc[src];
    if (t.flip_rows()) src = kFlipRowsSrc[src];
    if (t.transpose()) src = kTransposeSrc[src];
    return src;
}

PackedRaw dihedral_packed(const PackedRaw& p, Dihedral t) {
    check_index(t);
    const int oh = t.transpose() ? p.width : p.height;
    const int ow = t.transpose() ? p.height : p.width;
    std::vector<double> dst(p.samples.size());
    std::array<int, 4> src_channel{};
    for (int c = 0; c < PackedRaw::kChannels; ++c) src_channel[c] = dihedral_channel_source(t, c);
    for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
            int si, sj;
            source_of(t, p.height, p.width, i, j, si, sj);
            const std::size_t d = (static_cast<std::size_t>(i) * ow + j) * PackedRaw::kChannels;
            const std::size_t s = (static_cast<std::size_t>(si) * p.width + sj) * PackedRaw::kChannels;
            for (int c = 0; c < PackedRaw::kChannels; ++c) dst[d + c] = p.samples[s + src_channel[c]];
        }
    }
    return PackedRaw(oh, ow, std::move(dst));
}

PackedRaw dihedral_planes(const PackedRaw& p, Dihedral t) {
    check_index(t);
    const int oh = t.transpose() ? p.width : p.height;
    const int ow = t.transpose() ? p.height : p.width;
    std::vector<double> dst(p.samples.size());
    // The green planes live at (even, odd) and (odd, even) sites, which a
    // transposition exchanges; red and blue keep their identity always.
    const std::array<int, 4> src_channel =
        t.transpose() ? std::array<int, 4>{kR, kG2, kG1, kB} : std::array<int, 4>{kR, kG1, kG2, kB};
    for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
            int si, sj;
            source_of(t, p.height, p.width, i, j, si, sj);
            const std::size_t d = (static_cast<std::size_t>(i) * ow + j) * PackedRaw::kChannels;
            const std::size_t s = (static_cast<std::size_t>(si) * p.width + sj) * PackedRaw::kChannels;
            for (int c = 0; c < PackedRaw::kChannels; ++c) dst[d + c] = p.samples[s + src_channel[c]];
        }
    }
    return PackedRaw(oh, ow, std::move(dst));
}

double quantize12(double x) {
    if (!std::isfinite(x)) throw DomainError("quantize12: sample is not finite");
    const double clamped = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
    return std::round(clamped * 4095.0) / 4095.0;  // round halves away from zero
}

PackedRaw quantize12(const PackedRaw& p) {
    std::vector<double> out(p.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = quantize12(p.samples[i]);
    return PackedRaw(p.height, p.width, std::move(out));
}

double dequantize12(int code) {
    if (code < 0 || code > 4095) {
        throw DomainError("dequantize12: code must be in [0, 4095], got " + std::to_string(code));
    }
    return static_cast<double>(code) / 4095.0;
}

}  // namespace risp
