#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "risp/bayer.hpp"
#include "risp/error.hpp"
#include "risp/isp.hpp"
#include "risp/metrics.hpp"
#include "test_support.hpp"

using risp::GammaDirection;
using risp::IspMetadata;
using risp::Mosaic;
using risp::PackedRaw;
using risp::RgbImage;
using risp::TransferDirection;
using test_support::random_mosaic;
using test_support::random_packed;

namespace {

double decode(double x) { return risp::srgb_transfer(x, TransferDirection::decode); }
double encode(double x) { return risp::srgb_transfer(x, TransferDirection::encode); }

}  // namespace

TEST_CASE("srgb transfer fixed points and pinned values") {
    CHECK(decode(0.0) == 0.0);
    CHECK(decode(1.0) == 1.0);
    CHECK(encode(0.0) == 0.0);
    CHECK(encode(1.0) == 1.0);

    // Breakpoint: the linear segment ends at 0.04045 -> 0.04045 / 12.92.
    CHECK(decode(0.04045) == doctest::Approx(0.04045 / 12.92).epsilon(1e-12));
    CHECK(decode(0.04045) == doctest::Approx(0.0031308).epsilon(1e-4));
    CHECK(decode(0.5) == doctest::Approx(0.21404).epsilon(1e-4));

    // Out-of-range input clamps before transforming.
    CHECK(decode(-0.5) == 0.0);
    CHECK(decode(1.5) == 1.0);
}

TEST_CASE("srgb encode/decode are mutual inverses on a dense grid") {
    for (int i = 0; i <= 10000; ++i) {
        const double x = i / 10000.0;
        CHECK(std::fabs(encode(decode(x)) - x) <= 1e-7);
        CHECK(std::fabs(decode(encode(x)) - x) <= 1e-7);
    }
    // Strictly monotone.
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double y = decode(i / 1000.0);
        CHECK(y > prev);
        prev = y;
    }
}

TEST_CASE("power_gamma fixed points, pinned value, inverse pair, domain") {
    for (double g : {0.5, 1.0, 2.2, 2.4}) {
        CHECK(risp::power_gamma(0.0, g, GammaDirection::apply) == 0.0);
        CHECK(risp::power_gamma(1.0, g, GammaDirection::apply) == 1.0);
    }
    CHECK(risp::power_gamma(0.5, 2.2, GammaDirection::apply) == doctest::Approx(0.21764).epsilon(1e-4));

    risp::Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.next_unit();
        const double g = rng.next_in(0.3, 3.0);
        const double y = risp::power_gamma(risp::power_gamma(x, g, GammaDirection::apply), g,
                                           GammaDirection::invert);
        CHECK(std::fabs(y - x) <= 1e-9);
    }
    CHECK_THROWS_AS(risp::power_gamma(-0.1, 2.2, GammaDirection::apply), risp::DomainError);
}

TEST_CASE("linear_color forward scaling and identity") {
    IspMetadata meta;  // identity
    std::vector<double> px{0.1, 0.2, 0.3};
    risp::linear_color(px, meta, risp::ColorDirection::forward);
    CHECK(px[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(px[1] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(px[2] == doctest::Approx(0.3).epsilon(1e-15));

    meta.wb_gains = {2.0, 1.0, 1.0};
    px = {0.1, 0.2, 0.3};
    risp::linear_color(px, meta, risp::ColorDirection::forward);
    CHECK(px[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(px[1] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(px[2] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("linear_color inverse matches the adjugate oracle and undoes forward") {
    IspMetadata meta;
    meta.wb_gains = {1.8, 1.0, 1.6};
    meta.ccm = {1.7, -0.5, -0.2, -0.3, 1.6, -0.3, -0.1, -0.6, 1.7};
    meta.validate();

    const std::array<double, 9> inv = test_support::adjugate_inverse(meta.ccm);

    risp::Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const std::array<double, 3> x{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        std::vector<double> fwd(x.begin(), x.end());
        risp::linear_color(fwd, meta, risp::ColorDirection::forward);

        // Oracle: component-wise gains then explicit 3x3 inverse back.
        std::array<double, 3> expect{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) expect[r] += inv[3 * r + c] * fwd[c];
        }
        for (int r = 0; r < 3; ++r) expect[r] /= meta.wb_gains[r];

        std::vector<double> back = fwd;
        risp::linear_color(back, meta, risp::ColorDirection::inverse);
        for (int r = 0; r < 3; ++r) {
            CHECK(std::fabs(back[r] - expect[r]) <= 1e-12);
            CHECK(std::fabs(back[r] - x[r]) <= 1e-6);  // inverse(forward(x)) = x
        }
    }
}

TEST_CASE("metadata validation rejects bad parameters") {
    IspMetadata meta;
    meta.wb_gains = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(meta.validate(), risp::DomainError);

    meta = IspMetadata{};
    meta.ccm = {1, 1, 1, 1, 1, 1, 1, 1, 1};  // rank 1
    CHECK_THROWS_AS(meta.validate(), risp::SingularMatrixError);

    meta = IspMetadata{};
    meta.black_level = 4095;
    meta.white_level = 4095;
    CHECK_THROWS_AS(meta.validate(), risp::DomainError);

    risp::ColorTransform t;
    t.m = {1, 2, 3, 2, 4, 6, 0, 0, 1};  // first two rows dependent
    CHECK_THROWS_AS(t.validate(), risp::SingularMatrixError);
}

TEST_CASE("bilinear_demosaic reproduces constants exactly and is linear") {
    const Mosaic c = Mosaic::constant(6, 8, 0.37);
    const RgbImage rgb = risp::bilinear_demosaic(c);
    CHECK(rgb.height == 6);
    CHECK(rgb.width == 8);
    for (double v : rgb.samples) CHECK(v == 0.37);

    // Linearity: f(a * m) = a * f(m).
    const Mosaic m = random_mosaic(8, 8, 21, 0.0, 0.5);
    Mosaic doubled = m;
    for (double& v : doubled.samples) v *= 2.0;
    const RgbImage f1 = risp::bilinear_demosaic(m);
    const RgbImage f2 = risp::bilinear_demosaic(doubled);
    for (std::size_t i = 0; i < f1.samples.size(); ++i) {
        CHECK(f2.samples[i] == doctest::Approx(2.0 * f1.samples[i]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(risp::bilinear_demosaic(Mosaic::zeros(2, 2)), risp::DimensionError);
}

TEST_CASE("bilinear_demosaic stencils at sampled sites, interiors, and borders") {
    const Mosaic m = random_mosaic(6, 6, 33);
    const RgbImage rgb = risp::bilinear_demosaic(m);

    // Site (2,2) is an R site: R keeps the sample, G averages the 4-neighbors,
    // B averages the 4 diagonals.
    CHECK(rgb.at(2, 2, 0) == m.at(2, 2));
    CHECK(rgb.at(2, 2, 1) ==
          doctest::Approx((m.at(1, 2) + m.at(3, 2) + m.at(2, 1) + m.at(2, 3)) / 4.0).epsilon(1e-15));
    CHECK(rgb.at(2, 2, 2) ==
          doctest::Approx((m.at(1, 1) + m.at(1, 3) + m.at(3, 1) + m.at(3, 3)) / 4.0).epsilon(1e-15));

    // Site (3,3) is a B site; R comes from the diagonals.
    CHECK(rgb.at(3, 3, 2) == m.at(3, 3));
    CHECK(rgb.at(3, 3, 0) ==
          doctest::Approx((m.at(2, 2) + m.at(2, 4) + m.at(4, 2) + m.at(4, 4)) / 4.0).epsilon(1e-15));

    // Corner (0,0) with reflect-101: missing neighbors mirror through the
    // border, so G = (2*m(1,0) + 2*m(0,1)) / 4.
    CHECK(rgb.at(0, 0, 1) ==
          doctest::Approx((2.0 * m.at(1, 0) + 2.0 * m.at(0, 1)) / 4.0).epsilon(1e-15));
}

TEST_CASE("forward_isp endpoints and shape") {
    const PackedRaw black = PackedRaw::zeros(4, 4);
    const RgbImage rgb = risp::forward_isp(black, IspMetadata::identity());
    CHECK(rgb.height == 8);
    CHECK(rgb.width == 8);
    for (double v : rgb.samples) CHECK(v == 0.0);

    // Constant gray with identity metadata: encode then 8-bit quantize.
    const double level = 0.25;
    const PackedRaw gray = PackedRaw::constant(4, 4, level);
    const RgbImage out = risp::forward_isp(gray, IspMetadata::identity());
    const double expected = std::round(encode(level) * 255.0) / 255.0;
    for (double v : out.samples) CHECK(v == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("inverse_isp saturation fixed point") {
    const RgbImage white = RgbImage::constant(8, 8, 1.0, 1.0, 1.0);
    const PackedRaw raw = risp::inverse_isp(white, IspMetadata::identity());
    CHECK(raw.height == 4);
    CHECK(raw.width == 4);
    for (double v : raw.samples) CHECK(v == 1.0);
}

TEST_CASE("identity-metadata round trip error stays within 8-bit reach") {
    const PackedRaw raw = risp::quantize12(random_packed(16, 16, 71, 0.02, 0.98));
    const RgbImage rgb = risp::forward_isp(raw, IspMetadata::identity());
    const PackedRaw rec = risp::inverse_isp(rgb, IspMetadata::identity());
    for (std::size_t i = 0; i < raw.samples.size(); ++i) {
        CHECK(std::fabs(rec.samples[i] - raw.samples[i]) <= 2.0 / 255.0);
    }
}

TEST_CASE("round trip PSNR >= 45 dB on unclipped synthetic input") {
    const IspMetadata meta = IspMetadata::synthetic_default();
    const PackedRaw raw = risp::quantize12(random_packed(32, 32, 2024, 0.02, 0.98));
    const PackedRaw rec = risp::inverse_isp(risp::forward_isp(raw, meta), meta);
    CHECK(risp::psnr(rec, raw) >= 45.0);
}

TEST_CASE("level normalization round trip") {
    IspMetadata meta;
    meta.black_level = 1024;
    meta.white_level = 3072;
    meta.validate();

    // Stored codes inside the level range survive the round trip.
    const PackedRaw raw = risp::quantize12(random_packed(16, 16, 88, 0.35, 0.65));
    const PackedRaw rec = risp::inverse_isp(risp::forward_isp(raw, meta), meta);
    CHECK(risp::psnr(rec, raw) >= 40.0);

    // Hand value: stored 0.5 -> (0.5 * 4095 - 1024) / 2048 inside the pipeline.
    const PackedRaw gray = PackedRaw::constant(4, 4, 0.5);
    const RgbImage rendered = risp::forward_isp(gray, meta);
    const double normalized = (0.5 * 4095.0 - 1024.0) / 2048.0;
    const double expected = std::round(encode(normalized) * 255.0) / 255.0;
    for (double v : rendered.samples) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("inverse_isp_continuous only differs by the final quantization") {
    const IspMetadata meta = IspMetadata::synthetic_default();
    const RgbImage rgb = test_support::random_rgb(8, 8, 3003);
    const PackedRaw cont = risp::inverse_isp_continuous(rgb, meta);
    const PackedRaw quant = risp::inverse_isp(rgb, meta);
    CHECK(risp::quantize12(cont).samples == quant.samples);
}
