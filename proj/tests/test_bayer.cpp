#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "risp/bayer.hpp"
#include "risp/error.hpp"
#include "test_support.hpp"

using risp::Dihedral;
using risp::Mosaic;
using risp::PackedRaw;
using test_support::random_mosaic;
using test_support::random_packed;

namespace {

bool same_samples(const std::vector<double>& a, const std::vector<double>& b) {
    return a == b;  // bit-exact comparison on purpose
}

}  // namespace

TEST_CASE("pack_rggb block order on a 2x2 mosaic") {
    const Mosaic m(2, 2, {0.1, 0.2, 0.3, 0.4});
    const PackedRaw p = risp::pack_rggb(m);
    CHECK(p.height == 1);
    CHECK(p.width == 1);
    CHECK(p.at(0, 0, risp::kR) == 0.1);
    CHECK(p.at(0, 0, risp::kG1) == 0.2);
    CHECK(p.at(0, 0, risp::kG2) == 0.3);
    CHECK(p.at(0, 0, risp::kB) == 0.4);
}

TEST_CASE("pack_rggb 4x4 ramp matches the index-arithmetic oracle") {
    Mosaic m = Mosaic::zeros(4, 4);
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 4; ++y) m.at(x, y) = (4 * x + y) / 16.0;
    }
    const PackedRaw p = risp::pack_rggb(m);

    // R plane = even-row, even-column sites.
    CHECK(p.at(0, 0, risp::kR) == 0.0);
    CHECK(p.at(0, 1, risp::kR) == 0.125);
    CHECK(p.at(1, 0, risp::kR) == 0.5);
    CHECK(p.at(1, 1, risp::kR) == 0.625);

    // Every site, every channel, via the block-offset definition.
    const int off[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int c = 0; c < 4; ++c) {
                CHECK(p.at(i, j, c) == m.at(2 * i + off[c][0], 2 * j + off[c][1]));
            }
        }
    }
}

TEST_CASE("pack/unpack is an exact bijection") {
    for (auto [h, w] : {std::pair{2, 2}, {4, 4}, {6, 10}, {16, 8}}) {
        const Mosaic m = random_mosaic(h, w, 1000 + h * 31 + w);
        const Mosaic back = risp::unpack_rggb(risp::pack_rggb(m));
        CHECK(back.height == h);
        CHECK(back.width == w);
        CHECK(same_samples(back.samples, m.samples));

        const PackedRaw p = random_packed(h / 2, w / 2, 2000 + h + w);
        const PackedRaw again = risp::pack_rggb(risp::unpack_rggb(p));
        CHECK(same_samples(again.samples, p.samples));
    }
}

TEST_CASE("unpack_rggb of a single packed site and of zeros") {
    const PackedRaw p(1, 1, {0.1, 0.2, 0.3, 0.4});
    const Mosaic m = risp::unpack_rggb(p);
    CHECK(m.samples == std::vector<double>{0.1, 0.2, 0.3, 0.4});

    const Mosaic z = risp::unpack_rggb(PackedRaw::zeros(3, 2));
    for (double v : z.samples) CHECK(v == 0.0);
}

TEST_CASE("odd mosaic dimensions are rejected") {
    CHECK_THROWS_AS(Mosaic(3, 4, std::vector<double>(12, 0.0)), risp::DimensionError);
    CHECK_THROWS_AS(Mosaic(4, 5, std::vector<double>(20, 0.0)), risp::DimensionError);
}

TEST_CASE("dihedral group structure") {
    // Identity.
    CHECK(risp::compose(Dihedral{0}, Dihedral{3}).index == 3);
    CHECK(risp::compose(Dihedral{3}, Dihedral{0}).index == 3);

    // Closure and unique inverses.
    std::set<int> inverses;
    for (int t = 0; t < Dihedral::kCount; ++t) {
        const int inv = risp::inverse(Dihedral{t}).index;
        CHECK(inv >= 0);
        CHECK(inv < 8);
        CHECK(risp::compose(Dihedral{t}, Dihedral{inv}).index == 0);
        CHECK(risp::compose(Dihedral{inv}, Dihedral{t}).index == 0);
        inverses.insert(inv);
        for (int u = 0; u < Dihedral::kCount; ++u) {
            const int c = risp::compose(Dihedral{t}, Dihedral{u}).index;
            CHECK(c >= 0);
            CHECK(c < 8);
        }
    }
    CHECK(inverses.size() == 8);  // bijection; each index has a unique inverse
}

TEST_CASE("dihedral_rgb flips and round-trips") {
    // t=0 is the identity.
    const risp::RgbImage img = test_support::random_rgb(4, 6, 77);
    CHECK(same_samples(risp::dihedral_rgb(img, Dihedral{0}).samples, img.samples));

    // Column flip reverses each row; check all four pixels of a 2x2.
    risp::RgbImage two = risp::RgbImage::zeros(2, 2);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            for (int c = 0; c < 3; ++c) two.at(i, j, c) = i / 10.0 + j / 100.0 + c / 1000.0;
        }
    }
    const risp::RgbImage flipped = risp::dihedral_rgb(two, Dihedral{1});
    for (int i = 0; i < 2; ++i) {
        for (int c = 0; c < 3; ++c) {
            CHECK(flipped.at(i, 0, c) == two.at(i, 1, c));
            CHECK(flipped.at(i, 1, c) == two.at(i, 0, c));
        }
    }

    // Every transform undoes with its inverse, bit-exact, non-square input.
    for (int t = 0; t < 8; ++t) {
        const risp::RgbImage once = risp::dihedral_rgb(img, Dihedral{t});
        if (Dihedral{t}.transpose()) {
            CHECK(once.height == img.width);
            CHECK(once.width == img.height);
        }
        const risp::RgbImage back = risp::dihedral_rgb(once, risp::inverse(Dihedral{t}));
        CHECK(same_samples(back.samples, img.samples));
    }
}

TEST_CASE("dihedral_packed equals the full-resolution mosaic oracle") {
    for (auto [h, w] : {std::pair{8, 8}, {4, 6}}) {
        const PackedRaw p = random_packed(h, w, 31 * h + w);
        for (int t = 0; t < 8; ++t) {
            const PackedRaw direct = risp::dihedral_packed(p, Dihedral{t});
            const PackedRaw via_mosaic =
                risp::pack_rggb(risp::dihedral_mosaic(risp::unpack_rggb(p), Dihedral{t}));
            CHECK(direct.height == via_mosaic.height);
            CHECK(direct.width == via_mosaic.width);
            CHECK(same_samples(direct.samples, via_mosaic.samples));
        }
    }
}

TEST_CASE("dihedral_packed identity, inverses, and channel permutation") {
    const PackedRaw p = random_packed(6, 4, 99);
    CHECK(same_samples(risp::dihedral_packed(p, Dihedral{0}).samples, p.samples));
    for (int t = 0; t < 8; ++t) {
        const PackedRaw back =
            risp::dihedral_packed(risp::dihedral_packed(p, Dihedral{t}), risp::inverse(Dihedral{t}));
        CHECK(same_samples(back.samples, p.samples));
    }

    // Column flip maps (R,G1,G2,B) -> (G1,R,B,G2), so output channel c reads
    // from source [1,0,3,2][c]; row flip from [2,3,0,1]; transpose swaps the
    // greens.
    const int fc[4] = {1, 0, 3, 2};
    const int fr[4] = {2, 3, 0, 1};
    const int tr[4] = {0, 2, 1, 3};
    for (int c = 0; c < 4; ++c) {
        CHECK(risp::dihedral_channel_source(Dihedral{1}, c) == fc[c]);
        CHECK(risp::dihedral_channel_source(Dihedral{2}, c) == fr[c]);
        CHECK(risp::dihedral_channel_source(Dihedral{4}, c) == tr[c]);
        CHECK(risp::dihedral_channel_source(Dihedral{0}, c) == c);
    }
}

TEST_CASE("dihedral_planes is a color-preserving group action") {
    const PackedRaw p = random_packed(4, 6, 1234);

    // Identity and inverse round trip, all eight elements, non-square.
    CHECK(same_samples(risp::dihedral_planes(p, Dihedral{0}).samples, p.samples));
    for (int t = 0; t < 8; ++t) {
        const PackedRaw back =
            risp::dihedral_planes(risp::dihedral_planes(p, Dihedral{t}), risp::inverse(Dihedral{t}));
        CHECK(same_samples(back.samples, p.samples));
    }

    // True action: applying a then b equals applying compose(a, b).
    for (int a = 0; a < 8; ++a) {
        for (int b = 0; b < 8; ++b) {
            const PackedRaw chained =
                risp::dihedral_planes(risp::dihedral_planes(p, Dihedral{a}), Dihedral{b});
            const PackedRaw composed = risp::dihedral_planes(p, risp::compose(Dihedral{a}, Dihedral{b}));
            CHECK(same_samples(chained.samples, composed.samples));
        }
    }
}

TEST_CASE("dihedral_planes keeps red and blue on their own planes") {
    // Distinct per-channel constants: any cross-color mixing would show up.
    PackedRaw p = PackedRaw::zeros(4, 4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            p.at(i, j, risp::kR) = 0.1;
            p.at(i, j, risp::kG1) = 0.4;
            p.at(i, j, risp::kG2) = 0.6;
            p.at(i, j, risp::kB) = 0.9;
        }
    }
    for (int t = 0; t < 8; ++t) {
        const PackedRaw q = risp::dihedral_planes(p, Dihedral{t});
        const bool swap_greens = Dihedral{t}.transpose();
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                CHECK(q.at(i, j, risp::kR) == 0.1);
                CHECK(q.at(i, j, risp::kB) == 0.9);
                CHECK(q.at(i, j, risp::kG1) == (swap_greens ? 0.6 : 0.4));
                CHECK(q.at(i, j, risp::kG2) == (swap_greens ? 0.4 : 0.6));
            }
        }
    }
}

TEST_CASE("dihedral_planes transposition is phase-exact") {
    // A transposed RGGB mosaic is again RGGB, so the pure-transpose element
    // must equal the mosaic-faithful transform exactly (no green ambiguity).
    const PackedRaw p = random_packed(6, 6, 5150);
    const PackedRaw planes = risp::dihedral_planes(p, Dihedral{4});
    const PackedRaw mosaic_true = risp::dihedral_packed(p, Dihedral{4});
    CHECK(same_samples(planes.samples, mosaic_true.samples));
}

TEST_CASE("quantize12 endpoints, midpoint, idempotence, clamping") {
    CHECK(risp::quantize12(0.0) == 0.0);
    CHECK(risp::quantize12(1.0) == 1.0);
    // 0.5 * 4095 = 2047.5 exactly; halves round away from zero.
    CHECK(risp::quantize12(0.5) == 2048.0 / 4095.0);
    CHECK(risp::quantize12(-0.25) == 0.0);
    CHECK(risp::quantize12(1.75) == 1.0);

    risp::Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.next_unit();
        const double q = risp::quantize12(x);
        CHECK(risp::quantize12(q) == q);                    // idempotent
        CHECK(std::fabs(q - x) <= 0.5 / 4095.0 + 1e-15);    // half-step error bound
    }
}

TEST_CASE("quantize12 on images and dequantize12") {
    const PackedRaw p = random_packed(4, 4, 555);
    const PackedRaw q = risp::quantize12(p);
    for (std::size_t i = 0; i < q.samples.size(); ++i) {
        CHECK(q.samples[i] == risp::quantize12(p.samples[i]));
    }
    CHECK(risp::dequantize12(0) == 0.0);
    CHECK(risp::dequantize12(4095) == 1.0);
    CHECK(risp::dequantize12(2048) == 2048.0 / 4095.0);
}
