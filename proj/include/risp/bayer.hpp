#pragma once

#include "risp/image.hpp"

namespace risp {

// Packed channel indices in the fixed RGGB order.
enum PackedChannel : int { kR = 0, kG1 = 1, kG2 = 2, kB = 3 };

// One of the eight axis-aligned flips/rotations of the image plane.
// Encoding: bit 2 transposes, bit 1 flips rows, bit 0 flips columns,
// applied in that order (transpose first).  index 0 is the identity.
struct Dihedral {
    static constexpr int kCount = 8;

    int index = 0;

    constexpr bool transpose() const { return (index & 4) != 0; }
    constexpr bool flip_rows() const { return (index & 2) != 0; }
    constexpr bool flip_cols() const { return (index & 1) != 0; }
};

// Group algebra.  compose(a, b) is "apply a, then b".
Dihedral compose(Dihedral first, Dihedral then);
Dihedral inverse(Dihedral t);

// 2x2 block gather: mosaic (2H)x(2W) -> packed HxWx4 with channels
// [R, G1, G2, B] taken from block offsets (0,0), (0,1), (1,0), (1,1).
PackedRaw pack_rggb(const Mosaic& mosaic);

// Exact inverse of pack_rggb: scatter the four planes back onto the grid.
Mosaic unpack_rggb(const PackedRaw& packed);

// Spatial transforms.  dihedral_packed additionally permutes the packed
// channels so the result equals pack_rggb(dihedral_mosaic(unpack_rggb(p), t)):
// a flip at full resolution moves samples between RGGB sites.
Mosaic dihedral_mosaic(const Mosaic& m, Dihedral t);
RgbImage dihedral_rgb(const RgbImage& img, Dihedral t);
PackedRaw dihedral_packed(const PackedRaw& p, Dihedral t);

// Channel c of dihedral_packed(p, t) is channel dihedral_channel_source(t, c)
// of p.  Exposed so tests can check the permutation in isolation.
int dihedral_channel_source(Dihedral t, int c);

// Dihedral action on a packed image whose channels are dense color planes
// (R, G1, G2, B estimated at every site) rather than mosaic samples: each
// plane transforms spatially, and transposition swaps the two green planes
// because their sites trade places.  Unlike dihedral_packed this never maps
// red or blue onto green; flips leave the planes one site off their mosaic
// lattice (the phase shifts).  Group action: undo with the inverse element.
PackedRaw dihedral_planes(const PackedRaw& p, Dihedral t);

// Snap to the nearest 12-bit code: round(clamp(x, 0, 1) * 4095) / 4095 with
// halves rounded away from zero.  Idempotent.
double quantize12(double x);
PackedRaw quantize12(const PackedRaw& p);

// code / 4095 for an integer code in [0, 4095].
double dequantize12(int code);

}  // namespace risp
