#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "risp/image.hpp"
#include "risp/isp.hpp"

namespace risp {

// One affine color map in a gamma-lifted domain: y = A * x + b, row-major A.
struct AffineColorMap {
    std::array<double, 9> a{1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::array<double, 3> b{0, 0, 0};

    static AffineColorMap identity() { return {}; }
};

// Mixture of K gamma-domain affine reconstructions.  For an sRGB pixel x:
//   x_lin = srgb_decode(x)
//   r_k   = clamp(A_k * x_lin^gamma_k + b_k, 0, 1)
//   y_hat = sum_k w_k * r_k^gamma_k
// followed by RGGB subsampling onto the packed grid and one quantize12.
// The weights live on the probability simplex and are shared across
// channels and pixels.
struct ReverseModel {
    std::vector<double> gammas;
    std::vector<AffineColorMap> maps;
    std::vector<double> weights;

    int candidate_count() const { return static_cast<int>(gammas.size()); }

    // Throws unless sizes agree, gammas are positive and the weights are a
    // probability vector (within 1e-9, then exactly after renormalize()).
    void validate() const;
    void renormalize();

    // K = 1, gamma 1, identity map: predict() then matches inverse_isp with
    // identity metadata bit for bit.
    static ReverseModel identity();
};

// Loss minimized by the weight updates during fitting.
enum class FitLoss { l1, mse, l1_plus_l2, log_l2_plus_clipped_l1 };

struct FitConfig {
    int max_outer_iters = 50;
    double weight_step = 0.5;     // initial projected-gradient step
    double tol = 1e-12;           // stop when the objective improves less
    std::uint64_t seed = 0;       // reserved for samplers; fit itself is deterministic
    FitLoss loss = FitLoss::l1;
};

// Supervised pair: RGB patch at exactly twice the packed-RAW resolution.
// stratum is the brightness bin assigned by stratified_sample (0 before).
struct PatchPair {
    RgbImage rgb;
    PackedRaw raw;
    int stratum = 0;

    PatchPair(RgbImage rgb_patch, PackedRaw raw_patch, int stratum_index = 0);
};

PackedRaw predict(const ReverseModel& model, const RgbImage& rgb);
PackedRaw predict_continuous(const ReverseModel& model, const RgbImage& rgb);

struct FitResult {
    ReverseModel model;
    double objective = 0.0;                 // value at the returned model
    std::vector<double> objective_history;  // accepted outer iterations, non-increasing
};

// Alternating estimation: each candidate map has the closed-form linear
// least-squares solution in its own gamma domain (regress target^(1/gamma_k)
// on x_lin^gamma_k per output channel), after which the weights descend the
// configured loss by projected gradient with backtracking on the simplex.
// Deterministic; returns the lowest-objective model observed.
FitResult fit(const std::vector<PatchPair>& pairs, const std::vector<double>& gammas,
              const FitConfig& cfg = {});

struct ModelGradient {
    std::vector<double> d_weights;        // K
    std::vector<AffineColorMap> d_maps;   // K, same layout as the model
};

// Configured loss over all supervised samples plus its analytic gradient
// with respect to the weights and every map entry.
std::pair<double, ModelGradient> objective_and_gradient(const ReverseModel& model,
                                                        const std::vector<PatchPair>& pairs,
                                                        FitLoss loss = FitLoss::l1);

// Least-squares estimate of the global matrix M with
// srgb_decode(rgb) ~ M * raw_linear over co-sited 2x2 blocks, where the RAW
// vector is (R, (G1+G2)/2, B) and the RGB side is the block mean.
ColorTransform fit_global_matrix(const std::vector<PatchPair>& pairs);

// Reconstruction through a fitted global matrix: decode, multiply by M^-1,
// clamp, subsample, quantize.
PackedRaw predict_with_transform(const ColorTransform& transform, const RgbImage& rgb);
PackedRaw predict_with_transform_continuous(const ColorTransform& transform, const RgbImage& rgb);

// Euclidean projection onto the probability simplex (sort and threshold).
std::vector<double> project_to_simplex(std::vector<double> v);

// Mean packed-RAW sample value; the brightness key used for stratification.
double patch_luminance(const PackedRaw& raw);

// Select n indices by brightness stratum: equal-width bins over [0, 1],
// near-equal per-bin quotas, shortfalls redistributed one slot at a time to
// the bin with the most unused candidates (ties to the lower bin), and a
// uniform without-replacement draw inside each bin.  Deterministic per seed.
std::vector<std::size_t> stratified_select(std::span<const double> luminance, int n, int bins,
                                           std::uint64_t seed);

// stratified_select over whole pairs; stratum is filled on the copies.
std::vector<PatchPair> stratified_sample(const std::vector<PatchPair>& pairs, int n, int bins,
                                         std::uint64_t seed);

enum class TtaMode { none, flip2, dihedral8 };

// Self-ensemble over dihedral transforms: run the continuous predictor on
// each transformed input, undo the transform on the packed result with the
// Bayer-aware dihedral_packed(inverse(t)), average in the linear domain and
// quantize once.  flip2 averages identity + horizontal + vertical flips;
// none is the plain predictor, bit for bit.  Flips move mosaic sites across
// packed channels, so for a predictor that anchors colors to channel slots
// the undone terms read each site through a different slot; the ensemble
// trades that mixing against the predictor's own asymmetries.
PackedRaw tta_predict(const std::function<PackedRaw(const RgbImage&)>& predict_continuous_fn,
                      const RgbImage& rgb, TtaMode mode);

}  // namespace risp
