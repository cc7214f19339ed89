#include "risp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "risp/bayer.hpp"
#include "risp/error.hpp"
#include "risp/rng.hpp"

namespace risp {

namespace {

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// x^gamma with the exponent-1 shortcut that keeps the degenerate model
// bit-identical to the closed-form inverse pipeline.
inline double pow_gamma(double x, double gamma) { return gamma == 1.0 ? x : std::pow(x, gamma); }

}  // namespace

void ReverseModel::validate() const {
    const std::size_t k = gammas.size();
    if (k == 0) throw DomainError("ReverseModel: needs at least one candidate");
    if (maps.size() != k || weights.size() != k) {
        throw DimensionError("ReverseModel: gammas, maps and weights must have equal length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (!std::isfinite(gammas[i]) || gammas[i] <= 0.0) {
            throw DomainError("ReverseModel: gammas must be positive");
        }
        if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
            throw DomainError("ReverseModel: weights must be nonnegative");
        }
        for (double v : maps[i].a) {
            if (!std::isfinite(v)) throw DomainError("ReverseModel: map entries must be finite");
        }
        for (double v : maps[i].b) {
            if (!std::isfinite(v)) throw DomainError("ReverseModel: map entries must be finite");
        }
        sum += weights[i];
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw DomainError("ReverseModel: weights must sum to 1, got " + std::to_string(sum));
    }
}

void ReverseModel::renormalize() {
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (sum <= 0.0) throw DomainError("ReverseModel: weight sum must be positive");
    for (double& w : weights) w /= sum;
}

ReverseModel ReverseModel::identity() {
    ReverseModel m;
    m.gammas = {1.0};
    m.maps = {AffineColorMap::identity()};
    m.weights = {1.0};
    return m;
}

PatchPair::PatchPair(RgbImage rgb_patch, PackedRaw raw_patch, int stratum_index)
    : rgb(std::move(rgb_patch)), raw(std::move(raw_patch)), stratum(stratum_index) {
    if (rgb.height != 2 * raw.height || rgb.width != 2 * raw.width) {
        throw DimensionError("PatchPair: rgb must be exactly twice the raw resolution, got rgb " +
                             std::to_string(rgb.height) + "x" + std::to_string(rgb.width) + " vs raw " +
                             std::to_string(raw.height) + "x" + std::to_string(raw.width));
    }
}

PackedRaw predict_continuous(const ReverseModel& model, const RgbImage& rgb) {
    model.validate();
    const int k = model.candidate_count();
    const std::size_t pixels = static_cast<std::size_t>(rgb.height) * rgb.width;

    // Blended linear reconstruction per full-resolution pixel.
    std::vector<double> blend(pixels * 3);
    for (std::size_t p = 0; p < pixels; ++p) {
        std::array<double, 3> x_lin;
        for (int c = 0; c < 3; ++c) {
            x_lin[c] = srgb_transfer(rgb.samples[p * 3 + c], TransferDirection::decode);
        }
        for (int c = 0; c < 3; ++c) blend[p * 3 + c] = 0.0;
        for (int i = 0; i < k; ++i) {
            const double gamma = model.gammas[i];
            const AffineColorMap& map = model.maps[i];
            std::array<double, 3> u;
            for (int c = 0; c < 3; ++c) u[c] = pow_gamma(x_lin[c], gamma);
            for (int c = 0; c < 3; ++c) {
                const double z = map.a[c * 3 + 0] * u[0] + map.a[c * 3 + 1] * u[1] +
                                 map.a[c * 3 + 2] * u[2] + map.b[c];
                blend[p * 3 + c] += model.weights[i] * pow_gamma(clamp01(z), gamma);
            }
        }
    }

    const int ph = rgb.height / 2;
    const int pw = rgb.width / 2;
    auto pixel = [&](int i, int j, int c) {
        return blend[(static_cast<std::size_t>(i) * rgb.width + j) * 3 + c];
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
    return PackedRaw(ph, pw, std::move(out));
}

PackedRaw predict(const ReverseModel& model, const RgbImage& rgb) {
    return quantize12(predict_continuous(model, rgb));
}

PackedRaw predict_with_transform_continuous(const ColorTransform& transform, const RgbImage& rgb) {
    transform.validate();
    IspMetadata meta;
    meta.ccm = transform.m;
    return inverse_isp_continuous(rgb, meta);
}

PackedRaw predict_with_transform(const ColorTransform& transform, const RgbImage& rgb) {
    return quantize12(predict_with_transform_continuous(transform, rgb));
}

std::vector<double> project_to_simplex(std::vector<double> v) {
    if (v.empty()) throw DimensionError("project_to_simplex: empty input");
    for (double x : v) {
        if (!std::isfinite(x)) throw DomainError("project_to_simplex: entries must be finite");
    }
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double running = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        running += u[j];
        const double candidate = (1.0 - running) / static_cast<double>(j + 1);
        if (u[j] + candidate > 0.0) tau = candidate;
    }
    for (double& x : v) x = std::max(x + tau, 0.0);
    // Guard against accumulated rounding so callers always see a simplex point.
    double sum = 0.0;
    for (double x : v) sum += x;
    for (double& x : v) x /= sum;
    return v;
}

double patch_luminance(const PackedRaw& raw) {
    double sum = 0.0;
    for (double v : raw.samples) sum += v;
    return sum / static_cast<double>(raw.samples.size());
}

std::vector<std::size_t> stratified_select(std::span<const double> luminance, int n, int bins,
                                           std::uint64_t seed) {
    if (bins <= 0) throw DomainError("stratified_select: bins must be positive");
    if (n < 0) throw DomainError("stratified_select: n must be nonnegative");

    std::vector<std::vector<std::size_t>> members(bins);
    for (std::size_t i = 0; i < luminance.size(); ++i) {
        const double lum = luminance[i];
        if (!std::isfinite(lum) || lum < 0.0 || lum > 1.0) {
            throw DomainError("stratified_select: luminance must be in [0, 1]");
        }
        int b = static_cast<int>(lum * bins);
        if (b >= bins) b = bins - 1;
        members[b].push_back(i);
    }

    // Near-equal quotas: the first n % bins bins take the extra slot.
    std::vector<std::size_t> take(bins, 0);
    long long deficit = 0;
    for (int b = 0; b < bins; ++b) {
        const std::size_t quota = static_cast<std::size_t>(n / bins) + (b < n % bins ? 1 : 0);
        take[b] = std::min(quota, members[b].size());
        deficit += static_cast<long long>(quota - take[b]);
    }
    // Hand shortfall slots one at a time to the bin with the most unused
    // candidates; ties go to the lower bin index.
    while (deficit > 0) {
        int best = -1;
        std::size_t best_room = 0;
        for (int b = 0; b < bins; ++b) {
            const std::size_t room = members[b].size() - take[b];
            if (room > best_room) {
                best_room = room;
                best = b;
            }
        }
        if (best < 0) break;  // pool exhausted; return fewer than n
        ++take[best];
        --deficit;
    }

    Rng rng(seed);
    std::vector<std::size_t> picked;
    picked.reserve(static_cast<std::size_t>(n));
    for (int b = 0; b < bins; ++b) {
        std::vector<std::size_t>& pool = members[b];
        for (std::size_t i = 0; i < take[b]; ++i) {
            const std::size_t j = i + rng.next_below(pool.size() - i);
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
    }
    return picked;
}

std::vector<PatchPair> stratified_sample(const std::vector<PatchPair>& pairs, int n, int bins,
                                         std::uint64_t seed) {
    std::vector<double> lum(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) lum[i] = patch_luminance(pairs[i].raw);
    const std::vector<std::size_t> idx = stratified_select(lum, n, bins, seed);
    std::vector<PatchPair> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        PatchPair p = pairs[i];
        int b = static_cast<int>(lum[i] * bins);
        if (b >= bins) b = bins - 1;
        p.stratum = b;
        out.push_back(std::move(p));
    }
    return out;
}

PackedRaw tta_predict(const std::function<PackedRaw(const RgbImage&)>& predict_continuous_fn,
                      const RgbImage& rgb, TtaMode mode) {
    if (mode == TtaMode::none) {
        return quantize12(predict_continuous_fn(rgb));
    }
    std::vector<int> transforms;
    if (mode == TtaMode::flip2) {
        transforms = {0, 1, 2};  // identity, column flip, row flip
    } else {
        transforms = {0, 1, 2, 3, 4, 5, 6, 7};
    }
    PackedRaw sum;
    for (std::size_t i = 0; i < transforms.size(); ++i) {
        const Dihedral t{transforms[i]};
        const PackedRaw pred = predict_continuous_fn(dihedral_rgb(rgb, t));
        const PackedRaw undone = dihedral_packed(pred, inverse(t));
        if (i == 0) {
            sum = undone;
        } else {
            if (undone.height != sum.height || undone.width != sum.width) {
                throw DimensionError("tta_predict: predictor changed output dimensions");
            }
            for (std::size_t s = 0; s < sum.samples.size(); ++s) sum.samples[s] += undone.samples[s];
        }
    }
    const double scale = 1.0 / static_cast<double>(transforms.size());
    std::vector<double> avg(sum.samples.size());
    for (std::size_t s = 0; s < avg.size(); ++s) avg[s] = sum.samples[s] * scale;
    return quantize12(PackedRaw(sum.height, sum.width, std::move(avg)));
}

}  // namespace risp
