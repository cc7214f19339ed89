#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "risp/accum.hpp"
#include "risp/bayer.hpp"
#include "risp/error.hpp"
#include "risp/losses.hpp"
#include "risp/model.hpp"

namespace risp {

namespace {

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

inline double pow_gamma(double x, double gamma) { return gamma == 1.0 ? x : std::pow(x, gamma); }

// One supervised scalar: a packed-RAW sample, the decoded RGB vector at its
// co-sited full-resolution pixel, and which linear RGB channel it observes
// (G1 and G2 both observe G).
struct FitSample {
    std::array<double, 3> x_lin;
    double target;
    int channel;
};

std::vector<FitSample> build_samples(const std::vector<PatchPair>& pairs) {
    std::vector<FitSample> samples;
    std::size_t total = 0;
    for (const PatchPair& p : pairs) total += p.raw.samples.size();
    samples.reserve(total);
    for (const PatchPair& pair : pairs) {
        for (int i = 0; i < pair.raw.height; ++i) {
            for (int j = 0; j < pair.raw.width; ++j) {
                // Full-resolution coordinates of the four RGGB sites.
                const int si[4] = {2 * i, 2 * i, 2 * i + 1, 2 * i + 1};
                const int sj[4] = {2 * j, 2 * j + 1, 2 * j, 2 * j + 1};
                const int rgb_channel[4] = {0, 1, 1, 2};
                for (int c = 0; c < PackedRaw::kChannels; ++c) {
                    FitSample s;
                    for (int cc = 0; cc < 3; ++cc) {
                        s.x_lin[cc] = srgb_transfer(pair.rgb.at(si[c], sj[c], cc),
                                                    TransferDirection::decode);
                    }
                    s.target = pair.raw.at(i, j, c);
                    s.channel = rgb_channel[c];
                    samples.push_back(s);
                }
            }
        }
    }
    if (samples.empty()) throw DomainError("fit: empty dataset");
    return samples;
}

// Loss kernel selected by FitConfig/FitLoss: per-sample value and d/d(pred).
struct LossKernel {
    double (*value)(double, double);
    double (*deriv)(double, double);
};

LossKernel kernel_of(FitLoss loss) {
    switch (loss) {
        case FitLoss::l1:
            return {loss_terms::l1, loss_terms::l1_deriv};
        case FitLoss::mse:
            return {loss_terms::mse, loss_terms::mse_deriv};
        case FitLoss::l1_plus_l2:
            return {[](double p, double t) { return loss_terms::l1(p, t) + loss_terms::mse(p, t); },
                    [](double p, double t) {
                        return loss_terms::l1_deriv(p, t) + loss_terms::mse_deriv(p, t);
                    }};
        case FitLoss::log_l2_plus_clipped_l1:
            return {[](double p, double t) {
                        return loss_terms::log_l2(p, t) + loss_terms::clipped_l1(p, t);
                    },
                    [](double p, double t) {
                        return loss_terms::log_l2_deriv(p, t) + loss_terms::clipped_l1_deriv(p, t);
                    }};
    }
    throw UsageError("unknown fit loss selector");
}

// Gamma-domain features of one sample for one candidate.
inline std::array<double, 3> lift(const std::array<double, 3>& x_lin, double gamma) {
    return {pow_gamma(x_lin[0], gamma), pow_gamma(x_lin[1], gamma), pow_gamma(x_lin[2], gamma)};
}

// Closed-form least squares for candidate k: per output channel, regress
// target^(1/gamma) on the lifted features plus an intercept.
AffineColorMap solve_candidate(const std::vector<FitSample>& samples, double gamma, int candidate) {
    AffineColorMap map;
    for (int c = 0; c < 3; ++c) {
        std::size_t rows = 0;
        for (const FitSample& s : samples) rows += (s.channel == c) ? 1 : 0;
        if (rows < 4) {
            throw IllConditionedFitError(
                "fit: candidate " + std::to_string(candidate) + " channel " + std::to_string(c) +
                    ": fewer samples than unknowns",
                candidate);
        }
        Eigen::MatrixXd design(rows, 4);
        Eigen::VectorXd target(rows);
        std::size_t r = 0;
        for (const FitSample& s : samples) {
            if (s.channel != c) continue;
            const std::array<double, 3> u = lift(s.x_lin, gamma);
            design(r, 0) = u[0];
            design(r, 1) = u[1];
            design(r, 2) = u[2];
            design(r, 3) = 1.0;
            target(r) = pow_gamma(s.target, 1.0 / gamma);
            ++r;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() < 4) {
            throw IllConditionedFitError(
                "fit: candidate " + std::to_string(candidate) + " channel " + std::to_string(c) +
                    ": rank-deficient design matrix",
                candidate);
        }
        const Eigen::Vector4d beta = qr.solve(target);
        map.a[c * 3 + 0] = beta(0);
        map.a[c * 3 + 1] = beta(1);
        map.a[c * 3 + 2] = beta(2);
        map.b[c] = beta(3);
    }
    return map;
}

// Candidate predictions for fixed maps; the weight updates only reweight
// these cached values.
std::vector<double> candidate_predictions(const std::vector<FitSample>& samples,
                                          const ReverseModel& model) {
    const int k = model.candidate_count();
    std::vector<double> preds(samples.size() * static_cast<std::size_t>(k));
    for (std::size_t s = 0; s < samples.size(); ++s) {
        for (int i = 0; i < k; ++i) {
            const double gamma = model.gammas[i];
            const std::array<double, 3> u = lift(samples[s].x_lin, gamma);
            const AffineColorMap& map = model.maps[i];
            const int c = samples[s].channel;
            const double z = map.a[c * 3 + 0] * u[0] + map.a[c * 3 + 1] * u[1] +
                             map.a[c * 3 + 2] * u[2] + map.b[c];
            preds[s * k + i] = pow_gamma(clamp01(z), gamma);
        }
    }
    return preds;
}

double weighted_objective(const std::vector<FitSample>& samples, const std::vector<double>& preds,
                          const std::vector<double>& weights, const LossKernel& kernel) {
    const int k = static_cast<int>(weights.size());
    StableSum sum;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        double p = 0.0;
        for (int i = 0; i < k; ++i) p += weights[i] * preds[s * k + i];
        sum.add(kernel.value(p, samples[s].target));
    }
    return sum.mean();
}

std::vector<double> weight_gradient(const std::vector<FitSample>& samples,
                                    const std::vector<double>& preds,
                                    const std::vector<double>& weights, const LossKernel& kernel) {
    const int k = static_cast<int>(weights.size());
    std::vector<StableSum> grad(k);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        double p = 0.0;
        for (int i = 0; i < k; ++i) p += weights[i] * preds[s * k + i];
        const double d = kernel.deriv(p, samples[s].target);
        for (int i = 0; i < k; ++i) grad[i].add(d * preds[s * k + i]);
    }
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = grad[i].mean();
    return out;
}

}  // namespace

FitResult fit(const std::vector<PatchPair>& pairs, const std::vector<double>& gammas,
              const FitConfig& cfg) {
    if (gammas.empty()) throw DomainError("fit: needs at least one gamma candidate");
    for (double g : gammas) {
        if (!std::isfinite(g) || g <= 0.0) throw DomainError("fit: gammas must be positive");
    }
    const std::vector<FitSample> samples = build_samples(pairs);
    const LossKernel kernel = kernel_of(cfg.loss);
    const int k = static_cast<int>(gammas.size());

    ReverseModel model;
    model.gammas = gammas;
    model.maps.resize(k);
    model.weights.assign(k, 1.0 / static_cast<double>(k));

    // Map pass: independent of the weights, so one pass solves it for good.
    for (int i = 0; i < k; ++i) model.maps[i] = solve_candidate(samples, gammas[i], i);

    const std::vector<double> preds = candidate_predictions(samples, model);

    FitResult result;
    double objective = weighted_objective(samples, preds, model.weights, kernel);
    result.objective_history.push_back(objective);
    ReverseModel best = model;
    double best_objective = objective;

    constexpr int kMaxBacktracks = 30;
    for (int iter = 0; iter < cfg.max_outer_iters; ++iter) {
        const std::vector<double> grad = weight_gradient(samples, preds, model.weights, kernel);
        double step = cfg.weight_step;
        bool accepted = false;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            std::vector<double> trial(model.weights);
            for (int i = 0; i < k; ++i) trial[i] -= step * grad[i];
            trial = project_to_simplex(std::move(trial));
            const double trial_objective = weighted_objective(samples, preds, trial, kernel);
            if (trial_objective < objective) {
                model.weights = std::move(trial);
                objective = trial_objective;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        assert(objective <= result.objective_history.back());
        const double improvement = result.objective_history.back() - objective;
        result.objective_history.push_back(objective);
        if (objective < best_objective) {
            best = model;
            best_objective = objective;
        }
        if (improvement < cfg.tol) break;
    }

    result.model = std::move(best);
    result.objective = best_objective;
    return result;
}

std::pair<double, ModelGradient> objective_and_gradient(const ReverseModel& model,
                                                        const std::vector<PatchPair>& pairs,
                                                        FitLoss loss) {
    model.validate();
    const std::vector<FitSample> samples = build_samples(pairs);
    const LossKernel kernel = kernel_of(loss);
    const int k = model.candidate_count();

    ModelGradient grad;
    grad.d_weights.assign(k, 0.0);
    grad.d_maps.assign(k, AffineColorMap{{0, 0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0}});

    std::vector<StableSum> d_w(k);
    std::vector<std::array<StableSum, 12>> d_m(k);  // 9 matrix + 3 bias slots
    StableSum value;

    std::vector<std::array<double, 3>> u(k);
    std::vector<double> z(k), y(k);
    for (const FitSample& s : samples) {
        const int c = s.channel;
        double p = 0.0;
        for (int i = 0; i < k; ++i) {
            u[i] = lift(s.x_lin, model.gammas[i]);
            const AffineColorMap& map = model.maps[i];
            z[i] = map.a[c * 3 + 0] * u[i][0] + map.a[c * 3 + 1] * u[i][1] +
                   map.a[c * 3 + 2] * u[i][2] + map.b[c];
            y[i] = pow_gamma(clamp01(z[i]), model.gammas[i]);
            p += model.weights[i] * y[i];
        }
        value.add(kernel.value(p, s.target));
        const double d = kernel.deriv(p, s.target);
        for (int i = 0; i < k; ++i) {
            d_w[i].add(d * y[i]);
            double dz = 0.0;
            if (z[i] > 0.0 && z[i] < 1.0) {  // clamp subgradient is zero outside
                const double g = model.gammas[i];
                dz = d * model.weights[i] * (g == 1.0 ? 1.0 : g * std::pow(z[i], g - 1.0));
            }
            for (int j = 0; j < 3; ++j) d_m[i][c * 3 + j].add(dz * u[i][j]);
            d_m[i][9 + c].add(dz);
        }
    }

    const double n = static_cast<double>(samples.size());
    for (int i = 0; i < k; ++i) {
        grad.d_weights[i] = d_w[i].value() / n;
        for (int j = 0; j < 9; ++j) grad.d_maps[i].a[j] = d_m[i][j].value() / n;
        for (int j = 0; j < 3; ++j) grad.d_maps[i].b[j] = d_m[i][9 + j].value() / n;
    }
    return {value.mean(), std::move(grad)};
}

ColorTransform fit_global_matrix(const std::vector<PatchPair>& pairs) {
    // One row per packed site: RAW (R, mean(G1, G2), B) against the mean
    // decoded RGB of the co-sited 2x2 block.
    std::size_t rows = 0;
    for (const PatchPair& p : pairs) rows += static_cast<std::size_t>(p.raw.height) * p.raw.width;
    if (rows == 0) throw DomainError("fit_global_matrix: empty dataset");
    if (rows < 3) {
        throw IllConditionedFitError("fit_global_matrix: fewer sites than unknowns", 0);
    }

    Eigen::MatrixXd raw(rows, 3);
    Eigen::MatrixXd rgb(rows, 3);
    std::size_t r = 0;
    for (const PatchPair& pair : pairs) {
        for (int i = 0; i < pair.raw.height; ++i) {
            for (int j = 0; j < pair.raw.width; ++j) {
                raw(r, 0) = pair.raw.at(i, j, kR);
                raw(r, 1) = (pair.raw.at(i, j, kG1) + pair.raw.at(i, j, kG2)) * 0.5;
                raw(r, 2) = pair.raw.at(i, j, kB);
                for (int c = 0; c < 3; ++c) {
                    double acc = 0.0;
                    for (int di = 0; di < 2; ++di) {
                        for (int dj = 0; dj < 2; ++dj) {
                            acc += srgb_transfer(pair.rgb.at(2 * i + di, 2 * j + dj, c),
                                                 TransferDirection::decode);
                        }
                    }
                    rgb(r, c) = acc * 0.25;
                }
                ++r;
            }
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(raw);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) {
        throw IllConditionedFitError("fit_global_matrix: rank-deficient design matrix", 0);
    }

    ColorTransform out;
    for (int c = 0; c < 3; ++c) {
        const Eigen::Vector3d row = qr.solve(rgb.col(c));
        out.m[c * 3 + 0] = row(0);
        out.m[c * 3 + 1] = row(1);
        out.m[c * 3 + 2] = row(2);
    }
    out.validate();  // prediction needs the inverse; refuse a singular estimate
    return out;
}

}  // namespace risp
