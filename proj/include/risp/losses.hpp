#pragma once

#include <array>
#include <cmath>
#include <span>

#include "risp/image.hpp"

namespace risp {

// Stabilizer constants used by the losses below.
constexpr double kEpsColor = 1e-4;    // ratio loss
constexpr double kEpsHardLog = 1e-6;  // hard-log loss
constexpr double kEpsLog = 1e-3;      // log-domain L2

// Published combination weights, kept together so the combined losses and
// their tests share one source of truth.
struct LossWeights {
    // mean-absolute + ratio-color + matrix-consistency combination
    double lambda_l1 = 1.0;
    double lambda_color = 0.001;
    double lambda_matrix = 0.1;

    // mse + ssim + hard-log combination
    double w_mse = 1.0;
    double w_ssim = 0.05;
    double w_hardlog = 0.1;

    // plain l1 + l2 combination
    double lambda1 = 1.0;
    double lambda2 = 1.0;

    // companions of the log-L2 + clipped-L1 combination; they weight a
    // segmentation-mask term and a learned perceptual term that this
    // library does not compute, and are carried for completeness.
    double tau1 = 0.2;
    double tau2 = 0.5;

    // perceptual weight of the three-path combination (term not computed).
    double lambda_perceptual = 0.01;
};

namespace loss_terms {

// Per-sample kernels shared by the reductions here and by the fitting
// gradients, so both always agree on the math.  deriv is d(term)/d(pred);
// the clamp subgradient is zero outside the open interval.
inline double l1(double p, double t) { return std::fabs(p - t); }
inline double l1_deriv(double p, double t) { return p > t ? 1.0 : (p < t ? -1.0 : 0.0); }

inline double mse(double p, double t) { return (p - t) * (p - t); }
inline double mse_deriv(double p, double t) { return 2.0 * (p - t); }

inline double color(double p, double t) { return std::fabs((p + kEpsColor) / (t + kEpsColor) - 1.0); }

inline double hard_log(double p, double t) {
    const double d = std::fabs(p - t);
    return -std::log(1.0 - (d < 1.0 ? d : 1.0) + kEpsHardLog);
}

inline double log_l2(double p, double t) {
    const double d = std::log(p + kEpsLog) - std::log(t + kEpsLog);
    return d * d;
}
inline double log_l2_deriv(double p, double t) {
    return 2.0 * (std::log(p + kEpsLog) - std::log(t + kEpsLog)) / (p + kEpsLog);
}

inline double clipped_l1(double p, double t) {
    const double c = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    return std::fabs(c - t);
}
inline double clipped_l1_deriv(double p, double t) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return p > t ? 1.0 : (p < t ? -1.0 : 0.0);
}

}  // namespace loss_terms

// Means over all samples.  Inputs must have equal, nonzero length; the
// reductions are order-independent, so identical spatial permutations of
// both arguments leave every value bit-exact.
double l1_loss(std::span<const double> pred, std::span<const double> target);
double mse_loss(std::span<const double> pred, std::span<const double> target);

// mean |(pred + eps) / (target + eps) - 1| with eps = 1e-4 on both sides,
// so a perfect prediction scores exactly zero even on black pixels.
double color_loss(std::span<const double> pred, std::span<const double> target);

// mean -log(1 - min(|pred - target|, 1) + 1e-6); equals -log(1 + 1e-6) at a
// perfect match and -log(1e-6) once the error saturates.
double hard_log_loss(std::span<const double> pred, std::span<const double> target);

// mean squared difference of ln(x + 1e-3); requires nonnegative inputs.
double log_l2_loss(std::span<const double> pred, std::span<const double> target);

// mean |clamp(pred, 0, 1) - target|; the prediction may be out of range.
double clipped_l1_loss(std::span<const double> pred, std::span<const double> target);

// Color-matrix consistency, mean over the 9 entries.  The absolute form is
// the default used by ulite_loss; the squared form is kept alongside it.
double matrix_loss_abs(const std::array<double, 9>& a, const std::array<double, 9>& b);
double matrix_loss_mse(const std::array<double, 9>& a, const std::array<double, 9>& b);

// Combined objectives, each an explicitly weighted sum of the parts above.
double ulite_loss(std::span<const double> pred, std::span<const double> target,
                  const std::array<double, 9>& m_pred, const std::array<double, 9>& m_ref,
                  const LossWeights& w = {});

double unafnet_loss(const PackedRaw& pred, const PackedRaw& target, const LossWeights& w = {});

double gar2net_loss(std::span<const double> pred, std::span<const double> target,
                    const LossWeights& w = {});

double dualraw_loss(std::span<const double> pred, std::span<const double> target);

// Three supervision paths against one target: two in the linear RAW domain
// and one against the gamma-lifted target y^(1/gamma).
double tdmf_paths_loss(std::span<const double> target,
                       std::span<const double> pred_direct,
                       std::span<const double> pred_gamma_input,
                       std::span<const double> pred_gamma_output,
                       double gamma);

}  // namespace risp
