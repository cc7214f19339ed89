#include "risp/losses.hpp"

#include <cmath>

#include "risp/accum.hpp"
#include "risp/error.hpp"
#include "risp/metrics.hpp"

namespace risp {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(what) + ": inputs differ in length");
    }
    if (a.empty()) throw DimensionError(std::string(what) + ": inputs are empty");
}

template <typename Term>
double reduce(std::span<const double> pred, std::span<const double> target, Term term) {
    StableSum s;
    for (std::size_t i = 0; i < pred.size(); ++i) s.add(term(pred[i], target[i]));
    return s.mean();
}

}  // namespace

double l1_loss(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "l1_loss");
    return reduce(pred, target, [](double p, double t) { return loss_terms::l1(p, t); });
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "mse_loss");
    return reduce(pred, target, [](double p, double t) { return loss_terms::mse(p, t); });
}

double color_loss(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "color_loss");
    for (double t : target) {
        if (!std::isfinite(t) || t < 0.0) throw DomainError("color_loss: target must be >= 0");
    }
    return reduce(pred, target, [](double p, double t) { return loss_terms::color(p, t); });
}

double hard_log_loss(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "hard_log_loss");
    return reduce(pred, target, [](double p, double t) { return loss_terms::hard_log(p, t); });
}

double log_l2_loss(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "log_l2_loss");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!std::isfinite(pred[i]) || pred[i] < 0.0 || !std::isfinite(target[i]) || target[i] < 0.0) {
            throw DomainError("log_l2_loss: inputs must be finite and >= 0");
        }
    }
    return reduce(pred, target, [](double p, double t) { return loss_terms::log_l2(p, t); });
}

double clipped_l1_loss(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "clipped_l1_loss");
    return reduce(pred, target, [](double p, double t) { return loss_terms::clipped_l1(p, t); });
}

double matrix_loss_abs(const std::array<double, 9>& a, const std::array<double, 9>& b) {
    StableSum s;
    for (int i = 0; i < 9; ++i) s.add(std::fabs(a[i] - b[i]));
    return s.mean();
}

double matrix_loss_mse(const std::array<double, 9>& a, const std::array<double, 9>& b) {
    StableSum s;
    for (int i = 0; i < 9; ++i) s.add((a[i] - b[i]) * (a[i] - b[i]));
    return s.mean();
}

double ulite_loss(std::span<const double> pred, std::span<const double> target,
                  const std::array<double, 9>& m_pred, const std::array<double, 9>& m_ref,
                  const LossWeights& w) {
    return w.lambda_l1 * l1_loss(pred, target) +
           w.lambda_color * color_loss(pred, target) +
           w.lambda_matrix * matrix_loss_abs(m_pred, m_ref);
}

double unafnet_loss(const PackedRaw& pred, const PackedRaw& target, const LossWeights& w) {
    return w.w_mse * mse_loss(pred.samples, target.samples) +
           w.w_ssim * (1.0 - ssim(pred, target)) +
           w.w_hardlog * hard_log_loss(pred.samples, target.samples);
}

double gar2net_loss(std::span<const double> pred, std::span<const double> target,
                    const LossWeights& w) {
    return w.lambda1 * l1_loss(pred, target) + w.lambda2 * mse_loss(pred, target);
}

double dualraw_loss(std::span<const double> pred, std::span<const double> target) {
    return log_l2_loss(pred, target) + clipped_l1_loss(pred, target);
}

double tdmf_paths_loss(std::span<const double> target,
                       std::span<const double> pred_direct,
                       std::span<const double> pred_gamma_input,
                       std::span<const double> pred_gamma_output,
                       double gamma) {
    if (!std::isfinite(gamma) || gamma <= 0.0) {
        throw DomainError("tdmf_paths_loss: gamma must be positive");
    }
    check_pair(pred_direct, target, "tdmf_paths_loss");
    check_pair(pred_gamma_input, target, "tdmf_paths_loss");
    check_pair(pred_gamma_output, target, "tdmf_paths_loss");
    std::vector<double> lifted(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (!std::isfinite(target[i]) || target[i] < 0.0) {
            throw DomainError("tdmf_paths_loss: target must be >= 0");
        }
        lifted[i] = std::pow(target[i], 1.0 / gamma);
    }
    return l1_loss(pred_direct, target) +
           l1_loss(pred_gamma_input, target) +
           l1_loss(pred_gamma_output, lifted);
}

}  // namespace risp
