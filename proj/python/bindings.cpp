// Python bindings for the RAW reconstruction core.  Images cross the
// boundary as float64 numpy arrays: mosaics are (H, W), packed RAW is
// (H, W, 4) in R, G1, G2, B order, RGB is (H, W, 3).  Everything is copied
// on the way in and out; none of the returned arrays alias C++ storage.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "risp/bayer.hpp"
#include "risp/error.hpp"
#include "risp/image.hpp"
#include "risp/io.hpp"
#include "risp/isp.hpp"
#include "risp/losses.hpp"
#include "risp/metrics.hpp"
#include "risp/model.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> flat_copy(const DoubleArray& a) {
    const double* data = a.data();
    return std::vector<double>(data, data + a.size());
}

std::span<const double> flat_span(const DoubleArray& a) {
    return std::span<const double>(a.data(), static_cast<std::size_t>(a.size()));
}

risp::Mosaic to_mosaic(const DoubleArray& a) {
    if (a.ndim() != 2) throw py::value_error("mosaic must be a (height, width) array");
    return risp::Mosaic(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), flat_copy(a));
}

risp::PackedRaw to_packed(const DoubleArray& a) {
    if (a.ndim() != 3 || a.shape(2) != risp::PackedRaw::kChannels)
        throw py::value_error("packed raw must be a (height, width, 4) array");
    return risp::PackedRaw(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                           flat_copy(a));
}

risp::RgbImage to_rgb(const DoubleArray& a) {
    if (a.ndim() != 3 || a.shape(2) != risp::RgbImage::kChannels)
        throw py::value_error("rgb image must be a (height, width, 3) array");
    return risp::RgbImage(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                          flat_copy(a));
}

py::array_t<double> from_mosaic(const risp::Mosaic& m) {
    py::array_t<double> out({m.height, m.width});
    std::memcpy(out.mutable_data(), m.samples.data(), m.samples.size() * sizeof(double));
    return out;
}

py::array_t<double> from_packed(const risp::PackedRaw& p) {
    py::array_t<double> out({p.height, p.width, risp::PackedRaw::kChannels});
    std::memcpy(out.mutable_data(), p.samples.data(), p.samples.size() * sizeof(double));
    return out;
}

py::array_t<double> from_rgb(const risp::RgbImage& img) {
    py::array_t<double> out({img.height, img.width, risp::RgbImage::kChannels});
    std::memcpy(out.mutable_data(), img.samples.data(), img.samples.size() * sizeof(double));
    return out;
}

risp::Dihedral to_dihedral(int index) {
    if (index < 0 || index >= risp::Dihedral::kCount)
        throw py::value_error("dihedral index must be in [0, 7]");
    return risp::Dihedral{index};
}

std::array<double, 9> to_matrix9(const DoubleArray& a) {
    if (a.size() != 9) throw py::value_error("color matrix must have 9 entries, e.g. shape (3, 3)");
    std::array<double, 9> out;
    std::memcpy(out.data(), a.data(), 9 * sizeof(double));
    return out;
}

py::array_t<double> from_matrix9(const std::array<double, 9>& m) {
    py::array_t<double> out({3, 3});
    std::memcpy(out.mutable_data(), m.data(), 9 * sizeof(double));
    return out;
}

template <typename Fn>
py::array_t<double> map_elementwise(const DoubleArray& a, Fn fn) {
    py::array_t<double> out(std::vector<py::ssize_t>(a.shape(), a.shape() + a.ndim()));
    const double* src = a.data();
    double* dst = out.mutable_data();
    for (py::ssize_t i = 0; i < a.size(); ++i) dst[i] = fn(src[i]);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "RAW reconstruction core: Bayer packing, dihedral transforms, ISP "
        "pipelines, mixture fitting, losses and metrics";
    m.attr("__version__") = "0.1.0";

    // Domain and dimension problems become ValueError, file problems become
    // OSError; everything else keeps the default RuntimeError mapping.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const risp::IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const risp::DimensionError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const risp::DomainError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const risp::ParseError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const risp::UsageError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    // --- Parameter types ---------------------------------------------------

    py::class_<risp::IspMetadata>(m, "IspMetadata",
                                  "Per-device rendering parameters: white-balance gains, "
                                  "row-major 3x3 color matrix and sensor levels.")
        .def(py::init<>())
        .def_readwrite("wb_gains", &risp::IspMetadata::wb_gains)
        .def_readwrite("ccm", &risp::IspMetadata::ccm)
        .def_readwrite("black_level", &risp::IspMetadata::black_level)
        .def_readwrite("white_level", &risp::IspMetadata::white_level)
        .def("validate", &risp::IspMetadata::validate)
        .def_static("identity", &risp::IspMetadata::identity)
        .def_static("synthetic_default", &risp::IspMetadata::synthetic_default);

    py::class_<risp::ColorTransform>(m, "ColorTransform",
                                     "Global linear map rgb_linear = M @ raw_linear.")
        .def(py::init<>())
        .def(py::init([](const DoubleArray& mat) { return risp::ColorTransform{to_matrix9(mat)}; }),
             py::arg("m"))
        .def_property(
            "m", [](const risp::ColorTransform& t) { return from_matrix9(t.m); },
            [](risp::ColorTransform& t, const DoubleArray& mat) { t.m = to_matrix9(mat); })
        .def("validate", &risp::ColorTransform::validate);

    py::class_<risp::AffineColorMap>(m, "AffineColorMap",
                                     "Affine color map y = A @ x + b in one gamma domain.")
        .def(py::init<>())
        .def_readwrite("a", &risp::AffineColorMap::a)
        .def_readwrite("b", &risp::AffineColorMap::b)
        .def_static("identity", &risp::AffineColorMap::identity);

    py::class_<risp::ReverseModel>(m, "ReverseModel",
                                   "Mixture of gamma-domain affine reconstructions with "
                                   "simplex weights shared across channels and pixels.")
        .def(py::init<>())
        .def_readwrite("gammas", &risp::ReverseModel::gammas)
        .def_readwrite("maps", &risp::ReverseModel::maps)
        .def_readwrite("weights", &risp::ReverseModel::weights)
        .def("candidate_count", &risp::ReverseModel::candidate_count)
        .def("validate", &risp::ReverseModel::validate)
        .def("renormalize", &risp::ReverseModel::renormalize)
        .def_static("identity", &risp::ReverseModel::identity);

    py::enum_<risp::FitLoss>(m, "FitLoss")
        .value("l1", risp::FitLoss::l1)
        .value("mse", risp::FitLoss::mse)
        .value("l1_plus_l2", risp::FitLoss::l1_plus_l2)
        .value("log_l2_plus_clipped_l1", risp::FitLoss::log_l2_plus_clipped_l1);

    py::class_<risp::FitConfig>(m, "FitConfig")
        .def(py::init<>())
        .def_readwrite("max_outer_iters", &risp::FitConfig::max_outer_iters)
        .def_readwrite("weight_step", &risp::FitConfig::weight_step)
        .def_readwrite("tol", &risp::FitConfig::tol)
        .def_readwrite("seed", &risp::FitConfig::seed)
        .def_readwrite("loss", &risp::FitConfig::loss);

    py::class_<risp::PatchPair>(m, "PatchPair",
                                "Supervised pair: RGB patch at exactly twice the packed "
                                "RAW resolution.")
        .def(py::init([](const DoubleArray& rgb, const DoubleArray& raw, int stratum) {
                 return risp::PatchPair(to_rgb(rgb), to_packed(raw), stratum);
             }),
             py::arg("rgb"), py::arg("raw"), py::arg("stratum") = 0)
        .def_property_readonly("rgb", [](const risp::PatchPair& p) { return from_rgb(p.rgb); })
        .def_property_readonly("raw", [](const risp::PatchPair& p) { return from_packed(p.raw); })
        .def_readwrite("stratum", &risp::PatchPair::stratum);

    py::class_<risp::FitResult>(m, "FitResult")
        .def_readonly("model", &risp::FitResult::model)
        .def_readonly("objective", &risp::FitResult::objective)
        .def_readonly("objective_history", &risp::FitResult::objective_history);

    py::class_<risp::ModelGradient>(m, "ModelGradient")
        .def_readonly("d_weights", &risp::ModelGradient::d_weights)
        .def_readonly("d_maps", &risp::ModelGradient::d_maps);

    py::class_<risp::LossWeights>(m, "LossWeights",
                                  "Weights of the combined objectives; defaults match the "
                                  "published combinations.")
        .def(py::init<>())
        .def_readwrite("lambda_l1", &risp::LossWeights::lambda_l1)
        .def_readwrite("lambda_color", &risp::LossWeights::lambda_color)
        .def_readwrite("lambda_matrix", &risp::LossWeights::lambda_matrix)
        .def_readwrite("w_mse", &risp::LossWeights::w_mse)
        .def_readwrite("w_ssim", &risp::LossWeights::w_ssim)
        .def_readwrite("w_hardlog", &risp::LossWeights::w_hardlog)
        .def_readwrite("lambda1", &risp::LossWeights::lambda1)
        .def_readwrite("lambda2", &risp::LossWeights::lambda2)
        .def_readwrite("tau1", &risp::LossWeights::tau1)
        .def_readwrite("tau2", &risp::LossWeights::tau2)
        .def_readwrite("lambda_perceptual", &risp::LossWeights::lambda_perceptual);

    py::enum_<risp::TtaMode>(m, "TtaMode")
        .value("none", risp::TtaMode::none)
        .value("flip2", risp::TtaMode::flip2)
        .value("dihedral8", risp::TtaMode::dihedral8);

    // --- Bayer layout and dihedral group ------------------------------------

    m.def(
        "pack_rggb", [](const DoubleArray& mosaic) { return from_packed(risp::pack_rggb(to_mosaic(mosaic))); },
        py::arg("mosaic"), "RGGB mosaic (2H, 2W) -> packed (H, W, 4) in R, G1, G2, B order.");
    m.def(
        "unpack_rggb", [](const DoubleArray& packed) { return from_mosaic(risp::unpack_rggb(to_packed(packed))); },
        py::arg("packed"), "Exact inverse of pack_rggb.");

    m.def(
        "dihedral_compose",
        [](int first, int then) { return risp::compose(to_dihedral(first), to_dihedral(then)).index; },
        py::arg("first"), py::arg("then"), "Index of 'apply first, then then'.");
    m.def(
        "dihedral_inverse", [](int t) { return risp::inverse(to_dihedral(t)).index; }, py::arg("t"));
    m.def(
        "dihedral_channel_source",
        [](int t, int c) { return risp::dihedral_channel_source(to_dihedral(t), c); }, py::arg("t"),
        py::arg("c"), "Source packed channel feeding channel c under dihedral_packed.");

    m.def(
        "dihedral_mosaic",
        [](const DoubleArray& a, int t) { return from_mosaic(risp::dihedral_mosaic(to_mosaic(a), to_dihedral(t))); },
        py::arg("mosaic"), py::arg("t"));
    m.def(
        "dihedral_rgb",
        [](const DoubleArray& a, int t) { return from_rgb(risp::dihedral_rgb(to_rgb(a), to_dihedral(t))); },
        py::arg("rgb"), py::arg("t"));
    m.def(
        "dihedral_packed",
        [](const DoubleArray& a, int t) { return from_packed(risp::dihedral_packed(to_packed(a), to_dihedral(t))); },
        py::arg("packed"), py::arg("t"),
        "Mosaic-faithful action: equals pack(dihedral(unpack(p))), so flips move "
        "samples between RGGB sites.");
    m.def(
        "dihedral_planes",
        [](const DoubleArray& a, int t) { return from_packed(risp::dihedral_planes(to_packed(a), to_dihedral(t))); },
        py::arg("packed"), py::arg("t"),
        "Color-preserving action on dense per-site color planes; transposition "
        "swaps the two green planes and flips shift the planes off the mosaic "
        "phase.");

    m.def(
        "quantize12", [](const DoubleArray& a) { return map_elementwise(a, [](double x) { return risp::quantize12(x); }); },
        py::arg("x"), "Snap to the nearest 12-bit code: round(clamp(x, 0, 1) * 4095) / 4095.");
    m.def("dequantize12", &risp::dequantize12, py::arg("code"));

    // --- ISP pipelines -------------------------------------------------------

    m.def(
        "srgb_decode",
        [](const DoubleArray& a) {
            return map_elementwise(a, [](double x) { return risp::srgb_transfer(x, risp::TransferDirection::decode); });
        },
        py::arg("x"), "Elementwise sRGB -> linear, clamped to [0, 1].");
    m.def(
        "srgb_encode",
        [](const DoubleArray& a) {
            return map_elementwise(a, [](double x) { return risp::srgb_transfer(x, risp::TransferDirection::encode); });
        },
        py::arg("x"), "Elementwise linear -> sRGB, clamped to [0, 1].");
    m.def(
        "power_gamma",
        [](const DoubleArray& a, double gamma, bool invert) {
            const auto dir = invert ? risp::GammaDirection::invert : risp::GammaDirection::apply;
            return map_elementwise(a, [gamma, dir](double x) { return risp::power_gamma(x, gamma, dir); });
        },
        py::arg("x"), py::arg("gamma"), py::arg("invert") = false,
        "Elementwise x**gamma on [0, 1]; invert uses exponent 1/gamma.");

    m.def(
        "bilinear_demosaic",
        [](const DoubleArray& mosaic) { return from_rgb(risp::bilinear_demosaic(to_mosaic(mosaic))); },
        py::arg("mosaic"), "RGGB mosaic -> full-resolution linear RGB with mirrored borders.");
    m.def(
        "forward_isp",
        [](const DoubleArray& raw, const risp::IspMetadata& meta) { return from_rgb(risp::forward_isp(to_packed(raw), meta)); },
        py::arg("raw"), py::arg("meta"),
        "Simulated rendering: packed RAW (H, W, 4) -> 8-bit-quantized sRGB (2H, 2W, 3).");
    m.def(
        "inverse_isp",
        [](const DoubleArray& rgb, const risp::IspMetadata& meta) { return from_packed(risp::inverse_isp(to_rgb(rgb), meta)); },
        py::arg("rgb"), py::arg("meta"),
        "Closed-form inversion: sRGB (2H, 2W, 3) -> packed RAW (H, W, 4), 12-bit quantized.");
    m.def(
        "inverse_isp_continuous",
        [](const DoubleArray& rgb, const risp::IspMetadata& meta) {
            return from_packed(risp::inverse_isp_continuous(to_rgb(rgb), meta));
        },
        py::arg("rgb"), py::arg("meta"), "inverse_isp without the final quantization.");

    // --- Metrics and losses --------------------------------------------------

    m.def(
        "psnr", [](const DoubleArray& a, const DoubleArray& b) { return risp::psnr(to_packed(a), to_packed(b)); },
        py::arg("a"), py::arg("b"), "PSNR between packed RAW images on the 12-bit code scale.");
    m.def(
        "ssim", [](const DoubleArray& a, const DoubleArray& b) { return risp::ssim(to_packed(a), to_packed(b)); },
        py::arg("a"), py::arg("b"),
        "Mean per-channel SSIM between packed RAW images on the 12-bit code scale.");

    m.def(
        "l1_loss", [](const DoubleArray& p, const DoubleArray& t) { return risp::l1_loss(flat_span(p), flat_span(t)); },
        py::arg("pred"), py::arg("target"));
    m.def(
        "mse_loss", [](const DoubleArray& p, const DoubleArray& t) { return risp::mse_loss(flat_span(p), flat_span(t)); },
        py::arg("pred"), py::arg("target"));
    m.def(
        "color_loss", [](const DoubleArray& p, const DoubleArray& t) { return risp::color_loss(flat_span(p), flat_span(t)); },
        py::arg("pred"), py::arg("target"));
    m.def(
        "hard_log_loss",
        [](const DoubleArray& p, const DoubleArray& t) { return risp::hard_log_loss(flat_span(p), flat_span(t)); },
        py::arg("pred"), py::arg("target"));
    m.def(
        "log_l2_loss",
        [](const DoubleArray& p, const DoubleArray& t) { return risp::log_l2_loss(flat_span(p), flat_span(t)); },
        py::arg("pred"), py::arg("target"));
    m.def(
        "clipped_l1_loss",
        [](const DoubleArray& p, const DoubleArray& t) { return risp::clipped_l1_loss(flat_span(p), flat_span(t)); },
        py::arg("pred"), py::arg("target"));
    m.def(
        "matrix_loss_abs",
        [](const DoubleArray& a, const DoubleArray& b) { return risp::matrix_loss_abs(to_matrix9(a), to_matrix9(b)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "matrix_loss_mse",
        [](const DoubleArray& a, const DoubleArray& b) { return risp::matrix_loss_mse(to_matrix9(a), to_matrix9(b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "ulite_loss",
        [](const DoubleArray& p, const DoubleArray& t, const DoubleArray& m_pred,
           const DoubleArray& m_ref, const risp::LossWeights& w) {
            return risp::ulite_loss(flat_span(p), flat_span(t), to_matrix9(m_pred), to_matrix9(m_ref), w);
        },
        py::arg("pred"), py::arg("target"), py::arg("m_pred"), py::arg("m_ref"),
        py::arg("weights") = risp::LossWeights{});
    m.def(
        "unafnet_loss",
        [](const DoubleArray& p, const DoubleArray& t, const risp::LossWeights& w) {
            return risp::unafnet_loss(to_packed(p), to_packed(t), w);
        },
        py::arg("pred"), py::arg("target"), py::arg("weights") = risp::LossWeights{});
    m.def(
        "gar2net_loss",
        [](const DoubleArray& p, const DoubleArray& t, const risp::LossWeights& w) {
            return risp::gar2net_loss(flat_span(p), flat_span(t), w);
        },
        py::arg("pred"), py::arg("target"), py::arg("weights") = risp::LossWeights{});
    m.def(
        "dualraw_loss",
        [](const DoubleArray& p, const DoubleArray& t) { return risp::dualraw_loss(flat_span(p), flat_span(t)); },
        py::arg("pred"), py::arg("target"));
    m.def(
        "tdmf_paths_loss",
        [](const DoubleArray& target, const DoubleArray& direct, const DoubleArray& gamma_in,
           const DoubleArray& gamma_out, double gamma) {
            return risp::tdmf_paths_loss(flat_span(target), flat_span(direct), flat_span(gamma_in),
                                         flat_span(gamma_out), gamma);
        },
        py::arg("target"), py::arg("pred_direct"), py::arg("pred_gamma_input"),
        py::arg("pred_gamma_output"), py::arg("gamma"));

    // --- Fitting and prediction ----------------------------------------------

    m.def("fit", &risp::fit, py::arg("pairs"), py::arg("gammas"), py::arg("config") = risp::FitConfig{},
          "Closed-form per-candidate maps plus projected-gradient simplex weights; "
          "deterministic, returns the lowest-objective model observed.");
    m.def("objective_and_gradient", &risp::objective_and_gradient, py::arg("model"), py::arg("pairs"),
          py::arg("loss") = risp::FitLoss::l1);
    m.def("fit_global_matrix", &risp::fit_global_matrix, py::arg("pairs"),
          "Least-squares global color matrix over co-sited 2x2 blocks.");

    m.def(
        "predict",
        [](const risp::ReverseModel& model, const DoubleArray& rgb) { return from_packed(risp::predict(model, to_rgb(rgb))); },
        py::arg("model"), py::arg("rgb"));
    m.def(
        "predict_continuous",
        [](const risp::ReverseModel& model, const DoubleArray& rgb) {
            return from_packed(risp::predict_continuous(model, to_rgb(rgb)));
        },
        py::arg("model"), py::arg("rgb"));
    m.def(
        "predict_with_transform",
        [](const risp::ColorTransform& t, const DoubleArray& rgb) {
            return from_packed(risp::predict_with_transform(t, to_rgb(rgb)));
        },
        py::arg("transform"), py::arg("rgb"));
    m.def(
        "predict_with_transform_continuous",
        [](const risp::ColorTransform& t, const DoubleArray& rgb) {
            return from_packed(risp::predict_with_transform_continuous(t, to_rgb(rgb)));
        },
        py::arg("transform"), py::arg("rgb"));

    m.def(
        "tta_predict",
        [](const py::function& predict_continuous_fn, const DoubleArray& rgb, risp::TtaMode mode) {
            auto fn = [&predict_continuous_fn](const risp::RgbImage& img) {
                return to_packed(predict_continuous_fn(from_rgb(img)).cast<DoubleArray>());
            };
            return from_packed(risp::tta_predict(fn, to_rgb(rgb), mode));
        },
        py::arg("predict_continuous_fn"), py::arg("rgb"), py::arg("mode"),
        "Self-ensemble over dihedral transforms.  The callable maps an sRGB array "
        "to a continuous packed prediction; results are averaged and quantized once.");

    m.def("project_to_simplex", &risp::project_to_simplex, py::arg("v"),
          "Euclidean projection onto the probability simplex.");
    m.def(
        "patch_luminance", [](const DoubleArray& raw) { return risp::patch_luminance(to_packed(raw)); },
        py::arg("raw"));
    m.def(
        "stratified_select",
        [](const DoubleArray& luminance, int n, int bins, std::uint64_t seed) {
            return risp::stratified_select(flat_span(luminance), n, bins, seed);
        },
        py::arg("luminance"), py::arg("n"), py::arg("bins"), py::arg("seed"),
        "Brightness-stratified index selection, deterministic per seed.");
    m.def("stratified_sample", &risp::stratified_sample, py::arg("pairs"), py::arg("n"),
          py::arg("bins"), py::arg("seed"));
    m.def(
        "crop_aligned",
        [](const DoubleArray& rgb, const DoubleArray& raw, int size, int stride) {
            return risp::crop_aligned(to_rgb(rgb), to_packed(raw), size, stride);
        },
        py::arg("rgb"), py::arg("raw"), py::arg("size"), py::arg("stride"),
        "Aligned RGB/RAW tiles; the last tile along each axis snaps to the border.");

    // --- File formats ----------------------------------------------------------

    m.def(
        "save_raw16", [](const std::string& path, const DoubleArray& raw) { risp::save_raw16(path, to_packed(raw)); },
        py::arg("path"), py::arg("raw"), "Write packed RAW as 16-bit codes (RAW2 container).");
    m.def(
        "load_raw16", [](const std::string& path) { return from_packed(risp::load_raw16(path)); }, py::arg("path"));
    m.def(
        "save_ppm", [](const std::string& path, const DoubleArray& rgb) { risp::save_ppm(path, to_rgb(rgb)); },
        py::arg("path"), py::arg("rgb"), "Write sRGB as binary 8-bit PPM (P6).");
    m.def(
        "load_ppm", [](const std::string& path) { return from_rgb(risp::load_ppm(path)); }, py::arg("path"));
    m.def("save_metadata", &risp::save_metadata, py::arg("path"), py::arg("meta"));
    m.def("load_metadata", &risp::load_metadata, py::arg("path"));
    m.def("synth_dataset", &risp::synth_dataset, py::arg("dir"), py::arg("n"), py::arg("raw_height"),
          py::arg("raw_width"), py::arg("meta"), py::arg("seed"),
          "Render a synthetic paired dataset and return the manifest path.");
}
