// risp: fit RAW-reconstruction models, predict RAW from sRGB, evaluate and
// report. Exit codes: 0 success, 1 usage error, 2 data error, 3 fit error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "risp/accum.hpp"
#include "risp/error.hpp"
#include "risp/io.hpp"
#include "risp/isp.hpp"
#include "risp/losses.hpp"
#include "risp/model.hpp"
#include "risp/parallel.hpp"
#include "risp/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    int threads = 1;
};

risp::TtaMode parse_tta(const std::string& name) {
    if (name == "none") return risp::TtaMode::none;
    if (name == "flip2") return risp::TtaMode::flip2;
    if (name == "dihedral8") return risp::TtaMode::dihedral8;
    throw risp::UsageError("unknown --tta mode '" + name + "'");
}

risp::FitLoss parse_loss(const std::string& name) {
    if (name == "l1") return risp::FitLoss::l1;
    if (name == "mse") return risp::FitLoss::mse;
    if (name == "l1+l2") return risp::FitLoss::l1_plus_l2;
    if (name == "log-l2+clipped-l1") return risp::FitLoss::log_l2_plus_clipped_l1;
    throw risp::UsageError("unknown --loss '" + name + "'");
}

// --- fit --------------------------------------------------------------------

struct FitOptions {
    std::string manifest_path;
    std::string method = "gamma-mixture";
    std::string out_path;
    std::vector<double> gammas{1.0, 2.2, 2.4};
    std::string loss = "l1";
    int iters = 50;
    double step = 0.5;
    double tol = 1e-12;
    int patch_size = 16;
    int patch_stride = 0;  // 0: same as patch_size
    int samples = 0;       // 0: use every patch
    int bins = 4;
};

std::vector<risp::PatchPair> load_patch_pool(const risp::Manifest& manifest, int size,
                                             int stride) {
    std::vector<risp::PatchPair> pool;
    for (const risp::DevicePair& entry : manifest.entries) {
        const risp::RgbImage rgb = risp::load_ppm(manifest.rgb_file(entry));
        const risp::PackedRaw raw = risp::load_raw16(manifest.raw_file(entry));
        const int s = std::min({size, raw.height, raw.width});
        std::vector<risp::PatchPair> patches = risp::crop_aligned(rgb, raw, s, stride);
        for (risp::PatchPair& p : patches) pool.push_back(std::move(p));
    }
    return pool;
}

void run_fit(const FitOptions& opt, const GlobalOptions& global) {
    const risp::Manifest manifest = risp::load_manifest(opt.manifest_path);
    if (manifest.entries.empty()) throw risp::DomainError("empty dataset");
    const int stride = opt.patch_stride > 0 ? opt.patch_stride : opt.patch_size;
    std::vector<risp::PatchPair> pool = load_patch_pool(manifest, opt.patch_size, stride);
    if (pool.empty()) throw risp::DomainError("empty dataset");
    if (opt.samples > 0 && opt.samples < static_cast<int>(pool.size())) {
        pool = risp::stratified_sample(pool, opt.samples, opt.bins, global.seed);
    }
    std::fprintf(stderr, "fitting %s on %zu patches\n", opt.method.c_str(), pool.size());

    if (opt.method == "gamma-mixture") {
        risp::FitConfig cfg;
        cfg.max_outer_iters = opt.iters;
        cfg.weight_step = opt.step;
        cfg.tol = opt.tol;
        cfg.seed = global.seed;
        cfg.loss = parse_loss(opt.loss);
        const risp::FitResult result = risp::fit(pool, opt.gammas, cfg);
        risp::save_model(opt.out_path, result.model);
        std::printf("final objective: %.9g\n", result.objective);
    } else if (opt.method == "global-matrix") {
        const risp::ColorTransform transform = risp::fit_global_matrix(pool);
        risp::save_model(opt.out_path, transform);
        risp::StableSum residual;
        for (const risp::PatchPair& p : pool) {
            const risp::PackedRaw pred =
                risp::predict_with_transform_continuous(transform, p.rgb);
            residual.add(risp::l1_loss(pred.samples, p.raw.samples));
        }
        std::printf("final objective: %.9g\n", residual.mean());
    } else {
        throw risp::UsageError("unknown --method '" + opt.method + "'");
    }
}

// --- predict ------------------------------------------------------------------

struct PredictOptions {
    std::string model_path;
    std::string metadata_path;
    std::string manifest_path;
    std::vector<std::string> inputs;
    std::string out_dir;
    std::string tta = "none";
};

void run_predict(const PredictOptions& opt, const GlobalOptions& global) {
    if (opt.model_path.empty() == opt.metadata_path.empty()) {
        throw risp::UsageError("predict needs exactly one of --model or --metadata");
    }
    if (opt.manifest_path.empty() == opt.inputs.empty()) {
        throw risp::UsageError("predict needs a --manifest or positional RGB files, not both");
    }
    const risp::TtaMode tta = parse_tta(opt.tta);

    std::function<risp::PackedRaw(const risp::RgbImage&)> predictor;
    std::string method;
    risp::ModelFile model;
    risp::IspMetadata meta;
    if (!opt.model_path.empty()) {
        model = risp::load_model(opt.model_path);
        method = model.type;
        if (model.is_mixture()) {
            predictor = [&model](const risp::RgbImage& rgb) {
                return risp::predict_continuous(model.mixture, rgb);
            };
        } else {
            predictor = [&model](const risp::RgbImage& rgb) {
                return risp::predict_with_transform_continuous(model.transform, rgb);
            };
        }
    } else {
        meta = risp::load_metadata(opt.metadata_path);
        method = "metadata-inverse";
        predictor = [&meta](const risp::RgbImage& rgb) {
            return risp::inverse_isp_continuous(rgb, meta);
        };
    }

    // id -> source file, in a stable order.
    std::vector<std::pair<std::string, std::string>> jobs;
    if (!opt.manifest_path.empty()) {
        const risp::Manifest manifest = risp::load_manifest(opt.manifest_path);
        for (const risp::DevicePair& entry : manifest.entries) {
            jobs.emplace_back(entry.id, manifest.rgb_file(entry));
        }
    } else {
        std::set<std::string> seen;
        for (const std::string& input : opt.inputs) {
            const std::string id = fs::path(input).stem().string();
            if (!seen.insert(id).second) {
                throw risp::UsageError("duplicate input stem '" + id + "'");
            }
            jobs.emplace_back(id, input);
        }
    }
    if (jobs.empty()) throw risp::DomainError("empty dataset");

    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw risp::IoError("cannot create directory " + opt.out_dir);

    risp::parallel_for(static_cast<int>(jobs.size()), global.threads, [&](int i) {
        const risp::RgbImage rgb = risp::load_ppm(jobs[i].second);
        const risp::PackedRaw pred = risp::tta_predict(predictor, rgb, tta);
        risp::save_raw16((fs::path(opt.out_dir) / (jobs[i].first + ".raw16")).string(), pred);
    });

    json sidecar;
    sidecar["format_version"] = 1;
    sidecar["method"] = method;
    sidecar["model"] = opt.model_path.empty() ? opt.metadata_path : opt.model_path;
    sidecar["tta"] = opt.tta;
    sidecar["seed"] = global.seed;
    json outputs = json::array();
    for (const auto& [id, source] : jobs) {
        json o;
        o["id"] = id;
        o["file"] = id + ".raw16";
        outputs.push_back(std::move(o));
    }
    sidecar["outputs"] = std::move(outputs);
    const std::string text = sidecar.dump(2) + "\n";
    const std::string sidecar_path = (fs::path(opt.out_dir) / "predictions.json").string();
    std::ofstream out(sidecar_path, std::ios::binary | std::ios::trunc);
    if (!out) throw risp::IoError("cannot create " + sidecar_path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw risp::IoError("write failed on " + sidecar_path);

    std::printf("wrote %zu predictions to %s\n", jobs.size(), opt.out_dir.c_str());
}

// --- eval -------------------------------------------------------------------------

struct EvalOptions {
    std::string manifest_path;
    std::string pred_dir;
    std::string out_path;
    std::string method;
    std::string tta;
    std::string model_path;
};

void run_eval(const EvalOptions& opt, const GlobalOptions& global) {
    const risp::Manifest manifest = risp::load_manifest(opt.manifest_path);

    // The prediction sidecar supplies the config echo unless flags override it.
    std::string method = opt.method;
    std::string tta = opt.tta;
    std::string model_path = opt.model_path;
    const fs::path sidecar_path = fs::path(opt.pred_dir) / "predictions.json";
    if (fs::exists(sidecar_path)) {
        std::ifstream in(sidecar_path, std::ios::binary);
        json sidecar;
        try {
            sidecar = json::parse(in);
        } catch (const json::parse_error& e) {
            throw risp::ParseError(sidecar_path.string() + ": " + e.what());
        }
        if (method.empty()) method = sidecar.value("method", std::string());
        if (tta.empty()) tta = sidecar.value("tta", std::string());
        if (model_path.empty()) model_path = sidecar.value("model", std::string());
    }
    if (method.empty()) method = "unspecified";
    if (tta.empty()) tta = "none";

    const risp::EvalReport report =
        risp::evaluate(manifest, opt.pred_dir, method, tta, model_path, global.threads);
    risp::save_report(opt.out_path, report);
    std::fputs(risp::render_report_markdown(report).c_str(), stdout);
}

// --- report -------------------------------------------------------------------------

struct ReportOptions {
    std::string in_path;
    std::string format = "markdown";
    std::string out_path;
};

void run_report(const ReportOptions& opt) {
    const risp::EvalReport report = risp::load_report(opt.in_path);
    std::string table;
    if (opt.format == "csv") {
        table = risp::render_report_csv(report);
    } else if (opt.format == "markdown") {
        table = risp::render_report_markdown(report);
    } else {
        throw risp::UsageError("unknown --format '" + opt.format + "'");
    }
    if (opt.out_path.empty()) {
        std::fputs(table.c_str(), stdout);
    } else {
        std::ofstream out(opt.out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw risp::IoError("cannot create " + opt.out_path);
        out.write(table.data(), static_cast<std::streamsize>(table.size()));
        if (!out) throw risp::IoError("write failed on " + opt.out_path);
    }
}

// --- synth ----------------------------------------------------------------------------

struct SynthOptions {
    std::string out_dir;
    int count = 8;
    int height = 128;
    int width = 128;
    std::string metadata_path;
};

void run_synth(const SynthOptions& opt, const GlobalOptions& global) {
    const risp::IspMetadata meta = opt.metadata_path.empty()
                                       ? risp::IspMetadata::synthetic_default()
                                       : risp::load_metadata(opt.metadata_path);
    const std::string manifest = risp::synth_dataset(opt.out_dir, opt.count, opt.height,
                                                     opt.width, meta, global.seed);
    std::printf("%s\n", manifest.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAW reconstruction benchmark: recover packed RGGB RAW from sRGB images"};
    app.require_subcommand(1);
    app.set_config("--config");

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Seed for sampling and synthesis")
        ->capture_default_str();
    app.add_option("--threads", global.threads, "Worker threads for per-image stages")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    FitOptions fit_opt;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a reconstruction model");
    fit_cmd->fallthrough();
    fit_cmd->add_option("--manifest", fit_opt.manifest_path, "Training manifest")->required();
    fit_cmd->add_option("--method", fit_opt.method, "gamma-mixture or global-matrix")
        ->capture_default_str();
    fit_cmd->add_option("--out", fit_opt.out_path, "Model file to write")->required();
    fit_cmd->add_option("--gammas", fit_opt.gammas, "Gamma candidates")
        ->delimiter(',')
        ->capture_default_str();
    fit_cmd->add_option("--loss", fit_opt.loss, "l1, mse, l1+l2 or log-l2+clipped-l1")
        ->capture_default_str();
    fit_cmd->add_option("--iters", fit_opt.iters, "Max weight-update iterations")
        ->capture_default_str();
    fit_cmd->add_option("--step", fit_opt.step, "Initial projected-gradient step")
        ->capture_default_str();
    fit_cmd->add_option("--tol", fit_opt.tol, "Stop when the objective improves less")
        ->capture_default_str();
    fit_cmd->add_option("--patch-size", fit_opt.patch_size, "RAW patch size in packed pixels")
        ->capture_default_str();
    fit_cmd->add_option("--patch-stride", fit_opt.patch_stride,
                        "RAW patch stride (default: patch size)");
    fit_cmd->add_option("--samples", fit_opt.samples,
                        "Stratified patch budget (default: use all)");
    fit_cmd->add_option("--bins", fit_opt.bins, "Brightness strata")->capture_default_str();

    PredictOptions pred_opt;
    CLI::App* pred_cmd = app.add_subcommand("predict", "Reconstruct RAW from RGB inputs");
    pred_cmd->fallthrough();
    CLI::Option* model_opt = pred_cmd->add_option("--model", pred_opt.model_path, "Model file");
    pred_cmd->add_option("--metadata", pred_opt.metadata_path, "ISP metadata file")
        ->excludes(model_opt);
    pred_cmd->add_option("--manifest", pred_opt.manifest_path, "Manifest naming the inputs");
    pred_cmd->add_option("inputs", pred_opt.inputs, "RGB files (instead of a manifest)");
    pred_cmd->add_option("--out-dir", pred_opt.out_dir, "Prediction directory")->required();
    pred_cmd->add_option("--tta", pred_opt.tta, "none, flip2 or dihedral8")
        ->capture_default_str();

    EvalOptions eval_opt;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
    eval_cmd->fallthrough();
    eval_cmd->add_option("--manifest", eval_opt.manifest_path, "Ground-truth manifest")
        ->required();
    eval_cmd->add_option("--pred-dir", eval_opt.pred_dir, "Prediction directory")->required();
    eval_cmd->add_option("--out", eval_opt.out_path, "Report file to write")->required();
    eval_cmd->add_option("--method", eval_opt.method, "Method name echoed in the report");
    eval_cmd->add_option("--tta", eval_opt.tta, "TTA flag echoed in the report");
    eval_cmd->add_option("--model", eval_opt.model_path, "Model path echoed in the report");

    ReportOptions report_opt;
    CLI::App* report_cmd = app.add_subcommand("report", "Render a report as a table");
    report_cmd->fallthrough();
    report_cmd->add_option("--in", report_opt.in_path, "Report file")->required();
    report_cmd->add_option("--format", report_opt.format, "csv or markdown")
        ->capture_default_str();
    report_cmd->add_option("--out", report_opt.out_path, "Write here instead of stdout");

    SynthOptions synth_opt;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth_cmd->fallthrough();
    synth_cmd->add_option("--out-dir", synth_opt.out_dir, "Dataset directory")->required();
    synth_cmd->add_option("--count", synth_opt.count, "Number of images")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--height", synth_opt.height, "RAW height in packed pixels")
        ->capture_default_str();
    synth_cmd->add_option("--width", synth_opt.width, "RAW width in packed pixels")
        ->capture_default_str();
    synth_cmd->add_option("--metadata", synth_opt.metadata_path,
                          "ISP metadata (default: built-in synthetic profile)");

    fit_cmd->callback([&] { run_fit(fit_opt, global); });
    pred_cmd->callback([&] { run_predict(pred_opt, global); });
    eval_cmd->callback([&] { run_eval(eval_opt, global); });
    report_cmd->callback([&] { run_report(report_opt); });
    synth_cmd->callback([&] { run_synth(synth_opt, global); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or requested help
        return code == 0 ? 0 : 1;
    } catch (const risp::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const risp::FitError& e) {
        std::fprintf(stderr, "fit error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
