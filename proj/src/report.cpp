#include "risp/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "risp/accum.hpp"
#include "risp/error.hpp"
#include "risp/metrics.hpp"
#include "risp/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace risp {

const char* const kAggregationNote =
    "target/oof aggregates are means over exactly their group's images; overall is the "
    "unweighted mean over all per-image values; infinite PSNR values are excluded from means "
    "and counted";

namespace {

GroupAggregate aggregate_rows(const std::vector<PerImageResult>& rows, const Group* group) {
    GroupAggregate out;
    StableSum psnr_sum;
    StableSum ssim_sum;
    for (const PerImageResult& row : rows) {
        if (group != nullptr && row.group != *group) continue;
        ++out.image_count;
        ssim_sum.add(row.ssim);
        if (std::isinf(row.psnr)) {
            ++out.psnr_excluded;
        } else {
            psnr_sum.add(row.psnr);
        }
    }
    if (out.has_psnr()) out.mean_psnr = psnr_sum.mean();
    if (out.has_ssim()) out.mean_ssim = ssim_sum.mean();
    return out;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string psnr_cell(const GroupAggregate& g) { return g.has_psnr() ? fixed(g.mean_psnr, 2) : "-"; }
std::string ssim_cell(const GroupAggregate& g) { return g.has_ssim() ? fixed(g.mean_ssim, 4) : "-"; }

json psnr_to_json(double v) {
    if (std::isinf(v)) return json("inf");
    return json(v);
}

double psnr_from_json(const json& j, const std::string& what) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw ParseError(what + ": bad psnr value '" + j.get<std::string>() + "'");
    }
    if (!j.is_number()) throw ParseError(what + ": psnr is not a number");
    return j.get<double>();
}

}  // namespace

void aggregate(EvalReport* report) {
    constexpr Group kTarget = Group::target;
    constexpr Group kOof = Group::oof;
    report->overall = aggregate_rows(report->per_image, nullptr);
    report->target = aggregate_rows(report->per_image, &kTarget);
    report->oof = aggregate_rows(report->per_image, &kOof);
}

EvalReport evaluate(const Manifest& manifest, const std::string& pred_dir,
                    const std::string& method, const std::string& tta,
                    const std::string& model_path, int threads) {
    std::string missing;
    for (const DevicePair& entry : manifest.entries) {
        const fs::path pred = fs::path(pred_dir) / (entry.id + ".raw16");
        if (!fs::exists(pred)) missing += missing.empty() ? entry.id : (", " + entry.id);
    }
    if (!missing.empty()) throw IoError("missing predictions for: " + missing);

    EvalReport report;
    report.method = method;
    report.tta = tta;
    report.model_path = model_path;
    report.per_image.resize(manifest.entries.size());

    const int n = static_cast<int>(manifest.entries.size());
    parallel_for(n, threads, [&](int i) {
        const DevicePair& entry = manifest.entries[i];
        const PackedRaw truth = load_raw16(manifest.raw_file(entry));
        const PackedRaw pred =
            load_raw16((fs::path(pred_dir) / (entry.id + ".raw16")).string());
        if (pred.height != truth.height || pred.width != truth.width) {
            throw DimensionError("evaluate: prediction for '" + entry.id +
                                 "' does not match the ground-truth size");
        }
        PerImageResult& row = report.per_image[i];
        row.id = entry.id;
        row.device = entry.device_label;
        row.group = entry.group;
        row.psnr = psnr(pred, truth);
        row.ssim = ssim(pred, truth);
    });

    aggregate(&report);
    return report;
}

namespace {

json aggregate_to_json(const GroupAggregate& g) {
    json j;
    j["images"] = g.image_count;
    j["psnr_excluded"] = g.psnr_excluded;
    j["psnr"] = g.has_psnr() ? json(g.mean_psnr) : json(nullptr);
    j["ssim"] = g.has_ssim() ? json(g.mean_ssim) : json(nullptr);
    return j;
}

}  // namespace

void save_report(const std::string& path, const EvalReport& report) {
    json j;
    j["format_version"] = 1;
    j["method"] = report.method;
    j["tta"] = report.tta;
    j["model"] = report.model_path;
    j["aggregation"] = kAggregationNote;
    json rows = json::array();
    for (const PerImageResult& row : report.per_image) {
        json r;
        r["id"] = row.id;
        r["device"] = row.device;
        r["group"] = group_name(row.group);
        r["psnr"] = psnr_to_json(row.psnr);
        r["ssim"] = row.ssim;
        rows.push_back(std::move(r));
    }
    j["per_image"] = std::move(rows);
    json aggregates;
    aggregates["overall"] = aggregate_to_json(report.overall);
    aggregates["target"] = aggregate_to_json(report.target);
    aggregates["oof"] = aggregate_to_json(report.oof);
    j["aggregates"] = std::move(aggregates);

    const std::string text = j.dump(2) + "\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed on " + path);
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }

    EvalReport report;
    try {
        if (!j.is_object()) throw ParseError("report: not an object");
        if (!j.contains("format_version") || j.at("format_version") != 1) {
            throw ParseError("report: unsupported format_version");
        }
        report.method = j.value("method", std::string());
        report.tta = j.value("tta", std::string());
        report.model_path = j.value("model", std::string());
        if (!j.contains("per_image") || !j.at("per_image").is_array()) {
            throw ParseError("report: missing key 'per_image'");
        }
        for (const json& r : j.at("per_image")) {
            PerImageResult row;
            if (!r.contains("id") || !r.at("id").is_string()) {
                throw ParseError("report: per-image row needs an id");
            }
            row.id = r.at("id").get<std::string>();
            row.device = r.value("device", std::string());
            row.group = parse_group(r.value("group", std::string("target")));
            row.psnr = psnr_from_json(r.at("psnr"), "report");
            if (!r.contains("ssim") || !r.at("ssim").is_number()) {
                throw ParseError("report: per-image row needs a numeric ssim");
            }
            row.ssim = r.at("ssim").get<double>();
            report.per_image.push_back(std::move(row));
        }
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
    aggregate(&report);  // aggregates follow from the rows by the stated rule
    return report;
}

std::string render_report_csv(const EvalReport& report) {
    std::string out =
        "Method,Overall PSNR,Overall SSIM,Target PSNR,Target SSIM,OOF PSNR,OOF SSIM\n";
    out += report.method + "," + psnr_cell(report.overall) + "," + ssim_cell(report.overall) +
           "," + psnr_cell(report.target) + "," + ssim_cell(report.target) + "," +
           psnr_cell(report.oof) + "," + ssim_cell(report.oof) + "\n";
    return out;
}

std::string render_report_markdown(const EvalReport& report) {
    std::string out = "Aggregation: ";
    out += kAggregationNote;
    out += ".\n";
    if (report.overall.psnr_excluded > 0) {
        out += "Images excluded from PSNR means (infinite PSNR): overall " +
               std::to_string(report.overall.psnr_excluded) + ", target " +
               std::to_string(report.target.psnr_excluded) + ", oof " +
               std::to_string(report.oof.psnr_excluded) + ".\n";
    }
    out += "\n";
    out += "| Method | Overall PSNR | Overall SSIM | Target PSNR | Target SSIM | OOF PSNR | "
           "OOF SSIM |\n";
    out += "|---|---|---|---|---|---|---|\n";
    out += "| " + report.method + " | " + psnr_cell(report.overall) + " | " +
           ssim_cell(report.overall) + " | " + psnr_cell(report.target) + " | " +
           ssim_cell(report.target) + " | " + psnr_cell(report.oof) + " | " +
           ssim_cell(report.oof) + " |\n";
    return out;
}

}  // namespace risp
