// Evaluation reports: aggregation rule, JSON round trip, table rendering
// and manifest-driven scoring.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "risp/bayer.hpp"
#include "risp/error.hpp"
#include "risp/io.hpp"
#include "risp/metrics.hpp"
#include "risp/report.hpp"
#include "test_support.hpp"

using namespace risp;

namespace {

PerImageResult row(const std::string& id, Group group, double psnr_db, double ssim_val) {
    PerImageResult r;
    r.id = id;
    r.device = "iPhoneX";
    r.group = group;
    r.psnr = psnr_db;
    r.ssim = ssim_val;
    return r;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("aggregate averages each group and all rows separately") {
    EvalReport report;
    report.per_image = {row("t0", Group::target, 30.0, 0.8),
                        row("t1", Group::target, 32.0, 0.9),
                        row("t2", Group::target, 34.0, 0.85),
                        row("o0", Group::oof, 20.0, 0.6),
                        row("o1", Group::oof, 24.0, 0.7)};
    aggregate(&report);

    CHECK(report.overall.image_count == 5);
    CHECK(report.target.image_count == 3);
    CHECK(report.oof.image_count == 2);
    CHECK(report.overall.psnr_excluded == 0);

    CHECK(report.overall.mean_psnr == doctest::Approx(28.0).epsilon(1e-12));
    CHECK(report.target.mean_psnr == doctest::Approx(32.0).epsilon(1e-12));
    CHECK(report.oof.mean_psnr == doctest::Approx(22.0).epsilon(1e-12));
    CHECK(report.overall.mean_ssim == doctest::Approx(0.77).epsilon(1e-12));
    CHECK(report.target.mean_ssim == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(report.oof.mean_ssim == doctest::Approx(0.65).epsilon(1e-12));
}

TEST_CASE("aggregate excludes infinite psnr from means but keeps the count") {
    EvalReport report;
    report.per_image = {row("a", Group::target, kInf, 1.0),
                        row("b", Group::target, 40.0, 0.9),
                        row("c", Group::oof, kInf, 1.0)};
    aggregate(&report);

    CHECK(report.overall.image_count == 3);
    CHECK(report.overall.psnr_excluded == 2);
    CHECK(report.overall.mean_psnr == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(report.overall.has_psnr());

    // A group whose every image is bit-exact has no finite PSNR to average.
    CHECK(report.oof.psnr_excluded == 1);
    CHECK(!report.oof.has_psnr());
    CHECK(report.oof.has_ssim());
    CHECK(report.oof.mean_ssim == 1.0);

    const EvalReport empty;
    CHECK(!empty.overall.has_psnr());
    CHECK(!empty.overall.has_ssim());
}

TEST_CASE("aggregates are invariant to per-image row order bit for bit") {
    EvalReport a;
    a.per_image = {row("0", Group::target, 29.123456789, 0.8123456789),
                   row("1", Group::target, 31.987654321, 0.8987654321),
                   row("2", Group::oof, 23.555555555, 0.7055555555),
                   row("3", Group::target, 35.111111111, 0.9311111111),
                   row("4", Group::oof, 21.999999999, 0.6899999999)};
    EvalReport b;
    b.per_image = {a.per_image[3], a.per_image[0], a.per_image[4], a.per_image[2],
                   a.per_image[1]};
    aggregate(&a);
    aggregate(&b);

    CHECK(a.overall.mean_psnr == b.overall.mean_psnr);
    CHECK(a.overall.mean_ssim == b.overall.mean_ssim);
    CHECK(a.target.mean_psnr == b.target.mean_psnr);
    CHECK(a.target.mean_ssim == b.target.mean_ssim);
    CHECK(a.oof.mean_psnr == b.oof.mean_psnr);
    CHECK(a.oof.mean_ssim == b.oof.mean_ssim);
}

TEST_CASE("tables render psnr to two decimals and ssim to four") {
    EvalReport report;
    report.method = "mixture";
    report.overall.image_count = 2;
    report.overall.mean_psnr = 30.76;
    report.overall.mean_ssim = 0.8353;
    report.target.image_count = 1;
    report.target.mean_psnr = 23.94;
    report.target.mean_ssim = 0.6916;
    // oof stays empty: both of its cells must render "-".

    const std::string csv = render_report_csv(report);
    CHECK(csv ==
          "Method,Overall PSNR,Overall SSIM,Target PSNR,Target SSIM,OOF PSNR,OOF SSIM\n"
          "mixture,30.76,0.8353,23.94,0.6916,-,-\n");

    const std::string md = render_report_markdown(report);
    CHECK(md.find("| Method | Overall PSNR | Overall SSIM | Target PSNR | Target SSIM | "
                  "OOF PSNR | OOF SSIM |") != std::string::npos);
    CHECK(md.find("| mixture | 30.76 | 0.8353 | 23.94 | 0.6916 | - | - |") != std::string::npos);
    CHECK(md.find(kAggregationNote) != std::string::npos);

    // Rounding, not truncation.
    EvalReport rounded;
    rounded.method = "m";
    rounded.overall.image_count = 1;
    rounded.overall.mean_psnr = 29.996;
    rounded.overall.mean_ssim = 0.83335;
    const std::string cells = render_report_csv(rounded);
    CHECK(cells.find("30.00") != std::string::npos);
    const bool ssim_rounded = cells.find("0.8333") != std::string::npos ||
                              cells.find("0.8334") != std::string::npos;
    CHECK(ssim_rounded);
}

TEST_CASE("markdown lists psnr exclusions only when they happened") {
    EvalReport clean;
    clean.method = "m";
    clean.per_image = {row("a", Group::target, 30.0, 0.9)};
    aggregate(&clean);
    CHECK(render_report_markdown(clean).find("Images excluded") == std::string::npos);

    EvalReport exact;
    exact.method = "m";
    exact.per_image = {row("a", Group::target, kInf, 1.0),
                       row("b", Group::oof, 30.0, 0.9)};
    aggregate(&exact);
    const std::string md = render_report_markdown(exact);
    CHECK(md.find("Images excluded") != std::string::npos);
    CHECK(md.find("overall 1") != std::string::npos);
    CHECK(md.find("target 1") != std::string::npos);
    CHECK(md.find("oof 0") != std::string::npos);
}

TEST_CASE("report json stores infinite psnr as the string inf") {
    test_support::ScratchDir dir("report");

    EvalReport report;
    report.method = "mixture";
    report.tta = "dihedral8";
    report.model_path = "model.json";
    report.per_image = {row("exact", Group::target, kInf, 1.0),
                        row("close", Group::oof, 41.123456789012345, 0.987654321)};
    aggregate(&report);

    const std::string path = dir.file("report.json");
    save_report(path, report);

    const std::string text(reinterpret_cast<const char*>(
                               test_support::read_bytes(path).data()),
                           test_support::read_bytes(path).size());
    CHECK(text.find("\"inf\"") != std::string::npos);

    const EvalReport back = load_report(path);
    CHECK(back.method == "mixture");
    CHECK(back.tta == "dihedral8");
    CHECK(back.model_path == "model.json");
    REQUIRE(back.per_image.size() == 2);
    CHECK(back.per_image[0].id == "exact");
    CHECK(std::isinf(back.per_image[0].psnr));
    CHECK(back.per_image[0].ssim == 1.0);
    CHECK(back.per_image[1].psnr == report.per_image[1].psnr);
    CHECK(back.per_image[1].ssim == report.per_image[1].ssim);
    CHECK(back.per_image[1].group == Group::oof);

    // Aggregates come back from the rows, not from stored numbers.
    CHECK(back.overall.image_count == report.overall.image_count);
    CHECK(back.overall.psnr_excluded == report.overall.psnr_excluded);
    CHECK(back.overall.mean_psnr == report.overall.mean_psnr);
    CHECK(back.overall.mean_ssim == report.overall.mean_ssim);
}

TEST_CASE("report loader rejects malformed files") {
    test_support::ScratchDir dir("report_bad");

    CHECK_THROWS_AS(load_report(dir.file("missing.json")), IoError);

    const std::string version = dir.file("version.json");
    test_support::write_bytes(version, "{\"format_version\":9,\"per_image\":[]}");
    CHECK_THROWS_WITH_AS(load_report(version), doctest::Contains("format_version"), ParseError);

    const std::string rows = dir.file("rows.json");
    test_support::write_bytes(rows, "{\"format_version\":1}");
    CHECK_THROWS_WITH_AS(load_report(rows), doctest::Contains("per_image"), ParseError);

    const std::string psnr_str = dir.file("psnr.json");
    test_support::write_bytes(psnr_str,
                              "{\"format_version\":1,\"per_image\":[{\"id\":\"a\","
                              "\"group\":\"target\",\"psnr\":\"huge\",\"ssim\":1.0}]}");
    CHECK_THROWS_WITH_AS(load_report(psnr_str), doctest::Contains("psnr"), ParseError);
}

TEST_CASE("evaluate scores predictions against manifest ground truth") {
    test_support::ScratchDir dir("evaluate");
    std::filesystem::create_directories(dir.path / "pred");

    // Three ground-truth images; SSIM needs at least 11 pixels per side.
    Manifest manifest;
    manifest.split = "test";
    const char* ids[3] = {"exact", "bumped", "shifted"};
    const Device devices[3] = {Device::iPhoneX, Device::SamsungS9, Device::SamsungS21};
    std::vector<PackedRaw> gt;
    for (int i = 0; i < 3; ++i) {
        PackedRaw raw = quantize12(test_support::random_packed(12, 12, 0x300 + i, 0.1, 0.9));
        save_raw16(dir.file(std::string(ids[i]) + ".raw16"), raw);
        DevicePair entry;
        entry.id = ids[i];
        entry.device = devices[i];
        entry.device_label = device_name(devices[i]);
        default_group(entry.device, &entry.group);
        entry.rgb_path = std::string(ids[i]) + ".ppm";
        entry.raw_path = std::string(ids[i]) + ".raw16";
        manifest.entries.push_back(std::move(entry));
        gt.push_back(std::move(raw));
    }
    const std::string manifest_path = dir.file("manifest.json");
    save_manifest(manifest_path, manifest);
    const Manifest loaded = load_manifest(manifest_path);

    // Predictions: bit-exact, one code off, constant offset.
    save_raw16((dir.path / "pred" / "exact.raw16").string(), gt[0]);
    PackedRaw bumped = gt[1];
    bumped.samples[0] = std::min(1.0, bumped.samples[0] + 1.0 / 4095.0);
    save_raw16((dir.path / "pred" / "bumped.raw16").string(), bumped);
    PackedRaw shifted = gt[2];
    for (double& s : shifted.samples) s = std::min(1.0, s + 82.0 / 4095.0);
    shifted = quantize12(shifted);
    save_raw16((dir.path / "pred" / "shifted.raw16").string(), shifted);

    const EvalReport report =
        evaluate(loaded, (dir.path / "pred").string(), "mixture", "none", "model.json");
    CHECK(report.method == "mixture");
    CHECK(report.tta == "none");
    REQUIRE(report.per_image.size() == 3);

    CHECK(report.per_image[0].id == "exact");
    CHECK(std::isinf(report.per_image[0].psnr));
    CHECK(report.per_image[0].ssim == 1.0);
    CHECK(report.per_image[0].group == Group::target);

    CHECK(report.per_image[1].psnr == psnr(bumped, gt[1]));
    CHECK(report.per_image[1].ssim == ssim(bumped, gt[1]));

    CHECK(report.per_image[2].psnr == psnr(shifted, gt[2]));
    CHECK(report.per_image[2].group == Group::oof);

    CHECK(report.overall.image_count == 3);
    CHECK(report.overall.psnr_excluded == 1);

    // Thread count cannot change a single bit of the result.
    const EvalReport threaded =
        evaluate(loaded, (dir.path / "pred").string(), "mixture", "none", "model.json", 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(threaded.per_image[i].psnr == report.per_image[i].psnr);
        CHECK(threaded.per_image[i].ssim == report.per_image[i].ssim);
    }
    CHECK(threaded.overall.mean_psnr == report.overall.mean_psnr);
    CHECK(threaded.overall.mean_ssim == report.overall.mean_ssim);
}

TEST_CASE("evaluate lists every missing prediction in one error") {
    test_support::ScratchDir dir("evaluate_missing");
    std::filesystem::create_directories(dir.path / "pred");

    Manifest manifest;
    manifest.split = "test";
    for (const char* id : {"one", "two", "three"}) {
        PackedRaw raw = test_support::random_packed(12, 12, 0x400);
        save_raw16(dir.file(std::string(id) + ".raw16"), raw);
        DevicePair entry;
        entry.id = id;
        entry.device = Device::iPhoneX;
        entry.device_label = "iPhoneX";
        entry.group = Group::target;
        entry.rgb_path = std::string(id) + ".ppm";
        entry.raw_path = std::string(id) + ".raw16";
        manifest.entries.push_back(std::move(entry));
    }
    save_manifest(dir.file("manifest.json"), manifest);
    const Manifest loaded = load_manifest(dir.file("manifest.json"));

    // Only one of three predictions exists.
    save_raw16((dir.path / "pred" / "two.raw16").string(),
               test_support::random_packed(12, 12, 0x401));

    try {
        evaluate(loaded, (dir.path / "pred").string(), "m", "none", "");
        CHECK(false);
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("one") != std::string::npos);
        CHECK(msg.find("three") != std::string::npos);
        CHECK(msg.find("two") == std::string::npos);
    }

    // A size mismatch is reported as a dimension error.
    save_raw16((dir.path / "pred" / "one.raw16").string(),
               test_support::random_packed(12, 12, 0x402));
    save_raw16((dir.path / "pred" / "three.raw16").string(),
               test_support::random_packed(10, 12, 0x403));
    CHECK_THROWS_AS(evaluate(loaded, (dir.path / "pred").string(), "m", "none", ""),
                    DimensionError);
}
