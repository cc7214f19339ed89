#pragma once

#include <string>
#include <vector>

#include "risp/io.hpp"

namespace risp {

struct PerImageResult {
    std::string id;
    std::string device;
    Group group = Group::target;
    double psnr = 0.0;  // may be +inf when the prediction is bit-exact
    double ssim = 0.0;
};

struct GroupAggregate {
    int image_count = 0;
    int psnr_excluded = 0;   // infinite-PSNR images left out of mean_psnr
    double mean_psnr = 0.0;  // meaningful only when image_count > psnr_excluded
    double mean_ssim = 0.0;  // meaningful only when image_count > 0

    bool has_psnr() const { return image_count > psnr_excluded; }
    bool has_ssim() const { return image_count > 0; }
};

// Aggregation rule, stated in every rendering: target/oof aggregates average
// exactly their group's images; overall is the unweighted mean over all
// per-image values; infinite PSNR is excluded from means and counted.
extern const char* const kAggregationNote;

struct EvalReport {
    std::string method;      // config echo
    std::string tta;         // config echo
    std::string model_path;  // config echo; may be empty
    std::vector<PerImageResult> per_image;
    GroupAggregate overall;
    GroupAggregate target;
    GroupAggregate oof;
};

// Recomputes the three aggregates from per_image.
void aggregate(EvalReport* report);

// Scores prediction files against the manifest's ground truth. For every
// entry, pred_dir/<id>.raw16 must exist (all missing ids are listed in one
// error). Metrics are computed on the 12-bit-normalized packed values.
EvalReport evaluate(const Manifest& manifest, const std::string& pred_dir,
                    const std::string& method, const std::string& tta,
                    const std::string& model_path, int threads = 1);

// Report files are JSON; infinite PSNR is stored as the string "inf".
void save_report(const std::string& path, const EvalReport& report);
EvalReport load_report(const std::string& path);

// Table renderings: columns Method | Overall PSNR | Overall SSIM |
// Target PSNR | Target SSIM | OOF PSNR | OOF SSIM, with PSNR to two decimals
// and SSIM to four. Empty cells render "-".
std::string render_report_csv(const EvalReport& report);
std::string render_report_markdown(const EvalReport& report);

}  // namespace risp
