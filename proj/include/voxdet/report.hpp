#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voxdet/metrics.hpp"
#include "voxdet/phantom.hpp"
#include "voxdet/pipeline.hpp"

#include "json.hpp"

namespace voxdet {

/// Full run configuration: pipeline constants plus evaluation settings.
/// Serialized as a flat JSON object; unknown keys are rejected so stale
/// config files fail loudly.
struct RunConfig {
    PipelineConfig pipeline;
    double fp_lo = 0.001;
    double fp_hi = 5.0;
    double dice_min = 0.1;
    double subgroup_max_mm = 20.0;
    long iterations = 100000;
    std::uint64_t seed = 0;
    int comparisons = 3;
    double alpha = 0.025;
    DuplicatePolicy duplicate_policy = DuplicatePolicy::Ignore;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);

    void validate() const;
};

/// Evaluation of one model (or the ensemble) across the cohort.
struct ModelEval {
    std::string model_id;
    std::vector<CaseResult> cases;  // sorted by case id
    RocCurve roc_curve;
    FrocCurve froc_curve;
};

struct EvalReport {
    RunConfig config;
    std::vector<ModelEval> models;
    ModelEval ensemble;
    std::optional<std::vector<ModelEval>> subgroup_models;  // when subgroup analysis ran
    std::optional<ModelEval> subgroup_ensemble;
    double subgroup_max_mm = 0.0;
};

/// Runs the full inference + evaluation pipeline over a phantom-format
/// manifest. Cases are processed independently (jobs > 1 allowed); the result
/// is independent of both scheduling and manifest case order.
EvalReport run_eval(const std::filesystem::path& manifest_path, const RunConfig& cfg,
                    int jobs = 1, bool subgroup = false);

nlohmann::json report_to_json(const EvalReport& report);

/// Writes report.json plus ROC/FROC curve CSVs (header: threshold,x,y) into
/// out_dir. Byte-deterministic for a given report.
void write_report(const EvalReport& report, const std::filesystem::path& out_dir);

/// Per-model metric values stored in a report ("auc" or "pauc").
std::vector<double> report_metric_values(const nlohmann::json& report, const std::string& metric);

}  // namespace voxdet
