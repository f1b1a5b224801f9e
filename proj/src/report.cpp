#include "voxdet/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "voxdet/nrrd.hpp"

namespace voxdet {
namespace {

const char* policy_name(DuplicatePolicy p) {
    return p == DuplicatePolicy::Ignore ? "ignore" : "count-fp";
}

DuplicatePolicy policy_from_name(const std::string& s) {
    if (s == "ignore") return DuplicatePolicy::Ignore;
    if (s == "count-fp") return DuplicatePolicy::CountFp;
    throw std::invalid_argument("config: duplicate_policy must be 'ignore' or 'count-fp'");
}

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// One case, one likelihood map, full inference + matching.
CaseResult eval_one(const std::string& case_id, bool is_pdac, const ScalarVolume& likelihood,
                    const RoiResult& roi, const LabelVolume& labels_roi,
                    const std::vector<std::vector<std::size_t>>& gt_lesions,
                    const std::vector<double>& gt_sizes, const VoxelBox& box,
                    const RunConfig& cfg, const std::string& model_id) {
    ScalarVolume like_roi = crop(likelihood, box);
    ScalarVolume masked = mask_likelihood(like_roi, labels_roi, cfg.pipeline.mask_codes);
    const auto cands = extract_candidates(masked, cfg.pipeline);
    const MatchResult match =
        match_candidates(cands, gt_lesions, cfg.dice_min, cfg.duplicate_policy);

    CaseResult res;
    res.case_id = case_id;
    res.is_pdac = is_pdac;
    res.model_id = model_id;
    res.patient_score = patient_score(masked);
    res.gt_lesion_sizes_mm = gt_sizes;
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        CaseResult::Candidate c;
        c.confidence = cands[ci].confidence;
        c.rank = cands[ci].rank;
        c.status = match.status[ci];
        c.dice = match.dice_value[ci];
        for (std::size_t li = 0; li < match.lesion_to_candidate.size(); ++li)
            if (match.lesion_to_candidate[li] == static_cast<int>(ci))
                c.matched_lesion = static_cast<int>(li);
        res.candidates.push_back(c);
    }
    (void)roi;
    return res;
}

void compute_curves(ModelEval& me, const RunConfig& cfg) {
    std::vector<double> pos, neg;
    for (const auto& c : me.cases)
        (c.is_pdac ? pos : neg).push_back(c.patient_score);
    me.roc_curve = roc(pos, neg);
    me.froc_curve = froc(me.cases);
    me.froc_curve.pauc = pauc_froc(me.froc_curve, cfg.fp_lo, cfg.fp_hi);
}

nlohmann::json curve_points_json(const RocCurve& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points) pts.push_back({p.threshold, p.fpr, p.tpr});
    return {{"points", std::move(pts)}, {"auc", c.auc}};
}

nlohmann::json curve_points_json(const FrocCurve& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points) pts.push_back({p.threshold, p.fp_per_case, p.sensitivity});
    return {{"points", std::move(pts)}, {"pauc", c.pauc}};
}

nlohmann::json model_eval_json(const ModelEval& me) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : me.cases) {
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& cd : c.candidates)
            cands.push_back({{"rank", cd.rank},
                             {"confidence", cd.confidence},
                             {"status", to_string(cd.status)},
                             {"matched_lesion", cd.matched_lesion},
                             {"dice", cd.dice}});
        cases.push_back({{"case_id", c.case_id},
                         {"cohort", c.is_pdac ? "pdac" : "normal"},
                         {"patient_score", c.patient_score},
                         {"gt_lesion_sizes_mm", c.gt_lesion_sizes_mm},
                         {"candidates", std::move(cands)}});
    }
    return {{"model_id", me.model_id},
            {"per_case", std::move(cases)},
            {"roc", curve_points_json(me.roc_curve)},
            {"froc", curve_points_json(me.froc_curve)}};
}

void write_curve_csv(const std::filesystem::path& path, const RocCurve& c) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "threshold,x,y\n";
    for (const auto& p : c.points)
        out << fmt_double(p.threshold) << "," << fmt_double(p.fpr) << "," << fmt_double(p.tpr)
            << "\n";
}

void write_curve_csv(const std::filesystem::path& path, const FrocCurve& c) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "threshold,x,y\n";
    for (const auto& p : c.points)
        out << fmt_double(p.threshold) << "," << fmt_double(p.fp_per_case) << ","
            << fmt_double(p.sensitivity) << "\n";
}

}  // namespace

void RunConfig::validate() const {
    pipeline.validate();
    if (!(fp_lo < fp_hi)) throw std::invalid_argument("config: fp_lo must be < fp_hi");
    if (dice_min < 0.0 || dice_min > 1.0)
        throw std::invalid_argument("config: dice_min outside [0,1]");
    if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
    if (comparisons < 1) throw std::invalid_argument("config: comparisons must be >= 1");
    if (subgroup_max_mm <= 0.0)
        throw std::invalid_argument("config: subgroup_max_mm must be > 0");
}

nlohmann::json RunConfig::to_json() const {
    return {{"dilate_radius_mm", pipeline.dilate_radius_mm},
            {"margin_mm", pipeline.margin_mm},
            {"rel_threshold", pipeline.rel_threshold},
            {"max_lesions", pipeline.max_lesions},
            {"peak_floor", pipeline.peak_floor},
            {"connectivity", pipeline.connectivity},
            {"mask_codes", std::vector<int>(pipeline.mask_codes.begin(), pipeline.mask_codes.end())},
            {"fp_lo", fp_lo},
            {"fp_hi", fp_hi},
            {"dice_min", dice_min},
            {"subgroup_max_mm", subgroup_max_mm},
            {"iterations", iterations},
            {"seed", seed},
            {"comparisons", comparisons},
            {"alpha", alpha},
            {"duplicate_policy", policy_name(duplicate_policy)}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{
        "dilate_radius_mm", "margin_mm",   "rel_threshold",   "max_lesions",
        "peak_floor",       "connectivity", "mask_codes",     "fp_lo",
        "fp_hi",            "dice_min",    "subgroup_max_mm", "iterations",
        "seed",             "comparisons", "alpha",           "duplicate_policy"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

    RunConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("dilate_radius_mm", c.pipeline.dilate_radius_mm);
    get("margin_mm", c.pipeline.margin_mm);
    get("rel_threshold", c.pipeline.rel_threshold);
    get("max_lesions", c.pipeline.max_lesions);
    get("peak_floor", c.pipeline.peak_floor);
    get("connectivity", c.pipeline.connectivity);
    if (j.contains("mask_codes")) {
        c.pipeline.mask_codes.clear();
        for (int code : j.at("mask_codes")) {
            if (code < 0 || code > kMaxLabelCode)
                throw std::invalid_argument("config: bad mask code");
            c.pipeline.mask_codes.insert(static_cast<std::uint8_t>(code));
        }
    }
    get("fp_lo", c.fp_lo);
    get("fp_hi", c.fp_hi);
    get("dice_min", c.dice_min);
    get("subgroup_max_mm", c.subgroup_max_mm);
    get("iterations", c.iterations);
    get("seed", c.seed);
    get("comparisons", c.comparisons);
    get("alpha", c.alpha);
    if (j.contains("duplicate_policy"))
        c.duplicate_policy = policy_from_name(j.at("duplicate_policy").get<std::string>());
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

EvalReport run_eval(const std::filesystem::path& manifest_path, const RunConfig& cfg, int jobs,
                    bool subgroup) {
    cfg.validate();
    if (jobs < 1) throw std::invalid_argument("run_eval: jobs must be >= 1");
    phantom::CohortManifest manifest = phantom::load_manifest(manifest_path);
    if (manifest.cases.empty()) throw std::invalid_argument("run_eval: manifest has no cases");
    const std::filesystem::path base = manifest_path.parent_path();

    // Case order must not affect the report.
    std::sort(manifest.cases.begin(), manifest.cases.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });

    const std::size_t n_models = manifest.cases.front().likelihoods.size();
    if (n_models == 0) throw std::invalid_argument("run_eval: case has no likelihood maps");
    for (const auto& c : manifest.cases)
        if (c.likelihoods.size() != n_models)
            throw std::invalid_argument("run_eval: inconsistent model count across cases");

    const std::size_t n_cases = manifest.cases.size();
    // results[m][c]; last row is the ensemble.
    std::vector<std::vector<CaseResult>> results(n_models + 1,
                                                 std::vector<CaseResult>(n_cases));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t ci = next.fetch_add(1);
            if (ci >= n_cases || failed.load()) break;
            const auto& mc = manifest.cases[ci];
            try {
                const ScalarVolume image = nrrd::read_scalar(base / mc.image);
                const LabelVolume labels = nrrd::read_label(base / mc.gt_labels);
                const LabelVolume coarse = nrrd::read_label(base / mc.coarse_mask);
                if (labels.geom != image.geom)
                    throw std::runtime_error("gt labels geometry mismatch");

                const RoiResult roi = extract_roi(image, coarse, cfg.pipeline);
                const LabelVolume labels_roi = crop(labels, roi.box);

                // Ground-truth lesions: connected tumor components in the ROI.
                const BinaryMask tumor_mask = BinaryMask::from_labels(labels_roi, {kTumor});
                std::vector<std::vector<std::size_t>> gt_lesions;
                std::vector<double> gt_sizes;
                if (!tumor_mask.empty()) {
                    const auto comps =
                        connected_components(tumor_mask, cfg.pipeline.connectivity);
                    for (std::int32_t id = 1; id <= comps.count; ++id) {
                        gt_lesions.push_back(comps.component_voxels(id));
                        gt_sizes.push_back(lesion_size_axial(gt_lesions.back(), labels_roi.geom));
                    }
                }
                const bool is_pdac = mc.cohort == "pdac";

                std::vector<ScalarVolume> maps;
                maps.reserve(n_models);
                for (std::size_t m = 0; m < n_models; ++m) {
                    ScalarVolume like = nrrd::read_scalar(base / mc.likelihoods[m]);
                    like.validate_likelihood();
                    if (like.geom != image.geom)
                        throw std::runtime_error("likelihood geometry mismatch");
                    char mid[16];
                    std::snprintf(mid, sizeof(mid), "m%02zu", m);
                    results[m][ci] = eval_one(mc.id, is_pdac, like, roi, labels_roi, gt_lesions,
                                              gt_sizes, roi.box, cfg, mid);
                    maps.push_back(std::move(like));
                }
                const ScalarVolume fused = ensemble_mean(maps);
                results[n_models][ci] = eval_one(mc.id, is_pdac, fused, roi, labels_roi,
                                                 gt_lesions, gt_sizes, roi.box, cfg, "ensemble");
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = mc.id + ": " + e.what();
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error("run_eval: " + first_error);

    EvalReport report;
    report.config = cfg;
    for (std::size_t m = 0; m <= n_models; ++m) {
        ModelEval me;
        me.model_id = results[m].front().model_id;
        me.cases = std::move(results[m]);
        compute_curves(me, cfg);
        if (m < n_models) report.models.push_back(std::move(me));
        else report.ensemble = std::move(me);
    }

    if (subgroup) {
        report.subgroup_max_mm = cfg.subgroup_max_mm;
        report.subgroup_models.emplace();
        for (const auto& me : report.models) {
            ModelEval sub;
            sub.model_id = me.model_id;
            sub.cases = subgroup_filter(me.cases, cfg.subgroup_max_mm);
            compute_curves(sub, cfg);
            report.subgroup_models->push_back(std::move(sub));
        }
        ModelEval sub;
        sub.model_id = report.ensemble.model_id;
        sub.cases = subgroup_filter(report.ensemble.cases, cfg.subgroup_max_mm);
        compute_curves(sub, cfg);
        report.subgroup_ensemble = std::move(sub);
    }
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json models = nlohmann::json::array();
    std::vector<double> aucs, paucs;
    for (const auto& me : report.models) {
        models.push_back(model_eval_json(me));
        aucs.push_back(me.roc_curve.auc);
        paucs.push_back(me.froc_curve.pauc);
    }
    nlohmann::json j{{"config", report.config.to_json()},
                     {"models", std::move(models)},
                     {"ensemble", model_eval_json(report.ensemble)},
                     {"per_model_auc", aucs},
                     {"per_model_pauc", paucs}};

    if (report.models.size() >= 2) {
        auto grid = [](double lo, double hi, int n) {
            std::vector<double> g(n);
            for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
            return g;
        };
        std::vector<std::vector<std::pair<double, double>>> roc_steps, froc_steps;
        for (const auto& me : report.models) {
            std::vector<std::pair<double, double>> r, f;
            for (const auto& p : me.roc_curve.points) r.push_back({p.fpr, p.tpr});
            for (const auto& p : me.froc_curve.points) f.push_back({p.fp_per_case, p.sensitivity});
            roc_steps.push_back(std::move(r));
            froc_steps.push_back(std::move(f));
        }
        auto pack = [](const MeanCurve& mc) {
            return nlohmann::json{
                {"grid", mc.grid}, {"mean", mc.mean}, {"ci_lo", mc.lo}, {"ci_hi", mc.hi}};
        };
        j["mean_roc"] = pack(mean_curve_ci(roc_steps, grid(0.0, 1.0, 101)));
        j["mean_froc"] =
            pack(mean_curve_ci(froc_steps, grid(0.0, report.config.fp_hi, 101)));
    }

    if (report.subgroup_models) {
        nlohmann::json sub_models = nlohmann::json::array();
        std::vector<double> sub_aucs, sub_paucs;
        for (const auto& me : *report.subgroup_models) {
            sub_models.push_back(model_eval_json(me));
            sub_aucs.push_back(me.roc_curve.auc);
            sub_paucs.push_back(me.froc_curve.pauc);
        }
        j["subgroup"] = {{"max_size_mm", report.subgroup_max_mm},
                         {"case_count", report.subgroup_ensemble->cases.size()},
                         {"models", std::move(sub_models)},
                         {"ensemble", model_eval_json(*report.subgroup_ensemble)},
                         {"per_model_auc", sub_aucs},
                         {"per_model_pauc", sub_paucs}};
    } else {
        j["subgroup"] = nullptr;
    }
    return j;
}

void write_report(const EvalReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir / "report.json", std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write report.json");
        out << report_to_json(report).dump(2) << "\n";
    }
    for (const auto& me : report.models) {
        write_curve_csv(out_dir / ("roc_" + me.model_id + ".csv"), me.roc_curve);
        write_curve_csv(out_dir / ("froc_" + me.model_id + ".csv"), me.froc_curve);
    }
    write_curve_csv(out_dir / "roc_ensemble.csv", report.ensemble.roc_curve);
    write_curve_csv(out_dir / "froc_ensemble.csv", report.ensemble.froc_curve);
}

std::vector<double> report_metric_values(const nlohmann::json& report,
                                         const std::string& metric) {
    const std::string key = "per_model_" + metric;
    if (!report.contains(key))
        throw std::invalid_argument("report: metric '" + metric + "' not available");
    return report.at(key).get<std::vector<double>>();
}

}  // namespace voxdet
