#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "voxdet/phantom.hpp"
#include "voxdet/report.hpp"

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("VOXDET_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"voxdet: PDAC-style detection pipeline evaluation on volumetric data"};
    app.require_subcommand(1);

    // phantom
    auto* cmd_phantom = app.add_subcommand("phantom", "Generate a synthetic cohort");
    int n_pdac = 0, n_normal = 0, n_models = 1;
    std::uint64_t seed = default_seed();
    std::string out_dir;
    voxdet::phantom::PhantomParams pp;
    cmd_phantom->add_option("--pdac", n_pdac, "Number of pdac cases")->required();
    cmd_phantom->add_option("--normal", n_normal, "Number of normal cases")->required();
    cmd_phantom->add_option("--models", n_models, "Simulated models per case");
    cmd_phantom->add_option("--seed", seed, "Cohort seed");
    cmd_phantom->add_option("--out", out_dir, "Output directory")->required();
    cmd_phantom->add_option("--detect-prob", pp.detector.detect_prob, "Detector hit probability");
    cmd_phantom->add_option("--blur-sigma-mm", pp.detector.blur_sigma_mm, "Detector blur sigma");
    cmd_phantom->add_option("--noise-sigma", pp.detector.noise_sigma, "Additive noise sigma");
    cmd_phantom->add_option("--fp-blob-rate", pp.detector.fp_blob_rate,
                            "Mean false-positive blobs per case");

    // eval
    auto* cmd_eval = app.add_subcommand("eval", "Evaluate likelihood maps over a cohort");
    std::string manifest_path, config_path, eval_out;
    int jobs = 1;
    double subgroup_max_mm = -1.0;
    voxdet::RunConfig overrides;
    cmd_eval->add_option("--manifest", manifest_path, "Cohort manifest.json")->required();
    cmd_eval->add_option("--config", config_path, "RunConfig JSON file");
    cmd_eval->add_option("--out", eval_out, "Output directory")->required();
    cmd_eval->add_option("--jobs", jobs, "Concurrent case workers");
    auto* sub_opt = cmd_eval->add_option("--subgroup-max-mm", subgroup_max_mm,
                                         "Also report the small-lesion subgroup");
    auto* margin_opt = cmd_eval->add_option("--margin-mm", overrides.pipeline.margin_mm);
    auto* dilate_opt =
        cmd_eval->add_option("--dilate-radius-mm", overrides.pipeline.dilate_radius_mm);
    auto* dice_opt = cmd_eval->add_option("--dice-min", overrides.dice_min);
    auto* seed_opt = cmd_eval->add_option("--seed", overrides.seed);

    // compare
    auto* cmd_compare = app.add_subcommand("compare", "Permutation-test two reports");
    std::string report_a, report_b, metric = "auc";
    long iterations = 100000;
    int comparisons = 3;
    std::uint64_t cmp_seed = default_seed();
    cmd_compare->add_option("--a", report_a, "First report.json")->required();
    cmd_compare->add_option("--b", report_b, "Second report.json")->required();
    cmd_compare->add_option("--metric", metric, "auc | pauc")
        ->check(CLI::IsMember({"auc", "pauc"}));
    cmd_compare->add_option("--iterations", iterations, "Permutation iterations");
    cmd_compare->add_option("--seed", cmp_seed, "Permutation seed");
    cmd_compare->add_option("--m", comparisons, "Bonferroni comparison count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (cmd_phantom->parsed()) {
        pp.seed = seed;
        voxdet::phantom::gen_cohort(n_pdac, n_normal, n_models, pp, out_dir);
        std::cout << "wrote " << (n_pdac + n_normal) << " cases to " << out_dir << "\n";
        return 0;
    }

    if (cmd_eval->parsed()) {
        voxdet::RunConfig cfg;
        if (!config_path.empty()) cfg = voxdet::RunConfig::load(config_path);
        // Flags win over the config file.
        if (*margin_opt) cfg.pipeline.margin_mm = overrides.pipeline.margin_mm;
        if (*dilate_opt) cfg.pipeline.dilate_radius_mm = overrides.pipeline.dilate_radius_mm;
        if (*dice_opt) cfg.dice_min = overrides.dice_min;
        if (*seed_opt) cfg.seed = overrides.seed;
        if (*sub_opt) cfg.subgroup_max_mm = subgroup_max_mm;
        cfg.validate();
        const auto report = voxdet::run_eval(manifest_path, cfg, jobs, bool(*sub_opt));
        voxdet::write_report(report, eval_out);
        std::cout << "ensemble auc " << report.ensemble.roc_curve.auc << ", pauc "
                  << report.ensemble.froc_curve.pauc << "\n";
        return 0;
    }

    // compare
    auto load_json = [](const std::string& p) {
        std::ifstream in(p);
        if (!in) throw std::runtime_error("cannot open " + p);
        nlohmann::json j;
        in >> j;
        return j;
    };
    const auto values_a = voxdet::report_metric_values(load_json(report_a), metric);
    const auto values_b = voxdet::report_metric_values(load_json(report_b), metric);
    const auto rep =
        voxdet::permutation_test(values_a, values_b, iterations, cmp_seed, comparisons, metric);
    nlohmann::json out{{"metric", rep.metric},
                       {"mean_a", rep.mean_a},
                       {"mean_b", rep.mean_b},
                       {"observed_diff", rep.observed_diff},
                       {"p_raw", rep.p_raw},
                       {"p_adjusted", rep.p_adjusted},
                       {"iterations", rep.iterations},
                       {"comparisons", rep.comparisons},
                       {"seed", rep.seed},
                       {"alpha", rep.alpha},
                       {"significant", rep.p_adjusted < rep.alpha}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
