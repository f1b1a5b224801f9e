#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voxdet/volume.hpp"

#include "json.hpp"

namespace voxdet::phantom {

struct DetectorParams {
    double detect_prob = 1.0;     // chance the tumor is emitted at all
    double blur_sigma_mm = 2.0;   // Gaussian blur of the tumor plateau
    double noise_sigma = 0.0;     // additive voxel noise, clipped into [0,1]
    double fp_blob_rate = 0.0;    // Poisson mean of false-positive blobs
    std::array<double, 2> fp_blob_peak_range{0.2, 0.6};
};

struct PhantomParams {
    std::array<int, 3> dims{96, 96, 48};
    std::array<double, 3> spacing{1.5, 1.5, 3.0};
    std::array<double, 2> pancreas_radius_range_mm{30.0, 45.0};
    // Tumor radii span the <20 mm axial-diameter subgroup boundary.
    std::array<double, 2> tumor_radius_range_mm{4.0, 25.0};
    DetectorParams detector;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PhantomCase {
    std::string case_id;
    bool is_pdac = false;
    ScalarVolume image;
    LabelVolume gt_labels;    // codes: 0 background, 1 tumor, 2 pancreas
    LabelVolume coarse_mask;  // pancreas∪tumor at quarter in-plane resolution
};

/// Deterministic given (params.seed, case_seed).
PhantomCase gen_case(const PhantomParams& params, std::uint64_t case_seed, bool pdac);

/// Simulated detector output on the ground-truth grid.
ScalarVolume simulate_likelihood(const LabelVolume& gt_labels, const DetectorParams& detector,
                                 std::uint64_t model_seed);

struct ManifestCase {
    std::string id;
    std::string cohort;  // "pdac" | "normal"
    std::string image;
    std::string gt_labels;
    std::string coarse_mask;
    std::vector<std::string> likelihoods;  // one path per model
};

struct CohortManifest {
    std::vector<ManifestCase> cases;
    nlohmann::json params;
    std::uint64_t seed = 0;
};

nlohmann::json manifest_to_json(const CohortManifest& m);
CohortManifest manifest_from_json(const nlohmann::json& j);
CohortManifest load_manifest(const std::filesystem::path& path);

nlohmann::json params_to_json(const PhantomParams& p);
PhantomParams params_from_json(const nlohmann::json& j);

/// Writes all case volumes plus manifest.json into out_dir; paths in the
/// manifest are relative to out_dir. Byte-identical on regeneration.
CohortManifest gen_cohort(int n_pdac, int n_normal, int n_models, const PhantomParams& params,
                          const std::filesystem::path& out_dir);

}  // namespace voxdet::phantom
