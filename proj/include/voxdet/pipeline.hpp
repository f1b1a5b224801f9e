#pragma once

#include <set>
#include <vector>

#include "voxdet/morphology.hpp"
#include "voxdet/volume.hpp"

namespace voxdet {

struct PipelineConfig {
    double dilate_radius_mm = 5.0;
    double margin_mm = 20.0;
    double rel_threshold = 0.4;   // candidate voxels need >= rel_threshold * peak
    int max_lesions = 5;
    double peak_floor = 1e-3;     // peaks below this end the extraction loop
    int connectivity = 26;
    std::set<std::uint8_t> mask_codes{kTumor, kPancreas};

    void validate() const {
        if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
            throw std::invalid_argument("config: rel_threshold must be in (0,1)");
        if (peak_floor < 0.0) throw std::invalid_argument("config: peak_floor must be >= 0");
        if (max_lesions < 1) throw std::invalid_argument("config: max_lesions must be >= 1");
        if (connectivity != 6 && connectivity != 26)
            throw std::invalid_argument("config: connectivity must be 6 or 26");
        if (!(dilate_radius_mm > 0.0))
            throw std::invalid_argument("config: dilate_radius_mm must be > 0");
        if (margin_mm < 0.0) throw std::invalid_argument("config: margin_mm must be >= 0");
    }
};

struct RoiResult {
    ScalarVolume roi_image;
    VoxelBox box;             // on the full-resolution image grid
    BinaryMask dilated_mask;  // upsampled + dilated coarse mask, image grid
};

/// Upsamples the coarse mask to the image grid (nearest), dilates it with a
/// spherical kernel, expands the bounding box by the configured margin and
/// crops the image. Nonzero coarse codes count as foreground.
RoiResult extract_roi(const ScalarVolume& image, const LabelVolume& coarse_mask,
                      const PipelineConfig& cfg);

/// Keeps likelihood only where the segmentation code is in mask_codes.
ScalarVolume mask_likelihood(const ScalarVolume& likelihood, const LabelVolume& segmentation,
                             const std::set<std::uint8_t>& mask_codes);

/// Voxelwise arithmetic mean of likelihood maps with identical geometry.
ScalarVolume ensemble_mean(const std::vector<ScalarVolume>& maps);

/// Patient-level tumor likelihood: the global maximum of the map.
double patient_score(const ScalarVolume& likelihood);

}  // namespace voxdet
