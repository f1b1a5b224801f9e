#include "voxdet/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "voxdet/resample.hpp"

namespace voxdet {
namespace {

void check_same_extent(const Geometry& image, const Geometry& coarse) {
    // Physical extents must agree to within half a coarse voxel per axis.
    for (int a = 0; a < 3; ++a) {
        const double img_lo = image.origin[a] - 0.5 * image.spacing[a];
        const double img_hi = img_lo + image.dims[a] * image.spacing[a];
        const double crs_lo = coarse.origin[a] - 0.5 * coarse.spacing[a];
        const double crs_hi = crs_lo + coarse.dims[a] * coarse.spacing[a];
        const double tol = 0.5 * coarse.spacing[a];
        if (std::abs(img_lo - crs_lo) > tol || std::abs(img_hi - crs_hi) > tol)
            throw std::invalid_argument("extract_roi: coarse mask extent mismatch");
    }
}

}  // namespace

RoiResult extract_roi(const ScalarVolume& image, const LabelVolume& coarse_mask,
                      const PipelineConfig& cfg) {
    cfg.validate();
    image.validate();
    coarse_mask.validate();
    check_same_extent(image.geom, coarse_mask.geom);
    if (coarse_mask.geom.dims[2] != image.geom.dims[2])
        throw std::invalid_argument("extract_roi: coarse mask z dimension mismatch");

    LabelVolume up = resample_inplane(coarse_mask, image.geom.dims[0], image.geom.dims[1]);
    up.geom = image.geom;  // same grid by construction; adopt exact metadata
    BinaryMask fg = BinaryMask::from_nonzero(up);
    if (fg.empty()) throw std::runtime_error("extract_roi: coarse mask is empty");

    RoiResult out;
    out.dilated_mask = dilate_sphere(fg, cfg.dilate_radius_mm);
    out.box = expand_box(bounding_box(out.dilated_mask), cfg.margin_mm, image.geom);
    out.roi_image = crop(image, out.box);
    return out;
}

ScalarVolume mask_likelihood(const ScalarVolume& likelihood, const LabelVolume& segmentation,
                             const std::set<std::uint8_t>& mask_codes) {
    if (likelihood.geom != segmentation.geom)
        throw std::invalid_argument("mask_likelihood: geometry mismatch");
    ScalarVolume out = likelihood;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        if (!mask_codes.count(segmentation.data[i])) out.data[i] = 0.0f;
    return out;
}

ScalarVolume ensemble_mean(const std::vector<ScalarVolume>& maps) {
    if (maps.empty()) throw std::invalid_argument("ensemble_mean: no maps");
    const Geometry& g = maps.front().geom;
    for (const auto& m : maps)
        if (m.geom != g) throw std::invalid_argument("ensemble_mean: geometry mismatch");

    ScalarVolume out(g);
    std::vector<double> acc(g.voxel_count(), 0.0);
    for (const auto& m : maps)
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m.data[i];
    const double inv = 1.0 / static_cast<double>(maps.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        out.data[i] = static_cast<float>(acc[i] * inv);
    return out;
}

double patient_score(const ScalarVolume& likelihood) {
    if (likelihood.data.empty()) return 0.0;
    return *std::max_element(likelihood.data.begin(), likelihood.data.end());
}

}  // namespace voxdet
