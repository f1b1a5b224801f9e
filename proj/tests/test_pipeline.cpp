#include "doctest.h"

#include <random>

#include "voxdet/phantom.hpp"
#include "voxdet/pipeline.hpp"
#include "voxdet/resample.hpp"

using namespace voxdet;

namespace {

ScalarVolume random_likelihood(std::mt19937_64& rng, const Geometry& g) {
    ScalarVolume v(g);
    for (auto& x : v.data) x = float(rng() % 10001) / 10000.0f;
    return v;
}

LabelVolume random_labels(std::mt19937_64& rng, const Geometry& g) {
    LabelVolume v(g);
    for (auto& c : v.data) c = std::uint8_t(rng() % 4);
    return v;
}

}  // namespace

TEST_CASE("roi from a phantom coarse mask contains every tumor voxel") {
    phantom::PhantomParams params;
    params.seed = 101;
    PipelineConfig cfg;
    for (std::uint64_t cs = 0; cs < 4; ++cs) {
        const auto pc = phantom::gen_case(params, cs, true);
        const RoiResult roi = extract_roi(pc.image, pc.coarse_mask, cfg);
        for (int z = 0; z < pc.gt_labels.geom.dims[2]; ++z)
            for (int y = 0; y < pc.gt_labels.geom.dims[1]; ++y)
                for (int x = 0; x < pc.gt_labels.geom.dims[0]; ++x)
                    if (pc.gt_labels.at(x, y, z) == kTumor) CHECK(roi.box.contains(x, y, z));
    }
}

TEST_CASE("degenerate margin and dilation reduce to the upsampled mask box") {
    phantom::PhantomParams params;
    params.seed = 5;
    const auto pc = phantom::gen_case(params, 0, true);
    PipelineConfig cfg;
    cfg.margin_mm = 0.0;
    cfg.dilate_radius_mm = 0.5 * *std::min_element(params.spacing.begin(), params.spacing.end());
    const RoiResult roi = extract_roi(pc.image, pc.coarse_mask, cfg);

    LabelVolume up = resample_inplane(pc.coarse_mask, pc.image.geom.dims[0],
                                      pc.image.geom.dims[1]);
    up.geom = pc.image.geom;
    CHECK(roi.box == bounding_box(BinaryMask::from_nonzero(up)));
}

TEST_CASE("empty coarse mask is an error") {
    Geometry g{{16, 16, 8}, {1, 1, 1}, {0, 0, 0}};
    Geometry cg{{4, 4, 8}, {4, 4, 1}, {1.5, 1.5, 0}};
    ScalarVolume image(g);
    LabelVolume coarse(cg);
    CHECK_THROWS_WITH_AS(extract_roi(image, coarse, PipelineConfig{}),
                         doctest::Contains("empty"), std::runtime_error);
}

TEST_CASE("roi box always contains the dilated mask") {
    phantom::PhantomParams params;
    params.seed = 77;
    PipelineConfig cfg;
    const auto pc = phantom::gen_case(params, 3, true);
    const RoiResult roi = extract_roi(pc.image, pc.coarse_mask, cfg);
    const Geometry& g = roi.dilated_mask.geom;
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x)
                if (roi.dilated_mask.get(x, y, z)) CHECK(roi.box.contains(x, y, z));
}

TEST_CASE("masking keeps pancreas-coded voxels and zeroes the rest") {
    Geometry g{{6, 6, 4}, {1, 1, 1}, {0, 0, 0}};
    std::mt19937_64 rng(23);
    ScalarVolume like = random_likelihood(rng, g);

    LabelVolume all_pancreas(g, kPancreas);
    CHECK(mask_likelihood(like, all_pancreas, {kTumor, kPancreas}).data == like.data);

    LabelVolume all_bg(g, kBackground);
    for (float v : mask_likelihood(like, all_bg, {kTumor, kPancreas}).data) CHECK(v == 0.0f);

    for (int trial = 0; trial < 20; ++trial) {
        ScalarVolume m = random_likelihood(rng, g);
        LabelVolume seg = random_labels(rng, g);
        const std::set<std::uint8_t> codes{kTumor, kPancreas};
        ScalarVolume masked = mask_likelihood(m, seg, codes);
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            const float expect = codes.count(seg.data[i]) ? m.data[i] : 0.0f;
            CHECK(masked.data[i] == expect);
        }
        // Idempotent.
        CHECK(mask_likelihood(masked, seg, codes).data == masked.data);
    }
}

TEST_CASE("masking requires identical geometry") {
    ScalarVolume like(Geometry{{4, 4, 4}, {1, 1, 1}, {0, 0, 0}});
    LabelVolume seg(Geometry{{4, 4, 5}, {1, 1, 1}, {0, 0, 0}});
    CHECK_THROWS_AS(mask_likelihood(like, seg, {kPancreas}), std::invalid_argument);
}

TEST_CASE("ensemble mean") {
    Geometry g{{2, 1, 1}, {1, 1, 1}, {0, 0, 0}};
    std::mt19937_64 rng(31);

    ScalarVolume a(g);
    a.data = {0.0f, 1.0f};
    ScalarVolume b(g);
    b.data = {1.0f, 0.0f};
    ScalarVolume m = ensemble_mean({a, b});
    CHECK(m.data[0] == 0.5f);
    CHECK(m.data[1] == 0.5f);

    std::vector<ScalarVolume> copies(10, a);
    CHECK(ensemble_mean(copies).data == a.data);

    CHECK_THROWS_AS(ensemble_mean({}), std::invalid_argument);

    // Mean matches a wide-accumulator oracle and is permutation-invariant.
    Geometry g2{{5, 4, 3}, {1, 1, 1}, {0, 0, 0}};
    std::vector<ScalarVolume> maps;
    for (int k = 0; k < 10; ++k) maps.push_back(random_likelihood(rng, g2));
    ScalarVolume mean = ensemble_mean(maps);
    for (std::size_t i = 0; i < mean.data.size(); ++i) {
        double acc = 0.0;
        for (const auto& mp : maps) acc += mp.data[i];
        CHECK(mean.data[i] == doctest::Approx(acc / 10.0).epsilon(1e-7));
        CHECK(mean.data[i] >= 0.0f);
        CHECK(mean.data[i] <= 1.0f);
    }
    std::shuffle(maps.begin(), maps.end(), rng);
    CHECK(ensemble_mean(maps).data == mean.data);
}

TEST_CASE("patient score is the global maximum") {
    Geometry g{{4, 4, 4}, {1, 1, 1}, {0, 0, 0}};
    ScalarVolume zero(g);
    CHECK(patient_score(zero) == 0.0);

    ScalarVolume v(g);
    v.at(2, 3, 1) = 0.73f;
    CHECK(patient_score(v) == doctest::Approx(0.73).epsilon(1e-7));
}

TEST_CASE("masked score never exceeds the unmasked score") {
    std::mt19937_64 rng(47);
    Geometry g{{6, 5, 4}, {1, 1, 1}, {0, 0, 0}};
    for (int trial = 0; trial < 100; ++trial) {
        ScalarVolume m = random_likelihood(rng, g);
        LabelVolume seg = random_labels(rng, g);
        CHECK(patient_score(mask_likelihood(m, seg, {kTumor, kPancreas})) <= patient_score(m));
    }
}
