#include "voxdet/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "voxdet/nrrd.hpp"
#include "voxdet/resample.hpp"
#include "voxdet/rng.hpp"

namespace voxdet::phantom {
namespace {

struct Ellipsoid {
    Vec3 center;             // mm
    std::array<double, 3> radii;  // mm

    bool contains(const Vec3& p) const {
        const double dx = (p.x - center.x) / radii[0];
        const double dy = (p.y - center.y) / radii[1];
        const double dz = (p.z - center.z) / radii[2];
        return dx * dx + dy * dy + dz * dz <= 1.0;
    }
};

// Separable Gaussian blur in physical units; kernels truncate at 3 sigma.
void gaussian_blur(ScalarVolume& vol, double sigma_mm) {
    if (!(sigma_mm > 0.0)) return;
    const Geometry& g = vol.geom;
    std::vector<float> tmp(vol.data.size());
    for (int axis = 0; axis < 3; ++axis) {
        const double sigma_vox = sigma_mm / g.spacing[axis];
        const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_vox)));
        std::vector<double> kernel(2 * radius + 1);
        double sum = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            kernel[k + radius] = std::exp(-0.5 * k * k / (sigma_vox * sigma_vox));
            sum += kernel[k + radius];
        }
        for (double& w : kernel) w /= sum;

        const std::array<int, 3> n = g.dims;
        for (int z = 0; z < n[2]; ++z)
            for (int y = 0; y < n[1]; ++y)
                for (int x = 0; x < n[0]; ++x) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        int cx = x, cy = y, cz = z;
                        int& c = axis == 0 ? cx : (axis == 1 ? cy : cz);
                        c = std::clamp(c + k, 0, n[axis] - 1);
                        acc += kernel[k + radius] * vol.at(cx, cy, cz);
                    }
                    tmp[g.index(x, y, z)] = static_cast<float>(acc);
                }
        vol.data.swap(tmp);
    }
}

}  // namespace

void PhantomParams::validate() const {
    Geometry g{dims, spacing, {0, 0, 0}};
    g.validate();
    if (!(pancreas_radius_range_mm[0] > 0) ||
        pancreas_radius_range_mm[1] < pancreas_radius_range_mm[0])
        throw std::invalid_argument("phantom: bad pancreas radius range");
    if (!(tumor_radius_range_mm[0] > 0) || tumor_radius_range_mm[1] < tumor_radius_range_mm[0])
        throw std::invalid_argument("phantom: bad tumor radius range");
    if (detector.detect_prob < 0.0 || detector.detect_prob > 1.0)
        throw std::invalid_argument("phantom: detect_prob outside [0,1]");
    if (detector.noise_sigma < 0.0 || detector.fp_blob_rate < 0.0 ||
        detector.blur_sigma_mm < 0.0)
        throw std::invalid_argument("phantom: negative detector parameter");
}

PhantomCase gen_case(const PhantomParams& params, std::uint64_t case_seed, bool pdac) {
    params.validate();
    Rng rng(mix_seed(params.seed, case_seed));

    Geometry g;
    g.dims = params.dims;
    g.spacing = params.spacing;
    g.origin = {0.0, 0.0, 0.0};
    const auto ext = g.extent_mm();

    Ellipsoid pancreas;
    pancreas.center = {ext[0] / 2 + rng.uniform(-6.0, 6.0), ext[1] / 2 + rng.uniform(-6.0, 6.0),
                       ext[2] / 2 + rng.uniform(-6.0, 6.0)};
    for (int a = 0; a < 3; ++a)
        pancreas.radii[a] =
            rng.uniform(params.pancreas_radius_range_mm[0], params.pancreas_radius_range_mm[1]);

    Ellipsoid tumor{};
    bool have_tumor = false;
    if (pdac) {
        // A sphere of radius r centered inside the ellipsoid with semi-axes
        // R_i - r is guaranteed to fit; resample radii a bounded number of
        // times if the shrunken ellipsoid is degenerate.
        for (int attempt = 0; attempt < 100 && !have_tumor; ++attempt) {
            const double r =
                rng.uniform(params.tumor_radius_range_mm[0], params.tumor_radius_range_mm[1]);
            std::array<double, 3> slack{pancreas.radii[0] - r, pancreas.radii[1] - r,
                                        pancreas.radii[2] - r};
            if (slack[0] <= 0 || slack[1] <= 0 || slack[2] <= 0) continue;
            double ux, uy, uz;
            do {
                ux = rng.uniform(-1.0, 1.0);
                uy = rng.uniform(-1.0, 1.0);
                uz = rng.uniform(-1.0, 1.0);
            } while (ux * ux + uy * uy + uz * uz > 1.0);
            tumor.center = {pancreas.center.x + ux * slack[0], pancreas.center.y + uy * slack[1],
                            pancreas.center.z + uz * slack[2]};
            tumor.radii = {r, r, r};
            have_tumor = true;
        }
        if (!have_tumor)
            throw std::runtime_error("phantom: tumor does not fit inside pancreas");
    }

    PhantomCase out;
    out.is_pdac = pdac;
    out.gt_labels = LabelVolume(g);
    out.image = ScalarVolume(g);

    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                const Vec3 w = g.world(x, y, z);
                std::uint8_t code = kBackground;
                if (pancreas.contains(w)) code = kPancreas;
                if (have_tumor && tumor.contains(w)) code = kTumor;
                out.gt_labels.at(x, y, z) = code;

                // Smooth background gradient + per-tissue offsets + noise.
                double v = 40.0 + 0.1 * w.z;
                if (code == kPancreas) v += 40.0;
                if (code == kTumor) v += 25.0;
                v += rng.normal(0.0, 6.0);
                out.image.at(x, y, z) = static_cast<float>(v);
            }

    // Coarse pancreas∪tumor mask at quarter in-plane resolution.
    LabelVolume fg(g);
    for (std::size_t i = 0; i < fg.data.size(); ++i)
        fg.data[i] = out.gt_labels.data[i] != kBackground ? kPancreas : kBackground;
    out.coarse_mask =
        resample_inplane(fg, std::max(1, g.dims[0] / 4), std::max(1, g.dims[1] / 4));
    return out;
}

ScalarVolume simulate_likelihood(const LabelVolume& gt_labels, const DetectorParams& detector,
                                 std::uint64_t model_seed) {
    Rng rng(model_seed);
    const Geometry& g = gt_labels.geom;
    ScalarVolume map(g);

    bool tumor_present = false;
    for (std::uint8_t c : gt_labels.data)
        if (c == kTumor) { tumor_present = true; break; }

    if (tumor_present && rng.bernoulli(detector.detect_prob)) {
        const double peak = rng.uniform(0.7, 1.0);
        ScalarVolume plateau(g);
        for (std::size_t i = 0; i < plateau.data.size(); ++i)
            plateau.data[i] = gt_labels.data[i] == kTumor ? 1.0f : 0.0f;
        gaussian_blur(plateau, detector.blur_sigma_mm);
        const float mx = *std::max_element(plateau.data.begin(), plateau.data.end());
        if (mx > 0.0f) {
            const float scale = static_cast<float>(peak) / mx;
            for (std::size_t i = 0; i < plateau.data.size(); ++i)
                map.data[i] = std::max(map.data[i], plateau.data[i] * scale);
        }
    }

    const int n_blobs = detector.fp_blob_rate > 0.0 ? rng.poisson(detector.fp_blob_rate) : 0;
    for (int b = 0; b < n_blobs; ++b) {
        const int cx = static_cast<int>(rng.below(g.dims[0]));
        const int cy = static_cast<int>(rng.below(g.dims[1]));
        const int cz = static_cast<int>(rng.below(g.dims[2]));
        const double peak =
            rng.uniform(detector.fp_blob_peak_range[0], detector.fp_blob_peak_range[1]);
        const double sigma = rng.uniform(1.5, 4.0);  // mm
        const int rx = std::max(1, static_cast<int>(std::ceil(3 * sigma / g.spacing[0])));
        const int ry = std::max(1, static_cast<int>(std::ceil(3 * sigma / g.spacing[1])));
        const int rz = std::max(1, static_cast<int>(std::ceil(3 * sigma / g.spacing[2])));
        for (int dz = -rz; dz <= rz; ++dz)
            for (int dy = -ry; dy <= ry; ++dy)
                for (int dx = -rx; dx <= rx; ++dx) {
                    const int x = cx + dx, y = cy + dy, z = cz + dz;
                    if (!g.contains(x, y, z)) continue;
                    const double d2 = dx * g.spacing[0] * dx * g.spacing[0] +
                                      dy * g.spacing[1] * dy * g.spacing[1] +
                                      dz * g.spacing[2] * dz * g.spacing[2];
                    const double v = peak * std::exp(-0.5 * d2 / (sigma * sigma));
                    auto& cell = map.data[g.index(x, y, z)];
                    cell = std::max(cell, static_cast<float>(v));
                }
    }

    if (detector.noise_sigma > 0.0)
        for (float& v : map.data)
            v = static_cast<float>(v + rng.normal(0.0, detector.noise_sigma));
    for (float& v : map.data) v = std::clamp(v, 0.0f, 1.0f);
    return map;
}

nlohmann::json params_to_json(const PhantomParams& p) {
    return {
        {"dims", p.dims},
        {"spacing", p.spacing},
        {"pancreas_radius_range_mm", p.pancreas_radius_range_mm},
        {"tumor_radius_range_mm", p.tumor_radius_range_mm},
        {"detector",
         {{"detect_prob", p.detector.detect_prob},
          {"blur_sigma_mm", p.detector.blur_sigma_mm},
          {"noise_sigma", p.detector.noise_sigma},
          {"fp_blob_rate", p.detector.fp_blob_rate},
          {"fp_blob_peak_range", p.detector.fp_blob_peak_range}}},
        {"seed", p.seed},
    };
}

PhantomParams params_from_json(const nlohmann::json& j) {
    PhantomParams p;
    j.at("dims").get_to(p.dims);
    j.at("spacing").get_to(p.spacing);
    j.at("pancreas_radius_range_mm").get_to(p.pancreas_radius_range_mm);
    j.at("tumor_radius_range_mm").get_to(p.tumor_radius_range_mm);
    const auto& d = j.at("detector");
    d.at("detect_prob").get_to(p.detector.detect_prob);
    d.at("blur_sigma_mm").get_to(p.detector.blur_sigma_mm);
    d.at("noise_sigma").get_to(p.detector.noise_sigma);
    d.at("fp_blob_rate").get_to(p.detector.fp_blob_rate);
    d.at("fp_blob_peak_range").get_to(p.detector.fp_blob_peak_range);
    j.at("seed").get_to(p.seed);
    p.validate();
    return p;
}

nlohmann::json manifest_to_json(const CohortManifest& m) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : m.cases)
        cases.push_back({{"id", c.id},
                         {"cohort", c.cohort},
                         {"image", c.image},
                         {"gt_labels", c.gt_labels},
                         {"coarse_mask", c.coarse_mask},
                         {"likelihoods", c.likelihoods}});
    return {{"cases", std::move(cases)}, {"params", m.params}, {"seed", m.seed}};
}

CohortManifest manifest_from_json(const nlohmann::json& j) {
    CohortManifest m;
    m.params = j.at("params");
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("cases")) {
        ManifestCase c;
        e.at("id").get_to(c.id);
        e.at("cohort").get_to(c.cohort);
        if (c.cohort != "pdac" && c.cohort != "normal")
            throw std::invalid_argument("manifest: cohort must be 'pdac' or 'normal'");
        e.at("image").get_to(c.image);
        e.at("gt_labels").get_to(c.gt_labels);
        e.at("coarse_mask").get_to(c.coarse_mask);
        e.at("likelihoods").get_to(c.likelihoods);
        m.cases.push_back(std::move(c));
    }
    return m;
}

CohortManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return manifest_from_json(j);
}

CohortManifest gen_cohort(int n_pdac, int n_normal, int n_models, const PhantomParams& params,
                          const std::filesystem::path& out_dir) {
    if (n_pdac < 0 || n_normal < 0 || n_models < 1)
        throw std::invalid_argument("gen_cohort: bad cohort counts");
    params.validate();
    std::filesystem::create_directories(out_dir);

    CohortManifest manifest;
    manifest.params = params_to_json(params);
    manifest.seed = params.seed;

    const int total = n_pdac + n_normal;
    for (int i = 0; i < total; ++i) {
        const bool pdac = i < n_pdac;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s_%03d", pdac ? "pdac" : "normal",
                      pdac ? i : i - n_pdac);
        const std::string id = buf;

        PhantomCase pc = gen_case(params, static_cast<std::uint64_t>(i), pdac);
        pc.case_id = id;

        ManifestCase mc;
        mc.id = id;
        mc.cohort = pdac ? "pdac" : "normal";
        mc.image = id + "_image.nrrd";
        mc.gt_labels = id + "_labels.nrrd";
        mc.coarse_mask = id + "_coarse.nrrd";
        nrrd::write(pc.image, out_dir / mc.image);
        nrrd::write(pc.gt_labels, out_dir / mc.gt_labels);
        nrrd::write(pc.coarse_mask, out_dir / mc.coarse_mask);

        for (int m = 0; m < n_models; ++m) {
            const std::uint64_t model_seed =
                mix_seed(mix_seed(params.seed, static_cast<std::uint64_t>(i)),
                         0x4d00u + static_cast<std::uint64_t>(m));
            ScalarVolume like = simulate_likelihood(pc.gt_labels, params.detector, model_seed);
            std::snprintf(buf, sizeof(buf), "_like_m%02d.nrrd", m);
            const std::string name = id + buf;
            nrrd::write(like, out_dir / name);
            mc.likelihoods.push_back(name);
        }
        manifest.cases.push_back(std::move(mc));
    }

    std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("gen_cohort: cannot write manifest");
    out << manifest_to_json(manifest).dump(2) << "\n";
    return manifest;
}

}  // namespace voxdet::phantom
