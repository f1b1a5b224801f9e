// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <vector>

#include "voxdet/candidates.hpp"
#include "voxdet/metrics.hpp"
#include "voxdet/morphology.hpp"
#include "voxdet/phantom.hpp"
#include "voxdet/pipeline.hpp"
#include "voxdet/report.hpp"

using namespace voxdet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : " — ",
                detail.c_str());
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "voxdet_acceptance";
    fs::create_directories(dir);
    return dir;
}

// A literal transcription of the candidate-extraction procedure, independent
// of the library implementation.
std::vector<std::vector<std::size_t>> naive_extract(ScalarVolume v, const PipelineConfig& cfg,
                                                    std::vector<double>* confidences) {
    std::vector<std::vector<std::size_t>> out;
    const auto& g = v.geom;
    while (int(out.size()) < cfg.max_lesions) {
        std::size_t best = 0;
        float peak = -1.0f;
        for (std::size_t i = 0; i < v.data.size(); ++i)
            if (v.data[i] > peak) {
                peak = v.data[i];
                best = i;
            }
        if (double(peak) < cfg.peak_floor) break;
        const float threshold = float(cfg.rel_threshold * double(peak));

        std::vector<std::size_t> region{best};
        std::vector<char> seen(v.data.size(), 0);
        seen[best] = 1;
        std::deque<std::size_t> queue{best};
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            const auto c = g.coords(cur);
            for (int dz = -1; dz <= 1; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0 && dz == 0) continue;
                        if (cfg.connectivity == 6 &&
                            std::abs(dx) + std::abs(dy) + std::abs(dz) != 1)
                            continue;
                        const int x = c[0] + dx, y = c[1] + dy, z = c[2] + dz;
                        if (!g.contains(x, y, z)) continue;
                        const std::size_t ni = g.index(x, y, z);
                        if (seen[ni] || v.data[ni] < threshold) continue;
                        seen[ni] = 1;
                        region.push_back(ni);
                        queue.push_back(ni);
                    }
        }
        std::sort(region.begin(), region.end());
        for (std::size_t i : region) v.data[i] = 0.0f;
        if (confidences) confidences->push_back(double(peak));
        out.push_back(std::move(region));
    }
    return out;
}

void check_end_to_end_and_jobs() {
    const auto t0 = Clock::now();
    const fs::path dir = scratch_dir() / "cohort";
    fs::remove_all(dir);
    phantom::PhantomParams params;
    params.seed = 20260826;
    phantom::gen_cohort(20, 20, 3, params, dir);

    RunConfig cfg;
    const EvalReport rep = run_eval(dir / "manifest.json", cfg, 4, true);

    bool auc_ok = rep.ensemble.roc_curve.auc == 1.0;
    bool pauc_ok = std::abs(rep.ensemble.froc_curve.pauc - 4.999) <= 1e-9;
    bool froc_ok = !rep.ensemble.froc_curve.points.empty();
    for (const auto& me : rep.models) {
        auc_ok = auc_ok && me.roc_curve.auc == 1.0;
        pauc_ok = pauc_ok && std::abs(me.froc_curve.pauc - 4.999) <= 1e-9;
    }
    // Full sensitivity before the first false positive: some operating point
    // sits at (0 fp/case, sensitivity 1).
    if (froc_ok) {
        froc_ok = false;
        for (const auto& pt : rep.ensemble.froc_curve.points)
            froc_ok = froc_ok || (pt.fp_per_case == 0.0 && pt.sensitivity == 1.0);
    }
    const double elapsed = seconds_since(t0);

    report("clean 20+20 cohort: every model and the ensemble reach auc 1.0", auc_ok);
    report("clean 20+20 cohort: full sensitivity at zero false positives", froc_ok);
    report("clean 20+20 cohort: partial froc area is 4.999 within 1e-9", pauc_ok);
    report("clean 20+20 cohort: generation + evaluation under 60 s", elapsed < 60.0,
           std::to_string(elapsed) + " s");

    // Identical output regardless of worker count.
    const fs::path o1 = scratch_dir() / "jobs1";
    const fs::path o8 = scratch_dir() / "jobs8";
    write_report(run_eval(dir / "manifest.json", cfg, 1, true), o1);
    write_report(run_eval(dir / "manifest.json", cfg, 8, true), o8);
    bool same = true;
    for (const auto& e : fs::directory_iterator(o1))
        same = same && slurp(e.path()) == slurp(o8 / e.path().filename());
    report("reports from 1 and 8 worker threads are byte-identical", same);
}

void check_auc_cross() {
    std::mt19937_64 rng(1);
    bool ok = true;
    for (int trial = 0; trial < 50 && ok; ++trial) {
        std::vector<double> pos(1 + rng() % 80), neg(1 + rng() % 80);
        for (auto& s : pos) s = (rng() % 40) / 39.0;
        for (auto& s : neg) s = (rng() % 40) / 39.0;
        double wins = 0.0;
        for (double p : pos)
            for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
        const double rank_auc = wins / (double(pos.size()) * double(neg.size()));
        ok = std::abs(roc(pos, neg).auc - rank_auc) <= 1e-12;
    }
    report("trapezoid auc equals pair counting within 1e-12 on 50 score sets", ok);
}

void check_pauc_riemann() {
    std::mt19937_64 rng(2);
    const int n = 1'000'000;
    const double width = (5.0 - 0.001) / n;
    const double lattice = 1000 * width;  // jumps land on Riemann bin edges
    bool ok = true;
    for (int trial = 0; trial < 50 && ok; ++trial) {
        FrocCurve c;
        long cell = 0;
        double sens = 0.0;
        for (int k = 0; k < 1 + int(rng() % 8); ++k) {
            cell += 1 + long(rng() % 200);
            sens = std::min(1.0, sens + (rng() % 100) / 300.0);
            c.points.push_back({1.0 - k * 0.1, 0.001 + cell * lattice, sens});
        }
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = 0.001 + (i + 0.5) * width;
            double y = 0.0;
            for (const auto& pt : c.points)
                if (pt.fp_per_case <= x) y = pt.sensitivity;
            acc += y * width;
        }
        ok = std::abs(pauc_froc(c, 0.001, 5.0) - acc) <= 1e-9;
    }
    report("partial froc area matches a 1e6-point Riemann sum within 1e-9", ok);
}

void check_candidates() {
    std::mt19937_64 rng(3);
    Geometry g{{16, 16, 16}, {1, 1, 1}, {0, 0, 0}};
    bool ok = true;
    for (int trial = 0; trial < 50 && ok; ++trial) {
        ScalarVolume v(g);
        for (auto& x : v.data) x = rng() % 4 ? 0.0f : float(rng() % 1001) / 1000.0f;
        PipelineConfig cfg;
        cfg.connectivity = trial % 2 ? 6 : 26;
        std::vector<double> confs;
        const auto expect = naive_extract(v, cfg, &confs);
        const auto got = extract_candidates(v, cfg);
        ok = got.size() == expect.size();
        for (std::size_t i = 0; ok && i < got.size(); ++i)
            ok = got[i].voxels == expect[i] && got[i].confidence == confs[i] &&
                 got[i].rank == int(i) + 1;
    }
    report("candidate extraction equals the literal procedure on 50 random maps", ok);
}

void check_morphology() {
    Geometry g1{{9, 9, 9}, {1, 1, 1}, {0, 0, 0}};
    BinaryMask single(g1);
    single.set(4, 4, 4);
    report("radius-2 ball around one voxel at 1 mm spacing has 33 voxels",
           dilate_sphere(single, 2.0).count() == 33);

    // Pairwise union-find over all voxel pairs, independent of the flood fill.
    std::mt19937_64 rng(4);
    Geometry g{{12, 12, 12}, {1, 1, 1}, {0, 0, 0}};
    bool ok = true;
    for (int trial = 0; trial < 50 && ok; ++trial) {
        BinaryMask m(g);
        for (auto& b : m.bits) b = rng() % 4 == 0;
        const int connectivity = trial % 2 ? 6 : 26;
        const auto labeled = connected_components(m, connectivity);

        std::vector<std::size_t> parent(m.bits.size()), voxels;
        for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (std::size_t i = 0; i < m.bits.size(); ++i)
            if (m.bits[i]) voxels.push_back(i);
        for (std::size_t a : voxels)
            for (std::size_t b : voxels) {
                if (a >= b) continue;
                const auto ca = g.coords(a), cb = g.coords(b);
                const int dx = std::abs(ca[0] - cb[0]), dy = std::abs(ca[1] - cb[1]),
                          dz = std::abs(ca[2] - cb[2]);
                if (dx > 1 || dy > 1 || dz > 1) continue;
                if (connectivity == 6 && dx + dy + dz != 1) continue;
                parent[find(a)] = find(b);
            }
        std::map<std::size_t, std::size_t> roots;
        for (std::size_t a : voxels) ++roots[find(a)];
        ok = std::size_t(labeled.count) == roots.size();
        for (std::size_t a : voxels)
            for (std::size_t b : voxels)
                ok = ok && (labeled.ids[a] == labeled.ids[b]) == (find(a) == find(b));
    }
    report("component labeling agrees with a union-find oracle on 50 random masks", ok);
}

void check_lesion_size() {
    Geometry g{{8, 8, 4}, {1, 1, 1}, {0, 0, 0}};
    // 3-4-5 right triangle in one axial slice: max pairwise distance 5 mm.
    const std::vector<std::size_t> tri{g.index(0, 0, 1), g.index(3, 0, 1), g.index(3, 4, 1)};
    report("3-4-5 triangle lesion measures exactly 5 mm", lesion_size_axial(tri, g) == 5.0);

    std::mt19937_64 rng(5);
    Geometry g2{{20, 20, 8}, {0.8, 1.1, 2.5}, {0, 0, 0}};
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
        std::vector<std::size_t> lesion;
        for (int k = 0; k < 200; ++k) lesion.push_back(rng() % g2.voxel_count());
        std::sort(lesion.begin(), lesion.end());
        lesion.erase(std::unique(lesion.begin(), lesion.end()), lesion.end());

        double best = std::max(g2.spacing[0], g2.spacing[1]);
        for (std::size_t a : lesion)
            for (std::size_t b : lesion) {
                const auto ca = g2.coords(a), cb = g2.coords(b);
                if (ca[2] != cb[2]) continue;
                const double dx = (ca[0] - cb[0]) * g2.spacing[0];
                const double dy = (ca[1] - cb[1]) * g2.spacing[1];
                best = std::max(best, std::sqrt(dx * dx + dy * dy));
            }
        ok = std::abs(lesion_size_axial(lesion, g2) - best) <= 1e-9;
    }
    report("axial size matches the all-pairs distance oracle", ok);
}

void check_permutation() {
    const std::vector<double> g{0.91, 0.93, 0.95, 0.97};
    report("permuting a group against itself yields p = 1",
           permutation_test(g, g, 10000, 7).p_raw == 1.0);

    std::mt19937_64 rng(6);
    std::vector<double> a(8), b(8);
    for (auto& x : a) x = (rng() % 1000) / 1000.0;
    for (auto& x : b) x = (rng() % 1000) / 1000.0;
    const auto r1 = permutation_test(a, b, 20000, 99);
    const auto r2 = permutation_test(a, b, 20000, 99);
    report("permutation p-values are seed-deterministic", r1.p_raw == r2.p_raw);

    int rejections = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(10), y(10);
        for (auto& v : x) v = (rng() % 100000) / 100000.0;
        for (auto& v : y) v = (rng() % 100000) / 100000.0;
        if (permutation_test(x, y, 2000, 500 + trial).p_raw < 0.025) ++rejections;
    }
    report("null rejection rate at alpha 0.025 stays within [0, 0.08] over 100 trials",
           rejections <= 8, std::to_string(rejections) + "/100 rejections");

    const auto t0 = Clock::now();
    permutation_test(a, b, 100000, 1);
    const double elapsed = seconds_since(t0);
    report("100000 permutation iterations run in under 5 s", elapsed < 5.0,
           std::to_string(elapsed) + " s");
}

void check_masking_and_roi() {
    std::mt19937_64 rng(7);
    Geometry g{{8, 8, 6}, {1, 1, 1}, {0, 0, 0}};
    bool mask_ok = true;
    for (int trial = 0; trial < 100 && mask_ok; ++trial) {
        ScalarVolume like(g);
        for (auto& x : like.data) x = float(rng() % 10001) / 10000.0f;
        LabelVolume seg(g);
        for (auto& c : seg.data) c = std::uint8_t(rng() % 4);
        mask_ok = patient_score(mask_likelihood(like, seg, {kTumor, kPancreas})) <=
                  patient_score(like);
    }
    report("organ masking never raises the patient score (100 random pairs)", mask_ok);

    phantom::PhantomParams params;
    params.seed = 88;
    PipelineConfig cfg;
    bool roi_ok = true;
    for (std::uint64_t cs = 0; cs < 10 && roi_ok; ++cs) {
        const auto pc = phantom::gen_case(params, cs, true);
        const RoiResult roi = extract_roi(pc.image, pc.coarse_mask, cfg);
        for (std::size_t i = 0; i < pc.gt_labels.data.size(); ++i)
            if (pc.gt_labels.data[i] == kTumor) {
                const auto c = pc.gt_labels.geom.coords(i);
                roi_ok = roi_ok && roi.box.contains(c[0], c[1], c[2]);
            }
    }
    report("extracted roi contains every tumor voxel on 10 phantom cases", roi_ok);
}

}  // namespace

int main() {
    check_end_to_end_and_jobs();
    check_auc_cross();
    check_pauc_riemann();
    check_candidates();
    check_morphology();
    check_lesion_size();
    check_permutation();
    check_masking_and_roi();
    std::printf("%s (%d failure%s)\n", failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED",
                failures, failures == 1 ? "" : "s");
    return failures;
}
