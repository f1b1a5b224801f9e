#include "voxdet/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace voxdet {
namespace {

struct Off { int dx, dy, dz; };

std::vector<Off> neighbor_offsets(int connectivity) {
    std::vector<Off> nbrs;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                if (connectivity == 6 && std::abs(dx) + std::abs(dy) + std::abs(dz) != 1)
                    continue;
                nbrs.push_back({dx, dy, dz});
            }
    return nbrs;
}

// Convex hull of 2D points (Andrew monotone chain); the farthest pair of a
// point set is realized between hull vertices.
std::vector<std::pair<double, double>> convex_hull(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    auto cross = [](const auto& o, const auto& a, const auto& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace

std::string to_string(CandidateStatus s) {
    switch (s) {
        case CandidateStatus::TruePositive: return "tp";
        case CandidateStatus::FalsePositive: return "fp";
        case CandidateStatus::IgnoredDuplicate: return "duplicate";
    }
    throw std::logic_error("bad candidate status");
}

CandidateStatus candidate_status_from_string(const std::string& s) {
    if (s == "tp") return CandidateStatus::TruePositive;
    if (s == "fp") return CandidateStatus::FalsePositive;
    if (s == "duplicate") return CandidateStatus::IgnoredDuplicate;
    throw std::invalid_argument("bad candidate status '" + s + "'");
}

std::vector<CandidateLesion> extract_candidates(const ScalarVolume& likelihood,
                                                const PipelineConfig& cfg) {
    cfg.validate();
    const Geometry& g = likelihood.geom;
    std::vector<float> residual = likelihood.data;
    const auto nbrs = neighbor_offsets(cfg.connectivity);

    std::vector<CandidateLesion> out;
    std::vector<std::size_t> stack;
    while (static_cast<int>(out.size()) < cfg.max_lesions) {
        // Global maximum, first occurrence wins ties.
        std::size_t peak_idx = 0;
        float peak = residual.empty() ? 0.0f : residual[0];
        for (std::size_t i = 1; i < residual.size(); ++i)
            if (residual[i] > peak) { peak = residual[i]; peak_idx = i; }
        if (!(peak >= cfg.peak_floor) || peak <= 0.0f) break;

        const float thresh = static_cast<float>(cfg.rel_threshold * peak);
        CandidateLesion cand;
        cand.confidence = peak;
        cand.rank = static_cast<int>(out.size()) + 1;

        stack.assign(1, peak_idx);
        std::vector<std::size_t>& region = cand.voxels;
        region.push_back(peak_idx);
        residual[peak_idx] = 0.0f;
        double cx = 0, cy = 0, cz = 0;
        {
            const auto c = g.coords(peak_idx);
            const Vec3 w = g.world(c[0], c[1], c[2]);
            cx += w.x; cy += w.y; cz += w.z;
        }
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            const auto c = g.coords(cur);
            for (const Off& o : nbrs) {
                const int nx = c[0] + o.dx, ny = c[1] + o.dy, nz = c[2] + o.dz;
                if (!g.contains(nx, ny, nz)) continue;
                const std::size_t ni = g.index(nx, ny, nz);
                if (residual[ni] >= thresh && residual[ni] > 0.0f) {
                    residual[ni] = 0.0f;
                    region.push_back(ni);
                    stack.push_back(ni);
                    const Vec3 w = g.world(nx, ny, nz);
                    cx += w.x; cy += w.y; cz += w.z;
                }
            }
        }
        std::sort(region.begin(), region.end());
        const double inv = 1.0 / static_cast<double>(region.size());
        cand.centroid_mm = {cx * inv, cy * inv, cz * inv};
        out.push_back(std::move(cand));
    }
    return out;
}

double dice(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.empty() && b.empty()) throw std::invalid_argument("dice: both sets empty");
    std::size_t inter = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++inter; ++i; ++j; }
    }
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a.size() + b.size());
}

MatchResult match_candidates(const std::vector<CandidateLesion>& cands,
                             const std::vector<std::vector<std::size_t>>& gt_lesions,
                             double dice_min, DuplicatePolicy policy) {
    MatchResult res;
    res.lesion_to_candidate.assign(gt_lesions.size(), -1);
    res.status.assign(cands.size(), CandidateStatus::FalsePositive);
    res.dice_value.assign(cands.size(), 0.0);

    // Confidence-descending order, ties by rank.
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cands[a].confidence != cands[b].confidence)
            return cands[a].confidence > cands[b].confidence;
        return cands[a].rank < cands[b].rank;
    });

    std::vector<bool> claimed(gt_lesions.size(), false);
    for (std::size_t ci : order) {
        double best_free = -1.0;
        int best_free_lesion = -1;
        bool hits_claimed = false;
        for (std::size_t li = 0; li < gt_lesions.size(); ++li) {
            const double d = dice(cands[ci].voxels, gt_lesions[li]);
            if (d < dice_min) continue;
            if (claimed[li]) {
                hits_claimed = true;
            } else if (d > best_free) {
                best_free = d;
                best_free_lesion = static_cast<int>(li);
            }
        }
        if (best_free_lesion >= 0) {
            claimed[best_free_lesion] = true;
            res.lesion_to_candidate[best_free_lesion] = static_cast<int>(ci);
            res.status[ci] = CandidateStatus::TruePositive;
            res.dice_value[ci] = best_free;
        } else if (hits_claimed && policy == DuplicatePolicy::Ignore) {
            res.status[ci] = CandidateStatus::IgnoredDuplicate;
        }
    }
    return res;
}

double lesion_size_axial(const std::vector<std::size_t>& lesion, const Geometry& geom) {
    if (lesion.empty()) throw std::invalid_argument("lesion_size_axial: empty lesion");
    std::map<int, std::vector<std::pair<double, double>>> slices;
    for (std::size_t idx : lesion) {
        const auto c = geom.coords(idx);
        slices[c[2]].push_back({c[0] * geom.spacing[0], c[1] * geom.spacing[1]});
    }
    double best2 = 0.0;
    for (auto& [z, pts] : slices) {
        const auto hull = convex_hull(std::move(pts));
        for (std::size_t i = 0; i < hull.size(); ++i)
            for (std::size_t j = i + 1; j < hull.size(); ++j) {
                const double dx = hull[i].first - hull[j].first;
                const double dy = hull[i].second - hull[j].second;
                best2 = std::max(best2, dx * dx + dy * dy);
            }
    }
    return std::max(std::sqrt(best2), std::max(geom.spacing[0], geom.spacing[1]));
}

nlohmann::json candidates_to_json(const std::vector<CandidateLesion>& cands) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cands) {
        nlohmann::json rle = nlohmann::json::array();
        std::size_t i = 0;
        while (i < c.voxels.size()) {
            std::size_t j = i + 1;
            while (j < c.voxels.size() && c.voxels[j] == c.voxels[j - 1] + 1) ++j;
            rle.push_back(c.voxels[i]);
            rle.push_back(j - i);
            i = j;
        }
        arr.push_back({{"rank", c.rank},
                       {"confidence", c.confidence},
                       {"voxel_count", c.voxels.size()},
                       {"centroid_mm", {c.centroid_mm.x, c.centroid_mm.y, c.centroid_mm.z}},
                       {"rle", std::move(rle)}});
    }
    return arr;
}

std::vector<CandidateLesion> candidates_from_json(const nlohmann::json& j) {
    std::vector<CandidateLesion> out;
    for (const auto& e : j) {
        CandidateLesion c;
        c.rank = e.at("rank").get<int>();
        c.confidence = e.at("confidence").get<double>();
        const auto& cen = e.at("centroid_mm");
        c.centroid_mm = {cen.at(0).get<double>(), cen.at(1).get<double>(),
                         cen.at(2).get<double>()};
        const auto& rle = e.at("rle");
        for (std::size_t i = 0; i + 1 < rle.size(); i += 2) {
            const auto start = rle.at(i).get<std::size_t>();
            const auto len = rle.at(i + 1).get<std::size_t>();
            for (std::size_t k = 0; k < len; ++k) c.voxels.push_back(start + k);
        }
        if (c.voxels.size() != e.at("voxel_count").get<std::size_t>())
            throw std::invalid_argument("candidate json: rle length != voxel_count");
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace voxdet
