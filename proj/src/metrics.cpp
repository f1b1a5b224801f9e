#include "voxdet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace voxdet {
namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RocCurve roc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg) {
    if (scores_pos.empty() || scores_neg.empty())
        throw std::invalid_argument("roc: both classes must be non-empty");

    std::vector<double> thresholds;
    thresholds.reserve(scores_pos.size() + scores_neg.size());
    thresholds.insert(thresholds.end(), scores_pos.begin(), scores_pos.end());
    thresholds.insert(thresholds.end(), scores_neg.begin(), scores_neg.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double P = static_cast<double>(scores_pos.size());
    const double N = static_cast<double>(scores_neg.size());

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    for (double t : thresholds) {
        const auto tp = std::count_if(scores_pos.begin(), scores_pos.end(),
                                      [&](double s) { return s >= t; });
        const auto fp = std::count_if(scores_neg.begin(), scores_neg.end(),
                                      [&](double s) { return s >= t; });
        curve.points.push_back({t, fp / N, tp / P});
    }
    if (curve.points.back().fpr != 1.0 || curve.points.back().tpr != 1.0)
        curve.points.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});

    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    curve.auc = area;

    // Independent Mann-Whitney route; both computations must agree.
    double wins = 0.0;
    for (double p : scores_pos)
        for (double n : scores_neg) {
            if (p > n) wins += 1.0;
            else if (p == n) wins += 0.5;
        }
    const double rank_auc = wins / (P * N);
    if (std::abs(rank_auc - curve.auc) > 1e-12)
        throw std::logic_error("roc: trapezoid and rank AUC disagree");
    return curve;
}

FrocCurve froc(const std::vector<CaseResult>& cases) {
    if (cases.empty()) throw std::invalid_argument("froc: no cases");
    std::size_t total_lesions = 0;
    for (const auto& c : cases) total_lesions += c.gt_lesion_sizes_mm.size();
    if (total_lesions == 0) throw std::invalid_argument("froc: zero ground-truth lesions");

    std::vector<double> tp_conf, fp_conf;
    for (const auto& c : cases)
        for (const auto& cand : c.candidates) {
            if (cand.status == CandidateStatus::TruePositive) tp_conf.push_back(cand.confidence);
            else if (cand.status == CandidateStatus::FalsePositive) fp_conf.push_back(cand.confidence);
        }

    std::vector<double> thresholds = tp_conf;
    thresholds.insert(thresholds.end(), fp_conf.begin(), fp_conf.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double n_cases = static_cast<double>(cases.size());
    FrocCurve curve;
    for (double t : thresholds) {
        const auto tp = std::count_if(tp_conf.begin(), tp_conf.end(),
                                      [&](double c) { return c >= t; });
        const auto fp = std::count_if(fp_conf.begin(), fp_conf.end(),
                                      [&](double c) { return c >= t; });
        curve.points.push_back(
            {t, fp / n_cases, static_cast<double>(tp) / static_cast<double>(total_lesions)});
    }
    curve.pauc = pauc_froc(curve);
    return curve;
}

double pauc_froc(const FrocCurve& curve, double fp_lo, double fp_hi) {
    if (!(fp_lo < fp_hi)) throw std::invalid_argument("pauc_froc: fp_lo must be < fp_hi");
    // Points arrive ordered by decreasing threshold, i.e. non-decreasing
    // fp_per_case and sensitivity; integrate the carry-last step function.
    double area = 0.0;
    double prev_x = fp_lo;
    double cur_s = 0.0;
    for (const auto& pt : curve.points) {
        const double x = pt.fp_per_case;
        if (x > prev_x) {
            const double x1 = std::min(x, fp_hi);
            if (x1 > prev_x) {
                area += (x1 - prev_x) * cur_s;
                prev_x = x1;
            }
        }
        if (x >= fp_hi) break;
        cur_s = pt.sensitivity;
    }
    if (prev_x < fp_hi) area += (fp_hi - prev_x) * cur_s;
    return area;
}

MeanCurve mean_curve_ci(const std::vector<std::vector<std::pair<double, double>>>& curves,
                        const std::vector<double>& grid) {
    const std::size_t m = curves.size();
    if (m < 2) throw std::invalid_argument("mean_curve_ci: need at least 2 curves");

    MeanCurve out;
    out.grid = grid;
    out.mean.reserve(grid.size());
    out.lo.reserve(grid.size());
    out.hi.reserve(grid.size());

    std::vector<double> ys(m);
    for (double g : grid) {
        for (std::size_t k = 0; k < m; ++k) {
            double y = 0.0;  // carry-last step value, 0 before the first point
            for (const auto& [x, cy] : curves[k]) {
                if (x <= g) y = cy;
                else break;
            }
            ys[k] = y;
        }
        const double mu = mean_of(ys);
        double ss = 0.0;
        for (double y : ys) ss += (y - mu) * (y - mu);
        const double sd = std::sqrt(ss / static_cast<double>(m - 1));
        const double half = 1.96 * sd / std::sqrt(static_cast<double>(m));
        out.mean.push_back(mu);
        out.lo.push_back(std::clamp(mu - half, 0.0, 1.0));
        out.hi.push_back(std::clamp(mu + half, 0.0, 1.0));
    }
    return out;
}

ComparisonReport permutation_test(const std::vector<double>& group_a,
                                  const std::vector<double>& group_b, long iterations,
                                  std::uint64_t seed, int comparisons,
                                  const std::string& metric) {
    if (group_a.size() < 2 || group_b.size() < 2)
        throw std::invalid_argument("permutation_test: each group needs >= 2 values");
    if (iterations < 1) throw std::invalid_argument("permutation_test: iterations must be >= 1");
    if (comparisons < 1) throw std::invalid_argument("permutation_test: comparisons must be >= 1");

    ComparisonReport rep;
    rep.metric = metric;
    rep.iterations = iterations;
    rep.comparisons = comparisons;
    rep.seed = seed;
    rep.mean_a = mean_of(group_a);
    rep.mean_b = mean_of(group_b);
    rep.observed_diff = rep.mean_a - rep.mean_b;

    std::vector<double> pooled = group_a;
    pooled.insert(pooled.end(), group_b.begin(), group_b.end());
    std::sort(pooled.begin(), pooled.end());
    const auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
    if (*mn == *mx) {  // degenerate: every relabeling ties
        rep.p_raw = 1.0;
        rep.p_adjusted = 1.0;
        return rep;
    }

    // The drawn subset is always the smaller group, so swapping the groups
    // only mirrors the statistic's sign and p is unchanged for a given seed.
    const std::size_t n = pooled.size();
    const std::size_t n_small = std::min(group_a.size(), group_b.size());
    const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
    const double t_abs = std::abs(rep.observed_diff);

    std::mt19937_64 rng(seed);
    long hits = 0;
    std::vector<double> work = pooled;
    for (long it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < n_small; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(work[i], work[j]);
        }
        double small_sum = 0.0;
        for (std::size_t i = 0; i < n_small; ++i) small_sum += work[i];
        const double d = small_sum / static_cast<double>(n_small) -
                         (total - small_sum) / static_cast<double>(n - n_small);
        if (std::abs(d) >= t_abs) ++hits;
    }
    rep.p_raw = static_cast<double>(1 + hits) / static_cast<double>(iterations + 1);
    rep.p_adjusted = std::min(1.0, comparisons * rep.p_raw);
    return rep;
}

std::vector<CaseResult> subgroup_filter(const std::vector<CaseResult>& cases,
                                        double max_size_mm) {
    std::vector<CaseResult> out;
    for (const auto& c : cases) {
        if (!c.is_pdac) {
            out.push_back(c);
            continue;
        }
        const double largest = c.gt_lesion_sizes_mm.empty()
                                   ? 0.0
                                   : *std::max_element(c.gt_lesion_sizes_mm.begin(),
                                                       c.gt_lesion_sizes_mm.end());
        if (largest < max_size_mm) out.push_back(c);
    }
    return out;
}

}  // namespace voxdet
