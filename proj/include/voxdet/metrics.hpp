#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxdet/candidates.hpp"

namespace voxdet {

/// Per-case evaluation record for one model.
struct CaseResult {
    std::string case_id;
    bool is_pdac = false;
    double patient_score = 0.0;
    struct Candidate {
        double confidence = 0.0;
        int rank = 0;
        CandidateStatus status = CandidateStatus::FalsePositive;
        int matched_lesion = -1;
        double dice = 0.0;
    };
    std::vector<Candidate> candidates;
    std::vector<double> gt_lesion_sizes_mm;  // one per ground-truth lesion
    std::string model_id;
};

struct RocCurve {
    struct Point {
        double threshold;
        double fpr;
        double tpr;
    };
    std::vector<Point> points;  // from (0,0) to (1,1), fpr/tpr non-decreasing
    double auc = 0.0;
};

struct FrocCurve {
    struct Point {
        double threshold;
        double fp_per_case;
        double sensitivity;
    };
    std::vector<Point> points;  // ordered by decreasing threshold
    double pauc = 0.0;          // over the default [0.001, 5] interval
};

struct ComparisonReport {
    std::string metric;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double observed_diff = 0.0;  // mean_a - mean_b
    double p_raw = 1.0;
    double p_adjusted = 1.0;     // Bonferroni: min(1, m * p_raw)
    long iterations = 0;
    int comparisons = 1;
    std::uint64_t seed = 0;
    double alpha = 0.025;
};

/// Threshold-swept ROC over patient scores (predicted positive when
/// score >= threshold). The trapezoidal area is cross-checked against the
/// Mann-Whitney rank statistic; a disagreement beyond 1e-12 throws.
RocCurve roc(const std::vector<double>& scores_pos, const std::vector<double>& scores_neg);

/// Lesion-level FROC over candidate confidences. Sensitivity counts matched
/// lesions; the false-positive rate divides by the total case count, normal
/// cases included.
FrocCurve froc(const std::vector<CaseResult>& cases);

/// Area under the step-interpolated (carry-last) FROC curve over the linear
/// false-positive interval [fp_lo, fp_hi]; sensitivity is 0 before the first
/// point and the last sensitivity extends to fp_hi.
double pauc_froc(const FrocCurve& curve, double fp_lo = 0.001, double fp_hi = 5.0);

struct MeanCurve {
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> lo;  // mean - 1.96*sd/sqrt(M), clipped to [0,1]
    std::vector<double> hi;  // mean + 1.96*sd/sqrt(M), clipped to [0,1]
};

/// Vertical averaging of step curves (given as (x, y) breakpoints ordered by
/// ascending x) onto a fixed grid, with a normal 95% band.
MeanCurve mean_curve_ci(const std::vector<std::vector<std::pair<double, double>>>& curves,
                        const std::vector<double>& grid);

/// Two-sided permutation test on the difference of group means. The null is
/// sampled by shuffling the pooled (sorted) values with a seeded generator;
/// the smaller group is always the drawn subset so that exchanging the groups
/// mirrors the statistic sign exactly. p uses the add-one estimator.
ComparisonReport permutation_test(const std::vector<double>& group_a,
                                  const std::vector<double>& group_b,
                                  long iterations = 100000, std::uint64_t seed = 0,
                                  int comparisons = 1, const std::string& metric = "");

/// Keeps pdac cases whose largest lesion is strictly below max_size_mm and all
/// normal cases.
std::vector<CaseResult> subgroup_filter(const std::vector<CaseResult>& cases,
                                        double max_size_mm = 20.0);

}  // namespace voxdet
