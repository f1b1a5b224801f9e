#pragma once

#include <span>
#include <string>
#include <vector>

#include "voxdet/pipeline.hpp"
#include "voxdet/volume.hpp"

#include "json.hpp"

namespace voxdet {

/// One extracted detection: the connected region around a likelihood peak.
/// Voxels are linear indices into the source map, sorted ascending.
struct CandidateLesion {
    double confidence = 0.0;  // peak likelihood value
    std::vector<std::size_t> voxels;
    int rank = 0;             // extraction order, 1-based
    Vec3 centroid_mm;
};

enum class CandidateStatus { TruePositive, FalsePositive, IgnoredDuplicate };

std::string to_string(CandidateStatus s);
CandidateStatus candidate_status_from_string(const std::string& s);

/// What to do with a candidate that overlaps only already-claimed lesions.
enum class DuplicatePolicy { Ignore, CountFp };

struct MatchResult {
    std::vector<int> lesion_to_candidate;     // per gt lesion: candidate index or -1
    std::vector<CandidateStatus> status;      // per candidate
    std::vector<double> dice_value;           // per candidate; dice with its matched
                                              // lesion for TPs, 0 otherwise
};

/// Iterative peak extraction: repeatedly take the global maximum voxel, grow
/// the connected region of voxels with likelihood >= rel_threshold * peak,
/// record it and zero it out. Stops when the peak falls below peak_floor or
/// max_lesions candidates have been extracted. Ties in the global maximum are
/// broken by the smallest linear index.
std::vector<CandidateLesion> extract_candidates(const ScalarVolume& likelihood,
                                                const PipelineConfig& cfg);

/// Dice similarity coefficient of two sorted voxel-index sets.
double dice(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Greedy confidence-descending matching with a Dice hit criterion.
MatchResult match_candidates(const std::vector<CandidateLesion>& cands,
                             const std::vector<std::vector<std::size_t>>& gt_lesions,
                             double dice_min = 0.1,
                             DuplicatePolicy policy = DuplicatePolicy::Ignore);

/// Maximum in-plane diameter over axial slices, mm, between voxel centers.
/// Never smaller than max(sx, sy) so a single-voxel slice reports its in-plane
/// voxel extent rather than zero.
double lesion_size_axial(const std::vector<std::size_t>& lesion, const Geometry& geom);

/// JSON array of {rank, confidence, voxel_count, centroid_mm, rle} where rle
/// is [start, length, start, length, ...] over sorted linear indices.
nlohmann::json candidates_to_json(const std::vector<CandidateLesion>& cands);
std::vector<CandidateLesion> candidates_from_json(const nlohmann::json& j);

}  // namespace voxdet
