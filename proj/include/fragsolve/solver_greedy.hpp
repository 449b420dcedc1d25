#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fragsolve/fragments.hpp"

namespace fragsolve {

/// A run of consecutive vertices [a, b] (cyclic, inclusive) of a
/// fragment's simplified contour, with the covered points cached.
struct ContourSegment {
    std::string fragment_id;
    int a = 0;
    int b = 0;
    std::vector<Point2> points; // fragment raster coordinates
    double arc_length = 0;

    Point2 front() const { return points.front(); }
    Point2 back() const { return points.back(); }
};

struct GreedyConfig {
    double dp_epsilon = 2.0;          // px, contour simplification
    double curvature_threshold = 0.3; // 1/px, split threshold on |kappa|
    double min_segment_len = 15.0;    // px, shorter segments merge into a neighbor
    double max_length_ratio = 2.0;    // candidate gate on segment length ratio
    int top_k = 0;                    // per-fragment candidate cap before scoring; 0 = all
    std::uint64_t seed = 0;
};

void validate_greedy_config(const GreedyConfig& config);

/// Contour -> Douglas-Peucker -> curvature split at |kappa| > threshold;
/// short segments merge into their successor. A contour with no split
/// vertex yields one full-loop segment.
std::vector<ContourSegment> segment_contour(const Fragment2D& frag, const GreedyConfig& config);

struct Compatibility {
    Pose2D pose;   // pose for the unplaced fragment
    double iou = 1; // intersection over union of the two placed bodies; lower = better
    bool reversed = true;
};

/// Mates segB of fragB against segA of fragA (already placed at poseA):
/// the two-point spring minimizer maps segB's endpoints onto segA's, in
/// reversed order when `reversed` (abutting contours run antiparallel).
/// nullopt when either endpoint pair is degenerate.
std::optional<Compatibility> segment_compatibility_oriented(
    const ContourSegment& seg_a, const Fragment2D& frag_a, const Pose2D& pose_a,
    const ContourSegment& seg_b, const Fragment2D& frag_b, bool reversed);

/// Both endpoint orders tried; the lower-IoU result wins (robust to
/// contour tracing conventions).
std::optional<Compatibility> segment_compatibility(const ContourSegment& seg_a,
                                                   const Fragment2D& frag_a,
                                                   const Pose2D& pose_a,
                                                   const ContourSegment& seg_b,
                                                   const Fragment2D& frag_b);

/// Same scoring against a precomputed placement of fragA (what the solver
/// uses when scoring many candidates against one placed fragment).
std::optional<Compatibility> segment_compatibility(const ContourSegment& seg_a,
                                                   const Fragment2D& frag_a,
                                                   const Pose2D& pose_a,
                                                   const PlacedMask& placed_a,
                                                   const ContourSegment& seg_b,
                                                   const Fragment2D& frag_b);

struct GreedyStep {
    int step = 0;
    std::string placed_id;
    std::string against_id;
    int segment_placed = 0;
    int segment_against = 0;
    double iou = 0;
    Pose2D pose;
};

struct GreedyResult {
    Solution2D solution;
    std::vector<GreedyStep> steps;
};

/// Seed fragment (random per seed) placed at the origin; then repeatedly
/// commits the globally lowest-IoU (placed segment, unplaced segment)
/// candidate. Each segment mates at most once. Fragments left without
/// candidates get poses far outside the assembly and are flagged
/// unplaced. Deterministic per seed.
GreedyResult solve_greedy(const Puzzle2D& puzzle, const GreedyConfig& config);

} // namespace fragsolve
