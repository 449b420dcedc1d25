#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fragsolve/fragments.hpp"

namespace fragsolve {

/// Undirected fragment adjacency. Edges are stored with id pair sorted.
struct MatingGraph {
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;

    void add_edge(const std::string& a, const std::string& b);
    bool has_edge(const std::string& a, const std::string& b) const;
};

struct MetricsConfig {
    double neighbor_tau_px = 4.0; // 2D adjacency threshold
    double neighbor_tau_mm = 2.0; // 3D adjacency threshold
    double voxel_mm = 2.0;        // 3D volume resolution
    double raster_scale = 1.0;    // 2D raster resolution multiplier
    bool rmse_after_anchor = true;
    bool classic_rmse = false;     // sqrt(mean of squared norms) instead of (1/sqrt(n))*sum
    bool chordal_rotation = false; // Frobenius norm instead of geodesic degrees (3D)
};

struct MetricsReport {
    double q_pos = 0;
    double rmse_translation = 0; // px (2D) or mm (3D)
    double rmse_rotation = 0;    // degrees
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::string anchor_id;
    int unplaced_count = 0;
    int n_fragments = 0;
};

/// Removes the global rigid gauge: the transform taking the anchor's
/// solution pose onto its ground-truth pose is applied to every pose.
/// Anchor = largest-area fragment (ties: smallest id).
Solution2D anchor_align(const Solution2D& solution, const Solution2D& gt,
                        const std::vector<Fragment2D>& fragments);
Solution3D anchor_align(const Solution3D& solution, const Solution3D& gt,
                        const std::vector<Fragment3D>& fragments, double voxel_mm);

/// Area-weighted fraction of each placed fragment landing on its
/// ground-truth footprint, after anchor alignment.
double q_pos(const Solution2D& solution, const Puzzle2D& puzzle, const MetricsConfig& config);

double rmse_translation(const Solution2D& solution, const Puzzle2D& puzzle,
                        const MetricsConfig& config);
double rmse_rotation(const Solution2D& solution, const Puzzle2D& puzzle,
                     const MetricsConfig& config);

/// 2D adjacency: masks dilated by a disk of radius ceil(tau/2)+1 px;
/// edge iff the dilated placements intersect.
MatingGraph build_mating_graph(const std::vector<std::pair<std::string, PlacedMask>>& placed,
                               double neighbor_tau_px);

/// 3D adjacency: edge iff the minimum point-pair distance < tau.
MatingGraph build_mating_graph(const std::vector<Fragment3D>& fragments,
                               const std::map<std::string, Pose3D>& poses,
                               double neighbor_tau_mm);

/// Area-weighted edge-set agreement. Numerator sums |A(p_i)| + |A(p_j)|
/// over edges in both graphs; precision divides by the same sum over GT
/// edges, recall by the sum over solver edges; F1 is the harmonic mean
/// (0 when P + R = 0).
struct PrecisionRecallF1 {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};
PrecisionRecallF1 precision_recall_f1(const MatingGraph& m_sol, const MatingGraph& m_gt,
                                      const std::map<std::string, double>& areas);

/// Full report (the six benchmark columns) for one solution.
MetricsReport evaluate(const Solution2D& solution, const Puzzle2D& puzzle,
                       const MetricsConfig& config = {});
MetricsReport evaluate(const Solution3D& solution, const Puzzle3D& puzzle,
                       const MetricsConfig& config = {});

/// CSV row schema shared with the CLI: group,method,q_pos,rmse_rot_deg,
/// rmse_trans,precision,recall,f1.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& group, const std::string& method,
                            const MetricsReport& report);

} // namespace fragsolve
