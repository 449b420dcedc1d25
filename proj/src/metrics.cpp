#include "fragsolve/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace fragsolve {

void MatingGraph::add_edge(const std::string& a, const std::string& b) {
    if (a == b) throw InvalidInput("mating graph: self-loop on '" + a + "'");
    if (nodes.find(a) == nodes.end() || nodes.find(b) == nodes.end())
        throw InvalidInput("mating graph: edge references unknown node");
    edges.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

bool MatingGraph::has_edge(const std::string& a, const std::string& b) const {
    return edges.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) > 0;
}

namespace {

const std::string& pick_anchor_2d(const std::vector<Fragment2D>& fragments) {
    if (fragments.empty()) throw InvalidInput("anchor_align: no fragments");
    const Fragment2D* best = &fragments.front();
    std::int64_t best_area = best->area_px();
    for (const Fragment2D& f : fragments) {
        const std::int64_t a = f.area_px();
        if (a > best_area || (a == best_area && f.id < best->id)) {
            best = &f;
            best_area = a;
        }
    }
    return best->id;
}

void check_coverage_2d(const Solution2D& solution, const std::vector<Fragment2D>& fragments) {
    if (solution.poses.empty()) throw InvalidInput("empty solution");
    for (const Fragment2D& f : fragments)
        if (solution.poses.find(f.id) == solution.poses.end())
            throw InvalidInput("solution has no pose for fragment '" + f.id + "'");
}

Mask scale_mask(const Mask& mask, double s) {
    const int w = std::max(1, static_cast<int>(std::lround(mask.width * s)));
    const int h = std::max(1, static_cast<int>(std::lround(mask.height * s)));
    Mask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int sx = std::min(mask.width - 1, static_cast<int>(std::lround(x / s)));
            const int sy = std::min(mask.height - 1, static_cast<int>(std::lround(y / s)));
            if (mask.at(sx, sy)) out.set(x, y);
        }
    return out;
}

struct Placements2D {
    std::string anchor_id;
    std::vector<std::string> ids; // sorted
    std::unordered_map<std::string, PlacedMask> at_gt;
    std::unordered_map<std::string, PlacedMask> at_solution; // anchor-aligned
    Solution2D aligned;
};

Placements2D place_all(const Solution2D& solution, const Puzzle2D& puzzle,
                       const MetricsConfig& config) {
    if (!puzzle.has_ground_truth)
        throw InvalidInput("puzzle '" + puzzle.group_id + "' has no ground truth; metrics disabled");
    check_coverage_2d(solution, puzzle.fragments);

    Placements2D out;
    out.anchor_id = pick_anchor_2d(puzzle.fragments);
    out.aligned = anchor_align(solution, puzzle.ground_truth, puzzle.fragments);

    const double s = config.raster_scale;
    if (s <= 0) throw InvalidInput("raster_scale must be positive");
    for (const Fragment2D& f : puzzle.fragments) {
        out.ids.push_back(f.id);
        const Pose2D& gt = puzzle.ground_truth.poses.at(f.id);
        const Pose2D& sp = out.aligned.poses.at(f.id);
        if (s == 1.0) {
            out.at_gt.emplace(f.id, place(f, gt));
            out.at_solution.emplace(f.id, place(f, sp));
        } else {
            const Mask m = scale_mask(f.mask, s);
            out.at_gt.emplace(f.id, place_mask(m, gt.theta_deg, gt.x * s, gt.y * s));
            out.at_solution.emplace(f.id, place_mask(m, sp.theta_deg, sp.x * s, sp.y * s));
        }
    }
    return out;
}

double aggregate_rmse(const std::vector<double>& errors, bool classic) {
    if (errors.empty()) throw InvalidInput("RMSE over zero fragments");
    const double n = static_cast<double>(errors.size());
    double sum = 0;
    if (classic) {
        for (double e : errors) sum += e * e;
        return std::sqrt(sum / n);
    }
    for (double e : errors) sum += e;
    return sum / std::sqrt(n);
}

} // namespace

Solution2D anchor_align(const Solution2D& solution, const Solution2D& gt,
                        const std::vector<Fragment2D>& fragments) {
    check_coverage_2d(solution, fragments);
    const std::string& anchor = pick_anchor_2d(fragments);
    const auto it_sol = solution.poses.find(anchor);
    const auto it_gt = gt.poses.find(anchor);
    if (it_sol == solution.poses.end() || it_gt == gt.poses.end())
        throw InvalidInput("anchor '" + anchor + "' has no pose");

    const RigidTransform2 g =
        compose(it_gt->second.transform(), invert(it_sol->second.transform()));
    Solution2D aligned;
    aligned.unplaced = solution.unplaced;
    for (const auto& [id, pose] : solution.poses)
        aligned.poses.emplace(id, Pose2D::from_transform(compose(g, pose.transform())));
    return aligned;
}

Solution3D anchor_align(const Solution3D& solution, const Solution3D& gt,
                        const std::vector<Fragment3D>& fragments, double voxel_mm) {
    if (solution.poses.empty()) throw InvalidInput("empty solution");
    const Fragment3D* anchor = nullptr;
    std::size_t best = 0;
    for (const Fragment3D& f : fragments) {
        const std::size_t vox = voxel_occupancy(f, Pose3D{}, voxel_mm).size();
        if (!anchor || vox > best || (vox == best && f.id < anchor->id)) {
            anchor = &f;
            best = vox;
        }
    }
    if (!anchor) throw InvalidInput("anchor_align: no fragments");
    const auto it_sol = solution.poses.find(anchor->id);
    const auto it_gt = gt.poses.find(anchor->id);
    if (it_sol == solution.poses.end() || it_gt == gt.poses.end())
        throw InvalidInput("anchor '" + anchor->id + "' has no pose");

    // g = gt_pose o sol_pose^-1
    const auto& rs = it_sol->second.rotation;
    const auto& ts = it_sol->second.translation;
    const auto& rg = it_gt->second.rotation;
    const auto& tg = it_gt->second.translation;
    std::array<double, 9> g_r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double v = 0;
            for (int k = 0; k < 3; ++k) v += rg[i * 3 + k] * rs[j * 3 + k]; // rg * rs^T
            g_r[i * 3 + j] = v;
        }
    std::array<double, 3> g_t{};
    for (int i = 0; i < 3; ++i) {
        double v = 0;
        for (int k = 0; k < 3; ++k) v += g_r[i * 3 + k] * ts[k];
        g_t[i] = tg[i] - v;
    }

    Solution3D aligned;
    aligned.unplaced = solution.unplaced;
    for (const auto& [id, pose] : solution.poses) {
        Pose3D p;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = 0;
                for (int k = 0; k < 3; ++k) v += g_r[i * 3 + k] * pose.rotation[k * 3 + j];
                p.rotation[i * 3 + j] = v;
            }
        for (int i = 0; i < 3; ++i) {
            double v = 0;
            for (int k = 0; k < 3; ++k) v += g_r[i * 3 + k] * pose.translation[k];
            p.translation[i] = v + g_t[i];
        }
        aligned.poses.emplace(id, p);
    }
    return aligned;
}

double q_pos(const Solution2D& solution, const Puzzle2D& puzzle, const MetricsConfig& config) {
    const Placements2D pl = place_all(solution, puzzle, config);
    // Accumulate sum(a_i * ratio_i) and divide by sum(a_i) once, so the
    // weights sum to 1 exactly and a perfect solution scores exactly 1.0.
    double total_weight = 0;
    for (const std::string& id : pl.ids) {
        const std::int64_t a = pl.at_gt.at(id).area;
        if (a == 0) throw InvalidInput("fragment '" + id + "' has zero area");
        total_weight += static_cast<double>(a);
    }
    double weighted = 0;
    for (const std::string& id : pl.ids) {
        if (solution.unplaced.count(id)) continue; // maximally wrong: zero term
        const PlacedMask& at_gt = pl.at_gt.at(id);
        const PlacedMask& at_sol = pl.at_solution.at(id);
        if (at_sol.area == 0) continue;
        const double overlap = static_cast<double>(intersection_area(at_gt, at_sol));
        weighted += static_cast<double>(at_gt.area) * (overlap / static_cast<double>(at_sol.area));
    }
    return weighted / total_weight;
}

namespace {

std::vector<double> translation_errors_2d(const Solution2D& solution, const Puzzle2D& puzzle,
                                          const MetricsConfig& config) {
    if (!puzzle.has_ground_truth) throw InvalidInput("no ground truth");
    check_coverage_2d(solution, puzzle.fragments);
    const Solution2D poses = config.rmse_after_anchor
                                 ? anchor_align(solution, puzzle.ground_truth, puzzle.fragments)
                                 : solution;
    std::vector<double> errs;
    for (const Fragment2D& f : puzzle.fragments) {
        const Pose2D& a = poses.poses.at(f.id);
        const Pose2D& b = puzzle.ground_truth.poses.at(f.id);
        errs.push_back(std::hypot(a.x - b.x, a.y - b.y));
    }
    return errs;
}

std::vector<double> rotation_errors_2d(const Solution2D& solution, const Puzzle2D& puzzle,
                                       const MetricsConfig& config) {
    if (!puzzle.has_ground_truth) throw InvalidInput("no ground truth");
    check_coverage_2d(solution, puzzle.fragments);
    const Solution2D poses = config.rmse_after_anchor
                                 ? anchor_align(solution, puzzle.ground_truth, puzzle.fragments)
                                 : solution;
    std::vector<double> errs;
    for (const Fragment2D& f : puzzle.fragments) {
        const Pose2D& a = poses.poses.at(f.id);
        const Pose2D& b = puzzle.ground_truth.poses.at(f.id);
        errs.push_back(std::abs(normalize_deg(a.theta_deg - b.theta_deg)));
    }
    return errs;
}

} // namespace

double rmse_translation(const Solution2D& solution, const Puzzle2D& puzzle,
                        const MetricsConfig& config) {
    return aggregate_rmse(translation_errors_2d(solution, puzzle, config), config.classic_rmse);
}

double rmse_rotation(const Solution2D& solution, const Puzzle2D& puzzle,
                     const MetricsConfig& config) {
    return aggregate_rmse(rotation_errors_2d(solution, puzzle, config), config.classic_rmse);
}

MatingGraph build_mating_graph(const std::vector<std::pair<std::string, PlacedMask>>& placed,
                               double neighbor_tau_px) {
    if (neighbor_tau_px <= 0) throw InvalidInput("neighbor_tau must be positive");
    const int radius = static_cast<int>(std::ceil(neighbor_tau_px / 2.0)) + 1;

    MatingGraph graph;
    std::vector<std::pair<std::string, PlacedMask>> dilated;
    dilated.reserve(placed.size());
    for (const auto& [id, mask] : placed) {
        graph.nodes.insert(id);
        dilated.emplace_back(id, dilate_disk(mask, radius));
    }
    for (size_t i = 0; i < dilated.size(); ++i)
        for (size_t j = i + 1; j < dilated.size(); ++j)
            if (masks_intersect(dilated[i].second, dilated[j].second))
                graph.add_edge(dilated[i].first, dilated[j].first);
    return graph;
}

MatingGraph build_mating_graph(const std::vector<Fragment3D>& fragments,
                               const std::map<std::string, Pose3D>& poses,
                               double neighbor_tau_mm) {
    if (neighbor_tau_mm <= 0) throw InvalidInput("neighbor_tau must be positive");
    MatingGraph graph;

    struct Cloud {
        std::string id;
        std::vector<std::array<double, 3>> pts;
    };
    std::vector<Cloud> clouds;
    for (const Fragment3D& f : fragments) {
        graph.nodes.insert(f.id);
        const auto it = poses.find(f.id);
        if (it == poses.end()) throw InvalidInput("no pose for fragment '" + f.id + "'");
        const auto& r = it->second.rotation;
        const auto& t = it->second.translation;
        Cloud c;
        c.id = f.id;
        c.pts.reserve(f.points.size());
        for (const auto& p : f.points)
            c.pts.push_back({r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + t[0],
                             r[3] * p[0] + r[4] * p[1] + r[5] * p[2] + t[1],
                             r[6] * p[0] + r[7] * p[1] + r[8] * p[2] + t[2]});
        clouds.push_back(std::move(c));
    }

    const double tau2 = neighbor_tau_mm * neighbor_tau_mm;
    auto cell_key = [&](double v) {
        return static_cast<std::int64_t>(std::floor(v / neighbor_tau_mm));
    };
    for (size_t i = 0; i < clouds.size(); ++i) {
        // Hash cloud i on a tau-sized grid; probe neighbors for cloud j.
        std::unordered_map<std::int64_t, std::vector<int>> grid;
        grid.reserve(clouds[i].pts.size());
        constexpr std::int64_t K = 1 << 20;
        auto pack = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
            return ((x + K) << 42) | ((y + K) << 21) | (z + K);
        };
        for (int pi = 0; pi < static_cast<int>(clouds[i].pts.size()); ++pi) {
            const auto& p = clouds[i].pts[pi];
            grid[pack(cell_key(p[0]), cell_key(p[1]), cell_key(p[2]))].push_back(pi);
        }
        for (size_t j = i + 1; j < clouds.size(); ++j) {
            bool close = false;
            for (const auto& q : clouds[j].pts) {
                const std::int64_t cx = cell_key(q[0]), cy = cell_key(q[1]), cz = cell_key(q[2]);
                for (std::int64_t dx = -1; dx <= 1 && !close; ++dx)
                    for (std::int64_t dy = -1; dy <= 1 && !close; ++dy)
                        for (std::int64_t dz = -1; dz <= 1 && !close; ++dz) {
                            const auto it = grid.find(pack(cx + dx, cy + dy, cz + dz));
                            if (it == grid.end()) continue;
                            for (int pi : it->second) {
                                const auto& p = clouds[i].pts[pi];
                                const double d2 = (p[0] - q[0]) * (p[0] - q[0]) +
                                                  (p[1] - q[1]) * (p[1] - q[1]) +
                                                  (p[2] - q[2]) * (p[2] - q[2]);
                                if (d2 < tau2) {
                                    close = true;
                                    break;
                                }
                            }
                        }
                if (close) break;
            }
            if (close) graph.add_edge(clouds[i].id, clouds[j].id);
        }
    }
    return graph;
}

PrecisionRecallF1 precision_recall_f1(const MatingGraph& m_sol, const MatingGraph& m_gt,
                                      const std::map<std::string, double>& areas) {
    auto edge_weight = [&](const std::pair<std::string, std::string>& e) {
        const auto it_a = areas.find(e.first);
        const auto it_b = areas.find(e.second);
        if (it_a == areas.end() || it_b == areas.end())
            throw InvalidInput("edge references fragment without an area");
        return it_a->second + it_b->second;
    };

    double shared = 0, gt_sum = 0, sol_sum = 0;
    for (const auto& e : m_gt.edges) {
        gt_sum += edge_weight(e);
        if (m_sol.edges.count(e)) shared += edge_weight(e);
    }
    for (const auto& e : m_sol.edges) sol_sum += edge_weight(e);

    PrecisionRecallF1 out;
    out.precision = gt_sum > 0 ? shared / gt_sum : 0.0;
    out.recall = sol_sum > 0 ? shared / sol_sum : 0.0;
    out.f1 = (out.precision + out.recall) > 0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

MetricsReport evaluate(const Solution2D& solution, const Puzzle2D& puzzle,
                       const MetricsConfig& config) {
    const Placements2D pl = place_all(solution, puzzle, config);

    MetricsReport report;
    report.anchor_id = pl.anchor_id;
    report.n_fragments = static_cast<int>(pl.ids.size());
    report.unplaced_count = static_cast<int>(solution.unplaced.size());

    // Q_pos from the shared placements.
    double total_weight = 0;
    std::map<std::string, double> areas;
    for (const std::string& id : pl.ids) {
        const std::int64_t a = pl.at_gt.at(id).area;
        if (a == 0) throw InvalidInput("fragment '" + id + "' has zero area");
        areas[id] = static_cast<double>(a);
        total_weight += static_cast<double>(a);
    }
    double weighted = 0;
    for (const std::string& id : pl.ids) {
        if (solution.unplaced.count(id)) continue;
        const PlacedMask& at_gt = pl.at_gt.at(id);
        const PlacedMask& at_sol = pl.at_solution.at(id);
        if (at_sol.area == 0) continue;
        const double overlap = static_cast<double>(intersection_area(at_gt, at_sol));
        weighted += areas[id] * (overlap / static_cast<double>(at_sol.area));
    }
    report.q_pos = weighted / total_weight;

    report.rmse_translation = rmse_translation(solution, puzzle, config);
    report.rmse_rotation = rmse_rotation(solution, puzzle, config);

    const double tau = config.neighbor_tau_px * config.raster_scale;
    std::vector<std::pair<std::string, PlacedMask>> gt_placed, sol_placed;
    for (const std::string& id : pl.ids) {
        gt_placed.emplace_back(id, pl.at_gt.at(id));
        if (!solution.unplaced.count(id)) sol_placed.emplace_back(id, pl.at_solution.at(id));
    }
    MatingGraph m_gt = build_mating_graph(gt_placed, tau);
    MatingGraph m_sol = build_mating_graph(sol_placed, tau);
    for (const std::string& id : pl.ids) m_sol.nodes.insert(id); // unplaced stay isolated

    const PrecisionRecallF1 prf = precision_recall_f1(m_sol, m_gt, areas);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f1 = prf.f1;
    return report;
}

MetricsReport evaluate(const Solution3D& solution, const Puzzle3D& puzzle,
                       const MetricsConfig& config) {
    if (!puzzle.has_ground_truth)
        throw InvalidInput("puzzle '" + puzzle.group_id + "' has no ground truth; metrics disabled");
    if (solution.poses.empty()) throw InvalidInput("empty solution");
    for (const Fragment3D& f : puzzle.fragments)
        if (solution.poses.find(f.id) == solution.poses.end())
            throw InvalidInput("solution has no pose for fragment '" + f.id + "'");

    const Solution3D aligned =
        anchor_align(solution, puzzle.ground_truth, puzzle.fragments, config.voxel_mm);

    MetricsReport report;
    report.n_fragments = static_cast<int>(puzzle.fragments.size());
    report.unplaced_count = static_cast<int>(solution.unplaced.size());
    {
        std::size_t best = 0;
        for (const Fragment3D& f : puzzle.fragments) {
            const std::size_t vox = voxel_occupancy(f, Pose3D{}, config.voxel_mm).size();
            if (report.anchor_id.empty() || vox > best ||
                (vox == best && f.id < report.anchor_id)) {
                report.anchor_id = f.id;
                best = vox;
            }
        }
    }

    std::map<std::string, double> areas;
    double total_weight = 0;
    std::map<std::string, std::vector<std::int64_t>> vox_gt, vox_sol;
    for (const Fragment3D& f : puzzle.fragments) {
        vox_gt[f.id] = voxel_occupancy(f, puzzle.ground_truth.poses.at(f.id), config.voxel_mm);
        vox_sol[f.id] = voxel_occupancy(f, aligned.poses.at(f.id), config.voxel_mm);
        const double a = static_cast<double>(vox_gt[f.id].size());
        if (a == 0) throw InvalidInput("fragment '" + f.id + "' has zero volume");
        areas[f.id] = a;
        total_weight += a;
    }
    double weighted = 0;
    for (const Fragment3D& f : puzzle.fragments) {
        if (solution.unplaced.count(f.id)) continue;
        const auto& g = vox_gt[f.id];
        const auto& s = vox_sol[f.id];
        if (s.empty()) continue;
        std::size_t shared = 0, gi = 0, si = 0;
        while (gi < g.size() && si < s.size()) {
            if (g[gi] == s[si]) {
                ++shared;
                ++gi;
                ++si;
            } else if (g[gi] < s[si]) {
                ++gi;
            } else {
                ++si;
            }
        }
        weighted += areas[f.id] *
                    (static_cast<double>(shared) / static_cast<double>(s.size()));
    }
    report.q_pos = weighted / total_weight;

    const Solution3D& posed = config.rmse_after_anchor ? aligned : solution;
    std::vector<double> terr, rerr;
    for (const Fragment3D& f : puzzle.fragments) {
        const Pose3D& a = posed.poses.at(f.id);
        const Pose3D& b = puzzle.ground_truth.poses.at(f.id);
        terr.push_back(std::sqrt(
            (a.translation[0] - b.translation[0]) * (a.translation[0] - b.translation[0]) +
            (a.translation[1] - b.translation[1]) * (a.translation[1] - b.translation[1]) +
            (a.translation[2] - b.translation[2]) * (a.translation[2] - b.translation[2])));
        validate_rotation(a);
        if (config.chordal_rotation) {
            double fro = 0;
            for (int k = 0; k < 9; ++k)
                fro += (a.rotation[k] - b.rotation[k]) * (a.rotation[k] - b.rotation[k]);
            rerr.push_back(std::sqrt(fro));
        } else {
            // Geodesic angle from tr(a^T b).
            double tr = 0;
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) tr += a.rotation[k * 3 + i] * b.rotation[k * 3 + i];
            const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
            rerr.push_back(rad_to_deg(std::acos(c)));
        }
    }
    report.rmse_translation = aggregate_rmse(terr, config.classic_rmse);
    report.rmse_rotation = aggregate_rmse(rerr, config.classic_rmse);

    std::map<std::string, Pose3D> gt_poses, sol_poses;
    std::vector<Fragment3D> placed_frags;
    for (const Fragment3D& f : puzzle.fragments) {
        gt_poses[f.id] = puzzle.ground_truth.poses.at(f.id);
        if (!solution.unplaced.count(f.id)) {
            sol_poses[f.id] = aligned.poses.at(f.id);
            placed_frags.push_back(f);
        }
    }
    MatingGraph m_gt = build_mating_graph(puzzle.fragments, gt_poses, config.neighbor_tau_mm);
    MatingGraph m_sol = build_mating_graph(placed_frags, sol_poses, config.neighbor_tau_mm);
    for (const Fragment3D& f : puzzle.fragments) m_sol.nodes.insert(f.id);

    const PrecisionRecallF1 prf = precision_recall_f1(m_sol, m_gt, areas);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f1 = prf.f1;
    return report;
}

std::string metrics_csv_header() {
    return "group,method,q_pos,rmse_rot_deg,rmse_trans,precision,recall,f1";
}

std::string metrics_csv_row(const std::string& group, const std::string& method,
                            const MetricsReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", group.c_str(),
                  method.c_str(), report.q_pos, report.rmse_rotation, report.rmse_translation,
                  report.precision, report.recall, report.f1);
    return buf;
}

} // namespace fragsolve
