#include "fragsolve/solver_greedy.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <set>

namespace fragsolve {

void validate_greedy_config(const GreedyConfig& config) {
    if (config.dp_epsilon <= 0) throw InvalidInput("dp_epsilon must be > 0");
    if (config.curvature_threshold <= 0) throw InvalidInput("curvature_threshold must be > 0");
    if (config.min_segment_len < 0) throw InvalidInput("min_segment_len must be >= 0");
    if (config.max_length_ratio < 1) throw InvalidInput("max_length_ratio must be >= 1");
    if (config.top_k < 0) throw InvalidInput("top_k must be >= 0");
}

namespace {

double chain_length(const std::vector<Point2>& pts) {
    double len = 0;
    for (size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    return len;
}

ContourSegment make_segment(const std::string& id, const Polyline& contour, int a, int b) {
    const int n = static_cast<int>(contour.points.size());
    ContourSegment seg;
    seg.fragment_id = id;
    seg.a = a;
    seg.b = b;
    // a == b spans the whole loop (single split vertex).
    seg.points.push_back(contour.points[a]);
    for (int i = (a + 1) % n;; i = (i + 1) % n) {
        seg.points.push_back(contour.points[i]);
        if (i == b) break;
    }
    seg.arc_length = chain_length(seg.points);
    return seg;
}

} // namespace

std::vector<ContourSegment> segment_contour(const Fragment2D& frag,
                                            const GreedyConfig& config) {
    validate_greedy_config(config);
    const Polyline contour = extract_contour(frag);
    const Polyline simplified = douglas_peucker(contour, config.dp_epsilon);
    if (simplified.points.size() < 3) {
        // Too few vertices to split; the whole loop is one segment.
        ContourSegment seg;
        seg.fragment_id = frag.id;
        seg.a = 0;
        seg.b = 0;
        seg.points = simplified.points;
        seg.points.push_back(simplified.points.front());
        seg.arc_length = chain_length(seg.points);
        return {seg};
    }

    const std::vector<double> kappa = discrete_curvature(simplified);
    std::vector<int> splits;
    for (int i = 0; i < static_cast<int>(kappa.size()); ++i)
        if (std::abs(kappa[i]) > config.curvature_threshold) splits.push_back(i);

    std::vector<ContourSegment> segments;
    if (splits.empty()) {
        // Single segment spanning the full closed contour.
        ContourSegment seg;
        seg.fragment_id = frag.id;
        seg.a = 0;
        seg.b = 0;
        seg.points = simplified.points;
        seg.points.push_back(simplified.points.front());
        seg.arc_length = chain_length(seg.points);
        return {seg};
    }

    for (size_t s = 0; s < splits.size(); ++s) {
        const int a = splits[s];
        const int b = splits[(s + 1) % splits.size()];
        segments.push_back(make_segment(frag.id, simplified, a, b));
    }

    // Fold short segments into their successor until all pass the gate.
    bool merged = true;
    while (merged && segments.size() > 1) {
        merged = false;
        for (size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].arc_length >= config.min_segment_len) continue;
            const size_t next = (i + 1) % segments.size();
            segments[next] =
                make_segment(frag.id, simplified, segments[i].a, segments[next].b);
            segments.erase(segments.begin() + i);
            merged = true;
            break;
        }
    }
    return segments;
}

namespace {

Point2 fragment_center(const Fragment2D& frag) {
    return {(frag.mask.width - 1) / 2.0, (frag.mask.height - 1) / 2.0};
}

} // namespace

std::optional<Compatibility> segment_compatibility_oriented(
    const ContourSegment& seg_a, const Fragment2D& frag_a, const Pose2D& pose_a,
    const ContourSegment& seg_b, const Fragment2D& frag_b, bool reversed) {
    const Point2 center_a = fragment_center(frag_a);
    const Point2 center_b = fragment_center(frag_b);
    const RigidTransform2 ta = pose_a.transform();
    const Point2 pa1 = apply(ta, seg_a.front() - center_a);
    const Point2 pa2 = apply(ta, seg_a.back() - center_a);
    const Point2 qb1 = seg_b.front() - center_b;
    const Point2 qb2 = seg_b.back() - center_b;

    if (distance(pa1, pa2) < 1e-9 || distance(qb1, qb2) < 1e-9) return std::nullopt;

    const Point2 dst1 = reversed ? pa2 : pa1;
    const Point2 dst2 = reversed ? pa1 : pa2;
    const RigidTransform2 t = procrustes_two_point(qb1, qb2, dst1, dst2);

    Compatibility out;
    out.pose = Pose2D::from_transform(t);
    out.reversed = reversed;
    const PlacedMask placed_a = place(frag_a, pose_a);
    const PlacedMask placed_b = place(frag_b, out.pose);
    const double inter = static_cast<double>(intersection_area(placed_a, placed_b));
    const double uni =
        static_cast<double>(placed_a.area) + static_cast<double>(placed_b.area) - inter;
    out.iou = uni > 0 ? inter / uni : 1.0;
    return out;
}

std::optional<Compatibility> segment_compatibility(const ContourSegment& seg_a,
                                                   const Fragment2D& frag_a,
                                                   const Pose2D& pose_a,
                                                   const PlacedMask& placed_a,
                                                   const ContourSegment& seg_b,
                                                   const Fragment2D& frag_b) {
    const Point2 center_a = fragment_center(frag_a);
    const Point2 center_b = fragment_center(frag_b);
    const RigidTransform2 ta = pose_a.transform();
    const Point2 pa1 = apply(ta, seg_a.front() - center_a);
    const Point2 pa2 = apply(ta, seg_a.back() - center_a);
    const Point2 qb1 = seg_b.front() - center_b;
    const Point2 qb2 = seg_b.back() - center_b;
    if (distance(pa1, pa2) < 1e-9 || distance(qb1, qb2) < 1e-9) return std::nullopt;

    std::optional<Compatibility> best;
    for (const bool reversed : {true, false}) {
        const Point2 dst1 = reversed ? pa2 : pa1;
        const Point2 dst2 = reversed ? pa1 : pa2;
        const RigidTransform2 t = procrustes_two_point(qb1, qb2, dst1, dst2);
        const Pose2D pose_b = Pose2D::from_transform(t);
        const PlacedMask placed_b = place(frag_b, pose_b);
        const double inter = static_cast<double>(intersection_area(placed_a, placed_b));
        const double uni = static_cast<double>(placed_a.area) +
                           static_cast<double>(placed_b.area) - inter;
        const double iou = uni > 0 ? inter / uni : 1.0;
        if (!best || iou < best->iou) best = Compatibility{pose_b, iou, reversed};
    }
    return best;
}

std::optional<Compatibility> segment_compatibility(const ContourSegment& seg_a,
                                                   const Fragment2D& frag_a,
                                                   const Pose2D& pose_a,
                                                   const ContourSegment& seg_b,
                                                   const Fragment2D& frag_b) {
    return segment_compatibility(seg_a, frag_a, pose_a, place(frag_a, pose_a), seg_b, frag_b);
}

namespace {

struct CandidateKey {
    int placed_frag;  // index into puzzle.fragments
    int placed_seg;
    int free_frag;
    int free_seg;
};

struct ScoredCandidate {
    CandidateKey key{};
    Compatibility fit;
    bool valid = false;
};

ScoredCandidate score_candidate(const CandidateKey& key, const Puzzle2D& puzzle,
                                const std::vector<std::vector<ContourSegment>>& segments,
                                const std::map<int, Pose2D>& poses,
                                const std::map<int, PlacedMask>& placed_masks) {
    ScoredCandidate out;
    out.key = key;
    const auto fit = segment_compatibility(
        segments[key.placed_frag][key.placed_seg], puzzle.fragments[key.placed_frag],
        poses.at(key.placed_frag), placed_masks.at(key.placed_frag),
        segments[key.free_frag][key.free_seg], puzzle.fragments[key.free_frag]);
    if (fit) {
        out.fit = *fit;
        out.valid = true;
    }
    return out;
}

} // namespace

GreedyResult solve_greedy(const Puzzle2D& puzzle, const GreedyConfig& config) {
    validate_greedy_config(config);
    const int n = static_cast<int>(puzzle.fragments.size());
    if (n < 2) throw InvalidInput("puzzle needs >= 2 fragments");

    std::vector<std::vector<ContourSegment>> segments(n);
    for (int i = 0; i < n; ++i) {
        try {
            segments[i] = segment_contour(puzzle.fragments[i], config);
        } catch (const InvalidInput&) {
            segments[i] = {}; // degenerate fragment: can seed, never mates
        }
    }

    Rng rng(config.seed);
    const int seed_idx = static_cast<int>(rng.uniform_int(0, n - 1));

    std::map<int, Pose2D> poses;
    std::map<int, PlacedMask> placed_masks;
    std::set<std::pair<int, int>> consumed;
    poses.emplace(seed_idx, Pose2D(0, 0, 0));
    placed_masks.emplace(seed_idx, place(puzzle.fragments[seed_idx], Pose2D(0, 0, 0)));

    GreedyResult result;
    while (static_cast<int>(poses.size()) < n) {
        std::vector<CandidateKey> keys;
        for (const auto& [pi, pose] : poses) {
            for (int a = 0; a < static_cast<int>(segments[pi].size()); ++a) {
                if (consumed.count({pi, a})) continue;
                const double len_a = segments[pi][a].arc_length;
                for (int fi = 0; fi < n; ++fi) {
                    if (poses.count(fi)) continue;
                    for (int b = 0; b < static_cast<int>(segments[fi].size()); ++b) {
                        const double len_b = segments[fi][b].arc_length;
                        const double lo = std::min(len_a, len_b);
                        const double hi = std::max(len_a, len_b);
                        if (lo <= 0 || hi / lo > config.max_length_ratio) continue;
                        keys.push_back({pi, a, fi, b});
                    }
                }
            }
        }

        if (config.top_k > 0) {
            // Keep the top_k closest-length pairs per unplaced fragment.
            std::stable_sort(keys.begin(), keys.end(),
                             [&](const CandidateKey& x, const CandidateKey& y) {
                                 auto gap = [&](const CandidateKey& k) {
                                     return std::abs(
                                         segments[k.placed_frag][k.placed_seg].arc_length -
                                         segments[k.free_frag][k.free_seg].arc_length);
                                 };
                                 return gap(x) < gap(y);
                             });
            std::map<int, int> kept;
            std::vector<CandidateKey> pruned;
            for (const CandidateKey& k : keys)
                if (kept[k.free_frag]++ < config.top_k) pruned.push_back(k);
            keys = std::move(pruned);
        }
        if (keys.empty()) break;

        std::vector<ScoredCandidate> scored(keys.size());
        const int threads = std::min<int>(worker_threads(), static_cast<int>(keys.size()));
        if (threads <= 1 || keys.size() < 16) {
            for (size_t i = 0; i < keys.size(); ++i)
                scored[i] = score_candidate(keys[i], puzzle, segments, poses, placed_masks);
        } else {
            std::vector<std::future<void>> jobs;
            const size_t chunk = (keys.size() + threads - 1) / threads;
            for (int t = 0; t < threads; ++t) {
                const size_t lo = t * chunk;
                const size_t hi = std::min(keys.size(), lo + chunk);
                if (lo >= hi) break;
                jobs.push_back(std::async(std::launch::async, [&, lo, hi]() {
                    for (size_t i = lo; i < hi; ++i)
                        scored[i] =
                            score_candidate(keys[i], puzzle, segments, poses, placed_masks);
                }));
            }
            for (auto& j : jobs) j.get();
        }

        const ScoredCandidate* best = nullptr;
        for (const ScoredCandidate& c : scored) {
            if (!c.valid) continue;
            if (!best) {
                best = &c;
                continue;
            }
            // Tie-break: lowest fragment-id pair, then lowest segment indices.
            const auto key_of = [&](const ScoredCandidate& s) {
                return std::tuple<double, const std::string&, const std::string&, int, int>(
                    s.fit.iou, puzzle.fragments[s.key.placed_frag].id,
                    puzzle.fragments[s.key.free_frag].id, s.key.placed_seg, s.key.free_seg);
            };
            if (key_of(c) < key_of(*best)) best = &c;
        }
        if (!best) break;

        const int fi = best->key.free_frag;
        poses.emplace(fi, best->fit.pose);
        placed_masks.emplace(fi, place(puzzle.fragments[fi], best->fit.pose));
        consumed.insert({best->key.placed_frag, best->key.placed_seg});
        consumed.insert({fi, best->key.free_seg});

        GreedyStep step;
        step.step = static_cast<int>(result.steps.size());
        step.placed_id = puzzle.fragments[fi].id;
        step.against_id = puzzle.fragments[best->key.placed_frag].id;
        step.segment_placed = best->key.free_seg;
        step.segment_against = best->key.placed_seg;
        step.iou = best->fit.iou;
        step.pose = best->fit.pose;
        result.steps.push_back(step);
    }

    // Assembly extent, for parking whatever could not be placed.
    std::int64_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool first = true;
    for (const auto& [i, mask] : placed_masks) {
        if (mask.area == 0) continue;
        if (first) {
            x0 = mask.bx0;
            y0 = mask.by0;
            x1 = mask.bx1;
            y1 = mask.by1;
            first = false;
        } else {
            x0 = std::min(x0, mask.bx0);
            y0 = std::min(y0, mask.by0);
            x1 = std::max(x1, mask.bx1);
            y1 = std::max(y1, mask.by1);
        }
    }
    const double diag = std::hypot(double(x1 - x0 + 1), double(y1 - y0 + 1));

    int parked = 0;
    for (int i = 0; i < n; ++i) {
        const std::string& id = puzzle.fragments[i].id;
        if (poses.count(i)) {
            result.solution.poses.emplace(id, poses.at(i));
        } else {
            const double offset =
                2.0 * diag + (parked + 1) * (puzzle.fragments[i].mask.width + 10.0);
            result.solution.poses.emplace(id, Pose2D(double(x1) + offset, double(y0), 0));
            result.solution.unplaced.insert(id);
            ++parked;
        }
    }
    return result;
}

} // namespace fragsolve
