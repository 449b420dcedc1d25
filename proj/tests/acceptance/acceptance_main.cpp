// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 needs the released 2D dataset and --extended; it
// reports SKIP otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "../fixtures.hpp"
#include "fragsolve/dataset_io.hpp"
#include "fragsolve/metrics.hpp"
#include "fragsolve/puzzle_gen.hpp"
#include "fragsolve/solver_genetic.hpp"
#include "fragsolve/solver_greedy.hpp"

using namespace fragsolve;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass) ++g_failures;
}

void report_skip(int criterion, const std::string& detail) {
    std::printf("[SKIP] criterion %d: %s\n", criterion, detail.c_str());
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Solution2D perturb(const Solution2D& gt, double sigma_px, double sigma_deg, Rng& rng) {
    Solution2D out;
    for (const auto& [id, pose] : gt.poses)
        out.poses.emplace(id, Pose2D(pose.x + rng.gaussian(sigma_px),
                                     pose.y + rng.gaussian(sigma_px),
                                     pose.theta_deg + rng.gaussian(sigma_deg)));
    return out;
}

Solution2D apply_global(const Solution2D& sol, const RigidTransform2& g) {
    Solution2D out;
    out.unplaced = sol.unplaced;
    for (const auto& [id, pose] : sol.poses)
        out.poses.emplace(id, Pose2D::from_transform(compose(g, pose.transform())));
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- 1
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    int checked = 0;
    bool ok = true;
    std::string why;
    for (std::uint64_t seed = 0; checked < 50 && seed < 400; ++seed) {
        GenConfig config;
        config.n_cuts = 2 + static_cast<int>(seed % 7);
        config.erosion_px = static_cast<int>(seed % 5);
        config.erosion_jitter = (seed % 3) * 0.3;
        config.seed = seed;
        GenerateResult gen;
        try {
            gen = generate_puzzle(fixtures::textured_image(200, 160), config,
                                  "c1_" + std::to_string(seed));
        } catch (const DataError&) {
            continue;
        }
        ++checked;
        // Neighbor threshold sized to the erosion gap (the benchmark's
        // "maximum distance observable between adjacent pieces").
        MetricsConfig metrics;
        metrics.neighbor_tau_px = std::max(4.0, 2.0 * config.erosion_px + 2.0);
        const MetricsReport rep = evaluate(gen.puzzle.ground_truth, gen.puzzle, metrics);
        // Synthetic GT theta is 0 (integer): the identity row is exact.
        if (rep.q_pos != 1.0 || rep.rmse_translation != 0.0 || rep.rmse_rotation != 0.0 ||
            rep.precision != 1.0 || rep.recall != 1.0 || rep.f1 != 1.0) {
            ok = false;
            why = "seed " + std::to_string(seed) + " gt row not perfect (q_pos=" +
                  std::to_string(rep.q_pos) + ")";
            break;
        }
    }
    const double secs = seconds_since(t0);
    if (ok && checked < 50) {
        ok = false;
        why = "only " + std::to_string(checked) + " puzzles generated";
    }
    if (ok && secs >= 120.0) {
        ok = false;
        why = "runtime " + std::to_string(secs) + "s exceeds 2 min";
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "metric identity on 50 generated puzzles, evaluate(GT) exact, %.1fs", secs);
    report(1, ok, ok ? buf : why);
}

// ---------------------------------------------------------------- 2
void criterion_2() {
    Rng rng(202);
    bool ok = true;
    std::string why;
    int puzzles = 0;
    for (std::uint64_t seed = 0; puzzles < 20 && seed < 200 && ok; ++seed) {
        GenConfig config;
        config.n_cuts = 2 + static_cast<int>(seed % 5);
        config.seed = 500 + seed;
        CrossingCutsResult gen;
        try {
            gen = crossing_cuts(fixtures::textured_image(180, 150), config);
        } catch (const DataError&) {
            continue;
        }
        ++puzzles;
        const Solution2D noisy = perturb(gen.puzzle.ground_truth, 4.0, 6.0, rng);
        const MetricsReport base = evaluate(noisy, gen.puzzle, MetricsConfig{});
        for (int m = 0; m < 10 && ok; ++m) {
            const RigidTransform2 g{rng.uniform(-180.0, 180.0), rng.uniform(-500.0, 500.0),
                                    rng.uniform(-500.0, 500.0)};
            const MetricsReport moved =
                evaluate(apply_global(noisy, g), gen.puzzle, MetricsConfig{});
            if (std::abs(moved.rmse_translation - base.rmse_translation) > 1e-6 ||
                std::abs(moved.rmse_rotation - base.rmse_rotation) > 1e-6 ||
                std::abs(moved.precision - base.precision) > 1e-6 ||
                std::abs(moved.recall - base.recall) > 1e-6 ||
                std::abs(moved.f1 - base.f1) > 1e-6 ||
                std::abs(moved.q_pos - base.q_pos) > 0.02) {
                ok = false;
                why = "gauge drift at puzzle seed " + std::to_string(seed);
            }
        }
    }
    if (puzzles < 20) {
        ok = false;
        why = "only " + std::to_string(puzzles) + " puzzles";
    }
    report(2, ok, ok ? "gauge invariance over 20 puzzles x 10 rigid motions" : why);
}

// ---------------------------------------------------------------- 3
void criterion_3() {
    const double sigmas[4] = {0.0, 2.0, 8.0, 32.0};
    std::vector<double> med_qpos, med_rt, med_rr;
    for (double sigma : sigmas) {
        std::vector<double> qs, rts, rrs;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            GenConfig config;
            config.n_cuts = 4;
            config.seed = 900 + seed;
            CrossingCutsResult gen;
            try {
                gen = crossing_cuts(fixtures::textured_image(180, 150), config);
            } catch (const DataError&) {
                continue;
            }
            Rng rng(7000 + seed); // same noise stream across the sigma ladder
            const Solution2D noisy = perturb(gen.puzzle.ground_truth, sigma, sigma, rng);
            const MetricsReport rep = evaluate(noisy, gen.puzzle, MetricsConfig{});
            qs.push_back(rep.q_pos);
            rts.push_back(rep.rmse_translation);
            rrs.push_back(rep.rmse_rotation);
        }
        med_qpos.push_back(median(qs));
        med_rt.push_back(median(rts));
        med_rr.push_back(median(rrs));
    }
    bool ok = true;
    for (int i = 1; i < 4; ++i) {
        if (!(med_qpos[i] < med_qpos[i - 1])) ok = false;
        if (!(med_rt[i] > med_rt[i - 1])) ok = false;
        if (!(med_rr[i] > med_rr[i - 1])) ok = false;
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "monotone degradation: median q_pos %.3f > %.3f > %.3f > %.3f, RMSEs rising",
                  med_qpos[0], med_qpos[1], med_qpos[2], med_qpos[3]);
    report(3, ok, detail);
}

// ---------------------------------------------------------------- 4
struct Oracle {
    bool admissible = false;
    std::set<std::pair<std::string, std::string>> edges;
};

// Analytic adjacency of the cut arrangement. Admits only instances whose
// answer is unambiguous at pixel resolution: oracle edges have pixels of
// both faces hugging the shared feature (a shared boundary interval of
// length >= 3 px, or the crossing point of a two-cut pair); non-edge
// pairs must keep an 8 px clearance, checked with radius-4 dilations.
Oracle analytic_adjacency(const Puzzle2D& pz, const std::vector<CutLine>& cuts, int w, int h) {
    Oracle out;
    std::map<std::string, std::uint64_t> key;
    std::map<std::string, std::vector<std::pair<int, int>>> pixels;
    std::map<std::string, PlacedMask> wide;
    for (const auto& f : pz.fragments) {
        const Pose2D& pose = pz.ground_truth.poses.at(f.id);
        const double cx = (f.mask.width - 1) / 2.0, cy = (f.mask.height - 1) / 2.0;
        for (int j = 0; j < f.mask.height; ++j)
            for (int i = 0; i < f.mask.width; ++i) {
                if (!f.mask.at(i, j)) continue;
                pixels[f.id].push_back({static_cast<int>(std::lround(i - cx + pose.x)),
                                        static_cast<int>(std::lround(j - cy + pose.y))});
            }
        if (pixels[f.id].size() < 60) return out;
        const auto [gx, gy] = pixels[f.id].front();
        std::uint64_t k = 0;
        for (size_t c = 0; c < cuts.size(); ++c)
            if (cuts[c].eval(gx, gy) >= 0) k |= 1ULL << c;
        key[f.id] = k;
        wide.emplace(f.id, dilate_disk(place(f, pose), 4));
    }
    auto hugs = [&](const std::string& id, double x, double y) {
        for (const auto& [gx, gy] : pixels[id]) {
            const double dx = gx - x, dy = gy - y;
            if (dx * dx + dy * dy <= 2.5 * 2.5) return true;
        }
        return false;
    };

    std::vector<std::string> ids;
    for (const auto& [id, k] : key) ids.push_back(id);
    for (size_t i = 0; i < ids.size(); ++i) {
        for (size_t j = i + 1; j < ids.size(); ++j) {
            const std::uint64_t diff = key[ids[i]] ^ key[ids[j]];
            const int bits = __builtin_popcountll(diff);
            bool edge = false;
            if (bits == 1) {
                const int k = __builtin_ctzll(diff);
                // Interval of the shared line inside both faces' closures.
                const double dx = -cuts[k].b, dy = cuts[k].a;
                const double px = -cuts[k].a * cuts[k].c, py = -cuts[k].b * cuts[k].c;
                double t0 = -1e18, t1 = 1e18;
                auto clip = [&](double a, double b, double c, bool pos) {
                    double s = a * dx + b * dy, v = a * px + b * py + c;
                    if (!pos) {
                        s = -s;
                        v = -v;
                    }
                    if (std::abs(s) < 1e-12) {
                        if (v < 0) {
                            t0 = 1;
                            t1 = 0;
                        }
                        return;
                    }
                    const double t = -v / s;
                    if (s > 0)
                        t0 = std::max(t0, t);
                    else
                        t1 = std::min(t1, t);
                };
                clip(1, 0, 0.5, true);
                clip(-1, 0, w - 0.5, true);
                clip(0, 1, 0.5, true);
                clip(0, -1, h - 0.5, true);
                const std::uint64_t common = key[ids[i]] & ~diff;
                for (size_t c = 0; c < cuts.size(); ++c) {
                    if (c == static_cast<size_t>(k)) continue;
                    clip(cuts[c].a, cuts[c].b, cuts[c].c, (common >> c) & 1ULL);
                }
                const double len = t1 - t0;
                if (len > 1e-9 && len < 3.0) return out;
                if (len >= 3.0) {
                    const double mx = px + 0.5 * (t0 + t1) * dx;
                    const double my = py + 0.5 * (t0 + t1) * dy;
                    if (!hugs(ids[i], mx, my) || !hugs(ids[j], mx, my)) return out;
                    edge = true;
                }
            } else if (bits == 2) {
                const int k = __builtin_ctzll(diff);
                const std::uint64_t rest = diff & (diff - 1);
                const int l = __builtin_ctzll(rest);
                const double det = cuts[k].a * cuts[l].b - cuts[l].a * cuts[k].b;
                if (std::abs(det) >= 1e-12) {
                    const double x = (-cuts[k].c * cuts[l].b + cuts[l].c * cuts[k].b) / det;
                    const double y = (-cuts[k].a * cuts[l].c + cuts[l].a * cuts[k].c) / det;
                    if (x >= -0.5 && y >= -0.5 && x <= w - 0.5 && y <= h - 0.5) {
                        bool sign_ok = true;
                        const std::uint64_t common = key[ids[i]] & ~diff;
                        for (size_t c = 0; c < cuts.size(); ++c) {
                            if (c == static_cast<size_t>(k) || c == static_cast<size_t>(l))
                                continue;
                            if ((cuts[c].eval(x, y) >= 0) != (((common >> c) & 1ULL) != 0)) {
                                sign_ok = false;
                                break;
                            }
                        }
                        if (sign_ok) {
                            if (!hugs(ids[i], x, y) || !hugs(ids[j], x, y)) return out;
                            edge = true;
                        }
                    }
                }
            }
            if (edge)
                out.edges.insert(std::minmax(ids[i], ids[j]));
            else if (masks_intersect(wide.at(ids[i]), wide.at(ids[j])))
                return out;
        }
    }
    out.admissible = true;
    return out;
}

void criterion_4() {
    const int w = 256, h = 200;
    const ImageRGBA img = fixtures::textured_image(w, h);
    int admitted = 0, exact = 0;
    for (std::uint64_t seed = 0; admitted < 20 && seed < 4000; ++seed) {
        GenConfig config;
        config.n_cuts = 2 + static_cast<int>(seed % 3); // <= 4 cuts
        config.seed = seed;
        CrossingCutsResult gen;
        try {
            gen = crossing_cuts(img, config);
        } catch (const DataError&) {
            continue;
        }
        const Oracle oracle = analytic_adjacency(gen.puzzle, gen.cuts, w, h);
        if (!oracle.admissible) continue;
        ++admitted;
        std::vector<std::pair<std::string, PlacedMask>> placed;
        for (const auto& f : gen.puzzle.fragments)
            placed.emplace_back(f.id, place(f, gen.puzzle.ground_truth.poses.at(f.id)));
        const MatingGraph graph = build_mating_graph(placed, 4.0);
        if (graph.edges == oracle.edges) ++exact;
    }
    const bool ok = admitted == 20 && exact == 20;
    report(4, ok,
           "mating graph equals analytic cut-arrangement adjacency on " +
               std::to_string(exact) + "/" + std::to_string(admitted) + " instances");
}

// ---------------------------------------------------------------- 5
void criterion_5() {
    bool ok = true;
    std::string why;

    // Douglas-Peucker deviation bound, exhaustive point-to-chain check.
    Rng rng(505);
    for (int trial = 0; trial < 100 && ok; ++trial) {
        Polyline line;
        const int n = 10 + static_cast<int>(rng.uniform_int(0, 80));
        double x = 0;
        for (int i = 0; i < n; ++i) {
            x += rng.uniform(0.05, 1.0);
            line.points.push_back({x, rng.uniform(-4.0, 4.0)});
        }
        const double eps = rng.uniform(0.01, 2.0);
        const Polyline simp = douglas_peucker(line, eps);
        for (const Point2& p : line.points) {
            double best = 1e300;
            for (size_t i = 0; i + 1 < simp.points.size(); ++i)
                best = std::min(best,
                                point_segment_distance(p, simp.points[i], simp.points[i + 1]));
            if (best > eps + 1e-9) {
                ok = false;
                why = "DP deviation bound violated";
                break;
            }
        }
    }

    // Closed-form two-point registration vs iterative spring descent.
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const Point2 s1{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        Point2 s2{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        if (distance(s1, s2) < 0.5) s2.x += 1.0;
        const Point2 d1{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const Point2 d2{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const RigidTransform2 closed = procrustes_two_point(s1, s2, d1, d2);
        const RigidTransform2 iter = procrustes_two_point_iterative(s1, s2, d1, d2);
        if (std::abs(normalize_deg(closed.theta_deg - iter.theta_deg)) >= 1e-6 ||
            std::abs(closed.tx - iter.tx) >= 1e-6 || std::abs(closed.ty - iter.ty) >= 1e-6) {
            ok = false;
            why = "closed-form vs iterative mismatch at trial " + std::to_string(trial);
        }
    }
    report(5, ok,
           ok ? "DP bound on 100 random polylines; two-point registration matches "
                "iterative descent to <1e-6 on 1000 pairs"
              : why);
}

// ---------------------------------------------------------------- 6
void criterion_6() {
    ImageRGBA img = fixtures::textured_image(128, 128);
    const Puzzle2D puzzle = cut_with_lines(img, {CutLine{0.0, 1.0, -63.5}});
    GeneticConfig config;
    config.population = 64;
    config.generations = 500;
    const double gt_fitness = 128.0 * 128.0 * config.lambda_bbox;

    int within = 0, monotone = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        config.seed = seed;
        const GeneticResult res = solve_genetic(puzzle, config);
        bool mono = true;
        for (size_t g = 1; g < res.trace.size(); ++g)
            if (res.trace[g] > res.trace[g - 1]) mono = false;
        if (mono) ++monotone;
        if (res.trace.back() <= 1.05 * gt_fitness) ++within;
    }

    // Replacement-count check: M = 8 replaces exactly 2 per generation.
    GeneticConfig small;
    small.population = 8;
    small.sigma_t = 1;
    small.sigma_theta = 1;
    Population pop;
    Rng rng(3);
    for (int i = 0; i < 8; ++i) {
        pop.members.push_back(chromosome_from_solution(scramble(puzzle, i), puzzle));
        pop.fitness.push_back(fitness(pop.members.back(), puzzle, small));
    }
    const Population before = pop;
    evolve_generation(pop, puzzle, small, rng);
    int changed = 0;
    for (int i = 0; i < 8; ++i)
        if (pop.members[i].rows != before.members[i].rows) ++changed;

    const bool ok = within >= 8 && monotone == 10 && changed == 2;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "genetic sanity: %d/10 seeds within 1.05x GT fitness, %d/10 monotone "
                  "traces, M/4 replacement count = %d",
                  within, monotone, changed);
    report(6, ok, detail);
}

// ---------------------------------------------------------------- 7
void criterion_7() {
    const Puzzle2D disk = fixtures::straight_cut_disk_puzzle(50, 0.0);
    GreedyConfig config = fixtures::disk_greedy_config();
    int exact = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        config.seed = seed;
        const GreedyResult res = solve_greedy(disk, config);
        if (!res.solution.unplaced.empty()) continue;
        const auto rel = compose(invert(res.solution.poses.at("a").transform()),
                                 res.solution.poses.at("b").transform());
        const auto gt_rel = compose(invert(disk.ground_truth.poses.at("a").transform()),
                                    disk.ground_truth.poses.at("b").transform());
        const double dt = std::hypot(rel.tx - gt_rel.tx, rel.ty - gt_rel.ty);
        const double dth = std::abs(normalize_deg(rel.theta_deg - gt_rel.theta_deg));
        const MetricsReport rep = evaluate(res.solution, disk, MetricsConfig{});
        if (dt <= 2.0 && dth <= 2.0 && rep.q_pos >= 0.95 && rep.f1 == 1.0) ++exact;
    }

    const Puzzle2D five = fixtures::five_fragment_puzzle();
    GreedyConfig poly = fixtures::polygon_greedy_config();
    int good_f1 = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        poly.seed = seed;
        const GreedyResult res = solve_greedy(five, poly);
        const MetricsReport rep = evaluate(res.solution, five, MetricsConfig{});
        if (rep.f1 >= 0.6) ++good_f1;
    }

    const bool ok = exact == 10 && good_f1 >= 7;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "greedy exactness: straight-cut %d/10 (needs 10), 5-fragment F1>=0.6 "
                  "in %d/10 (needs >=7)",
                  exact, good_f1);
    report(7, ok, detail);
}

// ---------------------------------------------------------------- 8
void criterion_8() {
    bool ok = true;
    std::string why;
    const fs::path root = fs::temp_directory_path() / "fragsolve_acceptance_rt";
    fs::remove_all(root);
    fs::create_directories(root);

    Rng rng(808);
    int group_trials = 0;
    for (std::uint64_t seed = 0; group_trials < 50 && seed < 400 && ok; ++seed) {
        GenConfig config;
        config.n_cuts = 2 + static_cast<int>(seed % 4);
        config.seed = 3000 + seed;
        CrossingCutsResult gen;
        try {
            gen = crossing_cuts(fixtures::textured_image(96, 80), config);
        } catch (const DataError&) {
            continue;
        }
        ++group_trials;
        const fs::path dir = root / ("g" + std::to_string(seed));
        save_group_2d(gen.puzzle, dir);
        const Puzzle2D loaded = load_group_2d(dir);
        if (loaded.fragments.size() != gen.puzzle.fragments.size()) {
            ok = false;
            why = "fragment count changed in round trip";
            break;
        }
        for (size_t i = 0; i < loaded.fragments.size(); ++i)
            if (loaded.fragments[i].mask.data != gen.puzzle.fragments[i].mask.data) {
                ok = false;
                why = "mask bits changed in round trip";
            }
        for (const auto& [id, pose] : gen.puzzle.ground_truth.poses) {
            const Pose2D& got = loaded.ground_truth.poses.at(id);
            if (std::abs(got.x - pose.x) > 1e-6 || std::abs(got.y - pose.y) > 1e-6 ||
                std::abs(got.theta_deg - pose.theta_deg) > 1e-6) {
                ok = false;
                why = "pose drifted in round trip";
            }
        }
    }
    if (ok && group_trials < 50) {
        ok = false;
        why = "only " + std::to_string(group_trials) + " groups";
    }

    for (int trial = 0; trial < 50 && ok; ++trial) {
        Solution2D sol;
        const int n = 2 + static_cast<int>(rng.uniform_int(0, 8));
        for (int i = 0; i < n; ++i)
            sol.poses.emplace("f" + std::to_string(i),
                              Pose2D(rng.uniform(-2000.0, 2000.0), rng.uniform(-2000.0, 2000.0),
                                     rng.uniform(-180.0, 180.0)));
        const fs::path path = root / ("s" + std::to_string(trial) + ".txt");
        save_solution(sol, path);
        const SolutionFile loaded = load_solution(path);
        const Solution2D& got = std::get<Solution2D>(loaded);
        for (const auto& [id, pose] : sol.poses) {
            const Pose2D& lp = got.poses.at(id);
            if (std::abs(lp.x - pose.x) > 1e-5 ||
                std::abs(lp.theta_deg - pose.theta_deg) > 1e-6) {
                ok = false;
                why = "solution round trip drifted";
            }
        }
    }

    const RenderScale scale{2000, 0.01, 2.714};
    if (ok && std::abs(scale.factor() - 7.369) > 5e-4) {
        ok = false;
        why = "render factor " + std::to_string(scale.factor()) + " != 7.369";
    }
    report(8, ok,
           ok ? "100 randomized save/load round trips lossless; mm-to-px factor 7.369 "
                "reproduced"
              : why);
    fs::remove_all(root);
}

// ---------------------------------------------------------------- 9
void criterion_9(bool extended) {
    const char* env = std::getenv("REPAIR_2D_DIR");
    const fs::path dataset = env ? fs::path(env) : fs::path("data/repair_2d");
    if (!fs::is_directory(dataset)) {
        report_skip(9, "released 2D dataset not present (set REPAIR_2D_DIR); nothing to check");
        return;
    }
    if (!extended) {
        report_skip(9, "dataset present but --extended not given (run takes hours)");
        return;
    }

    // Full-budget runs over every group; band check against the
    // published benchmark rows (report only, never hard-fail).
    LoadOptions load;
    load.strict = false;
    struct Band {
        const char* method;
        double f1;
    };
    const Band bands[2] = {{"genetic", 0.394}, {"greedy", 0.351}};
    for (const Band& band : bands) {
        double sum_q = 0, sum_f1 = 0;
        int n = 0;
        for (const auto& entry : fs::directory_iterator(dataset)) {
            if (!entry.is_directory()) continue;
            Puzzle2D puzzle;
            try {
                puzzle = load_group_2d(entry.path(), load);
            } catch (const std::exception&) {
                continue;
            }
            Solution2D sol;
            if (std::strcmp(band.method, "genetic") == 0) {
                GeneticConfig config;
                config.population = 64;
                config.generations = 1000;
                sol = solve_genetic(puzzle, config).solution;
            } else {
                GreedyConfig config;
                sol = solve_greedy(puzzle, config).solution;
            }
            const MetricsReport rep = evaluate(sol, puzzle, MetricsConfig{});
            sum_q += rep.q_pos;
            sum_f1 += rep.f1;
            ++n;
        }
        if (n == 0) continue;
        const double mean_q = sum_q / n, mean_f1 = sum_f1 / n;
        const bool in_band =
            mean_q >= 0.0 && mean_q <= 0.15 && std::abs(mean_f1 - band.f1) <= 0.20;
        std::printf("[INFO] criterion 9: %s on %d groups: q_pos=%.3f (band [0,0.15]), "
                    "f1=%.3f (published %.3f +-0.20) -> %s\n",
                    band.method, n, mean_q, mean_f1, band.f1,
                    in_band ? "within band" : "outside band (reported, not failed)");
    }
    report(9, true, "dataset band check executed (report-only by design)");
}

// ---------------------------------------------------------------- 10
void criterion_10() {
    // Eval performance: 20 fragments on 2000x2000 rasters.
    Puzzle2D big;
    big.group_id = "big";
    for (int i = 0; i < 20; ++i) {
        ImageRGBA im(2000, 2000);
        const double cx = 999.5, cy = 999.5, r = 900.0;
        for (int y = 0; y < 2000; ++y)
            for (int x = 0; x < 2000; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) im.pixel(x, y)[3] = 255;
        char id[8];
        std::snprintf(id, sizeof(id), "f%02d", i);
        big.fragments.push_back(make_fragment(id, std::move(im)));
        big.ground_truth.poses.emplace(
            id, Pose2D(1000.0 + 1900.0 * (i % 5), 1000.0 + 1900.0 * (i / 5), 0.0));
    }
    big.has_ground_truth = true;
    big.canvas_w = 10000;
    big.canvas_h = 8000;
    finalize_puzzle(big);

    const auto t0 = std::chrono::steady_clock::now();
    const MetricsReport rep = evaluate(big.ground_truth, big, MetricsConfig{});
    const double eval_secs = seconds_since(t0);
    const bool eval_ok = eval_secs < 10.0 && rep.q_pos == 1.0;

    // One greedy step: 10 placed x 10 unplaced fragments, <= 8 segments
    // each, scored through the public pairwise op (an upper bound on the
    // solver's per-step cost, which caches placed masks).
    std::vector<Fragment2D> frags;
    for (int i = 0; i < 20; ++i) {
        ImageRGBA im(300, 300);
        for (int y = 0; y < 300; ++y)
            for (int x = 0; x < 300; ++x) im.pixel(x, y)[3] = 255;
        frags.push_back(make_fragment("p" + std::to_string(i), std::move(im)));
    }
    GreedyConfig config;
    config.curvature_threshold = 0.8 * (kPi / 2.0) / 299.0; // squares split into 4 sides
    config.min_segment_len = 10.0;
    std::vector<std::vector<ContourSegment>> segments;
    for (const Fragment2D& f : frags) segments.push_back(segment_contour(f, config));
    for (const auto& segs : segments)
        if (segs.size() > 8) {
            report(10, false, "fixture fragment exceeded 8 segments");
            return;
        }

    const auto t1 = std::chrono::steady_clock::now();
    std::vector<Pose2D> poses;
    std::vector<PlacedMask> placed;
    for (int i = 0; i < 10; ++i) {
        poses.push_back(Pose2D(400.0 * i, 0.0, 0.0));
        placed.push_back(place(frags[i], poses[i]));
    }
    double best = 2.0;
    for (int a = 0; a < 10; ++a) {
        for (const ContourSegment& sa : segments[a]) {
            for (int b = 10; b < 20; ++b) {
                for (const ContourSegment& sb : segments[b]) {
                    const double la = sa.arc_length, lb = sb.arc_length;
                    const double lo = std::min(la, lb), hi = std::max(la, lb);
                    if (lo <= 0 || hi / lo > config.max_length_ratio) continue;
                    const auto fit = segment_compatibility(sa, frags[a], poses[a], placed[a],
                                                           sb, frags[b]);
                    if (fit && fit->iou < best) best = fit->iou;
                }
            }
        }
    }
    const double step_secs = seconds_since(t1);
    const bool step_ok = step_secs < 5.0 && best < 2.0;

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "performance: 20x2000px group eval %.2fs (<10s), greedy step 10x10 %.2fs "
                  "(<5s)",
                  eval_secs, step_secs);
    report(10, eval_ok && step_ok, detail);
}

} // namespace

int main(int argc, char** argv) {
    bool extended = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--extended") == 0) extended = true;

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(extended);
    criterion_10();

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
