#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>

#include "fragsolve/dataset_io.hpp"
#include "fragsolve/metrics.hpp"
#include "fragsolve/png_io.hpp"
#include "fragsolve/puzzle_gen.hpp"
#include "fragsolve/solver_genetic.hpp"
#include "fragsolve/solver_greedy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fragsolve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

void atomic_write_text(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

/// Group directories under `dataset`: subdirectories holding at least two
/// fragment files; the dataset dir itself when it is already a group.
std::vector<fs::path> discover_groups(const fs::path& dataset, const std::string& ext) {
    auto is_group = [&](const fs::path& dir) {
        int count = 0;
        if (!fs::is_directory(dir)) return false;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ext) ++count;
        return count >= 2;
    };
    std::vector<fs::path> groups;
    if (is_group(dataset)) {
        groups.push_back(dataset);
        return groups;
    }
    for (const auto& e : fs::directory_iterator(dataset))
        if (e.is_directory() && is_group(e.path())) groups.push_back(e.path());
    std::sort(groups.begin(), groups.end());
    return groups;
}

std::set<std::string> read_split_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read split manifest " + path.string());
    std::set<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) names.insert(line);
    }
    return names;
}

int cmd_gen(const std::vector<std::string>& images, const fs::path& out_dir, GenConfig config) {
    fs::create_directories(out_dir);
    json manifest;
    manifest["command"] = "gen";
    manifest["config"] = {{"n_cuts", config.n_cuts},
                          {"erosion_px", config.erosion_px},
                          {"erosion_jitter", config.erosion_jitter},
                          {"drop_fraction", config.drop_fraction},
                          {"seed", config.seed}};
    manifest["groups"] = json::array();

    for (const std::string& image_path : images) {
        const ImageRGBA image = read_png(image_path);
        const std::string group_id = fs::path(image_path).stem().string();
        const GenerateResult gen = generate_puzzle(image, config, group_id);
        save_group_2d(gen.puzzle, out_dir / group_id);
        manifest["groups"].push_back({{"group", group_id},
                                      {"source", image_path},
                                      {"output", (out_dir / group_id).string()},
                                      {"fragments", gen.puzzle.fragments.size()},
                                      {"vanished", gen.vanished.size()},
                                      {"attempts", gen.attempts}});
        std::cout << "generated " << group_id << ": " << gen.puzzle.fragments.size()
                  << " fragments\n";
    }
    atomic_write_text(out_dir / "gen_manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

struct SolveOutcome {
    std::string group;
    bool ok = false;
    std::string error;
    double seconds = 0;
};

int cmd_solve(const fs::path& dataset, const std::string& method, const fs::path& out_dir,
              const GeneticConfig& genetic_config, const GreedyConfig& greedy_config,
              bool lenient) {
    const auto groups = discover_groups(dataset, ".png");
    if (groups.empty()) {
        std::cerr << "no 2D groups found under " << dataset << "\n";
        return kExitData;
    }
    fs::create_directories(out_dir);

    std::vector<SolveOutcome> outcomes(groups.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < groups.size(); i = next.fetch_add(1)) {
            SolveOutcome& oc = outcomes[i];
            oc.group = groups[i].filename().string();
            const auto t0 = std::chrono::steady_clock::now();
            try {
                LoadOptions load;
                load.strict = !lenient;
                const Puzzle2D puzzle = load_group_2d(groups[i], load);
                if (method == "genetic") {
                    const GeneticResult res = solve_genetic(puzzle, genetic_config);
                    std::string trace = "generation,best_fitness\n";
                    for (size_t g = 0; g < res.trace.size(); ++g) {
                        char row[64];
                        std::snprintf(row, sizeof(row), "%zu,%.9g\n", g, res.trace[g]);
                        trace += row;
                    }
                    const fs::path sol_path = out_dir / (oc.group + ".solution.txt");
                    save_solution(res.solution, fs::path(sol_path.string() + ".tmp"));
                    fs::rename(sol_path.string() + ".tmp", sol_path);
                    atomic_write_text(out_dir / (oc.group + ".trace.csv"), trace);
                } else {
                    const GreedyResult res = solve_greedy(puzzle, greedy_config);
                    std::string log;
                    for (const GreedyStep& st : res.steps) {
                        json rec = {{"step", st.step},
                                    {"placed", st.placed_id},
                                    {"against", st.against_id},
                                    {"segment_placed", st.segment_placed},
                                    {"segment_against", st.segment_against},
                                    {"iou", st.iou},
                                    {"pose", {st.pose.x, st.pose.y, st.pose.theta_deg}}};
                        log += rec.dump() + "\n";
                    }
                    const fs::path sol_path = out_dir / (oc.group + ".solution.txt");
                    save_solution(res.solution, fs::path(sol_path.string() + ".tmp"));
                    fs::rename(sol_path.string() + ".tmp", sol_path);
                    atomic_write_text(out_dir / (oc.group + ".decisions.jsonl"), log);
                }
                oc.ok = true;
            } catch (const std::exception& e) {
                oc.error = e.what();
            }
            oc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                             .count();
        }
    };

    const int threads = std::min<int>(worker_threads(), static_cast<int>(groups.size()));
    std::vector<std::future<void>> jobs;
    for (int t = 1; t < threads; ++t) jobs.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& j : jobs) j.get();

    json manifest;
    manifest["command"] = "solve";
    manifest["dataset"] = dataset.string();
    manifest["method"] = method;
    if (method == "genetic") {
        manifest["config"] = {{"population", genetic_config.population},
                              {"generations", genetic_config.generations},
                              {"sigma_t", genetic_config.sigma_t},
                              {"sigma_theta", genetic_config.sigma_theta},
                              {"lambda_bbox", genetic_config.lambda_bbox},
                              {"lambda_overlap", genetic_config.lambda_overlap},
                              {"literal_theta_mean", genetic_config.literal_theta_mean},
                              {"seed", genetic_config.seed}};
    } else {
        manifest["config"] = {{"dp_epsilon", greedy_config.dp_epsilon},
                              {"curvature_threshold", greedy_config.curvature_threshold},
                              {"min_segment_len", greedy_config.min_segment_len},
                              {"max_length_ratio", greedy_config.max_length_ratio},
                              {"top_k", greedy_config.top_k},
                              {"seed", greedy_config.seed}};
    }
    manifest["groups"] = json::array();
    int failures = 0;
    for (const SolveOutcome& oc : outcomes) {
        manifest["groups"].push_back({{"group", oc.group},
                                      {"status", oc.ok ? "ok" : "failed"},
                                      {"error", oc.error},
                                      {"seconds", oc.seconds},
                                      {"output", (out_dir / (oc.group + ".solution.txt")).string()}});
        if (!oc.ok) {
            ++failures;
            std::cerr << "group " << oc.group << " failed: " << oc.error << "\n";
        }
    }
    atomic_write_text(out_dir / "solve_manifest.json", manifest.dump(2) + "\n");
    std::cout << "solved " << (outcomes.size() - failures) << "/" << outcomes.size()
              << " groups with " << method << "\n";
    return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_eval(const fs::path& dataset, const fs::path& solutions, const MetricsConfig& config,
             const std::string& method, bool strict, const fs::path& split_path,
             const fs::path& csv_path, const fs::path& json_path, bool lenient) {
    auto groups2d = discover_groups(dataset, ".png");
    auto groups3d = discover_groups(dataset, ".obj");
    if (groups2d.empty() && groups3d.empty()) {
        std::cerr << "no groups found under " << dataset << "\n";
        return kExitData;
    }
    std::set<std::string> split;
    if (!split_path.empty()) split = read_split_manifest(split_path);
    auto in_split = [&](const fs::path& g) {
        return split.empty() || split.count(g.filename().string()) > 0;
    };

    struct Row {
        std::string group;
        bool missing = false;
        bool failed = false;
        std::string error;
        MetricsReport report;
    };
    std::vector<Row> rows;
    auto eval_group = [&](const fs::path& group, bool is_3d) {
        Row row;
        row.group = group.filename().string();
        const fs::path sol_path = solutions / (row.group + ".solution.txt");
        if (!fs::exists(sol_path)) {
            row.missing = true;
            rows.push_back(row);
            return;
        }
        try {
            const SolutionFile sol = load_solution(sol_path);
            if (is_3d) {
                const Puzzle3D puzzle = load_group_3d(group);
                row.report = evaluate(std::get<Solution3D>(sol), puzzle, config);
            } else {
                LoadOptions load;
                load.strict = !lenient;
                const Puzzle2D puzzle = load_group_2d(group, load);
                row.report = evaluate(std::get<Solution2D>(sol), puzzle, config);
            }
        } catch (const std::bad_variant_access&) {
            row.failed = true;
            row.error = "solution dimensionality does not match the group";
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(row);
    };
    for (const auto& g : groups2d)
        if (in_split(g)) eval_group(g, false);
    for (const auto& g : groups3d)
        if (in_split(g)) eval_group(g, true);

    std::string csv = metrics_csv_header() + "\n";
    MetricsReport mean;
    int evaluated = 0, missing = 0, failed = 0;
    for (const Row& row : rows) {
        if (row.missing) {
            csv += row.group + "," + method + ",status=missing\n";
            ++missing;
            continue;
        }
        if (row.failed) {
            csv += row.group + "," + method + ",status=failed\n";
            std::cerr << "evaluation of " << row.group << " failed: " << row.error << "\n";
            ++failed;
            continue;
        }
        csv += metrics_csv_row(row.group, method, row.report) + "\n";
        mean.q_pos += row.report.q_pos;
        mean.rmse_rotation += row.report.rmse_rotation;
        mean.rmse_translation += row.report.rmse_translation;
        mean.precision += row.report.precision;
        mean.recall += row.report.recall;
        mean.f1 += row.report.f1;
        ++evaluated;
    }
    if (evaluated > 0) {
        mean.q_pos /= evaluated;
        mean.rmse_rotation /= evaluated;
        mean.rmse_translation /= evaluated;
        mean.precision /= evaluated;
        mean.recall /= evaluated;
        mean.f1 /= evaluated;
        csv += metrics_csv_row("mean", method, mean) + "\n";
    }

    if (csv_path.empty()) {
        std::cout << csv;
    } else {
        atomic_write_text(csv_path, csv);
    }
    if (!json_path.empty()) {
        json doc;
        doc["method"] = method;
        doc["config"] = {{"neighbor_tau_px", config.neighbor_tau_px},
                         {"neighbor_tau_mm", config.neighbor_tau_mm},
                         {"voxel_mm", config.voxel_mm},
                         {"raster_scale", config.raster_scale},
                         {"rmse_after_anchor", config.rmse_after_anchor},
                         {"classic_rmse", config.classic_rmse},
                         {"chordal_rotation", config.chordal_rotation}};
        doc["rows"] = json::array();
        for (const Row& row : rows) {
            json r = {{"group", row.group}};
            if (row.missing) {
                r["status"] = "missing";
            } else if (row.failed) {
                r["status"] = "failed";
                r["error"] = row.error;
            } else {
                r["status"] = "ok";
                r["q_pos"] = row.report.q_pos;
                r["rmse_rot_deg"] = row.report.rmse_rotation;
                r["rmse_trans"] = row.report.rmse_translation;
                r["precision"] = row.report.precision;
                r["recall"] = row.report.recall;
                r["f1"] = row.report.f1;
                r["anchor"] = row.report.anchor_id;
                r["unplaced"] = row.report.unplaced_count;
            }
            doc["rows"].push_back(r);
        }
        atomic_write_text(json_path, doc.dump(2) + "\n");
    }

    if (failed > 0) return kExitData;
    if (missing > 0 && strict) return kExitData;
    return kExitOk;
}

int cmd_render(const fs::path& group_dir, const fs::path& solution_path, const fs::path& out_png,
               bool compare, bool lenient) {
    LoadOptions load;
    load.strict = !lenient;
    const Puzzle2D puzzle = load_group_2d(group_dir, load);
    const SolutionFile sol_file = load_solution(solution_path);
    if (!std::holds_alternative<Solution2D>(sol_file)) {
        std::cerr << "render requires a 2D solution file\n";
        return kExitData;
    }
    const Solution2D& solution = std::get<Solution2D>(sol_file);

    auto render_one = [&](const Solution2D& sol) {
        // Canvas: bounding box of all placements plus a 10 px margin.
        std::int64_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
        bool first = true;
        std::vector<std::pair<const Fragment2D*, Pose2D>> placements;
        for (const Fragment2D& f : puzzle.fragments) {
            const auto it = sol.poses.find(f.id);
            if (it == sol.poses.end()) continue;
            placements.emplace_back(&f, it->second);
            const PlacedMask pm = place(f, it->second);
            if (pm.area == 0) continue;
            if (first) {
                x0 = pm.bx0;
                y0 = pm.by0;
                x1 = pm.bx1;
                y1 = pm.by1;
                first = false;
            } else {
                x0 = std::min(x0, pm.bx0);
                y0 = std::min(y0, pm.by0);
                x1 = std::max(x1, pm.bx1);
                y1 = std::max(y1, pm.by1);
            }
        }
        if (first) {
            x0 = y0 = 0;
            x1 = y1 = 1;
        }
        const std::int64_t margin = 10;
        ImageRGBA canvas(static_cast<int>(x1 - x0 + 1 + 2 * margin),
                         static_cast<int>(y1 - y0 + 1 + 2 * margin));
        for (const auto& [frag, pose] : placements)
            composite_rgba(canvas, x0 - margin, y0 - margin, frag->rgba, pose.theta_deg, pose.x,
                           pose.y);
        return canvas;
    };

    const ImageRGBA rendered = render_one(solution);
    if (compare) {
        if (!puzzle.has_ground_truth) {
            std::cerr << "--compare requires ground truth\n";
            return kExitData;
        }
        const ImageRGBA gt = render_one(puzzle.ground_truth);
        const int gap = 16;
        ImageRGBA side(gt.width + gap + rendered.width, std::max(gt.height, rendered.height));
        for (int y = 0; y < gt.height; ++y)
            for (int x = 0; x < gt.width; ++x)
                std::copy_n(gt.pixel(x, y), 4, side.pixel(x, y));
        for (int y = 0; y < rendered.height; ++y)
            for (int x = 0; x < rendered.width; ++x)
                std::copy_n(rendered.pixel(x, y), 4, side.pixel(gt.width + gap + x, y));
        write_png(out_png, side);
    } else {
        write_png(out_png, rendered);
    }
    std::cout << "wrote " << out_png.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fragsolve: irregular 2D puzzle generation, solving, and scoring"};
    app.require_subcommand(1);
    // Precedence: flags > config file > defaults.
    app.set_config("--config", "", "read options from an INI/TOML config file");

    // gen
    auto* gen = app.add_subcommand("gen", "generate synthetic crossing-cuts groups");
    std::vector<std::string> gen_paths;
    GenConfig gen_config;
    gen->add_option("paths", gen_paths, "source PNG image(s) followed by the output directory")
        ->required()
        ->expected(-2);
    gen->add_option("--cuts", gen_config.n_cuts, "number of random cuts")
        ->check(CLI::Range(1, 63));
    gen->add_option("--erosion", gen_config.erosion_px, "erosion depth in px")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--jitter", gen_config.erosion_jitter, "erosion depth jitter in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--drop", gen_config.drop_fraction, "fraction of fragments to drop")
        ->check(CLI::Range(0.0, 0.999));
    gen->add_option("--seed", gen_config.seed, "generation seed");

    // solve
    auto* solve = app.add_subcommand("solve", "run a solver over a dataset");
    std::string solve_dataset, solve_out, solve_method;
    GeneticConfig genetic_config;
    GreedyConfig greedy_config;
    bool solve_lenient = false;
    solve->add_option("dataset", solve_dataset, "dataset directory")->required();
    solve->add_option("out", solve_out, "output directory for solutions")->required();
    solve->add_option("--method", solve_method, "solver: genetic | greedy")->required();
    solve->add_flag("--lenient", solve_lenient, "lenient ground-truth parsing");
    solve->add_option("--pop", genetic_config.population, "population size M");
    solve->add_option("--generations", genetic_config.generations, "generation budget");
    solve->add_option("--sigma-t", genetic_config.sigma_t, "mutation sigma, px");
    solve->add_option("--sigma-theta", genetic_config.sigma_theta, "mutation sigma, deg");
    solve->add_option("--lambda-bbox", genetic_config.lambda_bbox, "bounding-box weight");
    solve->add_option("--lambda-overlap", genetic_config.lambda_overlap, "overlap weight");
    solve->add_flag("--literal-theta-mean", genetic_config.literal_theta_mean,
                    "arithmetic crossover mean for theta");
    solve->add_option("--dp-epsilon", greedy_config.dp_epsilon, "contour simplification, px");
    solve->add_option("--curvature-threshold", greedy_config.curvature_threshold,
                      "segment split threshold, 1/px");
    solve->add_option("--min-segment-len", greedy_config.min_segment_len,
                      "minimum segment length, px");
    solve->add_option("--max-length-ratio", greedy_config.max_length_ratio,
                      "candidate segment length-ratio gate");
    solve->add_option("--top-k", greedy_config.top_k, "candidates retained per fragment");
    std::uint64_t solve_seed = 0;
    solve->add_option("--seed", solve_seed, "solver seed");

    // eval
    auto* eval = app.add_subcommand("eval", "score solutions against ground truth");
    std::string eval_dataset, eval_solutions, eval_method = "external";
    std::string eval_csv, eval_json, eval_split;
    MetricsConfig metrics_config;
    bool eval_strict = false, eval_raw_rmse = false, eval_lenient = false;
    eval->add_option("dataset", eval_dataset, "dataset directory")->required();
    eval->add_option("solutions", eval_solutions, "directory of <group>.solution.txt files")
        ->required();
    eval->add_option("--method", eval_method, "method label for the report");
    eval->add_option("--tau", metrics_config.neighbor_tau_px, "2D neighbor threshold, px");
    eval->add_option("--tau-mm", metrics_config.neighbor_tau_mm, "3D neighbor threshold, mm");
    eval->add_option("--voxel", metrics_config.voxel_mm, "3D voxel pitch, mm");
    eval->add_option("--raster-scale", metrics_config.raster_scale,
                     "2D raster resolution multiplier");
    eval->add_flag("--raw-rmse", eval_raw_rmse, "skip anchor alignment before RMSE");
    eval->add_flag("--classic-rmse", metrics_config.classic_rmse,
                   "sqrt(mean of squares) instead of the benchmark formula");
    eval->add_flag("--chordal", metrics_config.chordal_rotation,
                   "Frobenius rotation distance (3D)");
    eval->add_flag("--strict", eval_strict, "missing solutions fail the run");
    eval->add_flag("--lenient", eval_lenient, "lenient ground-truth parsing");
    eval->add_option("--split", eval_split, "split manifest (one group per line)");
    eval->add_option("-o,--csv", eval_csv, "CSV output path (default: stdout)");
    eval->add_option("--json", eval_json, "JSON report path");

    // render
    auto* render = app.add_subcommand("render", "composite a solution to a PNG");
    std::string render_group, render_solution, render_out;
    bool render_compare = false, render_lenient = false;
    render->add_option("group", render_group, "group directory")->required();
    render->add_option("solution", render_solution, "solution file")->required();
    render->add_option("out", render_out, "output PNG")->required();
    render->add_flag("--compare", render_compare, "ground truth side by side");
    render->add_flag("--lenient", render_lenient, "lenient ground-truth parsing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            if (gen_paths.size() < 2)
                throw CLI::ValidationError("paths", "need at least one image and an output dir");
            const std::string gen_out = gen_paths.back();
            gen_paths.pop_back();
            return cmd_gen(gen_paths, gen_out, gen_config);
        }
        if (*solve) {
            if (solve_method != "genetic" && solve_method != "greedy")
                throw CLI::ValidationError("--method", "unknown method '" + solve_method + "'");
            genetic_config.seed = solve_seed;
            greedy_config.seed = solve_seed;
            return cmd_solve(solve_dataset, solve_method, solve_out, genetic_config,
                             greedy_config, solve_lenient);
        }
        if (*eval) {
            metrics_config.rmse_after_anchor = !eval_raw_rmse;
            return cmd_eval(eval_dataset, eval_solutions, metrics_config, eval_method,
                            eval_strict, eval_split, eval_csv, eval_json, eval_lenient);
        }
        if (*render)
            return cmd_render(render_group, render_solution, render_out, render_compare,
                              render_lenient);
    } catch (const CLI::Error& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
