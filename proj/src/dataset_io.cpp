#include "fragsolve/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fragsolve/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fragsolve {

double RenderScale::factor() const {
    if (s_img <= 0 || s_3d <= 0 || s_ort <= 0)
        throw InvalidInput("render scale fields must be positive");
    return s_img * s_3d / s_ort;
}

Point2 mm_to_px(Point2 t_mm, const RenderScale& scale) {
    const double f = scale.factor();
    return {t_mm.x * f, t_mm.y * f};
}

namespace {

constexpr const char* kGtHeader = "# repair-2d-gt v1";
constexpr const char* kSolutionHeader = "# repair-solution v1";

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

double parse_double_or_throw(const std::string& s, int line_no) {
    double v;
    if (!parse_double(s, v))
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

Puzzle2D load_group_2d(const fs::path& dir, const LoadOptions& options) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());

    std::vector<fs::path> pngs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            pngs.push_back(entry.path());
    }
    std::sort(pngs.begin(), pngs.end());
    if (pngs.size() < 2)
        throw InvalidInput("group '" + dir.string() + "' has fewer than 2 fragment PNGs");

    Puzzle2D puzzle;
    puzzle.group_id = dir.filename().string();
    for (const fs::path& p : pngs)
        puzzle.fragments.push_back(make_fragment(p.stem().string(), read_png(p)));

    const fs::path gt_path = dir / "ground_truth.txt";
    if (fs::exists(gt_path)) {
        std::ifstream in(gt_path);
        if (!in) throw DataError("cannot read " + gt_path.string());
        std::string line;
        int line_no = 0;
        bool saw_header = false;
        int positional = 0;
        std::vector<std::string> sorted_ids;
        for (const Fragment2D& f : puzzle.fragments) sorted_ids.push_back(f.id);

        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') {
                if (line.rfind(kGtHeader, 0) == 0) saw_header = true;
                const auto toks = tokenize(line);
                if (toks.size() == 4 && toks[0] == "#" && toks[1] == "canvas") {
                    puzzle.canvas_w = static_cast<int>(parse_double_or_throw(toks[2], line_no));
                    puzzle.canvas_h = static_cast<int>(parse_double_or_throw(toks[3], line_no));
                }
                continue;
            }
            const auto toks = tokenize(line);
            if (toks.empty()) continue;

            std::string id;
            double x, y, theta;
            if (options.strict) {
                if (toks.size() != 4)
                    throw FormatError(gt_path.string() + " line " + std::to_string(line_no) +
                                      ": expected 'id x y theta', got " +
                                      std::to_string(toks.size()) + " columns");
                id = toks[0];
                x = parse_double_or_throw(toks[1], line_no);
                y = parse_double_or_throw(toks[2], line_no);
                theta = parse_double_or_throw(toks[3], line_no);
            } else {
                double first;
                if (toks.size() >= 4 && !parse_double(toks[0], first)) {
                    id = toks[0];
                    x = parse_double_or_throw(toks[1], line_no);
                    y = parse_double_or_throw(toks[2], line_no);
                    theta = parse_double_or_throw(toks[3], line_no);
                } else if (toks.size() >= 3 && parse_double(toks[0], first)) {
                    if (positional >= static_cast<int>(sorted_ids.size()))
                        throw FormatError(gt_path.string() + " line " + std::to_string(line_no) +
                                          ": more pose rows than fragments");
                    id = sorted_ids[positional++];
                    x = first;
                    y = parse_double_or_throw(toks[1], line_no);
                    theta = parse_double_or_throw(toks[2], line_no);
                } else {
                    throw FormatError(gt_path.string() + " line " + std::to_string(line_no) +
                                      ": unrecognized layout");
                }
            }
            if (options.flip_theta) theta = -theta;
            Pose2D pose(x, y, theta);
            if (options.pivot_override) {
                // File pose maps local p to R(theta)(p - pivot) + t; shift
                // the translation so the same map pivots about the raster
                // center instead.
                const Fragment2D* frag = puzzle.find(id);
                if (!frag)
                    throw DataError("ground truth pose for unknown fragment '" + id + "'");
                const Point2 center{(frag->mask.width - 1) / 2.0,
                                    (frag->mask.height - 1) / 2.0};
                const Point2 shift = center - *options.pivot_override;
                const Point2 moved = apply(RigidTransform2{pose.theta_deg, 0, 0}, shift);
                pose = Pose2D(pose.x + moved.x, pose.y + moved.y, pose.theta_deg);
            }
            if (!puzzle.ground_truth.poses.emplace(id, pose).second)
                throw FormatError(gt_path.string() + " line " + std::to_string(line_no) +
                                  ": duplicate id '" + id + "'");
        }
        if (options.strict && !saw_header)
            throw FormatError(gt_path.string() + ": missing '" + std::string(kGtHeader) +
                              "' header (use lenient mode for foreign layouts)");

        for (const Fragment2D& f : puzzle.fragments)
            if (puzzle.ground_truth.poses.find(f.id) == puzzle.ground_truth.poses.end())
                throw DataError("ground truth has no pose for fragment '" + f.id + "'");
        for (const auto& [id, pose] : puzzle.ground_truth.poses)
            if (!puzzle.find(id))
                throw DataError("ground truth pose for unknown fragment '" + id + "'");
        puzzle.has_ground_truth = true;
    }

    finalize_puzzle(puzzle);
    return puzzle;
}

void save_group_2d(const Puzzle2D& puzzle, const fs::path& dir) {
    fs::create_directories(dir);
    for (const Fragment2D& f : puzzle.fragments) write_png(dir / (f.id + ".png"), f.rgba);
    if (puzzle.has_ground_truth) {
        std::ofstream out(dir / "ground_truth.txt");
        if (!out) throw DataError("cannot write ground_truth.txt in " + dir.string());
        out << kGtHeader << "\n";
        out << "# canvas " << puzzle.canvas_w << " " << puzzle.canvas_h << "\n";
        for (const Fragment2D& f : puzzle.fragments) {
            const Pose2D& p = puzzle.ground_truth.poses.at(f.id);
            out << f.id << " " << format_g9(p.x) << " " << format_g9(p.y) << " "
                << format_g9(p.theta_deg) << "\n";
        }
    }
}

Fragment3D load_obj_vertices(const fs::path& path, std::string id) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read OBJ: " + path.string());
    Fragment3D frag;
    frag.id = id.empty() ? path.stem().string() : std::move(id);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("v ", 0) != 0) continue;
        const auto toks = tokenize(line);
        if (toks.size() < 4)
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": malformed vertex record");
        frag.points.push_back({parse_double_or_throw(toks[1], line_no),
                               parse_double_or_throw(toks[2], line_no),
                               parse_double_or_throw(toks[3], line_no)});
        if (toks.size() >= 7) {
            double r, g, b;
            if (parse_double(toks[4], r) && parse_double(toks[5], g) && parse_double(toks[6], b))
                frag.colors.push_back({static_cast<std::uint8_t>(std::lround(r * 255)),
                                       static_cast<std::uint8_t>(std::lround(g * 255)),
                                       static_cast<std::uint8_t>(std::lround(b * 255))});
        }
    }
    if (frag.points.empty()) throw FormatError(path.string() + ": no vertex records");
    return frag;
}

Puzzle3D load_group_3d(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<fs::path> objs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".obj")
            objs.push_back(entry.path());
    std::sort(objs.begin(), objs.end());
    if (objs.size() < 2)
        throw InvalidInput("group '" + dir.string() + "' has fewer than 2 fragment OBJs");

    Puzzle3D puzzle;
    puzzle.group_id = dir.filename().string();
    for (const fs::path& p : objs) puzzle.fragments.push_back(load_obj_vertices(p));

    const fs::path gt_path = dir / "ground_truth.txt";
    if (fs::exists(gt_path)) {
        const SolutionFile sol = load_solution(gt_path);
        if (!std::holds_alternative<Solution3D>(sol))
            throw FormatError(gt_path.string() + ": expected 3D pose rows");
        puzzle.ground_truth = std::get<Solution3D>(sol);
        for (const Fragment3D& f : puzzle.fragments)
            if (puzzle.ground_truth.poses.find(f.id) == puzzle.ground_truth.poses.end())
                throw DataError("ground truth has no pose for fragment '" + f.id + "'");
        puzzle.has_ground_truth = true;
    }
    return puzzle;
}

namespace {

void write_unplaced_comment(std::ofstream& out, const std::set<std::string>& unplaced) {
    if (unplaced.empty()) return;
    out << "# unplaced:";
    for (const std::string& id : unplaced) out << " " << id;
    out << "\n";
}

} // namespace

void save_solution(const Solution2D& solution, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << kSolutionHeader << "\n";
    write_unplaced_comment(out, solution.unplaced);
    for (const auto& [id, p] : solution.poses) {
        out << id << " " << format_g9(p.x) << " " << format_g9(p.y) << " "
            << format_g9(p.theta_deg) << "\n";
    }
}

void save_solution(const Solution3D& solution, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << kSolutionHeader << "\n";
    write_unplaced_comment(out, solution.unplaced);
    for (const auto& [id, p] : solution.poses) {
        out << id;
        for (double v : p.rotation) out << " " << format_g9(v);
        for (double v : p.translation) out << " " << format_g9(v);
        out << "\n";
    }
}

SolutionFile load_solution(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());

    Solution2D sol2;
    Solution3D sol3;
    std::set<std::string> unplaced;
    int dims = 0; // 2 or 3 once detected
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto toks = tokenize(line);
            if (toks.size() >= 2 && toks[1] == "unplaced:")
                for (size_t i = 2; i < toks.size(); ++i) unplaced.insert(toks[i]);
            continue;
        }
        const auto toks = tokenize(line);
        if (toks.size() == 4) {
            if (dims == 3)
                throw FormatError(path.string() + " line " + std::to_string(line_no) +
                                  ": mixed 2D/3D rows");
            dims = 2;
            const std::string& id = toks[0];
            const Pose2D pose(parse_double_or_throw(toks[1], line_no),
                              parse_double_or_throw(toks[2], line_no),
                              parse_double_or_throw(toks[3], line_no));
            if (!sol2.poses.emplace(id, pose).second)
                throw FormatError(path.string() + " line " + std::to_string(line_no) +
                                  ": duplicate id '" + id + "'");
        } else if (toks.size() == 13) {
            if (dims == 2)
                throw FormatError(path.string() + " line " + std::to_string(line_no) +
                                  ": mixed 2D/3D rows");
            dims = 3;
            const std::string& id = toks[0];
            Pose3D pose;
            for (int k = 0; k < 9; ++k)
                pose.rotation[k] = parse_double_or_throw(toks[1 + k], line_no);
            for (int k = 0; k < 3; ++k)
                pose.translation[k] = parse_double_or_throw(toks[10 + k], line_no);
            validate_rotation(pose);
            if (!sol3.poses.emplace(id, pose).second)
                throw FormatError(path.string() + " line " + std::to_string(line_no) +
                                  ": duplicate id '" + id + "'");
        } else {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": expected 4 (2D) or 13 (3D) columns, got " +
                              std::to_string(toks.size()));
        }
    }
    if (dims == 0) throw FormatError(path.string() + ": no pose rows");
    if (dims == 2) {
        sol2.unplaced = std::move(unplaced);
        return sol2;
    }
    sol3.unplaced = std::move(unplaced);
    return sol3;
}

namespace {

std::vector<std::string> string_or_list(const json& v) {
    std::vector<std::string> out;
    if (v.is_string()) {
        out.push_back(v.get<std::string>());
    } else if (v.is_array()) {
        for (const auto& e : v)
            out.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    }
    return out;
}

} // namespace

FragmentMetadata parse_metadata(const fs::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw DataError("cannot read " + json_path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(json_path.string() + ": JSON parse error at byte " +
                          std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) throw FormatError(json_path.string() + ": expected a JSON object");

    FragmentMetadata meta;
    for (const auto& [key, value] : doc.items()) {
        if (key == "ID") {
            meta.id = value.is_string() ? value.get<std::string>() : value.dump();
        } else if (key == "Acquisition Date") {
            meta.acquisition_date = value.is_string() ? value.get<std::string>() : value.dump();
        } else if (key == "Artistic Style") {
            meta.artistic_style = value.is_string() ? value.get<std::string>() : value.dump();
        } else if (key == "Fresco Family") {
            meta.fresco_family = value.is_string() ? value.get<std::string>() : value.dump();
        } else if (key == "Version") {
            meta.version = value.is_string() ? value.get<std::string>() : value.dump();
        } else if (key == "Link") {
            meta.link = value.is_string() ? value.get<std::string>() : value.dump();
        } else if (key == "Weight") {
            if (!value.is_number())
                throw FormatError(json_path.string() + ": Weight must be numeric");
            meta.weight_g = value.get<double>();
            if (*meta.weight_g < 0)
                throw FormatError(json_path.string() + ": Weight must be >= 0");
        } else if (key == "Filename(s)") {
            meta.filenames = string_or_list(value);
        } else if (key == "RGB File(s)") {
            meta.rgb_files = string_or_list(value);
        } else if (key == "Raw 3D File(s)") {
            meta.raw_3d_files = string_or_list(value);
        } else if (key == "Texture") {
            meta.texture_files = string_or_list(value);
        } else if (key == "Geometric Data") {
            if (value.is_object()) {
                if (value.contains("Center of Mass") && value["Center of Mass"].is_array() &&
                    value["Center of Mass"].size() == 3) {
                    std::array<double, 3> c{};
                    for (int k = 0; k < 3; ++k) c[k] = value["Center of Mass"][k].get<double>();
                    meta.center_of_mass = c;
                }
                if (value.contains("Bounding Box") && value["Bounding Box"].is_array() &&
                    value["Bounding Box"].size() == 6) {
                    std::array<double, 6> b{};
                    for (int k = 0; k < 6; ++k) b[k] = value["Bounding Box"][k].get<double>();
                    meta.bounding_box = b;
                }
            }
        } else {
            meta.extra[key] = value.dump();
        }
    }
    return meta;
}

std::map<std::string, FragmentMetadata> load_group_metadata(const fs::path& dir,
                                                            const Puzzle2D& puzzle) {
    std::map<std::string, FragmentMetadata> out;
    for (const Fragment2D& f : puzzle.fragments) {
        const fs::path p = dir / (f.id + ".json");
        if (fs::exists(p)) {
            FragmentMetadata meta = parse_metadata(p);
            if (!meta.id.empty() && meta.id != f.id)
                throw DataError("metadata id '" + meta.id + "' does not match fragment '" +
                                f.id + "'");
            out.emplace(f.id, std::move(meta));
        }
    }
    return out;
}

} // namespace fragsolve
