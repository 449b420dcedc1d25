#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "fragsolve/fragments.hpp"

namespace fragsolve {

/// Orthographic render parameters tying 3D mm coordinates to 2D px.
struct RenderScale {
    double s_img = 2000;  // rendered image side, px
    double s_3d = 0.01;   // model scale
    double s_ort = 2.714; // orthographic scale

    double factor() const; // s_img * s_3d / s_ort
};

/// Component-wise mm -> px conversion by the render factor.
Point2 mm_to_px(Point2 t_mm, const RenderScale& scale);

/// Per-fragment metadata record. Recognized keys map to typed fields;
/// anything else is preserved verbatim in `extra`.
struct FragmentMetadata {
    std::string id;
    std::optional<std::string> acquisition_date;
    std::optional<std::string> artistic_style;
    std::optional<std::string> fresco_family;
    std::optional<std::string> version;
    std::optional<std::string> link;
    std::optional<double> weight_g;
    std::vector<std::string> filenames;
    std::vector<std::string> rgb_files;
    std::vector<std::string> raw_3d_files;
    std::vector<std::string> texture_files;
    std::optional<std::array<double, 3>> center_of_mass;
    std::optional<std::array<double, 6>> bounding_box; // min xyz, max xyz
    std::map<std::string, std::string> extra;          // unrecognized keys, raw JSON
};

FragmentMetadata parse_metadata(const std::filesystem::path& json_path);

struct LoadOptions {
    bool strict = true;      // require the v1 header and exact column layout
    bool flip_theta = false; // negate loaded angles (y-down datasets)
    // Pivot the file's poses assume, in fragment-local raster coords.
    // Poses are converted to the library's raster-center convention on
    // load; unset means the file already uses the center pivot.
    std::optional<Point2> pivot_override;
};

/// Loads a 2D group directory: `<id>.png` fragments, `ground_truth.txt`
/// poses, optional `<id>.json` metadata. A missing GT file yields a
/// loadable puzzle with has_ground_truth = false.
Puzzle2D load_group_2d(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the standard group layout (PNGs + ground_truth.txt).
void save_group_2d(const Puzzle2D& puzzle, const std::filesystem::path& dir);

/// Loads a 3D group directory: `<id>.obj` point clouds plus a 3D-format
/// ground_truth.txt.
Puzzle3D load_group_3d(const std::filesystem::path& dir);

/// Vertex positions from OBJ `v x y z` records (other records ignored).
Fragment3D load_obj_vertices(const std::filesystem::path& path, std::string id = {});

void save_solution(const Solution2D& solution, const std::filesystem::path& path);
void save_solution(const Solution3D& solution, const std::filesystem::path& path);

using SolutionFile = std::variant<Solution2D, Solution3D>;

/// Reads a solution file; the 2D/3D variant is detected from the column
/// count (4 vs 13 tokens per line).
SolutionFile load_solution(const std::filesystem::path& path);

/// Metadata sidecar read for every fragment of a group that has one.
std::map<std::string, FragmentMetadata> load_group_metadata(const std::filesystem::path& dir,
                                                            const Puzzle2D& puzzle);

} // namespace fragsolve
