#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fragsolve/geometry.hpp"
#include "fragsolve/raster.hpp"

namespace fragsolve {

/// Rigid 2D placement: translation in canvas px, rotation in degrees
/// normalized to (-180, 180], CCW in a y-up frame, pivoting about the
/// fragment's raster center.
struct Pose2D {
    double x = 0;
    double y = 0;
    double theta_deg = 0;

    Pose2D() = default;
    Pose2D(double px, double py, double theta) : x(px), y(py), theta_deg(normalize_deg(theta)) {}

    RigidTransform2 transform() const { return {theta_deg, x, y}; }
    static Pose2D from_transform(const RigidTransform2& t) { return {t.tx, t.ty, t.theta_deg}; }
};

/// Raster fragment: RGBA image plus the binary mask derived from its
/// alpha channel (mask pixel set iff alpha > 0).
struct Fragment2D {
    std::string id;
    ImageRGBA rgba;
    Mask mask;
    double px_per_mm = 1.0;

    std::int64_t area_px() const { return mask.popcount(); }
};

/// Builds a fragment from an RGBA raster, deriving and validating the mask.
Fragment2D make_fragment(std::string id, ImageRGBA rgba, double px_per_mm = 1.0);

/// 3D rigid pose: row-major 3x3 rotation (orthonormal, det +1) and mm
/// translation.
struct Pose3D {
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::array<double, 3> translation{0, 0, 0};
};

/// Throws InvalidInput unless R^T R = I and det(R) = 1 to 1e-6.
void validate_rotation(const Pose3D& pose);

struct Fragment3D {
    std::string id;
    std::vector<std::array<double, 3>> points; // mm
    std::vector<std::array<std::uint8_t, 3>> colors; // optional, empty or per-point
};

struct Solution2D {
    std::map<std::string, Pose2D> poses;
    std::set<std::string> unplaced; // flagged by solvers; scored as maximally wrong
};

struct Solution3D {
    std::map<std::string, Pose3D> poses;
    std::set<std::string> unplaced;
};

/// A 2D group: fragments sorted lexicographically by id plus (usually)
/// a ground-truth solution. canvas_w/h describe the assembled extent and
/// bound the scramble space.
struct Puzzle2D {
    std::string group_id;
    std::vector<Fragment2D> fragments;
    Solution2D ground_truth;
    bool has_ground_truth = false;
    int canvas_w = 0;
    int canvas_h = 0;
    double px_per_mm = 1.0;

    const Fragment2D* find(const std::string& id) const;
};

/// Validates puzzle invariants (>= 2 fragments, sorted unique ids, GT
/// covering every fragment when present) and derives the canvas extent
/// from GT placements when not provided.
void finalize_puzzle(Puzzle2D& puzzle);

struct Puzzle3D {
    std::string group_id;
    std::vector<Fragment3D> fragments;
    Solution3D ground_truth;
    bool has_ground_truth = false;

    const Fragment3D* find(const std::string& id) const;
};

/// Closed outer boundary of the largest 8-connected mask component,
/// oriented CCW (y-up frame); vertices are boundary pixel coordinates.
/// Emits a warning via the optional flag when several components exist.
Polyline extract_contour(const Fragment2D& frag, bool* multiple_components = nullptr);

/// Mask pixel count; in mm^2 when `in_mm` (divides by px_per_mm^2).
double fragment_area(const Fragment2D& frag, bool in_mm = false);

/// Occupied-voxel volume of the point cloud at the given voxel pitch.
/// Throws InvalidInput when the cloud has < 4 points or is coplanar.
double fragment_volume_mm3(const Fragment3D& frag, double voxel_mm);

/// Fragment mask placed at a pose (see Pose2D for conventions).
PlacedMask place(const Fragment2D& frag, const Pose2D& pose);

/// Voxel occupancy of a 3D fragment under a pose (keys encode voxel ijk).
std::vector<std::int64_t> voxel_occupancy(const Fragment3D& frag, const Pose3D& pose,
                                          double voxel_mm);

} // namespace fragsolve
