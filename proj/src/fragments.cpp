#include "fragsolve/fragments.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace fragsolve {

Fragment2D make_fragment(std::string id, ImageRGBA rgba, double px_per_mm) {
    if (id.empty()) throw InvalidInput("fragment id must be non-empty");
    if (px_per_mm <= 0) throw InvalidInput("px_per_mm must be positive");
    Fragment2D f;
    f.id = std::move(id);
    f.mask = Mask(rgba.width, rgba.height);
    std::int64_t n = 0;
    for (int y = 0; y < rgba.height; ++y)
        for (int x = 0; x < rgba.width; ++x)
            if (rgba.alpha(x, y) > 0) {
                f.mask.set(x, y);
                ++n;
            }
    if (n == 0) throw InvalidInput("fragment '" + f.id + "' has an empty mask");
    f.rgba = std::move(rgba);
    f.px_per_mm = px_per_mm;
    return f;
}

void validate_rotation(const Pose3D& pose) {
    const auto& r = pose.rotation;
    // R^T R == I
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double v = 0;
            for (int k = 0; k < 3; ++k) v += r[k * 3 + i] * r[k * 3 + j];
            const double expect = i == j ? 1.0 : 0.0;
            if (std::abs(v - expect) > 1e-6)
                throw InvalidInput("rotation matrix is not orthonormal");
        }
    }
    const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                       r[2] * (r[3] * r[7] - r[4] * r[6]);
    if (std::abs(det - 1.0) > 1e-6) throw InvalidInput("rotation matrix determinant is not +1");
}

const Fragment2D* Puzzle2D::find(const std::string& id) const {
    for (const Fragment2D& f : fragments)
        if (f.id == id) return &f;
    return nullptr;
}

const Fragment3D* Puzzle3D::find(const std::string& id) const {
    for (const Fragment3D& f : fragments)
        if (f.id == id) return &f;
    return nullptr;
}

void finalize_puzzle(Puzzle2D& puzzle) {
    if (puzzle.fragments.size() < 2)
        throw InvalidInput("puzzle '" + puzzle.group_id + "' needs at least 2 fragments");
    std::sort(puzzle.fragments.begin(), puzzle.fragments.end(),
              [](const Fragment2D& a, const Fragment2D& b) { return a.id < b.id; });
    for (size_t i = 1; i < puzzle.fragments.size(); ++i)
        if (puzzle.fragments[i].id == puzzle.fragments[i - 1].id)
            throw InvalidInput("duplicate fragment id '" + puzzle.fragments[i].id + "'");

    if (puzzle.has_ground_truth) {
        if (puzzle.ground_truth.poses.size() != puzzle.fragments.size())
            throw InvalidInput("ground truth does not cover the fragment set exactly");
        for (const Fragment2D& f : puzzle.fragments)
            if (puzzle.ground_truth.poses.find(f.id) == puzzle.ground_truth.poses.end())
                throw InvalidInput("ground truth missing pose for fragment '" + f.id + "'");
    }

    if (puzzle.canvas_w <= 0 || puzzle.canvas_h <= 0) {
        // Conservative extent from pose centers plus raster half-diagonals.
        double maxx = 1, maxy = 1;
        if (puzzle.has_ground_truth) {
            for (const Fragment2D& f : puzzle.fragments) {
                const Pose2D& p = puzzle.ground_truth.poses.at(f.id);
                const double half =
                    0.5 * std::hypot(double(f.mask.width), double(f.mask.height));
                maxx = std::max(maxx, p.x + half);
                maxy = std::max(maxy, p.y + half);
            }
        } else {
            for (const Fragment2D& f : puzzle.fragments) {
                maxx = std::max(maxx, double(f.mask.width) * puzzle.fragments.size());
                maxy = std::max(maxy, double(f.mask.height) * puzzle.fragments.size());
            }
        }
        puzzle.canvas_w = static_cast<int>(std::ceil(maxx));
        puzzle.canvas_h = static_cast<int>(std::ceil(maxy));
    }
}

namespace {

// Largest 8-connected component of the mask; returns pixel count and
// fills `component` (same dims as mask).
std::int64_t largest_component(const Mask& mask, Mask& component, bool* multiple) {
    Mask seen(mask.width, mask.height);
    std::int64_t best_size = 0;
    std::vector<std::pair<int, int>> best_pixels, pixels;
    int components = 0;
    for (int sy = 0; sy < mask.height; ++sy) {
        for (int sx = 0; sx < mask.width; ++sx) {
            if (!mask.at(sx, sy) || seen.at(sx, sy)) continue;
            ++components;
            pixels.clear();
            std::queue<std::pair<int, int>> q;
            q.emplace(sx, sy);
            seen.set(sx, sy);
            while (!q.empty()) {
                const auto [x, y] = q.front();
                q.pop();
                pixels.emplace_back(x, y);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if ((dx | dy) == 0 || !mask.in_bounds(nx, ny)) continue;
                        if (!mask.at(nx, ny) || seen.at(nx, ny)) continue;
                        seen.set(nx, ny);
                        q.emplace(nx, ny);
                    }
            }
            if (static_cast<std::int64_t>(pixels.size()) > best_size) {
                best_size = pixels.size();
                best_pixels = pixels;
            }
        }
    }
    if (multiple) *multiple = components > 1;
    component = Mask(mask.width, mask.height);
    for (const auto& [x, y] : best_pixels) component.set(x, y);
    return best_size;
}

double shoelace(const std::vector<Point2>& pts) {
    double a = 0;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        const Point2& p = pts[i];
        const Point2& q = pts[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

} // namespace

Polyline extract_contour(const Fragment2D& frag, bool* multiple_components) {
    Mask comp;
    const std::int64_t size = largest_component(frag.mask, comp, multiple_components);
    if (size == 0) throw InvalidInput("extract_contour: empty mask");
    if (size == 1) throw InvalidInput("extract_contour: single-pixel component is degenerate");

    // Start at the first pixel in scan order; its west neighbor is
    // guaranteed background.
    int sx = -1, sy = -1;
    for (int y = 0; y < comp.height && sx < 0; ++y)
        for (int x = 0; x < comp.width; ++x)
            if (comp.at(x, y)) {
                sx = x;
                sy = y;
                break;
            }

    // Moore neighbor order, clockwise in raster view starting at west.
    static const int ox[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    static const int oy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    auto neighbor_index = [&](int cx2, int cy2, int bx, int by) {
        for (int k = 0; k < 8; ++k)
            if (cx2 + ox[k] == bx && cy2 + oy[k] == by) return k;
        return 0;
    };
    auto is_set = [&](int x, int y) { return comp.in_bounds(x, y) && comp.at(x, y); };

    std::vector<Point2> pts;
    int cx = sx, cy = sy;
    int bx = sx - 1, by = sy; // backtrack (background by construction)
    const int b0x = bx, b0y = by;
    pts.push_back({double(cx), double(cy)});
    const std::int64_t max_steps = 8 * size + 8;
    for (std::int64_t step = 0; step < max_steps; ++step) {
        const int from = neighbor_index(cx, cy, bx, by);
        int found = -1;
        int prev_x = bx, prev_y = by;
        for (int k = 1; k <= 8; ++k) {
            const int idx = (from + k) % 8;
            const int nx = cx + ox[idx], ny = cy + oy[idx];
            if (is_set(nx, ny)) {
                found = idx;
                break;
            }
            prev_x = nx;
            prev_y = ny;
        }
        if (found < 0) break; // isolated pixel; unreachable for size >= 2
        bx = prev_x;
        by = prev_y;
        cx = cx + ox[found];
        cy = cy + oy[found];
        if (cx == sx && cy == sy && bx == b0x && by == b0y) break; // full loop
        pts.push_back({double(cx), double(cy)});
    }

    // Drop a trailing revisit of the start vertex, if any.
    while (pts.size() > 2 && pts.back().x == pts.front().x && pts.back().y == pts.front().y)
        pts.pop_back();
    if (pts.size() < 2) throw InvalidInput("extract_contour: degenerate contour");

    Polyline contour;
    contour.closed = true;
    contour.points = std::move(pts);
    // CCW in the y-up frame = negative shoelace in raster coordinates.
    if (shoelace(contour.points) > 0)
        std::reverse(contour.points.begin(), contour.points.end());
    return contour;
}

double fragment_area(const Fragment2D& frag, bool in_mm) {
    const double px = static_cast<double>(frag.area_px());
    return in_mm ? px / (frag.px_per_mm * frag.px_per_mm) : px;
}

namespace {

bool is_coplanar(const std::vector<std::array<double, 3>>& pts) {
    if (pts.size() < 4) return true;
    const auto& p0 = pts[0];
    // Find two independent edge vectors, then test all points against
    // the plane they span.
    std::array<double, 3> u{}, v{};
    size_t iu = 0;
    for (size_t i = 1; i < pts.size(); ++i) {
        u = {pts[i][0] - p0[0], pts[i][1] - p0[1], pts[i][2] - p0[2]};
        const double n2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        if (n2 > 1e-18) {
            iu = i;
            break;
        }
    }
    if (iu == 0) return true;
    std::array<double, 3> nrm{};
    bool have_normal = false;
    for (size_t i = iu + 1; i < pts.size(); ++i) {
        v = {pts[i][0] - p0[0], pts[i][1] - p0[1], pts[i][2] - p0[2]};
        nrm = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
        const double n2 = nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2];
        if (n2 > 1e-12) {
            have_normal = true;
            break;
        }
    }
    if (!have_normal) return true; // collinear
    const double nn = std::sqrt(nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]);
    for (const auto& p : pts) {
        const double d = ((p[0] - p0[0]) * nrm[0] + (p[1] - p0[1]) * nrm[1] +
                          (p[2] - p0[2]) * nrm[2]) /
                         nn;
        if (std::abs(d) > 1e-9) return false;
    }
    return true;
}

} // namespace

std::vector<std::int64_t> voxel_occupancy(const Fragment3D& frag, const Pose3D& pose,
                                          double voxel_mm) {
    if (voxel_mm <= 0) throw InvalidInput("voxel_mm must be positive");
    const auto& r = pose.rotation;
    const auto& t = pose.translation;
    std::vector<std::int64_t> keys;
    keys.reserve(frag.points.size());
    constexpr std::int64_t K = 1 << 20;
    for (const auto& p : frag.points) {
        const double wx = r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + t[0];
        const double wy = r[3] * p[0] + r[4] * p[1] + r[5] * p[2] + t[1];
        const double wz = r[6] * p[0] + r[7] * p[1] + r[8] * p[2] + t[2];
        const std::int64_t ix = static_cast<std::int64_t>(std::floor(wx / voxel_mm)) + K;
        const std::int64_t iy = static_cast<std::int64_t>(std::floor(wy / voxel_mm)) + K;
        const std::int64_t iz = static_cast<std::int64_t>(std::floor(wz / voxel_mm)) + K;
        keys.push_back((ix << 42) | (iy << 21) | iz);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

double fragment_volume_mm3(const Fragment3D& frag, double voxel_mm) {
    if (frag.points.size() < 4 || is_coplanar(frag.points))
        throw InvalidInput("fragment '" + frag.id +
                           "' is degenerate (needs >= 4 non-coplanar points)");
    const auto keys = voxel_occupancy(frag, Pose3D{}, voxel_mm);
    return static_cast<double>(keys.size()) * voxel_mm * voxel_mm * voxel_mm;
}

PlacedMask place(const Fragment2D& frag, const Pose2D& pose) {
    return place_mask(frag.mask, pose.theta_deg, pose.x, pose.y);
}

} // namespace fragsolve
