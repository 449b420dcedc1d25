#include "fragsolve/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace fragsolve {

double norm(Point2 p) { return std::hypot(p.x, p.y); }
double distance(Point2 a, Point2 b) { return norm(a - b); }

void validate_polyline(const Polyline& line) {
    if (line.points.size() < 2) throw InvalidInput("polyline needs at least 2 points");
    for (const Point2& p : line.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidInput("polyline has non-finite coordinates");
    }
    const size_t n = line.points.size();
    const size_t last = line.closed ? n : n - 1;
    for (size_t i = 0; i < last; ++i) {
        if (distance(line.points[i], line.points[(i + 1) % n]) <= 0.0)
            throw InvalidInput("polyline has coincident consecutive points");
    }
}

Point2 apply(const RigidTransform2& t, Point2 p) {
    const double a = deg_to_rad(t.theta_deg);
    const double c = std::cos(a), s = std::sin(a);
    return {c * p.x - s * p.y + t.tx, s * p.x + c * p.y + t.ty};
}

RigidTransform2 compose(const RigidTransform2& a, const RigidTransform2& b) {
    const double ar = deg_to_rad(a.theta_deg);
    const double c = std::cos(ar), s = std::sin(ar);
    return {normalize_deg(a.theta_deg + b.theta_deg), c * b.tx - s * b.ty + a.tx,
            s * b.tx + c * b.ty + a.ty};
}

RigidTransform2 invert(const RigidTransform2& t) {
    const double ar = deg_to_rad(-t.theta_deg);
    const double c = std::cos(ar), s = std::sin(ar);
    return {normalize_deg(-t.theta_deg), -(c * t.tx - s * t.ty), -(s * t.tx + c * t.ty)};
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

namespace {

// Iterative DP on an open chain; marks kept[] over [first, last].
void dp_mark(const std::vector<Point2>& pts, double eps, std::vector<char>& kept) {
    std::vector<std::pair<int, int>> stack;
    stack.emplace_back(0, static_cast<int>(pts.size()) - 1);
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        if (j - i < 2) continue;
        double dmax = -1.0;
        int split = -1;
        for (int k = i + 1; k < j; ++k) {
            const double d = point_segment_distance(pts[k], pts[i], pts[j]);
            if (d > dmax) {
                dmax = d;
                split = k;
            }
        }
        if (dmax > eps) {
            kept[split] = 1;
            stack.emplace_back(i, split);
            stack.emplace_back(split, j);
        }
    }
}

} // namespace

Polyline douglas_peucker(const Polyline& line, double epsilon) {
    if (epsilon < 0) throw InvalidInput("douglas_peucker: negative epsilon");
    validate_polyline(line);
    if (epsilon == 0.0) return line;

    if (!line.closed) {
        std::vector<char> kept(line.points.size(), 0);
        kept.front() = 1;
        kept.back() = 1;
        dp_mark(line.points, epsilon, kept);
        Polyline out;
        out.closed = false;
        for (size_t i = 0; i < line.points.size(); ++i)
            if (kept[i]) out.points.push_back(line.points[i]);
        return out;
    }

    // Closed: run on the chain with the start vertex appended, so the
    // wrap-around edge is covered; the start vertex is always kept.
    std::vector<Point2> chain = line.points;
    chain.push_back(line.points.front());
    std::vector<char> kept(chain.size(), 0);
    kept.front() = 1;
    kept.back() = 1;
    dp_mark(chain, epsilon, kept);
    Polyline out;
    out.closed = true;
    for (size_t i = 0; i + 1 < chain.size(); ++i)
        if (kept[i]) out.points.push_back(chain[i]);
    if (out.points.size() < 2) {
        // Everything collapsed onto the start vertex's chain; keep the
        // farthest vertex as well so the result stays a valid polyline.
        size_t far_i = 1;
        double far_d = -1;
        for (size_t i = 1; i < line.points.size(); ++i) {
            const double d = distance(line.points[i], line.points.front());
            if (d > far_d) {
                far_d = d;
                far_i = i;
            }
        }
        out.points = {line.points.front(), line.points[far_i]};
    }
    return out;
}

std::vector<double> discrete_curvature(const Polyline& line) {
    validate_polyline(line);
    const size_t n = line.points.size();
    if (line.closed && n < 3) throw InvalidInput("closed polyline needs >= 3 points");

    std::vector<double> kappa(n, 0.0);
    const size_t begin = line.closed ? 0 : 1;
    const size_t end = line.closed ? n : n - 1;
    for (size_t i = begin; i < end; ++i) {
        const Point2 prev = line.points[(i + n - 1) % n];
        const Point2 curr = line.points[i];
        const Point2 next = line.points[(i + 1) % n];
        const Point2 e1 = curr - prev;
        const Point2 e2 = next - curr;
        const double turn = std::atan2(cross(e1, e2), dot(e1, e2));
        const double mean_len = 0.5 * (norm(e1) + norm(e2));
        kappa[i] = turn / mean_len;
    }
    return kappa;
}

RigidTransform2 procrustes_two_point(Point2 src1, Point2 src2, Point2 dst1, Point2 dst2) {
    const Point2 u = src2 - src1;
    if (norm(u) <= 0.0) throw InvalidInput("procrustes_two_point: coincident source points");
    const Point2 v = dst2 - dst1;
    const double theta = std::atan2(cross(u, v), dot(u, v));
    const double c = std::cos(theta), s = std::sin(theta);
    const Point2 cs = 0.5 * (src1 + src2);
    const Point2 cd = 0.5 * (dst1 + dst2);
    RigidTransform2 t;
    t.theta_deg = normalize_deg(rad_to_deg(theta));
    t.tx = cd.x - (c * cs.x - s * cs.y);
    t.ty = cd.y - (s * cs.x + c * cs.y);
    return t;
}

double spring_energy(const RigidTransform2& t, Point2 src1, Point2 src2, Point2 dst1,
                     Point2 dst2) {
    const Point2 r1 = apply(t, src1) - dst1;
    const Point2 r2 = apply(t, src2) - dst2;
    return dot(r1, r1) + dot(r2, r2);
}

RigidTransform2 procrustes_two_point_iterative(Point2 src1, Point2 src2, Point2 dst1,
                                               Point2 dst2) {
    if (distance(src1, src2) <= 0.0)
        throw InvalidInput("procrustes_two_point_iterative: coincident source points");

    // Coarse angular scan, then gradient descent on (theta, tx, ty).
    double best_theta = 0, best_e = std::numeric_limits<double>::max();
    for (int k = 0; k < 360; ++k) {
        const double th = deg_to_rad(double(k));
        const double c = std::cos(th), s = std::sin(th);
        // Optimal translation for fixed rotation: match centroids.
        const Point2 cs = 0.5 * (src1 + src2), cd = 0.5 * (dst1 + dst2);
        RigidTransform2 t{rad_to_deg(th), cd.x - (c * cs.x - s * cs.y),
                          cd.y - (s * cs.x + c * cs.y)};
        const double e = spring_energy(t, src1, src2, dst1, dst2);
        if (e < best_e) {
            best_e = e;
            best_theta = th;
        }
    }

    double theta = best_theta;
    Point2 cs = 0.5 * (src1 + src2), cd = 0.5 * (dst1 + dst2);
    double tx = cd.x - (std::cos(theta) * cs.x - std::sin(theta) * cs.y);
    double ty = cd.y - (std::sin(theta) * cs.x + std::cos(theta) * cs.y);

    const double scale2 = dot(src1, src1) + dot(src2, src2) + 1.0;
    const double lr_t = 0.2;
    const double lr_r = 0.2 / scale2;
    for (int it = 0; it < 200000; ++it) {
        const double c = std::cos(theta), s = std::sin(theta);
        const Point2 p1{c * src1.x - s * src1.y + tx, s * src1.x + c * src1.y + ty};
        const Point2 p2{c * src2.x - s * src2.y + tx, s * src2.x + c * src2.y + ty};
        const Point2 r1 = p1 - dst1, r2 = p2 - dst2;
        // dR/dtheta applied to the source points.
        const Point2 d1{-s * src1.x - c * src1.y, c * src1.x - s * src1.y};
        const Point2 d2{-s * src2.x - c * src2.y, c * src2.x - s * src2.y};
        const double g_theta = 2.0 * (dot(r1, d1) + dot(r2, d2));
        const double g_tx = 2.0 * (r1.x + r2.x);
        const double g_ty = 2.0 * (r1.y + r2.y);
        theta -= lr_r * g_theta;
        tx -= lr_t * 0.5 * g_tx;
        ty -= lr_t * 0.5 * g_ty;
        if (g_theta * g_theta * lr_r + (g_tx * g_tx + g_ty * g_ty) * lr_t < 1e-26) break;
    }
    return {normalize_deg(rad_to_deg(theta)), tx, ty};
}

std::int64_t raster_intersection_area(const Mask& mask_a, double theta_a, double tx_a,
                                      double ty_a, const Mask& mask_b, double theta_b,
                                      double tx_b, double ty_b) {
    if (mask_a.popcount() == 0 || mask_b.popcount() == 0)
        throw InvalidInput("raster_intersection_area: empty mask");
    const PlacedMask a = place_mask(mask_a, theta_a, tx_a, ty_a);
    const PlacedMask b = place_mask(mask_b, theta_b, tx_b, ty_b);
    return intersection_area(a, b);
}

} // namespace fragsolve
