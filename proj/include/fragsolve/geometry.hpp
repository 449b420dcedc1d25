#pragma once

#include <vector>

#include "fragsolve/common.hpp"
#include "fragsolve/raster.hpp"

namespace fragsolve {

struct Point2 {
    double x = 0;
    double y = 0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 p);
double distance(Point2 a, Point2 b);

/// Ordered vertex chain. For closed polylines the first vertex is not
/// repeated at the end; closure is implicit.
struct Polyline {
    std::vector<Point2> points;
    bool closed = false;
};

/// Validates the Polyline invariants (>= 2 points, consecutive vertices
/// distinct, finite coordinates); throws InvalidInput on violation.
void validate_polyline(const Polyline& line);

/// Rotation (degrees, CCW in a y-up frame) followed by translation.
struct RigidTransform2 {
    double theta_deg = 0;
    double tx = 0;
    double ty = 0;

    static RigidTransform2 identity() { return {}; }
};

Point2 apply(const RigidTransform2& t, Point2 p);
/// compose(a, b) applies b first, then a.
RigidTransform2 compose(const RigidTransform2& a, const RigidTransform2& b);
RigidTransform2 invert(const RigidTransform2& t);

/// Polyline simplification. The result is a vertex subsequence of the
/// input (keeping both endpoints of open lines); every dropped vertex
/// lies within epsilon of the simplified chain. epsilon = 0 returns the
/// input unchanged.
Polyline douglas_peucker(const Polyline& line, double epsilon);

/// Signed per-vertex curvature: turning angle divided by the mean of the
/// two adjacent edge lengths. Open polylines get 0 at the endpoints;
/// closed ones wrap. Requires >= 3 vertices when closed.
std::vector<double> discrete_curvature(const Polyline& line);

/// Minimum distance from p to the segment [a, b].
double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// Least-squares rigid transform mapping {src1, src2} onto {dst1, dst2}
/// (no scaling). Closed form; equals the minimizer of the two-spring
/// endpoint energy. Throws InvalidInput when src1 == src2.
RigidTransform2 procrustes_two_point(Point2 src1, Point2 src2, Point2 dst1, Point2 dst2);

/// Two-spring energy at a candidate transform (for cross-validation).
double spring_energy(const RigidTransform2& t, Point2 src1, Point2 src2, Point2 dst1,
                     Point2 dst2);

/// Iterative relaxation of the spring energy (gradient descent with a
/// coarse angular init). Kept as an independent route for validating the
/// closed form; converges to < 1e-9 gradient norm on sane inputs.
RigidTransform2 procrustes_two_point_iterative(Point2 src1, Point2 src2, Point2 dst1,
                                               Point2 dst2);

/// Pixels covered by both placed masks (canvas auto-sized to fit).
std::int64_t raster_intersection_area(const Mask& mask_a, double theta_a, double tx_a,
                                      double ty_a, const Mask& mask_b, double theta_b,
                                      double tx_b, double ty_b);

} // namespace fragsolve
