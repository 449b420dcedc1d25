#include "fragsolve/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fragsolve {

std::int64_t Mask::popcount() const {
    std::int64_t n = 0;
    for (std::uint8_t v : data) n += v != 0;
    return n;
}

namespace {

struct Corner {
    double x, y;
};

// Snap near-cardinal sines/cosines so 0/90/180 degree placements are
// exact lattice maps instead of being perturbed by 1e-16 residue.
double snap_trig(double v) {
    if (std::abs(v) < 1e-12) return 0.0;
    if (std::abs(v - 1.0) < 1e-12) return 1.0;
    if (std::abs(v + 1.0) < 1e-12) return -1.0;
    return v;
}

} // namespace

PlacedMask place_mask(const Mask& mask, double theta_deg, double tx, double ty) {
    if (mask.width <= 0 || mask.height <= 0) throw InvalidInput("place_mask: empty mask");

    const double theta = deg_to_rad(normalize_deg(theta_deg));
    const double c = snap_trig(std::cos(theta)), s = snap_trig(std::sin(theta));
    const double cx = (mask.width - 1) / 2.0;
    const double cy = (mask.height - 1) / 2.0;

    // Canvas-space footprint from the four raster corners.
    const Corner corners[4] = {{0, 0},
                               {double(mask.width - 1), 0},
                               {0, double(mask.height - 1)},
                               {double(mask.width - 1), double(mask.height - 1)}};
    double minx = std::numeric_limits<double>::max(), maxx = -minx;
    double miny = minx, maxy = -minx;
    for (const Corner& p : corners) {
        const double dx = p.x - cx, dy = p.y - cy;
        const double wx = c * dx - s * dy + tx;
        const double wy = s * dx + c * dy + ty;
        minx = std::min(minx, wx);
        maxx = std::max(maxx, wx);
        miny = std::min(miny, wy);
        maxy = std::max(maxy, wy);
    }

    PlacedMask out;
    out.x0 = static_cast<std::int64_t>(std::floor(minx - 0.5));
    out.y0 = static_cast<std::int64_t>(std::floor(miny - 0.5));
    const std::int64_t x1 = static_cast<std::int64_t>(std::ceil(maxx + 0.5));
    const std::int64_t y1 = static_cast<std::int64_t>(std::ceil(maxy + 0.5));
    const int w = static_cast<int>(x1 - out.x0 + 1);
    const int h = static_cast<int>(y1 - out.y0 + 1);
    out.bits = Mask(w, h);

    std::int64_t bx0 = w, by0 = h, bx1 = -1, by1 = -1;
    std::int64_t area = 0;
    for (int j = 0; j < h; ++j) {
        const double wy = double(out.y0 + j) - ty;
        std::uint8_t* row = out.bits.data.data() + static_cast<size_t>(j) * w;
        for (int i = 0; i < w; ++i) {
            const double wx = double(out.x0 + i) - tx;
            // Inverse rotation back into raster coordinates.
            const double lx = c * wx + s * wy + cx;
            const double ly = -s * wx + c * wy + cy;
            // floor(v + 0.5): half-pixel samples resolve consistently,
            // so integer-aligned poses stay exact pixel copies.
            const int mi = static_cast<int>(std::floor(lx + 0.5));
            const int mj = static_cast<int>(std::floor(ly + 0.5));
            if (mi < 0 || mj < 0 || mi >= mask.width || mj >= mask.height) continue;
            if (!mask.at(mi, mj)) continue;
            row[i] = 1;
            ++area;
            bx0 = std::min<std::int64_t>(bx0, i);
            bx1 = std::max<std::int64_t>(bx1, i);
            by0 = std::min<std::int64_t>(by0, j);
            by1 = std::max<std::int64_t>(by1, j);
        }
    }
    out.area = area;
    if (area > 0) {
        out.bx0 = out.x0 + bx0;
        out.bx1 = out.x0 + bx1;
        out.by0 = out.y0 + by0;
        out.by1 = out.y0 + by1;
    }
    return out;
}

std::int64_t intersection_area(const PlacedMask& a, const PlacedMask& b) {
    if (a.area == 0 || b.area == 0) return 0;
    const std::int64_t ox0 = std::max(a.bx0, b.bx0);
    const std::int64_t oy0 = std::max(a.by0, b.by0);
    const std::int64_t ox1 = std::min(a.bx1, b.bx1);
    const std::int64_t oy1 = std::min(a.by1, b.by1);
    if (ox0 > ox1 || oy0 > oy1) return 0;

    std::int64_t n = 0;
    for (std::int64_t cy = oy0; cy <= oy1; ++cy) {
        const std::uint8_t* ra =
            a.bits.data.data() + static_cast<size_t>(cy - a.y0) * a.bits.width + (ox0 - a.x0);
        const std::uint8_t* rb =
            b.bits.data.data() + static_cast<size_t>(cy - b.y0) * b.bits.width + (ox0 - b.x0);
        for (std::int64_t cx = ox0; cx <= ox1; ++cx, ++ra, ++rb) {
            n += (*ra & *rb);
        }
    }
    return n;
}

bool masks_intersect(const PlacedMask& a, const PlacedMask& b) {
    if (a.area == 0 || b.area == 0) return false;
    const std::int64_t ox0 = std::max(a.bx0, b.bx0);
    const std::int64_t oy0 = std::max(a.by0, b.by0);
    const std::int64_t ox1 = std::min(a.bx1, b.bx1);
    const std::int64_t oy1 = std::min(a.by1, b.by1);
    if (ox0 > ox1 || oy0 > oy1) return false;
    for (std::int64_t cy = oy0; cy <= oy1; ++cy) {
        const std::uint8_t* ra =
            a.bits.data.data() + static_cast<size_t>(cy - a.y0) * a.bits.width + (ox0 - a.x0);
        const std::uint8_t* rb =
            b.bits.data.data() + static_cast<size_t>(cy - b.y0) * b.bits.width + (ox0 - b.x0);
        for (std::int64_t cx = ox0; cx <= ox1; ++cx, ++ra, ++rb) {
            if (*ra & *rb) return true;
        }
    }
    return false;
}

PlacedMask dilate_disk(const PlacedMask& placed, int radius) {
    if (radius < 0) throw InvalidInput("dilate_disk: negative radius");
    if (radius == 0 || placed.area == 0) return placed;

    // Disk offsets once; stamped only around boundary pixels.
    std::vector<std::pair<int, int>> disk;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) disk.emplace_back(dx, dy);

    const Mask& src = placed.bits;
    PlacedMask out;
    out.x0 = placed.x0 - radius;
    out.y0 = placed.y0 - radius;
    out.bits = Mask(src.width + 2 * radius, src.height + 2 * radius);

    for (int j = 0; j < src.height; ++j) {
        for (int i = 0; i < src.width; ++i) {
            if (!src.at(i, j)) continue;
            const bool boundary = i == 0 || j == 0 || i == src.width - 1 ||
                                  j == src.height - 1 || !src.at(i - 1, j) ||
                                  !src.at(i + 1, j) || !src.at(i, j - 1) || !src.at(i, j + 1);
            if (!boundary) {
                out.bits.set(i + radius, j + radius);
                continue;
            }
            for (const auto& [dx, dy] : disk) {
                out.bits.set(i + radius + dx, j + radius + dy);
            }
        }
    }

    std::int64_t area = 0;
    std::int64_t bx0 = out.bits.width, by0 = out.bits.height, bx1 = -1, by1 = -1;
    for (int j = 0; j < out.bits.height; ++j)
        for (int i = 0; i < out.bits.width; ++i)
            if (out.bits.at(i, j)) {
                ++area;
                bx0 = std::min<std::int64_t>(bx0, i);
                bx1 = std::max<std::int64_t>(bx1, i);
                by0 = std::min<std::int64_t>(by0, j);
                by1 = std::max<std::int64_t>(by1, j);
            }
    out.area = area;
    out.bx0 = out.x0 + bx0;
    out.bx1 = out.x0 + bx1;
    out.by0 = out.y0 + by0;
    out.by1 = out.y0 + by1;
    return out;
}

namespace {

// 1D squared-distance transform (lower envelope of parabolas).
void edt_1d(const float* f, float* d, int n, int* v, float* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<float>::infinity();
    z[1] = std::numeric_limits<float>::infinity();
    for (int q = 1; q < n; ++q) {
        float s;
        while (true) {
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0f * q - 2.0f * v[k]);
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<float>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const float dq = float(q - v[k]);
        d[q] = dq * dq + f[v[k]];
    }
}

} // namespace

std::vector<float> squared_distance_to_background(const Mask& mask) {
    // Pad by one pixel so the area beyond the raster counts as background.
    const int w = mask.width + 2, h = mask.height + 2;
    const float INF = 1e20f;
    std::vector<float> grid(static_cast<size_t>(w) * h, 0.0f);
    for (int j = 0; j < mask.height; ++j)
        for (int i = 0; i < mask.width; ++i)
            if (mask.at(i, j)) grid[static_cast<size_t>(j + 1) * w + (i + 1)] = INF;

    std::vector<float> tmp(std::max(w, h)), out1(std::max(w, h));
    std::vector<int> v(std::max(w, h));
    std::vector<float> z(std::max(w, h) + 1);

    // Columns.
    for (int i = 0; i < w; ++i) {
        for (int j = 0; j < h; ++j) tmp[j] = grid[static_cast<size_t>(j) * w + i];
        edt_1d(tmp.data(), out1.data(), h, v.data(), z.data());
        for (int j = 0; j < h; ++j) grid[static_cast<size_t>(j) * w + i] = out1[j];
    }
    // Rows.
    for (int j = 0; j < h; ++j) {
        float* row = grid.data() + static_cast<size_t>(j) * w;
        edt_1d(row, out1.data(), w, v.data(), z.data());
        std::copy(out1.begin(), out1.begin() + w, row);
    }

    std::vector<float> res(static_cast<size_t>(mask.width) * mask.height);
    for (int j = 0; j < mask.height; ++j)
        for (int i = 0; i < mask.width; ++i)
            res[static_cast<size_t>(j) * mask.width + i] =
                grid[static_cast<size_t>(j + 1) * w + (i + 1)];
    return res;
}

void composite_rgba(ImageRGBA& canvas, std::int64_t origin_x, std::int64_t origin_y,
                    const ImageRGBA& src, double theta_deg, double tx, double ty) {
    if (src.width <= 0 || src.height <= 0) return;
    const double theta = deg_to_rad(normalize_deg(theta_deg));
    const double c = snap_trig(std::cos(theta)), s = snap_trig(std::sin(theta));
    const double cx = (src.width - 1) / 2.0;
    const double cy = (src.height - 1) / 2.0;

    const Corner corners[4] = {{0, 0},
                               {double(src.width - 1), 0},
                               {0, double(src.height - 1)},
                               {double(src.width - 1), double(src.height - 1)}};
    double minx = std::numeric_limits<double>::max(), maxx = -minx;
    double miny = minx, maxy = -minx;
    for (const Corner& p : corners) {
        const double dx = p.x - cx, dy = p.y - cy;
        minx = std::min(minx, c * dx - s * dy + tx);
        maxx = std::max(maxx, c * dx - s * dy + tx);
        miny = std::min(miny, s * dx + c * dy + ty);
        maxy = std::max(maxy, s * dx + c * dy + ty);
    }

    const std::int64_t cx0 = std::max<std::int64_t>(
        origin_x, static_cast<std::int64_t>(std::floor(minx - 0.5)));
    const std::int64_t cy0 = std::max<std::int64_t>(
        origin_y, static_cast<std::int64_t>(std::floor(miny - 0.5)));
    const std::int64_t cx1 = std::min<std::int64_t>(
        origin_x + canvas.width - 1, static_cast<std::int64_t>(std::ceil(maxx + 0.5)));
    const std::int64_t cy1 = std::min<std::int64_t>(
        origin_y + canvas.height - 1, static_cast<std::int64_t>(std::ceil(maxy + 0.5)));

    for (std::int64_t gy = cy0; gy <= cy1; ++gy) {
        for (std::int64_t gx = cx0; gx <= cx1; ++gx) {
            const double wx = double(gx) - tx;
            const double wy = double(gy) - ty;
            const double lx = c * wx + s * wy + cx;
            const double ly = -s * wx + c * wy + cy;
            const int ni = static_cast<int>(std::floor(lx + 0.5));
            const int nj = static_cast<int>(std::floor(ly + 0.5));
            if (!src.in_bounds(ni, nj) || src.alpha(ni, nj) == 0) continue;

            // Bilinear color from the four surrounding texels.
            const double fx = std::clamp(lx, 0.0, double(src.width - 1));
            const double fy = std::clamp(ly, 0.0, double(src.height - 1));
            const int x0i = static_cast<int>(std::floor(fx));
            const int y0i = static_cast<int>(std::floor(fy));
            const int x1i = std::min(x0i + 1, src.width - 1);
            const int y1i = std::min(y0i + 1, src.height - 1);
            const double ax = fx - x0i, ay = fy - y0i;

            double rgb[3] = {0, 0, 0};
            for (int ch = 0; ch < 3; ++ch) {
                const double v00 = src.pixel(x0i, y0i)[ch], v10 = src.pixel(x1i, y0i)[ch];
                const double v01 = src.pixel(x0i, y1i)[ch], v11 = src.pixel(x1i, y1i)[ch];
                rgb[ch] = (v00 * (1 - ax) + v10 * ax) * (1 - ay) +
                          (v01 * (1 - ax) + v11 * ax) * ay;
            }
            std::uint8_t* dst = canvas.pixel(static_cast<int>(gx - origin_x),
                                             static_cast<int>(gy - origin_y));
            dst[0] = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[0], 0.0, 255.0)));
            dst[1] = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[1], 0.0, 255.0)));
            dst[2] = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[2], 0.0, 255.0)));
            dst[3] = 255;
        }
    }
}

} // namespace fragsolve
