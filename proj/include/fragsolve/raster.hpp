#pragma once

#include <cstdint>
#include <vector>

#include "fragsolve/common.hpp"

namespace fragsolve {

/// Binary raster, row-major, one byte per pixel (0 or 1).
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0) {}

    bool at(int x, int y) const { return data[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v = true) {
        data[static_cast<size_t>(y) * width + x] = v ? 1 : 0;
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::int64_t popcount() const;
};

/// 8-bit RGBA raster, row-major, 4 bytes per pixel.
struct ImageRGBA {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    ImageRGBA() = default;
    ImageRGBA(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 4, 0) {}

    const std::uint8_t* pixel(int x, int y) const {
        return data.data() + (static_cast<size_t>(y) * width + x) * 4;
    }
    std::uint8_t* pixel(int x, int y) {
        return data.data() + (static_cast<size_t>(y) * width + x) * 4;
    }
    std::uint8_t alpha(int x, int y) const { return pixel(x, y)[3]; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
};

/// A mask rendered into canvas space: `bits(i,j)` lives at canvas pixel
/// (x0 + i, y0 + j). Tight bounds (bx0..bx1, by0..by1, inclusive, canvas
/// coords) cover the set pixels; valid only when area > 0.
struct PlacedMask {
    std::int64_t x0 = 0;
    std::int64_t y0 = 0;
    Mask bits;
    std::int64_t area = 0;
    std::int64_t bx0 = 0, by0 = 0, bx1 = -1, by1 = -1;

    bool canvas_at(std::int64_t cx, std::int64_t cy) const {
        const std::int64_t lx = cx - x0, ly = cy - y0;
        if (lx < 0 || ly < 0 || lx >= bits.width || ly >= bits.height) return false;
        return bits.at(static_cast<int>(lx), static_cast<int>(ly));
    }
};

/// Rigid placement of a mask: rotate by theta (degrees, CCW in a y-up
/// frame) about the raster center ((W-1)/2, (H-1)/2), then translate the
/// center to (tx, ty) in canvas coordinates. Nearest-neighbor sampling;
/// exact pixel copy for theta = 0 and integer-aligned translations.
PlacedMask place_mask(const Mask& mask, double theta_deg, double tx, double ty);

/// Shared pixel count of two placements (0 when bounds are disjoint).
std::int64_t intersection_area(const PlacedMask& a, const PlacedMask& b);

/// True as soon as one shared pixel exists (early-out intersection test).
bool masks_intersect(const PlacedMask& a, const PlacedMask& b);

/// Morphological dilation by a disk of the given radius (px).
PlacedMask dilate_disk(const PlacedMask& placed, int radius);

/// Squared Euclidean distance from each pixel to the nearest zero pixel;
/// everything beyond the raster border counts as zero. Exact
/// (Felzenszwalb-Huttenlocher two-pass).
std::vector<float> squared_distance_to_background(const Mask& mask);

/// Rigid placement of an RGBA raster (same pivot/frame conventions as
/// place_mask): bilinear color, alpha taken from nearest neighbor so
/// coverage matches the placed mask. Composites source-over onto `canvas`
/// whose pixel (0,0) sits at canvas coordinate (origin_x, origin_y).
void composite_rgba(ImageRGBA& canvas, std::int64_t origin_x, std::int64_t origin_y,
                    const ImageRGBA& src, double theta_deg, double tx, double ty);

} // namespace fragsolve
