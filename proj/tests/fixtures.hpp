#pragma once

// Shared synthetic fixtures for the unit and acceptance suites.

#include <cmath>

#include "fragsolve/fragments.hpp"
#include "fragsolve/puzzle_gen.hpp"
#include "fragsolve/solver_greedy.hpp"

namespace fragsolve::fixtures {

inline ImageRGBA textured_image(int w, int h) {
    ImageRGBA im(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto* p = im.pixel(x, y);
            p[0] = static_cast<std::uint8_t>((x * 7 + y * 3) % 256);
            p[1] = static_cast<std::uint8_t>((x * 2 + y * 11) % 256);
            p[2] = static_cast<std::uint8_t>((x + y) % 256);
            p[3] = 255;
        }
    return im;
}

inline ImageRGBA disk_image(int radius) {
    const int s = 2 * radius + 5;
    ImageRGBA im(s, s);
    const double c = (s - 1) / 2.0;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            if ((x - c) * (x - c) + (y - c) * (y - c) <= double(radius) * radius) {
                auto* p = im.pixel(x, y);
                p[0] = static_cast<std::uint8_t>((x * 5 + y) % 256);
                p[1] = static_cast<std::uint8_t>((x + y * 5) % 256);
                p[2] = 120;
                p[3] = 255;
            }
    return im;
}

/// Disk of the given radius cut by a straight line through its center at
/// `angle_deg`; two fragments with exact ground truth. The smooth rim
/// plus one straight cut makes the true mating recoverable from segment
/// endpoints alone.
inline Puzzle2D straight_cut_disk_puzzle(int radius, double angle_deg) {
    const ImageRGBA disk = disk_image(radius);
    const double cc = (disk.width - 1) / 2.0;
    const double ang = angle_deg * kPi / 180.0;
    const double a = std::cos(ang), b = std::sin(ang);
    const double cl = -(a * cc + b * cc);
    auto side_of = [&](int x, int y) { return a * x + b * y + cl >= 0 ? 1 : 0; };

    struct Box {
        int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
    } box[2];
    for (int y = 0; y < disk.height; ++y)
        for (int x = 0; x < disk.width; ++x) {
            if (disk.alpha(x, y) == 0) continue;
            Box& bb = box[side_of(x, y)];
            bb.x0 = std::min(bb.x0, x);
            bb.y0 = std::min(bb.y0, y);
            bb.x1 = std::max(bb.x1, x);
            bb.y1 = std::max(bb.y1, y);
        }

    Puzzle2D puzzle;
    puzzle.group_id = "straight_cut_disk";
    const char* ids[2] = {"a", "b"};
    for (int k = 0; k < 2; ++k) {
        ImageRGBA im(box[k].x1 - box[k].x0 + 1, box[k].y1 - box[k].y0 + 1);
        for (int y = box[k].y0; y <= box[k].y1; ++y)
            for (int x = box[k].x0; x <= box[k].x1; ++x) {
                if (disk.alpha(x, y) == 0 || side_of(x, y) != k) continue;
                const auto* src = disk.pixel(x, y);
                auto* dst = im.pixel(x - box[k].x0, y - box[k].y0);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
                dst[3] = 255;
            }
        puzzle.fragments.push_back(make_fragment(ids[k], std::move(im)));
        puzzle.ground_truth.poses.emplace(
            ids[k], Pose2D(box[k].x0 + (box[k].x1 - box[k].x0) / 2.0,
                           box[k].y0 + (box[k].y1 - box[k].y0) / 2.0, 0.0));
    }
    puzzle.has_ground_truth = true;
    puzzle.canvas_w = disk.width;
    puzzle.canvas_h = disk.height;
    finalize_puzzle(puzzle);
    return puzzle;
}

/// Two fragments with smooth rims that share no straight cut: no segment
/// pair mates, so the greedy solver can only place its seed.
inline Puzzle2D two_disks_puzzle() {
    Puzzle2D puzzle;
    puzzle.group_id = "two_disks";
    puzzle.fragments.push_back(make_fragment("a", disk_image(24)));
    puzzle.fragments.push_back(make_fragment("b", disk_image(30)));
    puzzle.has_ground_truth = true;
    puzzle.ground_truth.poses.emplace("a", Pose2D(26.0, 26.0, 0));
    puzzle.ground_truth.poses.emplace("b", Pose2D(100.0, 32.0, 0));
    puzzle.canvas_w = 160;
    puzzle.canvas_h = 70;
    finalize_puzzle(puzzle);
    return puzzle;
}

/// Greedy settings matched to the straight-cut disk fixture: the rim
/// curvature (1/r = 0.02 at r = 50) stays below the threshold while the
/// two cut corners exceed it.
inline GreedyConfig disk_greedy_config() {
    GreedyConfig config;
    config.dp_epsilon = 2.0;
    config.curvature_threshold = 0.025;
    config.min_segment_len = 15.0;
    return config;
}

/// A deterministic 5-fragment crossing-cuts instance (generation seed
/// picked so the arrangement has five well-sized faces).
inline Puzzle2D five_fragment_puzzle() {
    GenConfig config;
    config.n_cuts = 3;
    config.seed = 306;
    Puzzle2D puzzle = crossing_cuts(textured_image(360, 300), config).puzzle;
    return puzzle;
}

/// Greedy settings for straight-edged polygonal pieces (long edges push
/// corner curvature down, so the split threshold sits lower).
inline GreedyConfig polygon_greedy_config() {
    GreedyConfig config;
    config.dp_epsilon = 2.0;
    config.curvature_threshold = 0.008;
    config.min_segment_len = 15.0;
    return config;
}

} // namespace fragsolve::fixtures
