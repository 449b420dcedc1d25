#pragma once

#include <string>
#include <vector>

#include "fragsolve/fragments.hpp"

namespace fragsolve {

struct GenConfig {
    int n_cuts = 4;
    int erosion_px = 0;
    double erosion_jitter = 0.0; // in [0, 1]
    double drop_fraction = 0.0;  // in [0, 1)
    std::uint64_t seed = 0;
};

void validate_gen_config(const GenConfig& config);

/// One cut chord as the full line a*x + b*y + c = 0 (normalized normal).
struct CutLine {
    double a, b, c;
    double eval(double x, double y) const { return a * x + b * y + c; }
};

struct CrossingCutsResult {
    Puzzle2D puzzle;
    std::vector<CutLine> cuts;
};

/// Fragments the image by n_cuts random chords (two independent uniform
/// perimeter points each). Every pixel goes to exactly one arrangement
/// face (value >= 0 counts as the positive side of a cut), so pre-erosion
/// fragment areas sum to the image area exactly. Ground-truth poses put
/// each fragment at its source location with theta = 0.
CrossingCutsResult crossing_cuts(const ImageRGBA& image, const GenConfig& config);

/// Same partition with caller-supplied cut lines (scripted fixtures).
Puzzle2D cut_with_lines(const ImageRGBA& image, const std::vector<CutLine>& cuts);

struct ErodeResult {
    Puzzle2D puzzle;
    std::vector<std::string> vanished; // fragments dropped entirely
};

/// Boundary wear: each mask pixel survives iff its Euclidean depth
/// exceeds a smoothed per-pixel noise field in
/// [erosion_px*(1-jitter), erosion_px]. Poses are unchanged; every eroded
/// mask is a subset of the original.
ErodeResult erode_fragments(const Puzzle2D& puzzle, const GenConfig& config);

/// Uniform random poses over the canvas box, theta in (-180, 180].
Solution2D scramble(const Puzzle2D& puzzle, std::uint64_t seed);

struct GenerateResult {
    Puzzle2D puzzle;
    std::vector<CutLine> cuts;
    std::vector<std::string> vanished;
    int attempts = 1;
};

/// Full pipeline: crossing_cuts -> drop_fraction removal -> erosion.
/// Retries with a derived seed (up to 10 times) when fewer than 2
/// fragments survive.
GenerateResult generate_puzzle(const ImageRGBA& image, const GenConfig& config,
                               const std::string& group_id);

} // namespace fragsolve
