#include "fragsolve/puzzle_gen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace fragsolve {

void validate_gen_config(const GenConfig& config) {
    if (config.n_cuts < 1) throw InvalidInput("n_cuts must be >= 1");
    if (config.erosion_px < 0) throw InvalidInput("erosion_px must be >= 0");
    if (config.erosion_jitter < 0 || config.erosion_jitter > 1)
        throw InvalidInput("erosion_jitter must be in [0, 1]");
    if (config.drop_fraction < 0 || config.drop_fraction >= 1)
        throw InvalidInput("drop_fraction must be in [0, 1)");
}

namespace {

// Uniform point on the rectangle perimeter [0,w] x [0,h].
Point2 perimeter_point(Rng& rng, double w, double h) {
    const double total = 2 * (w + h);
    double t = rng.uniform(0.0, total);
    if (t < w) return {t, 0};
    t -= w;
    if (t < h) return {w, t};
    t -= h;
    if (t < w) return {w - t, h};
    t -= w;
    return {0, h - t};
}

CutLine chord_line(Rng& rng, double w, double h) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Point2 p = perimeter_point(rng, w, h);
        const Point2 q = perimeter_point(rng, w, h);
        const double dx = q.x - p.x, dy = q.y - p.y;
        const double len = std::hypot(dx, dy);
        if (len < 1.0) continue; // near-coincident endpoints; resample
        // Normal form with unit normal.
        const double a = -dy / len, b = dx / len;
        return {a, b, -(a * p.x + b * p.y)};
    }
    throw DataError("chord sampling failed to produce a usable cut");
}

} // namespace

Puzzle2D cut_with_lines(const ImageRGBA& image, const std::vector<CutLine>& cuts) {
    if (image.width < 64 || image.height < 64)
        throw InvalidInput("source image must be at least 64x64 px");
    if (cuts.empty() || cuts.size() > 63)
        throw InvalidInput("need between 1 and 63 cut lines");

    // Pixel centers -> face keys (one sign bit per cut; value >= 0 is the
    // positive side, the deterministic tie-break for pixels on a cut).
    const int w = image.width, h = image.height;
    std::vector<std::uint64_t> key(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint64_t k = 0;
            for (size_t c = 0; c < cuts.size(); ++c)
                if (cuts[c].eval(x, y) >= 0) k |= (1ULL << c);
            key[static_cast<size_t>(y) * w + x] = k;
        }
    }

    struct FaceInfo {
        int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
        std::int64_t count = 0;
        std::int64_t first_pixel = 1LL << 60;
    };
    std::map<std::uint64_t, FaceInfo> faces;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            FaceInfo& f = faces[key[static_cast<size_t>(y) * w + x]];
            f.x0 = std::min(f.x0, x);
            f.y0 = std::min(f.y0, y);
            f.x1 = std::max(f.x1, x);
            f.y1 = std::max(f.y1, y);
            ++f.count;
            f.first_pixel = std::min<std::int64_t>(f.first_pixel,
                                                   static_cast<std::int64_t>(y) * w + x);
        }
    }
    if (faces.size() < 2)
        throw DataError("cut arrangement produced fewer than 2 faces");

    // Stable ids by first pixel in scan order.
    std::vector<std::pair<std::int64_t, std::uint64_t>> order;
    for (const auto& [k, f] : faces) order.emplace_back(f.first_pixel, k);
    std::sort(order.begin(), order.end());

    const int digits = faces.size() > 100 ? 3 : 2;
    Puzzle2D puzzle;

    int index = 0;
    for (const auto& [first_pixel, k] : order) {
        const FaceInfo& f = faces.at(k);
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "f%0*d", digits, index++);

        const int fw = f.x1 - f.x0 + 1, fh = f.y1 - f.y0 + 1;
        ImageRGBA rgba(fw, fh);
        for (int y = f.y0; y <= f.y1; ++y) {
            for (int x = f.x0; x <= f.x1; ++x) {
                if (key[static_cast<size_t>(y) * w + x] != k) continue;
                const std::uint8_t* src = image.pixel(x, y);
                std::uint8_t* dst = rgba.pixel(x - f.x0, y - f.y0);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
                dst[3] = 255;
            }
        }
        puzzle.fragments.push_back(make_fragment(idbuf, std::move(rgba)));
        // Raster center maps back to its source location; theta = 0.
        const double cx = f.x0 + (fw - 1) / 2.0;
        const double cy = f.y0 + (fh - 1) / 2.0;
        puzzle.ground_truth.poses.emplace(idbuf, Pose2D(cx, cy, 0.0));
    }
    puzzle.has_ground_truth = true;
    puzzle.canvas_w = w;
    puzzle.canvas_h = h;
    finalize_puzzle(puzzle);
    return puzzle;
}

CrossingCutsResult crossing_cuts(const ImageRGBA& image, const GenConfig& config) {
    validate_gen_config(config);
    if (config.n_cuts > 63) throw InvalidInput("n_cuts must be <= 63");
    Rng rng(config.seed);
    CrossingCutsResult result;
    for (int k = 0; k < config.n_cuts; ++k)
        result.cuts.push_back(chord_line(rng, image.width, image.height));
    result.puzzle = cut_with_lines(image, result.cuts);
    return result;
}

ErodeResult erode_fragments(const Puzzle2D& puzzle, const GenConfig& config) {
    if (config.erosion_px < 0) throw InvalidInput("erosion_px must be >= 0");
    ErodeResult result;
    result.puzzle = puzzle;
    if (config.erosion_px == 0) return result;

    const double hi = static_cast<double>(config.erosion_px);
    const double lo = hi * (1.0 - config.erosion_jitter);
    Rng rng(config.seed ^ 0xE05109ULL);

    std::vector<Fragment2D> kept;
    for (const Fragment2D& frag : result.puzzle.fragments) {
        const Mask& mask = frag.mask;
        const int w = mask.width, h = mask.height;
        const auto dist2 = squared_distance_to_background(mask);

        // Per-pixel uniform depth field, 3x3 box blurred, rescaled back
        // onto [lo, hi] so jitter = 0 stays an exact uniform erosion.
        std::vector<double> noise(static_cast<size_t>(w) * h);
        for (double& v : noise) v = rng.uniform(lo, hi);
        std::vector<double> depth(noise.size());
        double dmin = 1e300, dmax = -1e300;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double sum = 0;
                int n = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        sum += noise[static_cast<size_t>(ny) * w + nx];
                        ++n;
                    }
                const double v = sum / n;
                depth[static_cast<size_t>(y) * w + x] = v;
                dmin = std::min(dmin, v);
                dmax = std::max(dmax, v);
            }
        }
        if (dmax > dmin) {
            const double scale = (hi - lo) / (dmax - dmin);
            for (double& v : depth) v = lo + (v - dmin) * scale;
        }

        Fragment2D eroded = frag;
        std::int64_t left = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                if (!mask.at(x, y)) continue;
                const double d = depth[i];
                if (static_cast<double>(dist2[i]) > d * d) {
                    ++left;
                } else {
                    eroded.mask.set(x, y, false);
                    eroded.rgba.pixel(x, y)[3] = 0;
                }
            }
        }
        if (left == 0) {
            result.vanished.push_back(frag.id);
        } else {
            kept.push_back(std::move(eroded));
        }
    }

    if (kept.empty()) throw DataError("erosion removed every fragment");
    for (const std::string& id : result.vanished) result.puzzle.ground_truth.poses.erase(id);
    result.puzzle.fragments = std::move(kept);
    if (result.puzzle.fragments.size() < 2)
        throw DataError("erosion left fewer than 2 fragments");
    finalize_puzzle(result.puzzle);
    return result;
}

Solution2D scramble(const Puzzle2D& puzzle, std::uint64_t seed) {
    if (puzzle.fragments.empty()) throw InvalidInput("scramble: empty puzzle");
    Rng rng(seed);
    Solution2D sol;
    for (const Fragment2D& f : puzzle.fragments) {
        const double x = rng.uniform(0.0, static_cast<double>(puzzle.canvas_w));
        const double y = rng.uniform(0.0, static_cast<double>(puzzle.canvas_h));
        // uniform() is half-open at 1, so theta lands in (-180, 180].
        const double theta = 180.0 - rng.uniform(0.0, 360.0);
        sol.poses.emplace(f.id, Pose2D(x, y, theta));
    }
    return sol;
}

GenerateResult generate_puzzle(const ImageRGBA& image, const GenConfig& config,
                               const std::string& group_id) {
    validate_gen_config(config);
    GenConfig attempt_config = config;
    for (int attempt = 0; attempt < 10; ++attempt) {
        attempt_config.seed = config.seed + 0x9E3779B97F4A7C15ULL * attempt;
        try {
            CrossingCutsResult cut = crossing_cuts(image, attempt_config);

            if (config.drop_fraction > 0) {
                const int n = static_cast<int>(cut.puzzle.fragments.size());
                const int n_drop =
                    static_cast<int>(std::floor(config.drop_fraction * n));
                if (n_drop > 0) {
                    Rng rng(attempt_config.seed ^ 0xD209ULL);
                    std::vector<int> idx(n);
                    for (int i = 0; i < n; ++i) idx[i] = i;
                    // Fisher-Yates prefix selects the dropped set.
                    for (int i = 0; i < n_drop; ++i) {
                        const int j = static_cast<int>(rng.uniform_int(i, n - 1));
                        std::swap(idx[i], idx[j]);
                    }
                    std::vector<bool> drop(n, false);
                    for (int i = 0; i < n_drop; ++i) drop[idx[i]] = true;
                    std::vector<Fragment2D> kept;
                    for (int i = 0; i < n; ++i) {
                        if (drop[i]) {
                            cut.puzzle.ground_truth.poses.erase(cut.puzzle.fragments[i].id);
                        } else {
                            kept.push_back(std::move(cut.puzzle.fragments[i]));
                        }
                    }
                    cut.puzzle.fragments = std::move(kept);
                    if (cut.puzzle.fragments.size() < 2)
                        throw DataError("drop_fraction left fewer than 2 fragments");
                    finalize_puzzle(cut.puzzle);
                }
            }

            ErodeResult eroded = erode_fragments(cut.puzzle, attempt_config);
            GenerateResult out;
            out.puzzle = std::move(eroded.puzzle);
            out.puzzle.group_id = group_id;
            out.cuts = std::move(cut.cuts);
            out.vanished = std::move(eroded.vanished);
            out.attempts = attempt + 1;
            return out;
        } catch (const DataError&) {
            continue; // retry with the derived seed
        }
    }
    throw DataError("puzzle generation failed after 10 attempts (group '" + group_id + "')");
}

} // namespace fragsolve
