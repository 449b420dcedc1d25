#include "fragsolve/solver_genetic.hpp"

#include <algorithm>
#include <cmath>

#include "fragsolve/puzzle_gen.hpp"

namespace fragsolve {

void validate_genetic_config(const GeneticConfig& config) {
    if (config.population < 8 || config.population % 4 != 0)
        throw InvalidInput("population must be >= 8 and a multiple of 4");
    if (config.generations < 0) throw InvalidInput("generations must be >= 0");
    if (config.sigma_t < 0 || config.sigma_theta < 0)
        throw InvalidInput("mutation sigmas must be >= 0");
    if (config.lambda_bbox < 0 || config.lambda_overlap < 0 ||
        config.lambda_bbox + config.lambda_overlap <= 0)
        throw InvalidInput("fitness weights must be >= 0 and not both zero");
}

Chromosome chromosome_from_solution(const Solution2D& solution, const Puzzle2D& puzzle) {
    Chromosome c;
    for (const Fragment2D& f : puzzle.fragments) {
        const auto it = solution.poses.find(f.id);
        if (it == solution.poses.end())
            throw InvalidInput("solution missing pose for '" + f.id + "'");
        c.rows.push_back({it->second.x, it->second.y, it->second.theta_deg});
    }
    return c;
}

Solution2D solution_from_chromosome(const Chromosome& chromosome, const Puzzle2D& puzzle) {
    if (chromosome.rows.size() != puzzle.fragments.size())
        throw InvalidInput("chromosome size does not match the puzzle");
    Solution2D sol;
    for (size_t i = 0; i < puzzle.fragments.size(); ++i) {
        const auto& r = chromosome.rows[i];
        sol.poses.emplace(puzzle.fragments[i].id, Pose2D(r[0], r[1], r[2]));
    }
    return sol;
}

double fitness(const Chromosome& chromosome, const Puzzle2D& puzzle,
               const GeneticConfig& config) {
    if (chromosome.rows.size() != puzzle.fragments.size())
        throw InvalidInput("chromosome size does not match the puzzle");

    std::vector<PlacedMask> placed;
    placed.reserve(chromosome.rows.size());
    for (size_t i = 0; i < chromosome.rows.size(); ++i) {
        const auto& r = chromosome.rows[i];
        placed.push_back(place(puzzle.fragments[i], Pose2D(r[0], r[1], r[2])));
    }

    std::int64_t x0 = 0, y0 = 0, x1 = -1, y1 = -1;
    bool first = true;
    for (const PlacedMask& p : placed) {
        if (p.area == 0) continue;
        if (first) {
            x0 = p.bx0;
            y0 = p.by0;
            x1 = p.bx1;
            y1 = p.by1;
            first = false;
        } else {
            x0 = std::min(x0, p.bx0);
            y0 = std::min(y0, p.by0);
            x1 = std::max(x1, p.bx1);
            y1 = std::max(y1, p.by1);
        }
    }
    const double bbox_area =
        first ? 0.0 : static_cast<double>((x1 - x0 + 1)) * static_cast<double>(y1 - y0 + 1);

    double overlap = 0;
    for (size_t i = 0; i < placed.size(); ++i)
        for (size_t j = i + 1; j < placed.size(); ++j)
            overlap += static_cast<double>(intersection_area(placed[i], placed[j]));

    return config.lambda_bbox * bbox_area + config.lambda_overlap * overlap;
}

int Population::best_index() const {
    if (members.empty()) throw InvalidInput("empty population");
    int best = 0;
    for (int i = 1; i < static_cast<int>(members.size()); ++i)
        if (fitness[i] < fitness[best]) best = i;
    return best;
}

namespace {

double circular_mean_deg(double a, double b) {
    const double ar = deg_to_rad(a), br = deg_to_rad(b);
    const double x = std::cos(ar) + std::cos(br);
    const double y = std::sin(ar) + std::sin(br);
    if (x == 0 && y == 0) return normalize_deg(a); // antipodal; keep first parent
    return normalize_deg(rad_to_deg(std::atan2(y, x)));
}

} // namespace

void evolve_generation(Population& population, const Puzzle2D& puzzle,
                       const GeneticConfig& config, Rng& rng) {
    validate_genetic_config(config);
    const int m = config.population;
    if (static_cast<int>(population.members.size()) != m ||
        static_cast<int>(population.fitness.size()) != m)
        throw InvalidInput("population size does not match the config");

    // Rank indices by fitness, stable on ties.
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return population.fitness[a] < population.fitness[b];
    });

    const int n_replace = m / 4;
    const int n_parents = m / 2;
    const size_t n_rows = puzzle.fragments.size();

    // Offspring overwrite the least-fit quarter in place.
    for (int k = 0; k < n_replace; ++k) {
        const int slot = order[m - 1 - k];
        const int pi = static_cast<int>(rng.uniform_int(0, n_parents - 1));
        int pj = static_cast<int>(rng.uniform_int(0, n_parents - 2));
        if (pj >= pi) ++pj;
        const Chromosome& pa = population.members[order[pi]];
        const Chromosome& pb = population.members[order[pj]];

        Chromosome child;
        child.rows.resize(n_rows);
        for (size_t r = 0; r < n_rows; ++r) {
            child.rows[r][0] =
                0.5 * (pa.rows[r][0] + pb.rows[r][0]) + rng.gaussian(config.sigma_t);
            child.rows[r][1] =
                0.5 * (pa.rows[r][1] + pb.rows[r][1]) + rng.gaussian(config.sigma_t);
            const double mean_theta = config.literal_theta_mean
                                          ? 0.5 * (pa.rows[r][2] + pb.rows[r][2])
                                          : circular_mean_deg(pa.rows[r][2], pb.rows[r][2]);
            child.rows[r][2] = normalize_deg(mean_theta + rng.gaussian(config.sigma_theta));
        }
        population.members[slot] = std::move(child);
        population.fitness[slot] = fitness(population.members[slot], puzzle, config);
    }
}

GeneticResult solve_genetic(const Puzzle2D& puzzle, const GeneticConfig& config) {
    validate_genetic_config(config);
    if (puzzle.fragments.size() < 2) throw InvalidInput("puzzle needs >= 2 fragments");

    Rng rng(config.seed);
    Population pop;
    pop.members.reserve(config.population);
    for (int i = 0; i < config.population; ++i) {
        const Solution2D random = scramble(puzzle, rng.next_u64());
        pop.members.push_back(chromosome_from_solution(random, puzzle));
        pop.fitness.push_back(fitness(pop.members.back(), puzzle, config));
    }

    GeneticResult result;
    result.trace.push_back(pop.fitness[pop.best_index()]);
    for (int g = 0; g < config.generations; ++g) {
        evolve_generation(pop, puzzle, config, rng);
        result.trace.push_back(pop.fitness[pop.best_index()]);
    }
    result.solution = solution_from_chromosome(pop.members[pop.best_index()], puzzle);
    return result;
}

} // namespace fragsolve
