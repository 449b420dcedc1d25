#pragma once

#include <vector>

#include "fragsolve/fragments.hpp"

namespace fragsolve {

/// One candidate reconstruction: an N x 3 matrix of (x, y, theta) rows,
/// rows ordered like the puzzle's fragments (lexicographic by id).
struct Chromosome {
    std::vector<std::array<double, 3>> rows;
};

struct GeneticConfig {
    int population = 64;  // M; >= 8 and a multiple of 4
    int generations = 200;
    double sigma_t = 5.0;       // px, mutation on x/y
    double sigma_theta = 5.0;   // degrees, mutation on theta
    double lambda_bbox = 1.0;
    double lambda_overlap = 4.0;
    bool literal_theta_mean = false; // arithmetic instead of circular crossover mean
    std::uint64_t seed = 0;
};

void validate_genetic_config(const GeneticConfig& config);

/// lambda_bbox * (bounding rectangle of all placed masks) +
/// lambda_overlap * (sum of pairwise placed-mask intersections).
/// Lower is better.
double fitness(const Chromosome& chromosome, const Puzzle2D& puzzle,
               const GeneticConfig& config);

/// Population with cached fitness values (kept in sync by
/// evolve_generation).
struct Population {
    std::vector<Chromosome> members;
    std::vector<double> fitness;

    int best_index() const;
};

/// One generation step: the M/4 least-fit members are replaced by
/// offspring of the M/2 fittest (element-wise parent mean plus gaussian
/// mutation); everything else survives unchanged, so the best fitness
/// never increases.
void evolve_generation(Population& population, const Puzzle2D& puzzle,
                       const GeneticConfig& config, Rng& rng);

struct GeneticResult {
    Solution2D solution;
    std::vector<double> trace; // best fitness per generation (index 0 = initial)
};

/// Full run: M random reconstructions evolved for `generations` steps;
/// the best chromosome becomes the solution. Deterministic per seed.
GeneticResult solve_genetic(const Puzzle2D& puzzle, const GeneticConfig& config);

Chromosome chromosome_from_solution(const Solution2D& solution, const Puzzle2D& puzzle);
Solution2D solution_from_chromosome(const Chromosome& chromosome, const Puzzle2D& puzzle);

} // namespace fragsolve
