#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fragsolve {

// Malformed values passed into an operation (contract violation).
class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unparseable or inconsistent file content.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dataset-level inconsistency (missing files, id mismatches, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deterministic 64-bit RNG (splitmix64 core). All randomness in the
/// library goes through this type so that runs are reproducible across
/// platforms and standard libraries; std::uniform_*_distribution is
/// implementation-defined and must not be used for anything seeded.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) throw InvalidInput("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    /// Zero-mean gaussian via Box-Muller; two uniforms per draw, no
    /// cached spare (keeps the stream position predictable).
    double gaussian(double sigma);

    /// Derived child stream; independent of draws made on the parent.
    Rng fork(std::uint64_t stream) const {
        Rng r(state_ ^ (0xD1342543DE82EF95ULL * (stream + 1)));
        r.next_u64();
        return r;
    }

private:
    std::uint64_t state_;
};

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / kPi); }

/// Normalize an angle in degrees to (-180, 180].
double normalize_deg(double theta);

/// Worker count for parallel sections: FRAGSOLVE_THREADS env var if set,
/// else hardware concurrency (at least 1).
int worker_threads();

} // namespace fragsolve
