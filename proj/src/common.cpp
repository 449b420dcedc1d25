#include "fragsolve/common.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

namespace fragsolve {

double Rng::gaussian(double sigma) {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double normalize_deg(double theta) {
    if (!std::isfinite(theta)) throw InvalidInput("angle must be finite");
    double t = std::fmod(theta, 360.0);
    if (t <= -180.0) t += 360.0;
    if (t > 180.0) t -= 360.0;
    return t;
}

int worker_threads() {
    if (const char* env = std::getenv("FRAGSOLVE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

} // namespace fragsolve
