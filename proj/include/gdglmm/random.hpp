#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gdglmm {

/// Per-chain random stream. Every draw in a chain goes through one of these,
/// so a chain is reproducible from (seed, stream index) alone.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x9e3779b9u};
        engine_.seed(seq);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        for (;;) {
            const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
    double exponential() { return -std::log(uniform()); }

    /// Gamma with unit scale.
    double gamma(double shape) {
        std::gamma_distribution<double> dist(shape, 1.0);
        return dist(engine_);
    }

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace gdglmm
