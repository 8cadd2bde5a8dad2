#pragma once

#include <cstdint>
#include <random>

namespace csfall {

// All randomness in the project flows through mt19937_64 (whose output
// sequence is pinned by the C++ standard) plus the conversions below, so a
// seed reproduces identical streams on every platform. Encoder and decoder
// regenerate the measurement matrix from the seed alone.

// Uniform double in [0, 1): top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// splitmix64 finalizer; derives independent per-item seeds (per frame, per
// drop pattern) from one base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Standard-normal stream via Box-Muller on the uniform stream above.
// std::normal_distribution is implementation-defined and must not be used
// where reproducibility matters.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01(engine_);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace csfall
