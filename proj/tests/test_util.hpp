#pragma once

#include <filesystem>
#include <string>

#include "csfall/frame.hpp"
#include "csfall/rng.hpp"

namespace csfall::test {

// Scratch directory under the system temp dir, wiped on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / ("csfall_" + name)) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline Frame random_frame(int width, int height, std::uint64_t seed, bool integers = false) {
    Frame f(width, height);
    std::mt19937_64 engine(seed);
    for (double& p : f.pixels) {
        const double v = uniform01(engine) * 255.0;
        p = integers ? std::floor(v) : v;
    }
    return f;
}

}  // namespace csfall::test
