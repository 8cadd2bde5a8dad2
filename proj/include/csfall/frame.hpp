#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace csfall {

// Grayscale frame, row-major, real intensities on the 0-255 scale.
// Values may leave [0,255] while passing through the solver; clamping
// happens only in save_pgm.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // size width*height, row-major

    Frame() = default;
    Frame(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }

    bool same_dims(const Frame& other) const {
        return width == other.width && height == other.height;
    }
    bool operator==(const Frame& other) const {
        return same_dims(other) && pixels == other.pixels;
    }
};

// Vectorized frame (row-major flattening) with origin dims kept so the
// solver can hand slices back to image-space denoisers.
struct SignalVec {
    Eigen::VectorXd values;
    int width = 0;
    int height = 0;
};

enum class PgmErrorCode {
    MissingFile,
    BadMagic,
    BadHeader,
    BadMaxval,
    Truncated,
    Unwritable,
};

class PgmError : public std::runtime_error {
public:
    PgmError(PgmErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    PgmErrorCode code() const { return code_; }

private:
    PgmErrorCode code_;
};

// Binary PGM (P5), maxval 255, one image per file.
Frame load_pgm(const std::filesystem::path& path);

// Clamps to [0,255] and rounds half-up before writing.
void save_pgm(const Frame& frame, const std::filesystem::path& path);

SignalVec vectorize(const Frame& frame);
Frame devectorize(const SignalVec& sig);

// Adds iid N(0, sigma^2) noise; deterministic for a fixed seed.
Frame add_gaussian_noise(const Frame& frame, double sigma, std::uint64_t seed);

// .pgm files of a sequence directory in lexicographic order.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

}  // namespace csfall
