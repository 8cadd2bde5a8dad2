#include "csfall/synth.hpp"

#include <algorithm>
#include <cmath>

#include "csfall/rng.hpp"

namespace csfall {

namespace {

void fill_rect(Frame& f, int row0, int col0, int rows, int cols, double value) {
    const int r1 = std::min(f.height, row0 + rows);
    const int c1 = std::min(f.width, col0 + cols);
    for (int r = std::max(0, row0); r < r1; ++r)
        for (int c = std::max(0, col0); c < c1; ++c) f.at(r, c) = value;
}

void fill_disc(Frame& f, double cr, double cc, double radius, double value) {
    for (int r = 0; r < f.height; ++r)
        for (int c = 0; c < f.width; ++c)
            if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= radius * radius)
                f.at(r, c) = value;
}

}  // namespace

Frame synth_background(int width, int height) {
    Frame f(width, height);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            f.at(r, c) = 70.0 + 30.0 * r / height + 15.0 * c / width;
    // floor band and two fixed furniture blocks
    fill_rect(f, height * 3 / 4, 0, height - height * 3 / 4, width, 55.0);
    fill_rect(f, height / 2, width / 12, height / 4, width / 6, 35.0);
    fill_rect(f, height * 5 / 12, width * 3 / 4, height / 3, width / 5, 140.0);
    return f;
}

Frame synth_structured_frame(int width, int height, int variant) {
    Frame f = synth_background(width, height);
    std::mt19937_64 engine(mix_seed(0xC5u, static_cast<std::uint64_t>(variant)));
    const auto jitter = [&engine](int span) {
        return static_cast<int>(uniform01(engine) * span);
    };
    fill_rect(f, height / 6 + jitter(height / 6), width / 5 + jitter(width / 6),
              height / 4, width / 7, 210.0);
    fill_rect(f, height / 2 + jitter(height / 8), width / 2 + jitter(width / 8),
              height / 6, width / 4, 20.0);
    fill_disc(f, height / 3.0 + jitter(height / 5), width * 0.6 + jitter(width / 6),
              std::min(width, height) / 9.0, 180.0);
    return f;
}

Frame synth_person_frame(int width, int height, bool lying, int variant) {
    Frame f = synth_background(width, height);
    std::mt19937_64 engine(mix_seed(0xFA11u, static_cast<std::uint64_t>(variant) * 2 + (lying ? 1 : 0)));
    const double u_pos = uniform01(engine);
    const double u_size = uniform01(engine);

    if (!lying) {
        // standing: tall block, feet on the floor line, head disc on top
        const int body_h = static_cast<int>(height * (0.38 + 0.10 * u_size));
        const int body_w = std::max(2, static_cast<int>(width * (0.10 + 0.04 * u_size)));
        const int feet = height * 3 / 4;
        const int col = static_cast<int>(width * (0.18 + 0.5 * u_pos));
        fill_rect(f, feet - body_h, col, body_h, body_w, 230.0);
        fill_disc(f, feet - body_h - body_w * 0.45, col + body_w / 2.0, body_w * 0.45, 230.0);
    } else {
        // fallen: wide block low in the frame
        const int body_w = static_cast<int>(width * (0.38 + 0.10 * u_size));
        const int body_h = std::max(2, static_cast<int>(height * (0.10 + 0.04 * u_size)));
        const int row = static_cast<int>(height * 0.78);
        const int col = static_cast<int>(width * (0.08 + 0.4 * u_pos));
        fill_rect(f, row, col, body_h, body_w, 230.0);
        fill_disc(f, row + body_h / 2.0, col + body_w + body_h * 0.4, body_h * 0.45, 230.0);
    }
    return f;
}

std::vector<Frame> synth_sequence(const SequenceSpec& spec) {
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(spec.n_frames));
    for (int i = 1; i <= spec.n_frames; ++i) {
        Frame f = (i >= spec.object_from)
                      ? synth_person_frame(spec.width, spec.height, spec.lying, i)
                      : synth_background(spec.width, spec.height);
        frames.push_back(add_gaussian_noise(f, spec.noise_sigma,
                                            mix_seed(spec.seed, static_cast<std::uint64_t>(i))));
    }
    return frames;
}

}  // namespace csfall
