#pragma once

#include <cstdint>
#include <vector>

#include "csfall/frame.hpp"

namespace csfall {

// Deterministic desk-scale scenes for the experiment harness and tests.

// Indoor-ish static scene: smooth gradient plus a few fixed rectangles.
Frame synth_background(int width, int height);

// Piecewise-constant cartoon (rectangles + disc) over the background;
// `variant` moves the shapes around.
Frame synth_structured_frame(int width, int height, int variant);

// Standing (tall) or lying (wide) person block over the background.
// `variant` jitters position and size deterministically.
Frame synth_person_frame(int width, int height, bool lying, int variant);

struct SequenceSpec {
    int width = 64;
    int height = 64;
    int n_frames = 5;
    int object_from = 3;       // 1-based frame index at which the object appears
    bool lying = false;
    double noise_sigma = 1.0;  // per-frame sensor noise
    std::uint64_t seed = 1;
};

// Background-only frames, then object-bearing frames from `object_from` on,
// each with seeded per-frame noise.
std::vector<Frame> synth_sequence(const SequenceSpec& spec);

}  // namespace csfall
