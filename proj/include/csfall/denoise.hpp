#pragma once

#include "csfall/frame.hpp"

namespace csfall {

enum class DenoiserKind { Identity, GaussianBlur, Median, Tv, Nlm };

// Denoiser selection plus the knobs each kind reads. `strength` is the
// noise-level omega handed over by the solver (or the sigma a standalone
// caller targets); the strength->parameter calibrations are fixed constants:
//   gaussian_blur  kernel sigma = 1.0 * strength, truncated at 3 sigma
//   nlm            h = 0.4 * strength * patch_size^2
//   tv             fidelity weight 1 / (2 * strength^2)
struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::Identity;
    double strength = 0.0;
    int kernel_radius = 1;   // median
    int patch_size = 3;      // nlm, odd
    int search_window = 7;   // nlm, odd, >= patch_size
    int tv_iterations = 50;  // tv
};

struct DenoiseRequest {
    Frame image;
    double strength = 0.0;
    int kernel_radius = 1;
    int patch_size = 3;
    int search_window = 7;
    int tv_iterations = 50;
};

// Separable Gaussian convolution, reflection padding.
Frame gaussian_blur(const DenoiseRequest& req);

// (2r+1)^2 neighborhood median, reflection padding.
Frame median_filter(const DenoiseRequest& req);

// Approximately solves min_v TV(v) + 1/(2 strength^2) ||v - image||^2 by a
// fixed-iteration dual projection scheme (Chambolle); deterministic.
Frame tv_denoise(const DenoiseRequest& req);

// Non-local means: weights exp(-||patch diff||^2 / h^2), normalized.
Frame nlm_denoise(const DenoiseRequest& req);

// Isotropic total variation with forward differences.
double total_variation(const Frame& frame);

// Dispatch used by the solver's denoising step. `omega` overrides
// spec.strength for this call.
Frame apply_denoiser(const DenoiserSpec& spec, const Frame& noisy, double omega);

DenoiserKind denoiser_kind_from_name(const std::string& name);
std::string denoiser_kind_name(DenoiserKind kind);

}  // namespace csfall
