#pragma once

#include <optional>
#include <vector>

#include "csfall/frame.hpp"
#include "csfall/sensing.hpp"

namespace csfall {

// Object-bearing frames are picked out in measurement space, before any
// reconstruction: row-orthonormal phi makes ||y_t - y_bg|| track the scene
// change ||x_t - x_bg|| (contraction, concentrating near sqrt(M/N) of it).

struct BackgroundModel {
    MeasurementSet y_bg;  // complete (all M rows)
    double alpha = 0.05;  // learning rate in [0,1]
    double tau = 0.0;     // relative-energy detection threshold
};

// y_bg <- (1-alpha) y_bg + alpha y_t. Callers update only with frames
// flagged object-free; y_t must be complete and share the matrix seed.
BackgroundModel update_background(const BackgroundModel& model, const MeasurementSet& y_t);

// ||y_t - y_bg|| / (||y_bg|| + 1e-9), both norms restricted to y_t's row
// indices; y_t may be partial.
double score_frame(const BackgroundModel& model, const MeasurementSet& y_t);

// flag_i = score_i > tau.
std::vector<bool> flag_frames(const std::vector<double>& scores, double tau);

// mean + 4 * stddev (population) of the calibration scores.
double calibrate_tau(const std::vector<double>& scores);

struct GatingResult {
    std::vector<double> scores;
    std::vector<bool> flags;
    double tau = 0.0;
    MeasurementSet background;  // evolved y_bg after the pass
};

// Frame-order gating policy over per-frame received measurement sets:
// scores against an evolving background (bootstrapped from `bootstrap_bg`,
// which must be complete), background frozen while a frame is flagged and
// updated only on complete arrivals, tau fixed after `calib_frames` frames
// (calibrate_tau unless `fixed_tau` is given). Flags of the calibration
// frames are evaluated against the final tau.
GatingResult gate_measurements(const std::vector<MeasurementSet>& received,
                               const MeasurementSet& bootstrap_bg, double alpha,
                               std::optional<double> fixed_tau, int calib_frames);

struct BBox {
    int row_min = 0;
    int col_min = 0;
    int row_max = 0;
    int col_max = 0;
};

struct ForegroundMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;  // row-major, 0/1
    std::optional<BBox> bbox;        // tight around true pixels
    int pixel_count = 0;

    bool at(int row, int col) const {
        return mask[static_cast<std::size_t>(row) * width + col] != 0;
    }
};

// |frame - background| > pixel_tau, then one 3x3 majority-vote cleanup pass
// (strict majority of the in-bounds window).
ForegroundMask spatial_foreground(const Frame& frame, const Frame& background,
                                  double pixel_tau);

}  // namespace csfall
