#include "csfall/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace csfall {

namespace {

void check_seed(const BackgroundModel& model, const MeasurementSet& y_t) {
    if (y_t.matrix_seed != model.y_bg.matrix_seed)
        throw std::invalid_argument("measurement matrix seed mismatch against background");
}

}  // namespace

BackgroundModel update_background(const BackgroundModel& model, const MeasurementSet& y_t) {
    check_seed(model, y_t);
    if (model.alpha < 0.0 || model.alpha > 1.0)
        throw std::invalid_argument("alpha must lie in [0,1]");
    const int m = static_cast<int>(model.y_bg.values.size());
    if (!y_t.complete(m))
        throw std::invalid_argument("background update requires a complete measurement set");

    BackgroundModel out = model;
    out.y_bg.values = (1.0 - model.alpha) * model.y_bg.values + model.alpha * y_t.values;
    return out;
}

double score_frame(const BackgroundModel& model, const MeasurementSet& y_t) {
    check_seed(model, y_t);
    double diff2 = 0.0, bg2 = 0.0;
    for (std::size_t i = 0; i < y_t.row_indices.size(); ++i) {
        const auto row = y_t.row_indices[i];
        if (row >= model.y_bg.values.size())
            throw std::invalid_argument("measurement row index out of background range");
        const double bg = model.y_bg.values[static_cast<Eigen::Index>(row)];
        const double d = y_t.values[static_cast<Eigen::Index>(i)] - bg;
        diff2 += d * d;
        bg2 += bg * bg;
    }
    return std::sqrt(diff2) / (std::sqrt(bg2) + 1e-9);
}

std::vector<bool> flag_frames(const std::vector<double>& scores, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
    std::vector<bool> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > tau;
    return flags;
}

double calibrate_tau(const std::vector<double>& scores) {
    if (scores.empty()) throw std::invalid_argument("no calibration scores");
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= static_cast<double>(scores.size());
    return mean + 4.0 * std::sqrt(var);
}

GatingResult gate_measurements(const std::vector<MeasurementSet>& received,
                               const MeasurementSet& bootstrap_bg, double alpha,
                               std::optional<double> fixed_tau, int calib_frames) {
    if (received.empty()) throw std::invalid_argument("no measurement sets to gate");
    if (calib_frames < 1) throw std::invalid_argument("calibration needs at least one frame");
    const int m = static_cast<int>(bootstrap_bg.values.size());
    if (!bootstrap_bg.complete(m))
        throw std::invalid_argument("background bootstrap must be a complete measurement set");

    const int n_frames = static_cast<int>(received.size());
    const int k_calib = std::min(calib_frames, n_frames);
    BackgroundModel background{bootstrap_bg, alpha, 0.0};

    GatingResult out;
    out.scores.resize(received.size(), 0.0);
    out.flags.resize(received.size(), false);
    for (int i = 0; i < n_frames; ++i) {
        const MeasurementSet& y_t = received[static_cast<std::size_t>(i)];
        const double score = y_t.row_indices.empty() ? 0.0 : score_frame(background, y_t);
        out.scores[static_cast<std::size_t>(i)] = score;

        if (i < k_calib) {
            if (y_t.complete(m)) background = update_background(background, y_t);
            if (i == k_calib - 1)
                out.tau = fixed_tau.value_or(calibrate_tau(std::vector<double>(
                    out.scores.begin(), out.scores.begin() + k_calib)));
        } else {
            const bool flagged = score > out.tau;
            out.flags[static_cast<std::size_t>(i)] = flagged;
            if (!flagged && y_t.complete(m)) background = update_background(background, y_t);
        }
    }
    for (int i = 0; i < k_calib; ++i)
        out.flags[static_cast<std::size_t>(i)] = out.scores[static_cast<std::size_t>(i)] > out.tau;
    out.background = std::move(background.y_bg);
    return out;
}

ForegroundMask spatial_foreground(const Frame& frame, const Frame& background,
                                  double pixel_tau) {
    if (!frame.same_dims(background))
        throw std::invalid_argument("foreground: frame and background dims differ");
    if (pixel_tau <= 0.0) throw std::invalid_argument("pixel_tau must be positive");

    const int w = frame.width, h = frame.height;
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = std::abs(frame.pixels[i] - background.pixels[i]) > pixel_tau ? 1 : 0;

    ForegroundMask out;
    out.width = w;
    out.height = h;
    out.mask.assign(raw.size(), 0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            int cells = 0, trues = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    ++cells;
                    trues += raw[static_cast<std::size_t>(rr) * w + cc];
                }
            out.mask[static_cast<std::size_t>(r) * w + c] = (2 * trues > cells) ? 1 : 0;
        }

    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (!out.at(r, c)) continue;
            ++out.pixel_count;
            if (!out.bbox) {
                out.bbox = BBox{r, c, r, c};
            } else {
                out.bbox->row_min = std::min(out.bbox->row_min, r);
                out.bbox->col_min = std::min(out.bbox->col_min, c);
                out.bbox->row_max = std::max(out.bbox->row_max, r);
                out.bbox->col_max = std::max(out.bbox->col_max, c);
            }
        }
    return out;
}

}  // namespace csfall
