#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "csfall/classify.hpp"
#include "csfall/denoise.hpp"
#include "csfall/sensing.hpp"
#include "csfall/solver.hpp"

namespace csfall {

// End-to-end orchestration: acquire -> packetize -> channel -> assemble ->
// measurement-domain gating -> reconstruct flagged frames -> classify.
// Every output is a deterministic function of (config, input frames).

struct PipelineConfig {
    int frame_size = 64;  // square frames, width == height
    double sub_rate = 0.5;
    std::uint64_t matrix_seed = 1;
    int packet_payload = 64;
    LossModel loss;  // default: iid p = 0
    SolverConfig solver;
    DenoiserSpec denoiser;
    double detect_alpha = 0.05;
    std::optional<double> detect_tau;  // absent: calibrate from first frames
    int calib_frames = 10;
    double pixel_tau = 25.0;
    std::string classifier_model;  // path; empty trains the built-in synthetic model
    std::string output_dir = "out";

    int measurement_count() const;  // M = round(sub_rate * N)
};

// Parses flat key=value text with '#' comments into `cfg`; unknown keys are
// errors. Every key mirrors a CLI flag.
void load_config_file(const std::filesystem::path& path, PipelineConfig& cfg);

struct EvalRow {
    std::uint64_t frame_id = 0;
    int received_measurements = 0;
    int iterations_used = 0;  // 0 when not reconstructed
    std::optional<double> psnr_db;
    double score = 0.0;
    bool flagged = false;
    // "fall" / "no_fall" / "no_object" / "" (not reconstructed)
    std::string label_original;
    std::string label_reconstructed;
    double confidence_original = 0.0;
    double confidence_reconstructed = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::optional<double> mean_psnr;
    std::optional<double> mean_iterations;
    std::optional<double> agreement_fraction;
    int reconstructions = 0;
};

// Runs the whole pipeline over a PGM sequence directory; emits report.csv,
// detection.csv, labels_original.csv, labels_reconstructed.csv, summary.csv
// and reconstructed PGMs into cfg.output_dir. Configuration inconsistencies
// are reported before any frame is processed.
EvalReport run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& input_dir);

struct SweepRow {
    double sub_rate = 0.0;
    double loss_p = 0.0;
    DenoiserKind denoiser = DenoiserKind::Identity;
    std::optional<double> mean_psnr;
    std::optional<double> mean_iterations;
    std::optional<double> agreement;
};

// Grid over sub_rate x loss p x denoiser; one summary row per point.
// Writes sweep.csv under base.output_dir plus one subdirectory per point.
std::vector<SweepRow> experiment_sweep(const PipelineConfig& base,
                                       const std::vector<double>& sub_rates,
                                       const std::vector<double>& loss_ps,
                                       const std::vector<DenoiserKind>& denoisers,
                                       const std::filesystem::path& input_dir);

// Deterministic feature set for the built-in classifier: upright vs lying
// synthetic person frames against the synthetic background.
BaselineModel train_synthetic_baseline(int frame_size, int per_class);

}  // namespace csfall
