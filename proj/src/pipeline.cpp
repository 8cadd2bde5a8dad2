#include "csfall/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csfall/detect.hpp"
#include "csfall/metrics.hpp"
#include "csfall/packet_io.hpp"
#include "csfall/rng.hpp"
#include "csfall/synth.hpp"

namespace csfall {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string decision_name(const Label& label) {
    return label.decision == Decision::Fall ? "fall" : "no_fall";
}

// Row-submatrix of phi at the given indices; same role as the phi half of
// assemble(), for measurement sets whose packets are no longer around.
MeasurementMatrix slice_rows(const MeasurementMatrix& phi,
                             const std::vector<std::uint32_t>& indices) {
    MeasurementMatrix out;
    out.seed = phi.seed;
    out.entries.resize(static_cast<Eigen::Index>(indices.size()), phi.cols());
    for (std::size_t i = 0; i < indices.size(); ++i)
        out.entries.row(static_cast<Eigen::Index>(i)) = phi.entries.row(indices[i]);
    return out;
}

struct FrameChannelResult {
    MeasurementSet received;  // empty row_indices when every packet was lost
    int received_count = 0;
};

}  // namespace

int PipelineConfig::measurement_count() const {
    const long long n = static_cast<long long>(frame_size) * frame_size;
    return static_cast<int>(std::llround(sub_rate * static_cast<double>(n)));
}

void load_config_file(const std::filesystem::path& path, PipelineConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        const auto as_double = [&] { return std::stod(value); };
        const auto as_int = [&] { return std::stoi(value); };
        const auto as_u64 = [&] { return static_cast<std::uint64_t>(std::stoull(value)); };

        if (key == "frame_size") cfg.frame_size = as_int();
        else if (key == "sub_rate") cfg.sub_rate = as_double();
        else if (key == "matrix_seed") cfg.matrix_seed = as_u64();
        else if (key == "payload") cfg.packet_payload = as_int();
        else if (key == "loss_p") { cfg.loss.kind = LossModel::Kind::IidErasure; cfg.loss.p = as_double(); }
        else if (key == "loss_seed") cfg.loss.seed = as_u64();
        else if (key == "loss_drops") {
            cfg.loss.kind = LossModel::Kind::Explicit;
            cfg.loss.drop_set.clear();
            if (!value.empty()) {
                std::istringstream parts(value);
                std::string tok;
                while (std::getline(parts, tok, ','))
                    cfg.loss.drop_set.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
            }
        }
        else if (key == "rho") cfg.solver.rho = as_double();
        else if (key == "max_iter") cfg.solver.max_iter = as_int();
        else if (key == "rel_tol") cfg.solver.rel_tol = as_double();
        else if (key == "omega") {
            if (value.empty()) cfg.solver.omega_override.reset();
            else cfg.solver.omega_override = as_double();
        }
        else if (key == "x0") {
            if (value == "backprojection") cfg.solver.x0_policy = SolverConfig::X0Policy::Backprojection;
            else if (value == "zeros") cfg.solver.x0_policy = SolverConfig::X0Policy::Zeros;
            else throw std::runtime_error("unknown x0 policy: " + value);
        }
        else if (key == "denoiser") cfg.denoiser.kind = denoiser_kind_from_name(value);
        else if (key == "denoiser_strength") cfg.denoiser.strength = as_double();
        else if (key == "kernel_radius") cfg.denoiser.kernel_radius = as_int();
        else if (key == "patch_size") cfg.denoiser.patch_size = as_int();
        else if (key == "search_window") cfg.denoiser.search_window = as_int();
        else if (key == "tv_iterations") cfg.denoiser.tv_iterations = as_int();
        else if (key == "alpha") cfg.detect_alpha = as_double();
        else if (key == "tau") {
            if (value.empty()) cfg.detect_tau.reset();
            else cfg.detect_tau = as_double();
        }
        else if (key == "calib_frames") cfg.calib_frames = as_int();
        else if (key == "pixel_tau") cfg.pixel_tau = as_double();
        else if (key == "model") cfg.classifier_model = value;
        else if (key == "output_dir") cfg.output_dir = value;
        else
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
    }
}

namespace {

void validate_config(const PipelineConfig& cfg) {
    if (cfg.frame_size < 2) throw std::invalid_argument("frame_size must be at least 2");
    if (cfg.sub_rate <= 0.0 || cfg.sub_rate > 1.0)
        throw std::invalid_argument("sub_rate must lie in (0,1]");
    const int n = cfg.frame_size * cfg.frame_size;
    const int m = cfg.measurement_count();
    if (m < 1 || m > n) throw std::invalid_argument("sub_rate yields no valid measurement count");
    if (cfg.packet_payload < 1) throw std::invalid_argument("payload must be at least 1");
    if (cfg.calib_frames < 1) throw std::invalid_argument("calib_frames must be at least 1");
    if (cfg.detect_alpha < 0.0 || cfg.detect_alpha > 1.0)
        throw std::invalid_argument("alpha must lie in [0,1]");
    if (cfg.detect_tau && *cfg.detect_tau <= 0.0)
        throw std::invalid_argument("tau must be positive");
    if (cfg.pixel_tau <= 0.0) throw std::invalid_argument("pixel_tau must be positive");
    if (cfg.solver.rho <= 0.0) throw std::invalid_argument("rho must be positive");
    if (cfg.solver.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
}

FrameChannelResult run_channel(const MeasurementMatrix& phi, const MeasurementSet& y_full,
                               const PipelineConfig& cfg, std::uint64_t frame_id) {
    std::vector<Packet> packets = packetize(y_full, cfg.packet_payload);
    LossModel per_frame = cfg.loss;
    if (per_frame.kind == LossModel::Kind::IidErasure)
        per_frame.seed = mix_seed(cfg.loss.seed, frame_id);
    const std::vector<Packet> survivors = transmit(packets, per_frame);

    FrameChannelResult out;
    if (survivors.empty()) {
        out.received.frame_id = frame_id;
        out.received.matrix_seed = phi.seed;
        return out;
    }
    out.received = assemble(survivors, phi).y;
    out.received_count = static_cast<int>(out.received.row_indices.size());
    return out;
}

}  // namespace

BaselineModel train_synthetic_baseline(int frame_size, int per_class) {
    const Frame background = synth_background(frame_size, frame_size);
    std::vector<std::pair<FeatureVector, Decision>> dataset;
    for (int variant = 0; variant < per_class; ++variant) {
        for (const bool lying : {false, true}) {
            const Frame frame = synth_person_frame(frame_size, frame_size, lying, variant);
            const ForegroundMask mask = spatial_foreground(frame, background, 25.0);
            dataset.emplace_back(extract_features(mask, frame_size, frame_size),
                                 lying ? Decision::Fall : Decision::NoFall);
        }
    }
    return train_baseline(dataset);
}

EvalReport run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& input_dir) {
    validate_config(cfg);

    const auto files = list_frame_files(input_dir);
    if (files.empty()) throw std::invalid_argument("no .pgm frames in " + input_dir.string());

    std::vector<Frame> frames;
    frames.reserve(files.size());
    for (const auto& file : files) {
        Frame f = load_pgm(file);
        if (f.width != cfg.frame_size || f.height != cfg.frame_size)
            throw std::invalid_argument(file.string() + ": dims do not match configured frame_size");
        frames.push_back(std::move(f));
    }

    const int n_frames = static_cast<int>(frames.size());
    const int side = cfg.frame_size;
    const int n = side * side;
    const int m = cfg.measurement_count();
    const MeasurementMatrix phi = build_matrix(cfg.matrix_seed, m, n);

    const BaselineModel model = cfg.classifier_model.empty()
                                    ? train_synthetic_baseline(side, 20)
                                    : load_model(cfg.classifier_model);

    // Channel pass, then measurement-domain gating. The background
    // bootstraps from frame 1's pre-channel measurements (the simulation
    // grants one lossless calibration frame).
    std::vector<FrameChannelResult> channel(static_cast<std::size_t>(n_frames));
    std::vector<MeasurementSet> received_sets(static_cast<std::size_t>(n_frames));
    MeasurementSet bootstrap;
    for (int i = 0; i < n_frames; ++i) {
        const std::uint64_t frame_id = static_cast<std::uint64_t>(i) + 1;
        const MeasurementSet y_full =
            acquire(phi, vectorize(frames[static_cast<std::size_t>(i)]), frame_id);
        if (i == 0) bootstrap = y_full;
        channel[static_cast<std::size_t>(i)] = run_channel(phi, y_full, cfg, frame_id);
        received_sets[static_cast<std::size_t>(i)] = channel[static_cast<std::size_t>(i)].received;
    }
    const GatingResult gating = gate_measurements(received_sets, bootstrap, cfg.detect_alpha,
                                                  cfg.detect_tau, cfg.calib_frames);
    const std::vector<double>& scores = gating.scores;
    const std::vector<bool>& flags = gating.flags;

    std::filesystem::create_directories(cfg.output_dir);

    // Decoder-side backgrounds for the spatial masks: the original-domain
    // background is frame 1 (object-free by precondition); the reconstructed
    // background comes from the calibrated measurement-domain model.
    const Frame& background_original = frames.front();
    const Frame background_recon =
        reconstruct(phi, gating.background, cfg.solver, cfg.denoiser).image;

    EvalReport report;
    report.rows.resize(static_cast<std::size_t>(n_frames));
    std::vector<Label> agree_original, agree_recon;
    double psnr_sum = 0.0, iter_sum = 0.0;

    for (int i = 0; i < n_frames; ++i) {
        EvalRow& row = report.rows[static_cast<std::size_t>(i)];
        row.frame_id = static_cast<std::uint64_t>(i) + 1;
        row.received_measurements = channel[static_cast<std::size_t>(i)].received_count;
        row.score = scores[static_cast<std::size_t>(i)];
        row.flagged = flags[static_cast<std::size_t>(i)];
        if (!row.flagged) continue;
        if (row.received_measurements == 0) continue;  // nothing survived the channel

        const Frame& original = frames[static_cast<std::size_t>(i)];
        const MeasurementSet& received = channel[static_cast<std::size_t>(i)].received;
        const MeasurementMatrix phi_rows = slice_rows(phi, received.row_indices);
        const ReconstructionResult recon =
            reconstruct(phi_rows, received, cfg.solver, cfg.denoiser, &original);

        row.iterations_used = recon.state.k;
        row.psnr_db = psnr(recon.image, original);
        psnr_sum += *row.psnr_db;
        iter_sum += recon.state.k;
        ++report.reconstructions;

        char name[32];
        std::snprintf(name, sizeof(name), "recon_%04llu.pgm",
                      static_cast<unsigned long long>(row.frame_id));
        save_pgm(recon.image, std::filesystem::path(cfg.output_dir) / name);

        const auto label_of = [&](const Frame& image, const Frame& bg, std::string& text,
                                  double& confidence) -> std::optional<Label> {
            const ForegroundMask mask = spatial_foreground(image, bg, cfg.pixel_tau);
            if (!mask.bbox) {
                text = "no_object";
                return std::nullopt;
            }
            const Label label = classify(model, extract_features(mask, side, side));
            text = decision_name(label);
            confidence = label.confidence;
            return label;
        };
        const auto label_o = label_of(original, background_original, row.label_original,
                                      row.confidence_original);
        const auto label_r = label_of(recon.image, background_recon, row.label_reconstructed,
                                      row.confidence_reconstructed);
        if (label_o && label_r) {
            agree_original.push_back(*label_o);
            agree_recon.push_back(*label_r);
        }
    }

    if (report.reconstructions > 0) {
        report.mean_psnr = psnr_sum / report.reconstructions;
        report.mean_iterations = iter_sum / report.reconstructions;
    }
    if (!agree_original.empty())
        report.agreement_fraction = agreement(agree_original, agree_recon);

    const std::filesystem::path out_dir(cfg.output_dir);
    {
        std::ofstream out(out_dir / "report.csv");
        out << "frame_id,received_measurement_count,iterations_used,psnr_db,"
               "detection_flag,label_original,label_reconstructed\n";
        for (const EvalRow& row : report.rows)
            out << row.frame_id << ',' << row.received_measurements << ','
                << row.iterations_used << ',' << fmt_opt(row.psnr_db) << ','
                << (row.flagged ? 1 : 0) << ',' << row.label_original << ','
                << row.label_reconstructed << '\n';
    }
    {
        std::ofstream out(out_dir / "detection.csv");
        out << "frame_id,score,flag\n";
        for (const EvalRow& row : report.rows)
            out << row.frame_id << ',' << fmt(row.score) << ',' << (row.flagged ? 1 : 0) << '\n';
    }
    for (const bool original : {true, false}) {
        std::ofstream out(out_dir / (original ? "labels_original.csv" : "labels_reconstructed.csv"));
        out << "frame_id,decision,confidence\n";
        for (const EvalRow& row : report.rows) {
            const std::string& text = original ? row.label_original : row.label_reconstructed;
            if (text.empty()) continue;
            const double conf = original ? row.confidence_original : row.confidence_reconstructed;
            out << row.frame_id << ',' << text << ','
                << (text == "no_object" ? std::string() : fmt(conf)) << '\n';
        }
    }
    {
        std::ofstream out(out_dir / "summary.csv");
        out << "mean_psnr,agreement\n"
            << fmt_opt(report.mean_psnr) << ',' << fmt_opt(report.agreement_fraction) << '\n';
    }
    return report;
}

std::vector<SweepRow> experiment_sweep(const PipelineConfig& base,
                                       const std::vector<double>& sub_rates,
                                       const std::vector<double>& loss_ps,
                                       const std::vector<DenoiserKind>& denoisers,
                                       const std::filesystem::path& input_dir) {
    if (sub_rates.empty() || loss_ps.empty() || denoisers.empty())
        throw std::invalid_argument("sweep grid is empty");

    std::vector<SweepRow> rows;
    for (const double sub_rate : sub_rates)
        for (const double loss_p : loss_ps)
            for (const DenoiserKind denoiser : denoisers) {
                PipelineConfig cfg = base;
                cfg.sub_rate = sub_rate;
                cfg.loss.kind = LossModel::Kind::IidErasure;
                cfg.loss.p = loss_p;
                cfg.denoiser.kind = denoiser;
                char name[96];
                std::snprintf(name, sizeof(name), "sr%g_p%g_%s", sub_rate, loss_p,
                              denoiser_kind_name(denoiser).c_str());
                cfg.output_dir = (std::filesystem::path(base.output_dir) / name).string();
                const EvalReport report = run_pipeline(cfg, input_dir);

                SweepRow row;
                row.sub_rate = sub_rate;
                row.loss_p = loss_p;
                row.denoiser = denoiser;
                row.mean_psnr = report.mean_psnr;
                row.mean_iterations = report.mean_iterations;
                row.agreement = report.agreement_fraction;
                rows.push_back(row);
            }

    std::filesystem::create_directories(base.output_dir);
    std::ofstream out(std::filesystem::path(base.output_dir) / "sweep.csv");
    out << "sub_rate,loss_p,denoiser,mean_psnr,mean_iterations,agreement\n";
    for (const SweepRow& row : rows)
        out << fmt(row.sub_rate) << ',' << fmt(row.loss_p) << ','
            << denoiser_kind_name(row.denoiser) << ',' << fmt_opt(row.mean_psnr) << ','
            << fmt_opt(row.mean_iterations) << ',' << fmt_opt(row.agreement) << '\n';
    return rows;
}

}  // namespace csfall
