// Command-line front end for the compressed-sensing surveillance pipeline:
// encode frames to measurement packets, push them through a lossy channel,
// reconstruct, gate, classify, and run the experiment harness.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csfall/classify.hpp"
#include "csfall/denoise.hpp"
#include "csfall/detect.hpp"
#include "csfall/metrics.hpp"
#include "csfall/packet_io.hpp"
#include "csfall/pipeline.hpp"
#include "csfall/rng.hpp"
#include "csfall/sensing.hpp"
#include "csfall/solver.hpp"
#include "csfall/synth.hpp"

namespace {

using namespace csfall;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) values.push_back(std::stod(tok));
    return values;
}

// Options mirroring PipelineConfig; a value is applied only when set, so the
// precedence is defaults < config file < explicit flags.
struct CommonOpts {
    std::string config_path;
    std::optional<int> frame_size;
    std::optional<double> sub_rate;
    std::optional<std::uint64_t> matrix_seed;
    std::optional<int> payload;
    std::optional<double> loss_p;
    std::optional<std::uint64_t> loss_seed;
    std::optional<std::string> loss_drops;
    std::optional<double> rho;
    std::optional<int> max_iter;
    std::optional<double> rel_tol;
    std::optional<double> omega;
    std::optional<std::string> x0;
    std::optional<std::string> denoiser;
    std::optional<int> kernel_radius;
    std::optional<int> patch_size;
    std::optional<int> search_window;
    std::optional<int> tv_iterations;
    std::optional<double> alpha;
    std::optional<double> tau;
    std::optional<int> calib_frames;
    std::optional<double> pixel_tau;
    std::optional<std::string> model;
    std::optional<std::string> output_dir;
};

void add_common(CLI::App& cmd, CommonOpts& o) {
    cmd.add_option("--config", o.config_path, "flat key=value config file ('#' comments)");
    cmd.add_option("--frame_size", o.frame_size, "square frame side length");
    cmd.add_option("--sub_rate", o.sub_rate, "measurement ratio M/N in (0,1]");
    cmd.add_option("--matrix_seed", o.matrix_seed, "seed for the measurement matrix");
    cmd.add_option("--payload", o.payload, "measurements per packet");
    cmd.add_option("--loss_p", o.loss_p, "iid packet erasure probability");
    cmd.add_option("--loss_seed", o.loss_seed, "channel seed");
    cmd.add_option("--loss_drops", o.loss_drops, "explicit packet_seq drop list, e.g. 1,3,5");
    cmd.add_option("--rho", o.rho, "ADMM penalty");
    cmd.add_option("--max_iter", o.max_iter, "ADMM iteration budget");
    cmd.add_option("--rel_tol", o.rel_tol, "relative-change stopping tolerance");
    cmd.add_option("--omega", o.omega, "denoiser strength override (default sqrt(1/rho))");
    cmd.add_option("--x0", o.x0, "initializer: backprojection | zeros");
    cmd.add_option("--denoiser", o.denoiser, "identity | gaussian_blur | median | tv | nlm");
    cmd.add_option("--kernel_radius", o.kernel_radius, "median kernel radius");
    cmd.add_option("--patch_size", o.patch_size, "nlm patch size (odd)");
    cmd.add_option("--search_window", o.search_window, "nlm search window (odd)");
    cmd.add_option("--tv_iterations", o.tv_iterations, "tv inner iterations");
    cmd.add_option("--alpha", o.alpha, "background learning rate");
    cmd.add_option("--tau", o.tau, "detection threshold (default: calibrated)");
    cmd.add_option("--calib_frames", o.calib_frames, "object-free calibration frames");
    cmd.add_option("--pixel_tau", o.pixel_tau, "foreground pixel threshold");
    cmd.add_option("--model", o.model, "classifier model file");
    cmd.add_option("--output_dir", o.output_dir, "output directory");
}

PipelineConfig build_config(const CommonOpts& o) {
    PipelineConfig cfg;
    if (!o.config_path.empty()) load_config_file(o.config_path, cfg);
    if (o.frame_size) cfg.frame_size = *o.frame_size;
    if (o.sub_rate) cfg.sub_rate = *o.sub_rate;
    if (o.matrix_seed) cfg.matrix_seed = *o.matrix_seed;
    if (o.payload) cfg.packet_payload = *o.payload;
    if (o.loss_p) {
        cfg.loss.kind = LossModel::Kind::IidErasure;
        cfg.loss.p = *o.loss_p;
    }
    if (o.loss_seed) cfg.loss.seed = *o.loss_seed;
    if (o.loss_drops) {
        cfg.loss.kind = LossModel::Kind::Explicit;
        cfg.loss.drop_set.clear();
        for (double v : parse_list(*o.loss_drops))
            cfg.loss.drop_set.push_back(static_cast<std::uint32_t>(v));
    }
    if (o.rho) cfg.solver.rho = *o.rho;
    if (o.max_iter) cfg.solver.max_iter = *o.max_iter;
    if (o.rel_tol) cfg.solver.rel_tol = *o.rel_tol;
    if (o.omega) cfg.solver.omega_override = *o.omega;
    if (o.x0) {
        if (*o.x0 == "backprojection") cfg.solver.x0_policy = SolverConfig::X0Policy::Backprojection;
        else if (*o.x0 == "zeros") cfg.solver.x0_policy = SolverConfig::X0Policy::Zeros;
        else throw std::runtime_error("unknown x0 policy: " + *o.x0);
    }
    if (o.denoiser) cfg.denoiser.kind = denoiser_kind_from_name(*o.denoiser);
    if (o.kernel_radius) cfg.denoiser.kernel_radius = *o.kernel_radius;
    if (o.patch_size) cfg.denoiser.patch_size = *o.patch_size;
    if (o.search_window) cfg.denoiser.search_window = *o.search_window;
    if (o.tv_iterations) cfg.denoiser.tv_iterations = *o.tv_iterations;
    if (o.alpha) cfg.detect_alpha = *o.alpha;
    if (o.tau) cfg.detect_tau = *o.tau;
    if (o.calib_frames) cfg.calib_frames = *o.calib_frames;
    if (o.pixel_tau) cfg.pixel_tau = *o.pixel_tau;
    if (o.model) cfg.classifier_model = *o.model;
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    return cfg;
}

// Packets of one stream grouped by frame_id, ids in ascending order.
std::map<std::uint64_t, std::vector<Packet>> group_by_frame(const std::vector<Packet>& packets) {
    std::map<std::uint64_t, std::vector<Packet>> groups;
    for (const Packet& pkt : packets) groups[pkt.frame_id].push_back(pkt);
    return groups;
}

int cmd_encode(const CommonOpts& opts, const std::string& input, const std::string& output) {
    const PipelineConfig cfg = build_config(opts);
    const auto files = list_frame_files(input);
    if (files.empty()) throw std::runtime_error("no .pgm frames in " + input);

    const int n = cfg.frame_size * cfg.frame_size;
    const MeasurementMatrix phi = build_matrix(cfg.matrix_seed, cfg.measurement_count(), n);

    std::ofstream out(output, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + output);
    std::size_t n_packets = 0;
    std::uint64_t frame_id = 0;
    for (const auto& file : files) {
        const Frame frame = load_pgm(file);
        if (frame.width != cfg.frame_size || frame.height != cfg.frame_size)
            throw std::runtime_error(file.string() + ": dims do not match frame_size");
        const MeasurementSet y = acquire(phi, vectorize(frame), ++frame_id);
        const auto packets = packetize(y, cfg.packet_payload);
        write_packets(out, packets);
        n_packets += packets.size();
    }
    std::cout << "encoded " << frame_id << " frames into " << n_packets << " packets (M="
              << phi.rows() << ", N=" << phi.cols() << ")\n";
    return 0;
}

int cmd_channel(const CommonOpts& opts, const std::string& input, const std::string& output) {
    const PipelineConfig cfg = build_config(opts);
    const auto packets = read_packet_file(input);
    std::vector<Packet> survivors;
    for (auto& [frame_id, group] : group_by_frame(packets)) {
        LossModel loss = cfg.loss;
        if (loss.kind == LossModel::Kind::IidErasure)
            loss.seed = mix_seed(cfg.loss.seed, frame_id);
        for (Packet& pkt : transmit(group, loss)) survivors.push_back(std::move(pkt));
    }
    write_packet_file(output, survivors);
    std::cout << "channel kept " << survivors.size() << " of " << packets.size()
              << " packets\n";
    return 0;
}

int cmd_decode(const CommonOpts& opts, const std::string& input, const std::string& output,
               const std::string& originals_dir) {
    const PipelineConfig cfg = build_config(opts);
    const auto groups = group_by_frame(read_packet_file(input));
    if (groups.empty()) throw std::runtime_error("no packets in " + input);

    std::vector<Frame> originals;
    if (!originals_dir.empty())
        for (const auto& file : list_frame_files(originals_dir)) originals.push_back(load_pgm(file));

    const int n = cfg.frame_size * cfg.frame_size;
    // The wire format carries the matrix seed, so the decoder regenerates
    // phi without any side channel beyond (frame_size, sub_rate).
    std::map<std::uint64_t, MeasurementMatrix> matrices;
    std::filesystem::create_directories(output);
    std::ofstream report(std::filesystem::path(output) / "decode_report.csv");
    report << "frame_id,received_measurement_count,iterations_used,psnr_db\n";

    for (const auto& [frame_id, group] : groups) {
        const std::uint64_t seed = group.front().matrix_seed;
        auto it = matrices.find(seed);
        if (it == matrices.end())
            it = matrices.emplace(seed, build_matrix(seed, cfg.measurement_count(), n)).first;

        const AssembledMeasurements assembled = assemble(group, it->second);
        const Frame* truth = (frame_id >= 1 && frame_id <= originals.size())
                                 ? &originals[frame_id - 1]
                                 : nullptr;
        const ReconstructionResult recon =
            reconstruct(assembled.phi, assembled.y, cfg.solver, cfg.denoiser, truth);

        char name[32];
        std::snprintf(name, sizeof(name), "recon_%04llu.pgm",
                      static_cast<unsigned long long>(frame_id));
        save_pgm(recon.image, std::filesystem::path(output) / name);
        std::snprintf(name, sizeof(name), "trace_%04llu.csv",
                      static_cast<unsigned long long>(frame_id));
        std::ofstream trace(std::filesystem::path(output) / name);
        write_trace_csv(trace, recon.state);

        report << frame_id << ',' << assembled.y.row_indices.size() << ',' << recon.state.k
               << ',' << (truth ? fmt(psnr(recon.image, *truth)) : std::string()) << '\n';
    }
    std::cout << "decoded " << groups.size() << " frames into " << output << "\n";
    return 0;
}

int cmd_detect(const CommonOpts& opts, const std::string& input, const std::string& output) {
    const PipelineConfig cfg = build_config(opts);
    const auto groups = group_by_frame(read_packet_file(input));
    if (groups.empty()) throw std::runtime_error("no packets in " + input);

    const int n = cfg.frame_size * cfg.frame_size;
    const std::uint64_t seed = groups.begin()->second.front().matrix_seed;
    const MeasurementMatrix phi = build_matrix(seed, cfg.measurement_count(), n);

    std::vector<MeasurementSet> sets;
    std::vector<std::uint64_t> ids;
    for (const auto& [frame_id, group] : groups) {
        sets.push_back(assemble(group, phi).y);
        ids.push_back(frame_id);
    }
    if (!sets.front().complete(phi.rows()))
        throw std::runtime_error("first frame arrived incomplete; cannot bootstrap background");

    const GatingResult gating = gate_measurements(sets, sets.front(), cfg.detect_alpha,
                                                  cfg.detect_tau, cfg.calib_frames);
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    out << "frame_id,score,flag\n";
    for (std::size_t i = 0; i < sets.size(); ++i)
        out << ids[i] << ',' << fmt(gating.scores[i]) << ',' << (gating.flags[i] ? 1 : 0) << '\n';
    std::cout << "gated " << sets.size() << " frames, tau=" << fmt(gating.tau) << "\n";
    return 0;
}

int cmd_classify(const CommonOpts& opts, const std::string& input, const std::string& background,
                 const std::string& output) {
    const PipelineConfig cfg = build_config(opts);
    if (cfg.classifier_model.empty()) throw std::runtime_error("--model is required");
    const BaselineModel model = load_model(cfg.classifier_model);
    const Frame bg = load_pgm(background);

    const auto files = list_frame_files(input);
    if (files.empty()) throw std::runtime_error("no .pgm frames in " + input);
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    out << "frame_id,decision,confidence\n";
    std::uint64_t frame_id = 0;
    for (const auto& file : files) {
        ++frame_id;
        const Frame frame = load_pgm(file);
        const ForegroundMask mask = spatial_foreground(frame, bg, cfg.pixel_tau);
        if (!mask.bbox) {
            out << frame_id << ",no_object,\n";
            continue;
        }
        const Label label = classify(model, extract_features(mask, frame.width, frame.height));
        out << frame_id << ',' << (label.decision == Decision::Fall ? "fall" : "no_fall") << ','
            << fmt(label.confidence) << '\n';
    }
    std::cout << "classified " << frame_id << " frames into " << output << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& output, int per_class) {
    const PipelineConfig cfg = build_config(opts);
    const BaselineModel model = train_synthetic_baseline(cfg.frame_size, per_class);
    save_model(model, output);
    std::cout << "trained baseline on " << 2 * per_class << " synthetic frames -> " << output
              << "\n";
    return 0;
}

int cmd_pipeline(const CommonOpts& opts, const std::string& input) {
    const PipelineConfig cfg = build_config(opts);
    const EvalReport report = run_pipeline(cfg, input);
    std::cout << "frames=" << report.rows.size() << " reconstructions=" << report.reconstructions
              << " mean_psnr=" << (report.mean_psnr ? fmt(*report.mean_psnr) : "-")
              << " agreement="
              << (report.agreement_fraction ? fmt(*report.agreement_fraction) : "-") << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& input, const std::string& sub_rates,
              const std::string& loss_ps, const std::string& denoisers) {
    const PipelineConfig cfg = build_config(opts);
    std::vector<DenoiserKind> kinds;
    std::string tok;
    std::istringstream in(denoisers);
    while (std::getline(in, tok, ',')) kinds.push_back(denoiser_kind_from_name(tok));
    const auto rows =
        experiment_sweep(cfg, parse_list(sub_rates), parse_list(loss_ps), kinds, input);
    for (const SweepRow& row : rows)
        std::cout << "sub_rate=" << fmt(row.sub_rate) << " p=" << fmt(row.loss_p) << " "
                  << denoiser_kind_name(row.denoiser)
                  << " mean_psnr=" << (row.mean_psnr ? fmt(*row.mean_psnr) : "-") << "\n";
    return 0;
}

int cmd_denoise_demo(const CommonOpts& opts, const std::string& input, const std::string& sigmas,
                     std::uint64_t noise_seed) {
    const PipelineConfig cfg = build_config(opts);
    const Frame clean = load_pgm(input);
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream csv(std::filesystem::path(cfg.output_dir) / "denoise_demo.csv");
    csv << "sigma,denoiser,psnr_noisy,psnr_denoised\n";

    const DenoiserKind kinds[] = {DenoiserKind::GaussianBlur, DenoiserKind::Median,
                                  DenoiserKind::Tv, DenoiserKind::Nlm};
    int sigma_index = 0;
    for (const double sigma : parse_list(sigmas)) {
        const Frame noisy =
            add_gaussian_noise(clean, sigma, mix_seed(noise_seed, static_cast<std::uint64_t>(sigma_index++)));
        char name[64];
        std::snprintf(name, sizeof(name), "noisy_sigma%g.pgm", sigma);
        save_pgm(noisy, std::filesystem::path(cfg.output_dir) / name);
        for (const DenoiserKind kind : kinds) {
            DenoiserSpec spec = cfg.denoiser;
            spec.kind = kind;
            const Frame denoised = apply_denoiser(spec, noisy, sigma);
            std::snprintf(name, sizeof(name), "%s_sigma%g.pgm", denoiser_kind_name(kind).c_str(),
                          sigma);
            save_pgm(denoised, std::filesystem::path(cfg.output_dir) / name);
            csv << fmt(sigma) << ',' << denoiser_kind_name(kind) << ','
                << fmt(psnr(noisy, clean)) << ',' << fmt(psnr(denoised, clean)) << '\n';
        }
    }
    std::cout << "denoise demo written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_make_frames(const CommonOpts& opts, const std::string& output, const std::string& kind,
                    int n_frames, int calib, int object_from, bool lying, std::uint64_t seed) {
    const PipelineConfig cfg = build_config(opts);
    const int size = cfg.frame_size;
    std::vector<Frame> frames;
    if (kind == "sequence") {
        SequenceSpec spec;
        spec.width = spec.height = size;
        spec.n_frames = n_frames;
        spec.object_from = object_from;
        spec.lying = lying;
        spec.seed = seed;
        frames = synth_sequence(spec);
    } else if (kind == "structured") {
        for (int i = 0; i < calib; ++i) frames.push_back(synth_background(size, size));
        for (int i = 0; i < n_frames; ++i) frames.push_back(synth_structured_frame(size, size, i));
    } else if (kind == "persons") {
        for (int i = 0; i < calib; ++i) frames.push_back(synth_background(size, size));
        for (int i = 0; i < n_frames; ++i)
            frames.push_back(synth_person_frame(size, size, i % 2 == 1, i / 2));
    } else {
        throw std::runtime_error("unknown kind: " + kind + " (sequence|structured|persons)");
    }
    std::filesystem::create_directories(output);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.pgm", i + 1);
        save_pgm(frames[i], std::filesystem::path(output) / name);
    }
    std::cout << "wrote " << frames.size() << " frames to " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compressed-sensing surveillance pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string input, output, originals, background;
    std::string sub_rates = "0.25,0.5,0.75", loss_ps = "0", denoisers = "tv";
    std::string sigmas = "10,20,30", kind = "sequence";
    int per_class = 20, n_frames = 5, calib = 2, object_from = 3;
    bool lying = false;
    std::uint64_t seed = 1;

    auto* encode = app.add_subcommand("encode", "acquire measurements and packetize");
    encode->add_option("--input", input, "frame sequence directory")->required();
    encode->add_option("--output", output, "packet stream file")->required();
    add_common(*encode, opts);

    auto* channel = app.add_subcommand("channel", "simulate the lossy packet channel");
    channel->add_option("--input", input, "packet stream file")->required();
    channel->add_option("--output", output, "surviving packet stream file")->required();
    add_common(*channel, opts);

    auto* decode = app.add_subcommand("decode", "reconstruct frames from packets");
    decode->add_option("--input", input, "packet stream file")->required();
    decode->add_option("--output", output, "output directory")->required();
    decode->add_option("--originals", originals, "original frames for PSNR reporting");
    add_common(*decode, opts);

    auto* detect = app.add_subcommand("detect", "measurement-domain object gating");
    detect->add_option("--input", input, "packet stream file")->required();
    detect->add_option("--output", output, "detection CSV")->required();
    add_common(*detect, opts);

    auto* classify = app.add_subcommand("classify", "fall / no-fall labels for frames");
    classify->add_option("--input", input, "frame directory")->required();
    classify->add_option("--background", background, "background PGM")->required();
    classify->add_option("--output", output, "labels CSV")->required();
    add_common(*classify, opts);

    auto* train = app.add_subcommand("train-classifier", "fit the baseline on synthetic shapes");
    train->add_option("--output", output, "model file")->required();
    train->add_option("--per_class", per_class, "samples per class");
    add_common(*train, opts);

    auto* pipeline = app.add_subcommand("pipeline", "full encode-channel-decode-classify run");
    pipeline->add_option("--input", input, "frame sequence directory")->required();
    add_common(*pipeline, opts);

    auto* sweep = app.add_subcommand("sweep", "grid over sub-rate x loss x denoiser");
    sweep->add_option("--input", input, "frame sequence directory")->required();
    sweep->add_option("--sub_rates", sub_rates, "comma list");
    sweep->add_option("--loss_ps", loss_ps, "comma list");
    sweep->add_option("--denoisers", denoisers, "comma list");
    add_common(*sweep, opts);

    auto* demo = app.add_subcommand("denoise-demo", "noise + all denoisers at each sigma");
    demo->add_option("--input", input, "clean PGM image")->required();
    demo->add_option("--sigmas", sigmas, "comma list of noise levels");
    demo->add_option("--noise_seed", seed, "noise seed");
    add_common(*demo, opts);

    auto* make = app.add_subcommand("make-frames", "write synthetic frame sequences");
    make->add_option("--output", output, "output directory")->required();
    make->add_option("--kind", kind, "sequence | structured | persons");
    make->add_option("--frames", n_frames, "object frame count");
    make->add_option("--calib", calib, "leading background frames");
    make->add_option("--object_from", object_from, "sequence: first object frame (1-based)");
    make->add_flag("--lying", lying, "sequence: fallen object");
    make->add_option("--seed", seed, "scene noise seed");
    add_common(*make, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (encode->parsed()) return cmd_encode(opts, input, output);
        if (channel->parsed()) return cmd_channel(opts, input, output);
        if (decode->parsed()) return cmd_decode(opts, input, output, originals);
        if (detect->parsed()) return cmd_detect(opts, input, output);
        if (classify->parsed()) return cmd_classify(opts, input, background, output);
        if (train->parsed()) return cmd_train(opts, output, per_class);
        if (pipeline->parsed()) return cmd_pipeline(opts, input);
        if (sweep->parsed()) return cmd_sweep(opts, input, sub_rates, loss_ps, denoisers);
        if (demo->parsed()) return cmd_denoise_demo(opts, input, sigmas, seed);
        if (make->parsed()) return cmd_make_frames(opts, output, kind, n_frames, calib,
                                                   object_from, lying, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
