#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "csfall/metrics.hpp"
#include "csfall/solver.hpp"
#include "csfall/synth.hpp"
#include "test_util.hpp"

using namespace csfall;
using csfall::test::random_frame;

namespace {

// Independent dense oracle: solve (phi^T phi + rho I) x = phi^T y + rho x_tilde
// directly. Test-only path, kept away from the Woodbury fast path.
Eigen::VectorXd dense_inversion_oracle(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& x_tilde, double rho) {
    const Eigen::MatrixXd normal =
        phi.transpose() * phi +
        rho * Eigen::MatrixXd::Identity(phi.cols(), phi.cols());
    const Eigen::VectorXd rhs = phi.transpose() * y + rho * x_tilde;
    return normal.ldlt().solve(rhs);
}

SignalVec signal_from(const Eigen::VectorXd& v, int w, int h) {
    SignalVec s;
    s.values = v;
    s.width = w;
    s.height = h;
    return s;
}

MeasurementSet measurements_from(const Eigen::VectorXd& v, std::uint64_t seed) {
    MeasurementSet y;
    y.values = v;
    y.row_indices.resize(static_cast<std::size_t>(v.size()));
    for (std::size_t i = 0; i < y.row_indices.size(); ++i)
        y.row_indices[i] = static_cast<std::uint32_t>(i);
    y.matrix_seed = seed;
    return y;
}

}  // namespace

TEST_CASE("inversion_step returns x_tilde on zero residual") {
    const MeasurementMatrix phi = build_matrix(3, 6, 16);
    std::mt19937_64 engine(8);
    Eigen::VectorXd xt(16);
    for (int i = 0; i < 16; ++i) xt(i) = uniform01(engine) * 255.0;
    const SignalVec x_tilde = signal_from(xt, 4, 4);
    const MeasurementSet y = acquire(phi, x_tilde);

    const SignalVec out = inversion_step(phi, y, x_tilde, 0.7);
    CHECK((out.values - xt).cwiseAbs().maxCoeff() < 1e-12 * xt.norm());
}

TEST_CASE("inversion_step matches the dense normal-equations oracle") {
    std::mt19937_64 engine(12);
    const MeasurementMatrix phi = build_matrix(55, 3, 8);  // spec instance N=8, M=3
    Eigen::VectorXd y_raw(3), xt(8);
    for (int i = 0; i < 3; ++i) y_raw(i) = (uniform01(engine) - 0.5) * 100.0;
    for (int i = 0; i < 8; ++i) xt(i) = (uniform01(engine) - 0.5) * 100.0;

    const SignalVec x_tilde = signal_from(xt, 4, 2);
    MeasurementSet y = measurements_from(y_raw, phi.seed);

    const SignalVec fast = inversion_step(phi, y, x_tilde, 0.7);
    const Eigen::VectorXd dense = dense_inversion_oracle(phi.entries, y_raw, xt, 0.7);
    CHECK((fast.values - dense).norm() / dense.norm() < 1e-8);
}

TEST_CASE("inversion_step collapses to x_tilde at huge rho") {
    std::mt19937_64 engine(13);
    const MeasurementMatrix phi = build_matrix(56, 4, 16);
    Eigen::VectorXd y_raw(4), xt(16);
    for (int i = 0; i < 4; ++i) y_raw(i) = (uniform01(engine) - 0.5) * 100.0;
    for (int i = 0; i < 16; ++i) xt(i) = (uniform01(engine) - 0.5) * 100.0 + 100.0;

    const SignalVec fast =
        inversion_step(phi, measurements_from(y_raw, phi.seed), signal_from(xt, 4, 4), 1e9);
    CHECK((fast.values - xt).norm() / xt.norm() < 1e-6);
    const Eigen::VectorXd dense = dense_inversion_oracle(phi.entries, y_raw, xt, 1e9);
    CHECK((fast.values - dense).norm() / dense.norm() < 1e-8);
}

TEST_CASE("inversion_step satisfies stationarity on random full and partial instances") {
    std::mt19937_64 engine(14);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 64;
        const int m = 1 + static_cast<int>(engine() % 64);
        MeasurementMatrix phi = build_matrix(100 + trial, m, n);

        if (trial % 2 == 1 && m > 2) {  // random row subset, as after packet loss
            std::vector<int> rows;
            for (int i = 0; i < m; ++i)
                if ((engine() & 1u) == 0u) rows.push_back(i);
            if (rows.empty()) rows.push_back(0);
            MeasurementMatrix partial;
            partial.seed = phi.seed;
            partial.entries.resize(static_cast<Eigen::Index>(rows.size()), n);
            for (std::size_t i = 0; i < rows.size(); ++i)
                partial.entries.row(static_cast<Eigen::Index>(i)) = phi.entries.row(rows[i]);
            phi = partial;
        }

        const double rho = std::pow(10.0, -2.0 + 4.0 * uniform01(engine));
        Eigen::VectorXd y_raw(phi.rows()), xt(n);
        for (int i = 0; i < phi.rows(); ++i) y_raw(i) = (uniform01(engine) - 0.5) * 200.0;
        for (int i = 0; i < n; ++i) xt(i) = (uniform01(engine) - 0.5) * 200.0;

        const SignalVec x =
            inversion_step(phi, measurements_from(y_raw, phi.seed), signal_from(xt, 8, 8), rho);
        const Eigen::VectorXd stationarity = phi.entries.transpose() * (phi.entries * x.values) +
                                             rho * x.values -
                                             phi.entries.transpose() * y_raw - rho * xt;
        CHECK(stationarity.cwiseAbs().maxCoeff() < 1e-8 * (1.0 + rho));
    }
}

TEST_CASE("inversion_step validates arguments") {
    const MeasurementMatrix phi = build_matrix(1, 2, 4);
    const SignalVec x_tilde = signal_from(Eigen::Vector4d(1, 2, 3, 4), 2, 2);
    const MeasurementSet y = acquire(phi, x_tilde);
    CHECK_THROWS_AS(inversion_step(phi, y, x_tilde, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(inversion_step(phi, y, x_tilde, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(inversion_step(phi, y, signal_from(Eigen::Vector3d(1, 2, 3), 3, 1), 1.0),
                    std::invalid_argument);
}

TEST_CASE("denoising_step dispatches and preserves dims") {
    const Frame f = random_frame(8, 8, 77);
    const SignalVec r = vectorize(f);
    DenoiserSpec identity;
    CHECK(denoising_step(identity, r, 3.0).values == r.values);

    DenoiserSpec blur;
    blur.kind = DenoiserKind::GaussianBlur;
    const SignalVec blurred = denoising_step(blur, vectorize(Frame(8, 8, 50.0)), 2.0);
    for (int i = 0; i < blurred.values.size(); ++i)
        CHECK(std::abs(blurred.values(i) - 50.0) < 1e-12);
}

TEST_CASE("dual_update arithmetic") {
    SolverState state;
    state.x = signal_from(Eigen::Vector2d(1, 1), 2, 1);
    state.v = signal_from(Eigen::Vector2d(0, 1), 2, 1);
    state.dual = signal_from(Eigen::Vector2d(0, 0), 2, 1);
    CHECK(dual_update(state).values == Eigen::Vector2d(1, 0));

    state.v = state.x;  // consensus: dual unchanged, twice over
    state.dual = signal_from(Eigen::Vector2d(3, -2), 2, 1);
    const SignalVec once = dual_update(state);
    CHECK(once.values == Eigen::Vector2d(3, -2));
    state.dual = once;
    CHECK(dual_update(state).values == Eigen::Vector2d(3, -2));
}

TEST_CASE("square orthogonal instance contracts error by rho/(1+rho) per iteration") {
    const int side = 16, n = side * side;
    const MeasurementMatrix phi = build_matrix(5, n, n);
    const Frame truth = random_frame(side, side, 6);
    const MeasurementSet y = acquire(phi, vectorize(truth));
    const double truth_norm = vectorize(truth).values.norm();

    DenoiserSpec identity;
    for (const int k : {1, 3, 10, 25}) {
        SolverConfig cfg;
        cfg.rho = 1.0;
        cfg.max_iter = k;
        cfg.rel_tol = 0.0;
        cfg.x0_policy = SolverConfig::X0Policy::Zeros;
        const auto [image, state] = reconstruct(phi, y, cfg, identity, &truth);
        const double rel_err =
            (vectorize(image).values - vectorize(truth).values).norm() / truth_norm;
        CHECK(rel_err <= 2.0 * std::pow(0.5, k));
        CHECK(state.k == k);
        CHECK(static_cast<int>(state.trace.size()) == k);
    }
}

TEST_CASE("relative-change trace is monotone nonincreasing on the contraction instance") {
    const int side = 12, n = side * side;
    const MeasurementMatrix phi = build_matrix(15, n, n);
    const Frame truth = random_frame(side, side, 61);
    const MeasurementSet y = acquire(phi, vectorize(truth));

    SolverConfig cfg;
    cfg.rho = 1.0;
    cfg.max_iter = 20;
    cfg.rel_tol = 0.0;
    cfg.x0_policy = SolverConfig::X0Policy::Zeros;
    const auto state = reconstruct(phi, y, cfg, DenoiserSpec{}).state;
    const auto& trace = residual_trace(state);
    for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i].rel_change <= trace[i - 1].rel_change * (1.0 + 1e-12));
}

TEST_CASE("identity denoiser keeps the dual at zero and hits consensus") {
    const MeasurementMatrix phi = build_matrix(25, 128, 256);
    const Frame truth = random_frame(16, 16, 62);
    const MeasurementSet y = acquire(phi, vectorize(truth));

    SolverConfig cfg;
    cfg.max_iter = 8;
    cfg.rel_tol = 0.0;
    const auto state = reconstruct(phi, y, cfg, DenoiserSpec{}).state;
    CHECK(state.dual.values.isZero(0.0));
    CHECK(state.x.values == state.v.values);
    for (const auto& rec : state.trace) CHECK(rec.primal_residual == 0.0);
}

TEST_CASE("backprojection start is already the identity-denoiser fixed point") {
    const MeasurementMatrix phi = build_matrix(26, 64, 256);
    const Frame truth = random_frame(16, 16, 63);
    const MeasurementSet y = acquire(phi, vectorize(truth));

    SolverConfig cfg;  // defaults: backprojection, rel_tol 1e-4
    const auto [image, state] = reconstruct(phi, y, cfg, DenoiserSpec{});
    CHECK(state.k == 1);  // x1 == x0 exactly, so the loop stops immediately
    CHECK((vectorize(image).values - phi.entries.transpose() * y.values).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("zero measurements with zero start stay at the origin") {
    const MeasurementMatrix phi = build_matrix(27, 64, 256);
    MeasurementSet y;
    y.values = Eigen::VectorXd::Zero(64);
    y.row_indices.resize(64);
    for (std::size_t i = 0; i < 64; ++i) y.row_indices[i] = static_cast<std::uint32_t>(i);
    y.matrix_seed = phi.seed;

    SolverConfig cfg;
    cfg.x0_policy = SolverConfig::X0Policy::Zeros;
    const auto [image, state] = reconstruct(phi, y, cfg, DenoiserSpec{});
    for (double p : image.pixels) CHECK(p == 0.0);
    CHECK(static_cast<int>(state.trace.size()) == state.k);
}

TEST_CASE("tv reconstruction beats the backprojection initializer by 5 dB") {
    const int side = 32, n = side * side;
    const Frame truth = synth_structured_frame(side, side, 1);
    const MeasurementMatrix phi = build_matrix(9, n / 2, n);
    const MeasurementSet y = acquire(phi, vectorize(truth));

    SignalVec backprojection;
    backprojection.values = phi.entries.transpose() * y.values;
    backprojection.width = backprojection.height = side;
    const double psnr_bp = psnr(devectorize(backprojection), truth);

    SolverConfig cfg;
    cfg.rho = 1.0;
    cfg.max_iter = 25;
    cfg.rel_tol = 0.0;
    cfg.omega_override = 25.0;
    DenoiserSpec tv;
    tv.kind = DenoiserKind::Tv;
    const auto [image, state] = reconstruct(phi, y, cfg, tv, &truth);
    const double psnr_tv = psnr(image, truth);
    CHECK(psnr_tv >= psnr_bp + 5.0);
    CHECK(state.trace.back().psnr_db.has_value());
}

TEST_CASE("reconstruction commutes with a lossless packet channel bit-for-bit") {
    const int side = 16, n = side * side;
    const Frame truth = synth_structured_frame(side, side, 2);
    const MeasurementMatrix phi = build_matrix(41, n / 2, n);
    const MeasurementSet y = acquire(phi, vectorize(truth), 5);

    const auto assembled = assemble(transmit(packetize(y, 7), LossModel::iid(0.0, 3)), phi);
    SolverConfig cfg;
    cfg.max_iter = 10;
    cfg.rel_tol = 0.0;
    cfg.omega_override = 20.0;
    DenoiserSpec tv;
    tv.kind = DenoiserKind::Tv;

    const Frame direct = reconstruct(phi, y, cfg, tv).image;
    const Frame channeled = reconstruct(assembled.phi, assembled.y, cfg, tv).image;
    CHECK(direct == channeled);
}

TEST_CASE("solver validates inputs") {
    const MeasurementMatrix phi = build_matrix(4, 8, 16);
    const Frame truth = random_frame(4, 4, 9);
    const MeasurementSet y = acquire(phi, vectorize(truth));
    DenoiserSpec identity;

    SolverConfig bad_rho;
    bad_rho.rho = 0.0;
    CHECK_THROWS_AS(reconstruct(phi, y, bad_rho, identity), std::invalid_argument);

    MeasurementSet empty;
    empty.matrix_seed = phi.seed;
    CHECK_THROWS_AS(reconstruct(phi, empty, SolverConfig{}, identity), std::invalid_argument);

    MeasurementSet wrong_seed = y;
    wrong_seed.matrix_seed = 999;
    CHECK_THROWS_AS(reconstruct(phi, wrong_seed, SolverConfig{}, identity),
                    std::invalid_argument);

    // non-square signal dimension
    const MeasurementMatrix phi_ns = build_matrix(4, 3, 12);
    SignalVec x;
    x.values = Eigen::VectorXd::Zero(12);
    x.width = 4;
    x.height = 3;
    const MeasurementSet y_ns = acquire(phi_ns, x);
    CHECK_THROWS_AS(reconstruct(phi_ns, y_ns, SolverConfig{}, identity), std::invalid_argument);
}

TEST_CASE("residual_trace and csv output") {
    SolverState empty;
    CHECK_THROWS_AS(residual_trace(empty), std::logic_error);

    const MeasurementMatrix phi = build_matrix(30, 64, 64);
    const Frame truth = random_frame(8, 8, 10);
    const MeasurementSet y = acquire(phi, vectorize(truth));
    SolverConfig cfg;
    cfg.max_iter = 4;
    cfg.rel_tol = 0.0;
    const auto state = reconstruct(phi, y, cfg, DenoiserSpec{}).state;
    CHECK(residual_trace(state).size() == 4);

    std::ostringstream csv;
    write_trace_csv(csv, state);
    const std::string text = csv.str();
    CHECK(text.rfind("iter,primal_residual,rel_change,psnr\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);  // header + 4 rows
    CHECK(text.back() == '\n');
    // no ground truth -> psnr column empty -> rows end with ','
    const auto first_row = text.substr(text.find('\n') + 1);
    CHECK(first_row[first_row.find('\n') - 1] == ',');
}
