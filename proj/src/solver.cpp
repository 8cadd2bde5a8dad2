#include "csfall/solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "csfall/metrics.hpp"

namespace csfall {

namespace {

int square_side(int n) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n)
        throw std::invalid_argument("signal dimension " + std::to_string(n) +
                                    " is not a square frame");
    return side;
}

}  // namespace

SignalVec inversion_step(const MeasurementMatrix& phi, const MeasurementSet& y,
                         const SignalVec& x_tilde, double rho) {
    if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
    if (x_tilde.values.size() != phi.cols())
        throw std::invalid_argument("inversion_step: x_tilde length does not match phi cols");
    if (y.values.size() != phi.rows())
        throw std::invalid_argument("inversion_step: measurement count does not match phi rows");

    SignalVec x = x_tilde;
    const Eigen::VectorXd residual = y.values - phi.entries * x_tilde.values;
    x.values.noalias() += phi.entries.transpose() * (residual / (1.0 + rho));
    return x;
}

SignalVec denoising_step(const DenoiserSpec& spec, const SignalVec& r, double omega) {
    Frame noisy = devectorize(r);
    Frame cleaned = apply_denoiser(spec, noisy, omega);
    return vectorize(cleaned);
}

SignalVec dual_update(const SolverState& state) {
    if (state.x.values.size() != state.v.values.size() ||
        state.x.values.size() != state.dual.values.size())
        throw std::invalid_argument("dual_update: iterate lengths differ");
    SignalVec out = state.dual;
    out.values += state.x.values - state.v.values;
    return out;
}

ReconstructionResult reconstruct(const MeasurementMatrix& phi, const MeasurementSet& y,
                                 const SolverConfig& cfg, const DenoiserSpec& spec,
                                 const Frame* ground_truth) {
    if (cfg.rho <= 0.0) throw std::invalid_argument("rho must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (cfg.rel_tol < 0.0) throw std::invalid_argument("rel_tol must be nonnegative");
    if (y.values.size() == 0) throw std::invalid_argument("cannot reconstruct from zero measurements");
    if (y.values.size() != phi.rows())
        throw std::invalid_argument("measurement count does not match phi rows");
    if (y.matrix_seed != phi.seed)
        throw std::invalid_argument("measurement matrix seed mismatch");

    const int n = phi.cols();
    const int side = square_side(n);
    if (ground_truth && (ground_truth->width != side || ground_truth->height != side))
        throw std::invalid_argument("ground truth dims do not match the signal");

    SolverState state;
    state.x.width = state.v.width = state.dual.width = side;
    state.x.height = state.v.height = state.dual.height = side;
    switch (cfg.x0_policy) {
        case SolverConfig::X0Policy::Backprojection:
            state.x.values = phi.entries.transpose() * y.values;
            break;
        case SolverConfig::X0Policy::Zeros:
            state.x.values = Eigen::VectorXd::Zero(n);
            break;
        case SolverConfig::X0Policy::Supplied:
            if (!cfg.x0 || cfg.x0->values.size() != n)
                throw std::invalid_argument("supplied x0 missing or of wrong length");
            state.x.values = cfg.x0->values;
            break;
    }
    state.v = state.x;
    state.dual.values = Eigen::VectorXd::Zero(n);

    const double omega = cfg.omega_override.value_or(std::sqrt(1.0 / cfg.rho));

    SignalVec x_tilde = state.x;
    for (int k = 0; k < cfg.max_iter; ++k) {
        const Eigen::VectorXd x_prev = state.x.values;

        x_tilde.values = state.v.values - state.dual.values;
        state.x = inversion_step(phi, y, x_tilde, cfg.rho);

        // v-step argument is x + dual in the scaled form; the prior's prox
        // then pulls the consensus variable toward the denoised iterate.
        SignalVec noisy = state.x;
        noisy.values += state.dual.values;
        state.v = denoising_step(spec, noisy, omega);

        state.dual = dual_update(state);

        IterationRecord rec;
        rec.iter = k + 1;
        rec.primal_residual = (state.x.values - state.v.values).norm();
        const double prev_norm = x_prev.norm();
        const double delta = (state.x.values - x_prev).norm();
        rec.rel_change = prev_norm > 0.0
                             ? delta / prev_norm
                             : (delta > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (ground_truth) rec.psnr_db = psnr(devectorize(state.x), *ground_truth);
        state.trace.push_back(rec);
        state.k = k + 1;

        if (rec.rel_change < cfg.rel_tol) break;
    }

    return {devectorize(state.x), std::move(state)};
}

const std::vector<IterationRecord>& residual_trace(const SolverState& state) {
    if (state.trace.empty()) throw std::logic_error("no iterations recorded");
    return state.trace;
}

void write_trace_csv(std::ostream& out, const SolverState& state) {
    out << "iter,primal_residual,rel_change,psnr\n";
    char buf[128];
    for (const IterationRecord& rec : residual_trace(state)) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,", rec.iter, rec.primal_residual,
                      rec.rel_change);
        out << buf;
        if (rec.psnr_db) {
            std::snprintf(buf, sizeof(buf), "%.10g", *rec.psnr_db);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace csfall
