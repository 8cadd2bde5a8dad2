#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "csfall/denoise.hpp"
#include "csfall/frame.hpp"
#include "csfall/sensing.hpp"

namespace csfall {

// Plug-and-play ADMM: a closed-form inversion step against the measurements,
// an off-the-shelf denoiser as the prior's proximal step, and a scaled dual
// update, iterated to a fixed budget or a relative-change tolerance.

struct SolverConfig {
    enum class X0Policy { Backprojection, Zeros, Supplied };

    double rho = 1.0;       // augmented Lagrangian penalty, > 0
    int max_iter = 25;
    double rel_tol = 1e-4;  // stop when ||x_k+1 - x_k|| / ||x_k|| drops below
    std::optional<double> omega_override;  // denoiser strength; default sqrt(1/rho)
    X0Policy x0_policy = X0Policy::Backprojection;
    std::optional<SignalVec> x0;  // read when policy == Supplied
};

struct IterationRecord {
    int iter = 0;              // 1-based
    double primal_residual = 0.0;  // ||x - v||_2
    double rel_change = 0.0;       // ||x_k+1 - x_k|| / ||x_k||
    std::optional<double> psnr_db;  // vs ground truth, when given
};

struct SolverState {
    SignalVec x;
    SignalVec v;
    SignalVec dual;  // scaled multiplier
    int k = 0;
    std::vector<IterationRecord> trace;
};

// Exact minimizer of the data-fidelity subproblem,
//   (phi^T phi + rho I) x = phi^T y + rho x_tilde,
// computed as x_tilde + phi^T (y - phi x_tilde) / (1 + rho). Valid because
// phi's rows are orthonormal; O(MN) per call, no N x N solve.
SignalVec inversion_step(const MeasurementMatrix& phi, const MeasurementSet& y,
                         const SignalVec& x_tilde, double rho);

// Devectorizes r, applies the chosen denoiser at strength omega, revectorizes.
SignalVec denoising_step(const DenoiserSpec& spec, const SignalVec& r, double omega);

// dual + x - v, elementwise.
SignalVec dual_update(const SolverState& state);

struct ReconstructionResult {
    Frame image;
    SolverState state;
};

// Full loop: x0 per policy, v0 = x0, dual0 = 0; per iteration
//   x_tilde = v - dual; x <- inversion_step; v <- D_omega(x + dual);
//   dual <- dual + x - v.
// ground_truth, when given, adds a PSNR column to the trace.
ReconstructionResult reconstruct(const MeasurementMatrix& phi, const MeasurementSet& y,
                                 const SolverConfig& cfg, const DenoiserSpec& spec,
                                 const Frame* ground_truth = nullptr);

// Per-iteration trace for CSV emission; throws when no iteration has run.
const std::vector<IterationRecord>& residual_trace(const SolverState& state);

// Header: iter,primal_residual,rel_change,psnr (psnr empty without ground truth).
void write_trace_csv(std::ostream& out, const SolverState& state);

}  // namespace csfall
