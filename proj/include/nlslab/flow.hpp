/*
 * flow.hpp — Time integration of the truncated flow Φ_t^N of
 *     i∂_t u + Δu = π_N(|u|^{2m−2}u),   u = π_N u,
 * plus the free propagator e^{itΔ}, the interaction picture, and gauge
 * rotations.
 *
 * In Fourier variables the free propagator acts as u_k ↦ e^{−it|k|²}u_k.
 * Two schemes:
 *
 *   StrangSplit     second order.  Half linear step (exact phases), full
 *                   nonlinear step by the exact pointwise rotation
 *                   u ↦ e^{−i·dt·|u|^{2m−2}}u followed by re-projection π_N,
 *                   half linear step.
 *
 *   RK4Interaction  fourth order, the reference scheme.  Integrates the
 *                   interaction-picture unknown v = e^{−itΔ}u, whose ODE
 *                       ∂_t v = −i e^{−itΔ} π_N(|e^{itΔ}v|^{2m−2} e^{itΔ}v)
 *                   is non-stiff; the nonlinearity is evaluated by the
 *                   alias-free FFT product.
 *
 * Both schemes use a fixed step and are bit-reproducible.
 */
#pragma once

#include <functional>
#include <vector>

#include "nlslab/lattice.hpp"

namespace nlslab {

struct FlowState {
    double time = 0.0;
    SpectralField field;
};

enum class Scheme { StrangSplit, RK4Interaction };

struct IntegratorSpec {
    Scheme scheme = Scheme::RK4Interaction;
    double dt = 1e-3;
    int N = 0;
    int m = 2;
    // snapshots are recorded every `snapshot_stride` steps (and at t = T)
    int snapshot_stride = 1;
};

// u_k ↦ e^{−it|k|²} u_k  (the free flow e^{itΔ})
SpectralField linear_propagate(const SpectralField& u, double t);

// v(t) = e^{−itΔ} u(t)
SpectralField interaction_picture(const FlowState& state);

// coefficient-wise multiplication by e^{i·phase}
SpectralField gauge_rotate(const SpectralField& u, double phase);

// Integrates from state u0 at t=0 to t=T (T may be negative); returns the
// recorded snapshots, last element at time T.  Aborts on non-finite state,
// returning the trajectory up to the last good snapshot.
std::vector<FlowState> evolve(const SpectralField& u0, double T, const IntegratorSpec& spec);

// Single final state convenience wrapper.
SpectralField evolve_to(const SpectralField& u0, double T, const IntegratorSpec& spec);

}  // namespace nlslab
