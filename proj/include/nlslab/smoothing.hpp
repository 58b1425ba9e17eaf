/*
 * smoothing.hpp — Gauge-decomposed smoothing diagnostics and the
 * lack-of-smoothing counterexample for the cubic equation.
 *
 * Gauge decomposition:  u(t) = e^{−it·γ(φ)}(e^{itΔ}φ + w(t)) with the phase
 * rate γ(φ) = (1/2π²)∫|φ|² = 2Σ|φ_k|².  smoothing_remainder measures
 * ‖w(t)‖_{H^{s₁}} (Bracket convention) along a computed trajectory.
 *
 * First Picard iterate of the Duhamel term for the Wick-ordered cubic
 * :|v|²v: = |v|²v − (1/2π²)‖v‖²_{L²}v, in the interaction picture (the
 * physical iterate is e^{itΔ} of this patch; norms agree):
 *
 *   Î₁(t;φ)_k = Σ_{k₁−k₂+k₃=k, k₂∉{k₁,k₃}}
 *                 (2 sin(tΩ/2)/(iΩ)) e^{−itΩ/2} φ̂₁ φ̄̂₂ φ̂₃
 *               − (t/i)|φ̂_k|² φ̂_k,
 *   Ω = |k₁|²−|k₂|²+|k₃|²−|k|²; the Ω = 0 summands take the limit value
 *   t/i (removable singularity — the sum is restricted to k₂ ∉ {k₁,k₃}
 *   but NOT to Ω ≠ 0).
 *
 * The diagonal (gauge) term carries a minus sign: expanding the convolution,
 * the k₂ ∈ {k₁,k₃} diagonals contribute (2Σ_j|φ_j|²)φ_k − |φ_k|²φ_k, and the
 * Wick subtraction removes exactly (2Σ_j|φ_j|²)φ_k, leaving −|φ_k|²φ_k.
 * The Simpson quadrature oracle pins this sign.
 *
 * Counterexample data (slab + atoms):
 *   φ̂_n(ξ,η) = n^{−σ−1/2}·1{ξ=0, η∈[n,2n]} + 1{(1,0)} + 1{(2,0)}.
 * At k = (1,η), η ∈ [n,2n], the two principal triples
 * ((0,η),(1,0),(2,0)) and ((2,0),(1,0),(0,η)) both have Ω = 2, giving
 * coefficients ∝ sin t · e^{−it} · n^{−σ−1/2} and the squared H^{σ₁} norm
 * grows like |sin t|² n^{2(σ₁−σ)}.  (Sub-leading slab-internal triples exist
 * at relative order n^{−2}; the closed form includes them.)
 */
#pragma once

#include <vector>

#include "nlslab/flow.hpp"
#include "nlslab/lattice.hpp"

namespace nlslab {

struct CounterexampleData {
    int n = 1;           // slab height parameter, η ∈ [n, 2n]
    double sigma = 0.0;  // slab amplitude n^{−σ−1/2}

    SpectralField field() const;  // cutoff 2n
};

// γ(φ) = (1/2π²)·mass(φ) = 2Σ|φ_k|²
double gauge_rate(const SpectralField& phi);

struct SmoothingReport {
    std::vector<double> times;
    std::vector<double> w_norms;  // ‖w(t)‖_{H^{s₁}}, Bracket convention
    double gauge_phase_rate = 0.0;
};

// w(t) = e^{it·γ(φ)}u(t) − e^{itΔ}φ per snapshot; the trajectory must start
// at (t = 0, φ).
SmoothingReport smoothing_remainder(const SpectralField& phi,
                                    const std::vector<FlowState>& trajectory, double s1);

// Closed-form interaction-picture first Picard iterate (cubic case).
SpectralField picard_iterate(const SpectralField& phi, double t);

// Physical Duhamel integral (1/i)∫₀ᵗ e^{i(t−t′)Δ} :|e^{it′Δ}φ|²e^{it′Δ}φ: dt′
// by composite Simpson quadrature with `panels` (even) subintervals.
SpectralField duhamel_oracle(const SpectralField& phi, double t, int panels);

struct DivergenceFit {
    std::vector<int> n_values;
    std::vector<double> norms;  // ‖I₁(t;φ_n)‖_{H^{σ₁}}
    double slope = 0.0;         // least-squares slope of log norm vs log n
    double residual = 0.0;      // rms residual of the fit
};

// expected slope σ₁ − σ away from the exceptional set t ∈ πZ
DivergenceFit divergence_scan(double sigma, double sigma1, double t,
                              const std::vector<int>& n_list);

// H^{σ₁} norm of the iterate restricted to the slab image k = (1,η), η ∈ [n,2n]
double slab_block_norm(const CounterexampleData& d, double t, double sigma1);

}  // namespace nlslab
