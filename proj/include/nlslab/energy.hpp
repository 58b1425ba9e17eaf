/*
 * energy.hpp — The modified energy E_s and its exact time derivative.
 *
 * For v in the interaction picture (v = e^{−itΔ}u, coefficients v_k), and
 * zero-momentum 2m-tuples k⃗ = (k₁,…,k_{2m}) with alternating signs
 * ι_j = (−1)^{j−1}:
 *
 *   Ω(k⃗)    = Σ ι_j |k_j|²          (exact integer)
 *   ψ_{2s}(k⃗) = Σ ι_j |k_j|^{2s}
 *
 *   R_{s,t}(v) = (1/2m) Im Σ_{Ω≠0} (ψ_{2s}/(−iΩ)) e^{−itΩ} v_{k₁}v̄_{k₂}···v̄_{k_{2m}}
 *   E_{s,t}(v) = ½|||v|||²_{H^s} + R_{s,t}(v)      (Equivalent norm)
 *
 * The derivative d/dt E_{s,t}(v(t)) = I + II + III with
 *   I   = −(1/2m) Im Σ_{Ω=0} ψ_{2s} v_{k₁}v̄_{k₂}···v̄_{k_{2m}}
 *   II  = +½ Im Σ_{Ω≠0} (ψ_{2s}/Ω) e^{−itΩ} (i∂_t v_{k₁}) v̄_{k₂}···v̄_{k_{2m}}
 *   III = −½ Im Σ_{Ω≠0} (ψ_{2s}/Ω) e^{−itΩ} v_{k₁} conj(i∂_t v_{k₂}) v_{k₃}···v̄_{k_{2m}}
 * where i∂_t v_k = e^{it|k|²}·(π_N|u|^{2m−2}u)_k is the truncated equation's
 * right side (the "substitution route": the literal inner p-/q-sums collapse
 * to one power_nonlinearity evaluation, dropping the cost from M^{4m−3} to
 * M^{2m−1}).  The literal nested double sum is kept as an oracle for tiny N.
 *
 * Q_N(u) = (I + II + III) at t = 0 with v = u.
 *
 * All tuple sums enumerate 2m−1 free modes over the ball |k| ≤ N in a fixed
 * lexicographic order; Ω and the Ω ≠ 0 test are exact integer arithmetic.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlslab/lattice.hpp"

namespace nlslab {

// A 2m-tuple with implicit alternating signs ι_j = (−1)^{j−1}.
struct SignedTuple {
    std::vector<Mode> modes;

    long long signed_momentum_x() const;
    long long signed_momentum_y() const;
};

long long omega(const SignedTuple& t);
double psi2s(const SignedTuple& t, double s);

struct EnergyReport {
    double h_s_half_sq = 0.0;  // ½|||v|||²
    double r_s = 0.0;
    double e_s = 0.0;  // h_s_half_sq + r_s
    double term_I = 0.0;
    double term_II = 0.0;
    double term_III = 0.0;
    double q_n = 0.0;  // term_I + term_II + term_III
    // provenance
    double s = 0.0;
    int m = 0;
    int N = 0;
    double t = 0.0;
    std::uint64_t input_hash = 0;
};

std::string report_to_json(const EnergyReport& r);

// R_{s,t}(u); t defaults to 0, giving R_s of the weighted measure.
double correction_R_s(const SpectralField& u, double s, int m, int N, double t = 0.0);

// e_s parts only (terms I–III left zero).
EnergyReport modified_energy_E_s(const SpectralField& u, double s, int m, int N, double t = 0.0);

// I, II, III and q_n at time t for the interaction-picture field v.
EnergyReport derivative_terms(const SpectralField& v, double t, double s, int m, int N);

// Q_N(u): derivative_terms with v = u, t = 0.
double q_n_at_zero(const SpectralField& u, double s, int m, int N);

// Oracle: II + III by the literal nested double sum of the derivative
// formula (cost M^{4m−3}; only sensible for N ≤ 2).
double literal_II_plus_III(const SpectralField& v, double t, double s, int m, int N);

// Guard for tuple enumerations: (ball size)^{2m−1} must stay below this.
inline constexpr double kTupleBudget = 4e9;

}  // namespace nlslab
