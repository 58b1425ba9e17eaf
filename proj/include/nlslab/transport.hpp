/*
 * transport.hpp — Monte Carlo moments of the weighted measure and exact
 * evaluation of the abstract quasi-invariance density bounds.
 *
 * Weighted measure experiments (all under the energy cutoff
 * H_N[u]/(2π)² ≤ λ, the volume-averaged normalization):
 *   weighted_density_moments   ‖1_{H_N≤λ} e^{|R_{s,N}|}‖_{L^p(dμ_s)}
 *   qn_moment_scan             ‖1_{H_N≤λ} Q_N‖_{L^p(dμ_s)} over a p grid,
 *                              with the growth exponent β from a least-squares
 *                              fit of log-estimate against log p.  The
 *                              reference bound is C·p^{1−ε₀}, i.e. β < 1.
 *
 * Abstract density machinery, for a flow Φ_t with
 *   ‖dμ_{t₁}/dμ_{t₂}‖_{L^p} ≤ M_p  and
 *   (d/dt) μ_t(Φ_t⁻¹A) ≤ C₀ r^{1−α} μ_t(Φ_t⁻¹A)^{1−1/r}:
 *
 *   gronwall_envelope   y(t) ≤ (y₀^{1/r} + C₀|t| r^{−α})^r, the integrated
 *                       form of the differential inequality.
 *   weak_lq_bound       the two-branch supremum certifying
 *                       ‖f_t‖_{L^{q,∞}(dμ_t)} ≤ C exp(C(1+T^{2/α})):
 *                       branch 1 (small sets, μ(E) = e^{−b}, b ≥ b₀) takes
 *                       r = b/log log b and evaluates
 *                         exp(r log M − b/(2q) + T r^{1−α} e^{(b/r)(1−1/(2q))}),
 *                       M = max(C₀, M_p); branch 2 (large sets) takes r = 2
 *                       through the Grönwall envelope.  b₀ is the smallest
 *                       value satisfying the three proof conditions
 *                         log b/(log log b)^{1−α} ≤ b^{α/2},
 *                         b ≥ (T/4q)^{2/α},  b ≥ exp exp(log M/(4q)).
 *   transported_set_bound   μ_t(Φ_t⁻¹A) ≤ C·μ_t(A)^{1−ε₀} with C from the
 *                       weak-L^q machinery; ε₀ is an input throughout (the
 *                       reference argument never exhibits its value).
 *
 * MC estimates inherit the ensemble's determinism: per-index values combined
 * by index-ordered pairwise summation, bit-identical for any worker count.
 */
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlslab/ensemble.hpp"
#include "nlslab/lattice.hpp"

namespace nlslab {

struct DensityBoundParams {
    double C0 = 1.0;
    double alpha = 0.5;  // ∈ (0,1)
    double M_p = 1.0;
    double T = 1.0;   // ≥ 1
    double q = 2.0;   // > 1
    double b0 = 0.0;  // ≤ 0: computed by admissible_b0
};

struct WeightedMomentResult {
    MCEstimate estimate;
    double acceptance_fraction = 0.0;  // share of samples passing the cutoff
    bool valid = false;                // false when no sample was accepted
};

// ‖1_{H_m[u]/(2π)²≤λ} e^{|G(u)|}‖_{L^p} over the ensemble.
WeightedMomentResult weighted_functional_moment(
    const std::function<double(const SpectralField&)>& G, double lambda, int m, double p,
    const EnsembleSpec& spec);

// G = R_{s,N}, m = 2; the ensemble's s and cutoff are overridden by (s, N).
WeightedMomentResult weighted_density_moments(double s, double lambda, int N, double p,
                                              const EnsembleSpec& spec);

struct MomentScan {
    std::vector<double> p_values;  // strictly increasing, ≥ 2 entries
    std::vector<MCEstimate> estimates;
    double fitted_beta = 0.0;
    double beta_ci = 0.0;  // 2σ half-width from per-point delta-method errors
    double acceptance_fraction = 0.0;
};

// ‖1_{H_m≤λ}|F|‖_{L^p} per p, one sampling pass shared across the grid.
// Throws when no sample passes the cutoff.
MomentScan functional_moment_scan(const std::function<double(const SpectralField&)>& F,
                                  double lambda, int m, const std::vector<double>& p_values,
                                  const EnsembleSpec& spec);

// F = Q_N(·; s), m = 2.
MomentScan qn_moment_scan(double s, double lambda, int N, const std::vector<double>& p_values,
                          const EnsembleSpec& spec);

// smallest b satisfying the three proof conditions (doubling scan + bisection)
double admissible_b0(const DensityBoundParams& params);

// (y0^{1/r} + C0·|t|·r^{−α})^r, r > 1
double gronwall_envelope(double y0, const DensityBoundParams& params, double r, double t);

// certified weak-L^q constant: max of the two branch suprema
double weak_lq_bound(const DensityBoundParams& params);

// weak_lq_bound(params) · rho_A^{1−ε₀}
double transported_set_bound(double rho_A, const DensityBoundParams& params, double eps0);

// CSV ledgers (header written when the file is new)
void append_moment_csv(const std::string& path, double s, double lambda, int N, double p,
                       const MCEstimate& e);
void append_bound_csv(const std::string& path, const std::string& params, double value);

}  // namespace nlslab
