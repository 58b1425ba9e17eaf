/*
 * ensemble.hpp — Sampling the Gaussian measure μ_s and seeded Monte Carlo.
 *
 * A μ_s sample truncated to the ball |k| ≤ N is
 *     π_N φ^ω = Σ_{|k|≤N} g_k(ω) ⟨k⟩^{−s} e^{ik·x},
 * with independent standard complex Gaussians g_k (E|g_k|² = 1; the
 * normalization is isolated in rng.hpp).  Each sample is a pure function of
 * (base_seed, index), and each mode's sub-stream of (base_seed, index, k),
 * so truncations at different N are coupled consistently.
 *
 * Monte Carlo reductions store per-index values and combine them by
 * index-ordered pairwise summation: the estimate is bit-identical for any
 * worker count.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nlslab/lattice.hpp"
#include "nlslab/rng.hpp"

namespace nlslab {

struct EnsembleSpec {
    double s = 2.5;
    int cutoff_N = 0;
    std::uint64_t sample_count = 1;
    std::uint64_t base_seed = 0;
    int workers = 1;
};

struct MCEstimate {
    double mean = 0.0;
    double stderr_est = 0.0;  // sample standard deviation / sqrt(count)
    std::uint64_t count = 0;
};

SpectralField sample_mu_s(const EnsembleSpec& spec, std::uint64_t index);

// Numerically stable deterministic reduction (recursive halving).
double pairwise_sum(const std::vector<double>& x);

// Evaluates F on every sample (parallel across workers, deterministic
// regardless of their number) and returns mean/stderr.  Non-finite values of
// F are reported with the offending index.
MCEstimate mc_expectation(const std::function<double(const SpectralField&)>& F,
                          const EnsembleSpec& spec);

// (E|F|^p)^{1/p} with delta-method standard error.
MCEstimate mc_lp_norm(const std::function<double(const SpectralField&)>& F, double p,
                      const EnsembleSpec& spec);

// Shared helper: evaluates F across the ensemble into an index-ordered vector.
std::vector<double> mc_values(const std::function<double(const SpectralField&)>& F,
                              const EnsembleSpec& spec);

// mean/stderr of a value vector (pairwise sums).
MCEstimate summarize(const std::vector<double>& values);

// (mean |x|^p)^{1/p} and delta-method stderr from raw values.
MCEstimate lp_from_values(const std::vector<double>& values, double p);

}  // namespace nlslab
