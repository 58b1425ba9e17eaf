/*
 * counting.hpp — Exhaustive verification of the lattice counting estimates
 * and the ψ_{2s} weight bounds at desk scale, reporting empirical constants.
 *
 * K_{L₁,…,L_n}(a, κ) counts unpaired tuples (k₁,…,k_n) with |k_j| ∼ L_j
 * (dyadic shell L ≤ |k| < 2L), Σ ι_j k_j = a and Σ ι_j |k_j|² = κ.
 * "No pairing" = no two slots with equal modes and opposite signs; same-sign
 * coincidences are allowed.  The reference bounds, up to constants:
 *     n = 2: L₂;  n = 3: L₂^{1+ε}L₃;  n ≥ 4: L₂^{1+ε}L₃(L₄···L_n)².
 *
 * sup_count3 computes the exact sup over every target (a, κ) for one shell
 * triple and sign pattern.  It histograms all tuples sliced by a.x (the
 * x-reflection symmetry K(a_x, a_y, κ) = K(−a_x, a_y, κ) halves the scan),
 * with the no-pairing constraint applied by inclusion–exclusion: paired
 * tuples live on sparse (a, κ) sets (shells of different sizes are disjoint,
 * so a pair can only form when its two sizes are equal) and are subtracted
 * from the dense histogram after the fill.
 *
 * verify_psi_bound scans admissible zero-momentum alternating-sign tuples
 * (the decorations of a simple root tree) and reports
 *     sup |ψ_{2s}| / (λ₁^{2s−2}(|Ω| + λ₃²)),
 * λ_l the l-th largest |k_j|.  Assignments with a vanishing denominator
 * force ψ = 0 and are skipped.
 *
 * weighted_sum_scale1/2 evaluate the adapted decoration sums
 * Σ|ψ_{2s}/⟨Ω⟩| (or the ℓ² variants) under the no-pairing rules of the
 * respective lemmas and compare against the printed bounds at a concrete ε.
 * The artifact never asserts an unquantified "≲": reports carry the
 * empirical value, the bound's N-part, and their ratio.
 */
#pragma once

#include <array>
#include <string>
#include <vector>

#include "nlslab/lattice.hpp"
#include "nlslab/tree.hpp"

namespace nlslab {

struct CountQuery {
    std::vector<double> sizes;  // dyadic, non-increasing
    std::vector<int> signs;     // ι_j ∈ {+1, −1}
    Mode a{0, 0};
    long long kappa = 0;
    int cap = 16;  // largest admitted L_j
};

// exact count of unpaired tuples for one target (a, κ)
long long count_K(const CountQuery& q);

struct BoundReport {
    std::string lemma_id;
    std::string parameters;
    double empirical_sup = 0.0;
    double paper_bound = 0.0;
    double ratio = 0.0;  // empirical_sup / paper_bound when paper_bound > 0
    std::string witness;
};

std::string bound_report_csv_row(const BoundReport& r);
// appends to a CSV ledger, writing the header when the file is new
void append_report_csv(const std::string& path, const BoundReport& r);

// Exact sup over all (a, κ) of K_{L₁,L₂,L₃} for one sign pattern; the paper
// bound is L₂^{1+ε}L₃ with the given ε.  Witness is the argmax target,
// re-evaluable through count_K.
BoundReport sup_count3(double L1, double L2, double L3, const std::array<int, 3>& signs,
                       double eps = 0.1, int cap = 16);

// sup of |ψ_{2s}|/(λ₁^{2s−2}(|Ω| + λ₃²)) over zero-momentum alternating
// tuples of length n with every |k_j| ≤ max_norm
BoundReport verify_psi_bound(int max_norm, double s, int n);

enum class SumMode { L1, L2 };

// Scale-1 adapted sum Σ|ψ_{2s}/⟨Ω⟩| (L1) or (Σ|·|²)^{1/2} (L2) with no
// pairing among the leaves, vs. the printed bound at the given ε.
BoundReport weighted_sum_scale1(const BranchingTree& t, const DyadicProfile& p, double s,
                                SumMode mode, double eps = 0.1);

struct Scale2Report {
    BoundReport report;
    double degenerate_share = 0.0;  // fraction with ι_n0 k_n0 + ι_l' k_l' = 0
};

// Scale-2 adapted sum Σ|ψ_{2s}/⟨Ω⟩|² with no same-generation pairing, vs.
// N_{l1}^{4s−2+ε} N_{l3}⁴ Π_{j≥4} N_{lj}².
Scale2Report weighted_sum_scale2(const BranchingTree& t, const DyadicProfile& p, double s,
                                 double eps = 0.1);

}  // namespace nlslab
