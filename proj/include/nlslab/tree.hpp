/*
 * tree.hpp — Expanded branching trees of scale ≤ 2 and the machinery built
 * on their decorations: the energy multilinear form T_e, singular sets
 * Λ_{l′,l″}, singular sums S_{l′,l″}, the weight Ψ, the remainder R(T), and
 * the key cancellation check.
 *
 * Structure (§-numbering refers to the tree construction rules):
 *   - root 𝔯 (sign +1) with an odd number of children plus a partner leaf 𝔯′
 *     (sign −1, rightmost first-generation slot, decorated k_𝔯′ = k_𝔯);
 *   - root children signs alternate +,−,+,…; children of a non-root
 *     branching node alternate starting from the parent's sign;
 *   - at scale 2 exactly one root child 𝔫₀ branches; its children are leaves.
 *
 * Decoration constraint at a branching node n with children c:
 *     ι_n k_n = Σ_c ι_c k_c          (partner excluded at the root)
 * For the root (ι_𝔯 = +1) this is the plain signed-sum rule.  The ι_n factor
 * on the left mirrors the ι_n prefactor in the non-root resonance function
 * Ω(k⃗_n) and is what makes T_e over the two scale-2 trees reproduce the
 * II/III terms of the energy derivative (the 𝔫₀-sign-negative tree carries
 * the conjugated inner sum); the unit tests pin both identities.
 *
 * Root-generation functionals over first-generation NODES (𝔫₀ enters with
 * its own decoration, not its leaves):
 *     Ω(k⃗_𝔯)    = Σ_j ι_{𝔯_j}|k_{𝔯_j}|²  − |k_𝔯|²     (exact integer)
 *     ψ_{2s}(k⃗_𝔯) = Σ_j ι_{𝔯_j}|k_{𝔯_j}|^{2s} − |k_𝔯|^{2s}
 *
 * Energy multilinear form (Ω, ψ always the root-generation functionals):
 *     scale 2:  T_e = Σ_dec (ψ_{2s}/Ω)·1_{Ω≠0}·Π_leaves (a^{(𝔩)}_{k_𝔩})^{ι_𝔩}
 *     scale 1:  T_e = Σ_dec  ψ_{2s}  ·1_{Ω=0}·Π_leaves (a^{(𝔩)}_{k_𝔩})^{ι_𝔩}
 * with z^{−1} meaning z̄.  Every node's decoration ranges over the Euclidean
 * ball |k| ≤ N (internal nodes included: that is the honest image of the π_N
 * truncation in the flow).
 *
 * Singular set (cross-pairing l′ ∈ L_𝔯, l″ ∈ L_𝔫₀, ι_{l′}+ι_{l″}=0):
 *   Λ_{l′,l″} = { dec : Ω ≠ 0, k_{l′} = k_{l″},
 *                 Σ_{𝔩∈L_𝔯∖l′}|k_𝔩|  ≤ |k_𝔫₀|^θ + |k_{l′}|^θ,
 *                 Σ_{𝔩∈L_𝔫₀∖l″}|k_𝔩| ≤ |k_𝔫₀|^θ + |k_{l″}|^θ }   (non-strict)
 *   S_{l′,l″}(v) = Σ_{Λ} (ψ_{2s}/Ω)·Π v^{ι}
 *   Ψ = ψ_{2s}/Ω − ψ⁰/Ω⁰,   Ω⁰ = ι_𝔫₀|k_𝔫₀|² + ι_{l′}|k_{l′}|²,
 *                            ψ⁰ = ι_𝔫₀|k_𝔫₀|^{2s} + ι_{l′}|k_{l′}|^{2s}
 *
 * Key cancellation: Σ (ψ⁰/Ω⁰)·Π v^{ι} is real, because for fixed
 * (k_𝔫₀, k_{l″}) the companion sums on the two sides of the tree factor into
 * a squared modulus over the set S(k_𝔫₀,k_{l″}) (momentum + threshold).
 * The factorization needs the whole (k_𝔫₀,k_{l″})-block: cancellation_check
 * therefore sums over Λ with the Ω ≠ 0 clause dropped (it is asymmetric
 * between the two sides and would break realness) and drops whole blocks
 * with Ω⁰ = 0 (the degenerate paired case).  Residual |Im D| is returned.
 */
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nlslab/lattice.hpp"

namespace nlslab {

struct TreeNode {
    int parent = -1;
    int sign = 1;
    bool is_partner = false;
    std::vector<int> children;  // node ids, left to right

    bool leaf() const { return children.empty(); }
};

struct BranchingTree {
    std::vector<TreeNode> nodes;  // id 0 = root, pre-order
    int partner = -1;             // node id of 𝔯′
    int n0 = -1;                  // node id of 𝔫₀; -1 at scale 1

    int scale() const { return n0 < 0 ? 1 : 2; }
    int root() const { return 0; }
    std::vector<int> leaves() const;       // pre-order, partner last
    std::vector<int> root_leaves() const;  // L_𝔯: root's leaf children + partner
    std::vector<int> n0_leaves() const;    // L_𝔫₀
    int size() const { return static_cast<int>(leaves().size()); }

    void validate() const;  // throws on invariant violation
};

struct TreeShape {
    int root_children = 3;  // odd, not counting the partner
    int n0_position = -1;   // 0-based slot of 𝔫₀ among root children (scale 2)
    int n0_children = 0;    // odd (scale 2)
};

BranchingTree build_tree(const TreeShape& shape, int scale);

std::string tree_to_json(const BranchingTree& t);

// A decoration assigns one mode per node id.
using Decoration = std::vector<Mode>;

bool decoration_valid(const BranchingTree& t, const Decoration& k);
long long root_omega(const BranchingTree& t, const Decoration& k);
double root_psi(const BranchingTree& t, const Decoration& k, double s);

// Enumerates every decoration with all nodes in the ball |k| ≤ ball_N, in a
// fixed deterministic order (free leaves in pre-order, each lexicographic).
void for_each_decoration(const BranchingTree& t, int ball_N,
                         const std::function<void(const Decoration&)>& fn);

// Dyadic adaptation: sizes per node id, each in {1,2,4,...} (0 allowed and
// means "the zero mode exactly"); a decoration is adapted iff
// N_n ≤ |k_n| < 2N_n for all n (k_n = 0 for size 0).
struct DyadicProfile {
    std::vector<double> sizes;  // indexed by node id
};

// The dyadic shell L ≤ |k| < 2L as an explicit mode list (just {0} for L = 0);
// throws on non-dyadic L.
std::vector<Mode> dyadic_shell(double L);
bool in_dyadic_shell(double L, Mode k);

bool adapted(const BranchingTree& t, const DyadicProfile& p, const Decoration& k);
void for_each_adapted_decoration(const BranchingTree& t, const DyadicProfile& p,
                                 const std::function<void(const Decoration&)>& fn);

// Leaf ids sorted by non-increasing dyadic size; ties by node id (fixed rule).
std::vector<int> quasi_order(const BranchingTree& t, const DyadicProfile& p);

// Pairing (X, Y, σ) stored as explicit (x, y) leaf pairs.
struct Pairing {
    std::vector<std::pair<int, int>> pairs;
};

// true iff k_x = k_y and ι_x + ι_y = 0 for every pair
bool pairing_satisfied(const BranchingTree& t, const Pairing& p, const Decoration& k);

// Removes paired leaves (each pair inside one generation, never the partner);
// signs of surviving nodes are preserved.  Throws if a cut breaks the
// odd-children invariant or touches 𝔯′/non-leaves.
BranchingTree cut_paired_leaves(const BranchingTree& t, const Pairing& p);

// T_e with one input per leaf (pre-order index).  internal_ball < 0 means
// "use the largest input cutoff".
cplx tree_energy_form(const BranchingTree& t, const std::vector<SpectralField>& leaf_inputs,
                      double s, int internal_ball = -1);
cplx tree_energy_form(const BranchingTree& t, const SpectralField& v, double s,
                      int internal_ball = -1);

struct ThresholdParams {
    double theta = 0.0;
    double delta = 0.0;

    // θ = 1/(50(n₀+1)); δ = 1/(200(n₀+s)), half its ceiling 1/(100(n₀+s))
    static ThresholdParams defaults(int n0, double s);
};

// All (l′ ∈ L_𝔯, l″ ∈ L_𝔫₀) with opposite signs, in a fixed order.
std::vector<std::pair<int, int>> admissible_cross_pairs(const BranchingTree& t);

bool singular_set_member(const BranchingTree& t, const Decoration& k, int l_prime,
                         int l_dprime, const ThresholdParams& params);

cplx singular_sum(const SpectralField& v, const BranchingTree& t, int l_prime, int l_dprime,
                  double s, const ThresholdParams& params);

// Ψ for a decoration; throws std::domain_error when Ω⁰ = 0 (degenerate
// paired case) and std::invalid_argument when Ω = 0.
double psi_weight(const BranchingTree& t, const Decoration& k, int l_prime, double s);

// |Im D| with D = Σ (ψ⁰/Ω⁰)·Π v^{ι} over the symmetric cross-pairing set
// (Λ_{l′,l″} minus its Ω ≠ 0 clause, blocks with Ω⁰ = 0 dropped).
double cancellation_check(const SpectralField& v, const BranchingTree& t, int l_prime,
                          int l_dprime, double s, const ThresholdParams& params);

// R(T)(v) = T_e(v) − Σ_{admissible (l′,l″)} S_{l′,l″}(v)
cplx remainder_form(const SpectralField& v, const BranchingTree& t, double s,
                    const ThresholdParams& params);

}  // namespace nlslab
