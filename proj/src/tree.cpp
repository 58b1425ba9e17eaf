#include "nlslab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nlslab/energy.hpp"  // kTupleBudget

namespace nlslab {

// ── structure ────────────────────────────────────────────────────────────────

std::vector<int> BranchingTree::leaves() const {
    std::vector<int> out;
    std::function<void(int)> walk = [&](int id) {
        if (nodes[static_cast<std::size_t>(id)].leaf())
            out.push_back(id);
        else
            for (int c : nodes[static_cast<std::size_t>(id)].children) walk(c);
    };
    walk(0);
    return out;
}

std::vector<int> BranchingTree::root_leaves() const {
    std::vector<int> out;
    for (int c : nodes[0].children)
        if (nodes[static_cast<std::size_t>(c)].leaf()) out.push_back(c);
    return out;  // partner is the last root child, hence included last
}

std::vector<int> BranchingTree::n0_leaves() const {
    std::vector<int> out;
    if (n0 < 0) return out;
    for (int c : nodes[static_cast<std::size_t>(n0)].children)
        if (nodes[static_cast<std::size_t>(c)].leaf()) out.push_back(c);
    return out;
}

void BranchingTree::validate() const {
    if (nodes.empty() || nodes[0].parent != -1)
        throw std::invalid_argument("tree: missing root");
    if (partner < 0 || !nodes[static_cast<std::size_t>(partner)].is_partner ||
        nodes[static_cast<std::size_t>(partner)].parent != 0 ||
        nodes[0].children.empty() || nodes[0].children.back() != partner)
        throw std::invalid_argument("tree: partner must be the last root child");
    // root: odd children plus the partner leaf
    if (nodes[0].children.size() % 2 != 0)
        throw std::invalid_argument("tree: root must have an odd child count plus partner");
    if (nodes[0].sign != 1 || nodes[static_cast<std::size_t>(partner)].sign != -1)
        throw std::invalid_argument("tree: root/partner sign convention violated");
    int branching = 0;
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const TreeNode& n = nodes[id];
        if (!n.leaf()) {
            ++branching;
            if (id != 0 && n.children.size() % 2 == 0)
                throw std::invalid_argument("tree: branching node needs an odd child count");
            for (int c : n.children)
                if (nodes[static_cast<std::size_t>(c)].parent != static_cast<int>(id))
                    throw std::invalid_argument("tree: parent link broken");
        }
    }
    if (branching > 2) throw std::invalid_argument("tree: scale > 2 unsupported");
    if ((n0 >= 0) != (branching == 2))
        throw std::invalid_argument("tree: n0 marker inconsistent with branching count");
}

BranchingTree build_tree(const TreeShape& shape, int scale) {
    if (scale != 1 && scale != 2) throw std::invalid_argument("build_tree: scale must be 1 or 2");
    if (shape.root_children < 1 || shape.root_children % 2 == 0)
        throw std::invalid_argument("build_tree: root child count must be odd");
    if (scale == 2) {
        if (shape.n0_position < 0 || shape.n0_position >= shape.root_children)
            throw std::invalid_argument("build_tree: n0 position out of range");
        if (shape.n0_children < 1 || shape.n0_children % 2 == 0)
            throw std::invalid_argument("build_tree: n0 child count must be odd");
    }

    BranchingTree t;
    t.nodes.push_back(TreeNode{-1, +1, false, {}});
    for (int j = 0; j < shape.root_children; ++j) {
        int sign = (j % 2 == 0) ? +1 : -1;  // root children alternate +,−,+,…
        int id = static_cast<int>(t.nodes.size());
        t.nodes.push_back(TreeNode{0, sign, false, {}});
        t.nodes[0].children.push_back(id);
        if (scale == 2 && j == shape.n0_position) {
            t.n0 = id;
            for (int c = 0; c < shape.n0_children; ++c) {
                // children alternate starting from the parent's sign
                int csign = (c % 2 == 0) ? sign : -sign;
                int cid = static_cast<int>(t.nodes.size());
                t.nodes.push_back(TreeNode{id, csign, false, {}});
                t.nodes[static_cast<std::size_t>(id)].children.push_back(cid);
            }
        }
    }
    t.partner = static_cast<int>(t.nodes.size());
    t.nodes.push_back(TreeNode{0, -1, true, {}});
    t.nodes[0].children.push_back(t.partner);
    t.validate();
    return t;
}

std::string tree_to_json(const BranchingTree& t) {
    std::function<nlohmann::json(int)> walk = [&](int id) {
        const TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
        nlohmann::json j;
        j["sign"] = n.sign;
        if (n.is_partner) j["partner"] = true;
        if (id == t.n0) j["n0"] = true;
        if (!n.leaf()) {
            nlohmann::json kids = nlohmann::json::array();
            for (int c : n.children) kids.push_back(walk(c));
            j["children"] = std::move(kids);
        }
        return j;
    };
    return walk(0).dump();
}

// ── decorations ──────────────────────────────────────────────────────────────

namespace {

inline int sgn(const BranchingTree& t, int id) {
    return t.nodes[static_cast<std::size_t>(id)].sign;
}

// signed child sum Σ ι_c k_c, partner excluded at the root
Mode child_sum(const BranchingTree& t, const Decoration& k, int id) {
    Mode acc{0, 0};
    for (int c : t.nodes[static_cast<std::size_t>(id)].children) {
        if (t.nodes[static_cast<std::size_t>(c)].is_partner) continue;
        acc = acc + sgn(t, c) * k[static_cast<std::size_t>(c)];
    }
    return acc;
}

}  // namespace

bool decoration_valid(const BranchingTree& t, const Decoration& k) {
    if (k.size() != t.nodes.size()) return false;
    if (!(k[static_cast<std::size_t>(t.partner)] == k[0])) return false;
    for (std::size_t id = 0; id < t.nodes.size(); ++id) {
        if (t.nodes[id].leaf()) continue;
        // ι_n k_n = Σ_c ι_c k_c
        if (!(sgn(t, static_cast<int>(id)) * k[id] == child_sum(t, k, static_cast<int>(id))))
            return false;
    }
    return true;
}

long long root_omega(const BranchingTree& t, const Decoration& k) {
    long long acc = 0;
    for (int c : t.nodes[0].children) {
        if (t.nodes[static_cast<std::size_t>(c)].is_partner) continue;
        acc += sgn(t, c) * k[static_cast<std::size_t>(c)].norm2();
    }
    return acc - k[0].norm2();
}

double root_psi(const BranchingTree& t, const Decoration& k, double s) {
    double acc = 0.0;
    for (int c : t.nodes[0].children) {
        if (t.nodes[static_cast<std::size_t>(c)].is_partner) continue;
        acc += sgn(t, c) * norm_pow(k[static_cast<std::size_t>(c)], 2.0 * s);
    }
    return acc - norm_pow(k[0], 2.0 * s);
}

namespace {

// Generic odometer over per-leaf mode lists; derives 𝔫₀, the root, and the
// partner, filtering each derived node through `keep`.  Free leaves advance
// in pre-order, each over its list in order — a fixed deterministic order.
void enumerate_with_domains(const BranchingTree& t,
                            const std::vector<const std::vector<Mode>*>& domains,
                            const std::function<bool(int, Mode)>& keep,
                            const std::function<void(const Decoration&)>& fn) {
    std::vector<int> free_leaves;
    for (int l : t.leaves())
        if (l != t.partner) free_leaves.push_back(l);
    double cost = 1.0;
    for (std::size_t i = 0; i < free_leaves.size(); ++i) {
        cost *= static_cast<double>(domains[i]->size());
        if (cost > kTupleBudget)
            throw std::runtime_error("decoration enumeration exceeds the complexity budget");
    }
    for (const auto* d : domains)
        if (d->empty()) return;

    Decoration k(t.nodes.size(), Mode{0, 0});
    std::vector<std::size_t> idx(free_leaves.size(), 0);
    bool done = false;
    while (!done) {
        for (std::size_t i = 0; i < free_leaves.size(); ++i)
            k[static_cast<std::size_t>(free_leaves[i])] = (*domains[i])[idx[i]];
        bool ok = true;
        if (t.n0 >= 0) {
            Mode kn0 = sgn(t, t.n0) * child_sum(t, k, t.n0);
            k[static_cast<std::size_t>(t.n0)] = kn0;
            ok = keep(t.n0, kn0);
        }
        if (ok) {
            Mode kr = child_sum(t, k, 0);  // ι_𝔯 = +1
            k[0] = kr;
            k[static_cast<std::size_t>(t.partner)] = kr;
            if (keep(0, kr) && keep(t.partner, kr)) fn(k);
        }
        int j = static_cast<int>(idx.size()) - 1;
        for (; j >= 0; --j) {
            if (++idx[static_cast<std::size_t>(j)] < domains[static_cast<std::size_t>(j)]->size())
                break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
        done = j < 0;
        if (free_leaves.empty()) done = true;
    }
}

}  // namespace

void for_each_decoration(const BranchingTree& t, int ball_N,
                         const std::function<void(const Decoration&)>& fn) {
    t.validate();
    if (ball_N < 0) throw std::invalid_argument("for_each_decoration: negative ball");
    ModeBall ball(ball_N);
    const std::vector<Mode>& modes = ball.modes();
    std::vector<const std::vector<Mode>*> domains;
    for (int l : t.leaves())
        if (l != t.partner) domains.push_back(&modes);
    long long r2 = static_cast<long long>(ball_N) * ball_N;
    auto keep = [r2](int, Mode m) { return m.norm2() <= r2; };
    enumerate_with_domains(t, domains, keep, fn);
}

namespace {

bool is_dyadic(double x) {
    if (x == 0.0) return true;
    if (x < 1.0) return false;
    double l = std::log2(x);
    return l == std::floor(l);
}

}  // namespace

std::vector<Mode> dyadic_shell(double L) {
    if (!is_dyadic(L)) throw std::invalid_argument("dyadic shell size expected");
    std::vector<Mode> out;
    if (L == 0.0) {
        out.push_back({0, 0});
        return out;
    }
    long long lo = static_cast<long long>(L * L);
    long long hi = 4 * lo - 1;  // |k|² < 4L² and integer
    int r = static_cast<int>(2 * L) - 1;
    for (int x = -r; x <= r; ++x)
        for (int y = -r; y <= r; ++y) {
            long long n2 = static_cast<long long>(x) * x + static_cast<long long>(y) * y;
            if (n2 >= lo && n2 <= hi) out.push_back({x, y});
        }
    return out;
}

bool in_dyadic_shell(double L, Mode m) {
    if (!is_dyadic(L)) throw std::invalid_argument("dyadic shell size expected");
    if (L == 0.0) return m.norm2() == 0;
    long long lo = static_cast<long long>(L * L);
    return m.norm2() >= lo && m.norm2() <= 4 * lo - 1;
}

bool adapted(const BranchingTree& t, const DyadicProfile& p, const Decoration& k) {
    if (p.sizes.size() != t.nodes.size() || k.size() != t.nodes.size())
        throw std::invalid_argument("adapted: size mismatch");
    for (std::size_t id = 0; id < t.nodes.size(); ++id)
        if (!in_dyadic_shell(p.sizes[id], k[id])) return false;
    return true;
}

void for_each_adapted_decoration(const BranchingTree& t, const DyadicProfile& p,
                                 const std::function<void(const Decoration&)>& fn) {
    t.validate();
    if (p.sizes.size() != t.nodes.size())
        throw std::invalid_argument("for_each_adapted_decoration: profile size mismatch");
    for (double L : p.sizes)
        if (!is_dyadic(L)) throw std::invalid_argument("dyadic shell size expected");
    std::vector<std::vector<Mode>> lists;
    std::vector<const std::vector<Mode>*> domains;
    for (int l : t.leaves())
        if (l != t.partner) lists.push_back(dyadic_shell(p.sizes[static_cast<std::size_t>(l)]));
    for (const auto& v : lists) domains.push_back(&v);
    auto keep = [&](int id, Mode m) { return in_dyadic_shell(p.sizes[static_cast<std::size_t>(id)], m); };
    enumerate_with_domains(t, domains, keep, fn);
}

std::vector<int> quasi_order(const BranchingTree& t, const DyadicProfile& p) {
    if (p.sizes.size() != t.nodes.size())
        throw std::invalid_argument("quasi_order: profile size mismatch");
    std::vector<int> order = t.leaves();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double na = p.sizes[static_cast<std::size_t>(a)];
        double nb = p.sizes[static_cast<std::size_t>(b)];
        return na != nb ? na > nb : a < b;
    });
    return order;
}

bool pairing_satisfied(const BranchingTree& t, const Pairing& p, const Decoration& k) {
    for (const auto& [x, y] : p.pairs) {
        if (!(k[static_cast<std::size_t>(x)] == k[static_cast<std::size_t>(y)])) return false;
        if (sgn(t, x) + sgn(t, y) != 0) return false;
    }
    return true;
}

BranchingTree cut_paired_leaves(const BranchingTree& t, const Pairing& p) {
    t.validate();
    std::vector<bool> cut(t.nodes.size(), false);
    for (const auto& [x, y] : p.pairs) {
        for (int id : {x, y}) {
            if (id < 0 || id >= static_cast<int>(t.nodes.size()) ||
                !t.nodes[static_cast<std::size_t>(id)].leaf())
                throw std::invalid_argument("cut_paired_leaves: pair member is not a leaf");
            if (id == t.partner)
                throw std::invalid_argument("cut_paired_leaves: the partner cannot be cut");
            if (cut[static_cast<std::size_t>(id)])
                throw std::invalid_argument("cut_paired_leaves: leaf cut twice");
            cut[static_cast<std::size_t>(id)] = true;
        }
        if (t.nodes[static_cast<std::size_t>(x)].parent !=
            t.nodes[static_cast<std::size_t>(y)].parent)
            throw std::invalid_argument(
                "cut_paired_leaves: pair spans two generations; removing it would break "
                "the odd-children invariant");
        if (sgn(t, x) + sgn(t, y) != 0)
            throw std::invalid_argument("cut_paired_leaves: pair must be sign-opposite");
    }

    // rebuild with surviving nodes, preserving order and signs
    std::vector<int> remap(t.nodes.size(), -1);
    BranchingTree out;
    for (std::size_t id = 0; id < t.nodes.size(); ++id) {
        if (cut[id]) continue;
        TreeNode n = t.nodes[id];
        n.children.clear();
        remap[id] = static_cast<int>(out.nodes.size());
        if (n.parent >= 0) {
            n.parent = remap[static_cast<std::size_t>(n.parent)];
            out.nodes[static_cast<std::size_t>(n.parent)].children.push_back(remap[id]);
        }
        out.nodes.push_back(n);
    }
    out.partner = remap[static_cast<std::size_t>(t.partner)];
    out.n0 = t.n0 >= 0 ? remap[static_cast<std::size_t>(t.n0)] : -1;
    if (out.n0 >= 0 && out.nodes[static_cast<std::size_t>(out.n0)].leaf())
        throw std::invalid_argument("cut_paired_leaves: cut removed all of L_n0");
    out.validate();
    return out;
}

// ── energy multilinear form ──────────────────────────────────────────────────

cplx tree_energy_form(const BranchingTree& t, const std::vector<SpectralField>& leaf_inputs,
                      double s, int internal_ball) {
    t.validate();
    std::vector<int> leaves = t.leaves();
    if (leaf_inputs.size() != leaves.size())
        throw std::invalid_argument("tree_energy_form: one input per leaf required");
    int B = internal_ball;
    if (B < 0)
        for (const auto& f : leaf_inputs) B = std::max(B, f.cutoff());
    ModeBall iball(B);
    std::vector<double> ip2s(iball.size());
    for (std::size_t i = 0; i < iball.size(); ++i)
        ip2s[i] = norm_pow(iball.modes()[i], 2.0 * s);

    // dense amplitudes per leaf over that leaf's own ball
    std::vector<ModeBall> lballs;
    std::vector<std::vector<cplx>> lamp;
    std::vector<std::vector<double>> lp2s;
    std::vector<int> input_of(t.nodes.size(), -1);
    for (std::size_t j = 0; j < leaves.size(); ++j) {
        input_of[static_cast<std::size_t>(leaves[j])] = static_cast<int>(j);
        lballs.emplace_back(leaf_inputs[j].cutoff());
        lamp.push_back(lballs.back().dense(leaf_inputs[j]));
        std::vector<double> pw(lballs.back().size());
        for (std::size_t i = 0; i < lballs.back().size(); ++i)
            pw[i] = norm_pow(lballs.back().modes()[i], 2.0 * s);
        lp2s.push_back(std::move(pw));
    }
    {
        double cost = 1.0;
        for (std::size_t j = 0; j + 1 < leaves.size(); ++j) cost *= lamp[j].size();
        if (cost > kTupleBudget)
            throw std::runtime_error("tree_energy_form exceeds the complexity budget");
    }

    cplx acc{0.0, 0.0};
    int scale = t.scale();

    // Recursion over the root's non-partner children; 𝔫₀'s subtree is an
    // inner recursion whose result feeds the root-generation functionals.
    const std::vector<int>& rchildren = t.nodes[0].children;
    std::function<void(std::size_t, Mode, long long, double, cplx)> over_root =
        [&](std::size_t ci, Mode rsum, long long om, double psi, cplx prod) {
            if (ci + 1 == rchildren.size()) {  // only the partner slot remains
                Mode kr = rsum;
                int ri = iball.index(kr);
                if (ri < 0) return;
                om -= kr.norm2();
                psi -= ip2s[static_cast<std::size_t>(ri)];
                int pj = input_of[static_cast<std::size_t>(t.partner)];
                int pi = lballs[static_cast<std::size_t>(pj)].index(kr);
                if (pi < 0) return;
                cplx pf = std::conj(lamp[static_cast<std::size_t>(pj)]
                                        [static_cast<std::size_t>(pi)]);  // ι_𝔯′ = −1
                if (scale == 2) {
                    if (om != 0)
                        acc += (psi / static_cast<double>(om)) * prod * pf;
                } else {
                    if (om == 0) acc += psi * prod * pf;
                }
                return;
            }
            int c = rchildren[ci];
            int csign = sgn(t, c);
            if (t.nodes[static_cast<std::size_t>(c)].leaf()) {
                int j = input_of[static_cast<std::size_t>(c)];
                const auto& modes = lballs[static_cast<std::size_t>(j)].modes();
                for (std::size_t i = 0; i < modes.size(); ++i) {
                    cplx a = lamp[static_cast<std::size_t>(j)][i];
                    cplx f = csign > 0 ? a : std::conj(a);
                    over_root(ci + 1, rsum + csign * modes[i],
                              om + csign * modes[i].norm2(),
                              psi + csign * lp2s[static_cast<std::size_t>(j)][i], prod * f);
                }
                return;
            }
            // c = 𝔫₀: enumerate its leaf children, then derive k_𝔫₀
            const std::vector<int>& nch = t.nodes[static_cast<std::size_t>(c)].children;
            std::function<void(std::size_t, Mode, cplx)> over_n0 =
                [&](std::size_t ni, Mode nsum, cplx nprod) {
                    if (ni == nch.size()) {
                        Mode kn0 = csign * nsum;  // ι_𝔫₀ k_𝔫₀ = Σ ι_c k_c
                        int ii = iball.index(kn0);
                        if (ii < 0) return;
                        over_root(ci + 1, rsum + csign * kn0,
                                  om + csign * kn0.norm2(),
                                  psi + csign * ip2s[static_cast<std::size_t>(ii)],
                                  prod * nprod);
                        return;
                    }
                    int l = nch[ni];
                    int lsign = sgn(t, l);
                    int j = input_of[static_cast<std::size_t>(l)];
                    const auto& modes = lballs[static_cast<std::size_t>(j)].modes();
                    for (std::size_t i = 0; i < modes.size(); ++i) {
                        cplx a = lamp[static_cast<std::size_t>(j)][i];
                        cplx f = lsign > 0 ? a : std::conj(a);
                        over_n0(ni + 1, nsum + lsign * modes[i], nprod * f);
                    }
                };
            over_n0(0, Mode{0, 0}, cplx{1.0, 0.0});
        };
    over_root(0, Mode{0, 0}, 0, 0.0, cplx{1.0, 0.0});
    return acc;
}

cplx tree_energy_form(const BranchingTree& t, const SpectralField& v, double s,
                      int internal_ball) {
    std::vector<SpectralField> inputs(t.leaves().size(), v);
    return tree_energy_form(t, inputs, s, internal_ball);
}

// ── singular sets and cancellation ───────────────────────────────────────────

ThresholdParams ThresholdParams::defaults(int n0, double s) {
    if (n0 < 1) throw std::invalid_argument("ThresholdParams: n0 must be >= 1");
    ThresholdParams p;
    p.theta = 1.0 / (50.0 * (n0 + 1));
    p.delta = 1.0 / (200.0 * (n0 + s));
    return p;
}

std::vector<std::pair<int, int>> admissible_cross_pairs(const BranchingTree& t) {
    std::vector<std::pair<int, int>> out;
    if (t.scale() != 2) return out;
    for (int lp : t.root_leaves())
        for (int ld : t.n0_leaves())
            if (sgn(t, lp) + sgn(t, ld) == 0) out.emplace_back(lp, ld);
    return out;
}

namespace {

void require_cross_pair(const BranchingTree& t, int lp, int ld) {
    if (t.scale() != 2) throw std::invalid_argument("cross pairing needs a scale-2 tree");
    auto rl = t.root_leaves();
    auto nl = t.n0_leaves();
    if (std::find(rl.begin(), rl.end(), lp) == rl.end())
        throw std::invalid_argument("l' must lie in L_r");
    if (std::find(nl.begin(), nl.end(), ld) == nl.end())
        throw std::invalid_argument("l'' must lie in L_n0");
    if (sgn(t, lp) + sgn(t, ld) != 0)
        throw std::invalid_argument("cross pair must be sign-opposite");
}

struct CrossTerm {
    long long omega;   // root-generation Ω
    double psi;        // ψ_{2s}
    long long omega0;  // ι_𝔫₀|k_𝔫₀|² + ι_{l′}|k_{l′}|²
    double psi0;
    cplx prod;  // Π over all leaves of v^{ι}
};

// Enumerates the threshold-constrained cross-pairing decorations (everything
// in Λ_{l′,l″} except the Ω ≠ 0 clause, which callers apply themselves):
// all nodes in the ball, k_{l′} = k_{l″}, both companion-sum thresholds.
void for_each_cross_decoration(const SpectralField& v, const BranchingTree& t, int lp, int ld,
                               double s, const ThresholdParams& params,
                               const std::function<void(const CrossTerm&)>& fn) {
    t.validate();
    require_cross_pair(t, lp, ld);
    int N = v.cutoff();
    ModeBall ball(N);
    std::vector<cplx> vd = ball.dense(v);

    // companions can never exceed the largest attainable threshold
    double rmax = std::pow(static_cast<double>(N) + 4.0, params.theta) +
                  std::pow(std::max(1.0, static_cast<double>(N)), params.theta);
    std::vector<Mode> small;
    for (const Mode& m : ball.modes())
        if (m.norm() <= rmax) small.push_back(m);

    std::vector<int> n0_comp;  // L_𝔫₀ ∖ {l″}
    for (int l : t.n0_leaves())
        if (l != ld) n0_comp.push_back(l);
    std::vector<int> root_comp;  // L_𝔯 ∖ {l′}, partner excluded (derived)
    bool lp_is_partner = (lp == t.partner);
    for (int l : t.root_leaves())
        if (l != lp && l != t.partner) root_comp.push_back(l);

    long long r2 = static_cast<long long>(N) * N;
    Decoration k(t.nodes.size(), Mode{0, 0});

    auto amp = [&](int node) -> cplx {
        int i = ball.index(k[static_cast<std::size_t>(node)]);
        cplx a = i < 0 ? cplx{0.0, 0.0} : vd[static_cast<std::size_t>(i)];
        return sgn(t, node) > 0 ? a : std::conj(a);
    };

    // emit after the root side is fully decorated
    auto emit = [&]() {
        // root-side threshold Σ_{L_𝔯∖l′}|k| ≤ |k_𝔫₀|^θ + |k_{l′}|^θ
        double rsum = 0.0;
        for (int l : t.root_leaves())
            if (l != lp) rsum += k[static_cast<std::size_t>(l)].norm();
        double rhs = std::pow(k[static_cast<std::size_t>(t.n0)].norm(), params.theta) +
                     std::pow(k[static_cast<std::size_t>(lp)].norm(), params.theta);
        if (rsum > rhs) return;

        CrossTerm ct;
        ct.omega = root_omega(t, k);
        ct.psi = root_psi(t, k, s);
        ct.omega0 = sgn(t, t.n0) * k[static_cast<std::size_t>(t.n0)].norm2() +
                    sgn(t, lp) * k[static_cast<std::size_t>(lp)].norm2();
        ct.psi0 = sgn(t, t.n0) * norm_pow(k[static_cast<std::size_t>(t.n0)], 2.0 * s) +
                  sgn(t, lp) * norm_pow(k[static_cast<std::size_t>(lp)], 2.0 * s);
        ct.prod = cplx{1.0, 0.0};
        for (int l : t.leaves()) ct.prod *= amp(l);
        fn(ct);
    };

    // root side: free companions over the small list; the partner (or, when
    // l′ is the partner, the last free companion) is derived
    std::function<void(std::size_t)> over_root = [&](std::size_t i) {
        if (!lp_is_partner) {
            if (i == root_comp.size()) {
                Mode kr = child_sum(t, k, 0);
                if (kr.norm2() > r2) return;
                k[0] = kr;
                k[static_cast<std::size_t>(t.partner)] = kr;
                emit();
                return;
            }
        } else {
            if (i + 1 == root_comp.size()) {
                // k_𝔯 = k_{l′} fixed; solve the root constraint for the last slot
                Mode kr = k[static_cast<std::size_t>(lp)];
                k[0] = kr;
                int last = root_comp[i];
                Mode partial{0, 0};
                for (int c : t.nodes[0].children) {
                    if (t.nodes[static_cast<std::size_t>(c)].is_partner || c == last) continue;
                    partial = partial + sgn(t, c) * k[static_cast<std::size_t>(c)];
                }
                Mode klast = sgn(t, last) * (kr - partial);
                if (klast.norm2() > r2) return;
                k[static_cast<std::size_t>(last)] = klast;
                emit();
                return;
            }
        }
        int l = root_comp[i];
        for (const Mode& m : small) {
            k[static_cast<std::size_t>(l)] = m;
            over_root(i + 1);
        }
    };

    // 𝔫₀ side: k_{l″} over the ball, companions over the small list
    std::function<void(std::size_t)> over_n0 = [&](std::size_t i) {
        if (i == n0_comp.size()) {
            Mode kn0 = sgn(t, t.n0) * child_sum(t, k, t.n0);
            if (kn0.norm2() > r2) return;
            k[static_cast<std::size_t>(t.n0)] = kn0;
            double nsum = 0.0;
            for (int l : t.n0_leaves())
                if (l != ld) nsum += k[static_cast<std::size_t>(l)].norm();
            double rhs = std::pow(kn0.norm(), params.theta) +
                         std::pow(k[static_cast<std::size_t>(ld)].norm(), params.theta);
            if (nsum > rhs) return;
            k[static_cast<std::size_t>(lp)] = k[static_cast<std::size_t>(ld)];
            if (lp_is_partner && root_comp.empty()) {
                // degenerate reduced tree: root constraint must already close
                Mode kr = k[static_cast<std::size_t>(lp)];
                k[0] = kr;
                if (!(child_sum(t, k, 0) == kr)) return;
                emit();
            } else {
                over_root(0);
            }
            return;
        }
        int l = n0_comp[i];
        for (const Mode& m : small) {
            k[static_cast<std::size_t>(l)] = m;
            over_n0(i + 1);
        }
    };

    for (const Mode& m : ball.modes()) {
        k[static_cast<std::size_t>(ld)] = m;
        over_n0(0);
    }
}

}  // namespace

bool singular_set_member(const BranchingTree& t, const Decoration& k, int l_prime,
                         int l_dprime, const ThresholdParams& params) {
    t.validate();
    require_cross_pair(t, l_prime, l_dprime);
    if (!decoration_valid(t, k)) throw std::invalid_argument("singular_set_member: bad decoration");
    if (root_omega(t, k) == 0) return false;
    if (!(k[static_cast<std::size_t>(l_prime)] == k[static_cast<std::size_t>(l_dprime)]))
        return false;
    double rhs = std::pow(k[static_cast<std::size_t>(t.n0)].norm(), params.theta) +
                 std::pow(k[static_cast<std::size_t>(l_prime)].norm(), params.theta);
    double rsum = 0.0;
    for (int l : t.root_leaves())
        if (l != l_prime) rsum += k[static_cast<std::size_t>(l)].norm();
    if (rsum > rhs) return false;  // non-strict threshold, as printed
    double nsum = 0.0;
    for (int l : t.n0_leaves())
        if (l != l_dprime) nsum += k[static_cast<std::size_t>(l)].norm();
    return nsum <= rhs;
}

cplx singular_sum(const SpectralField& v, const BranchingTree& t, int l_prime, int l_dprime,
                  double s, const ThresholdParams& params) {
    cplx acc{0.0, 0.0};
    for_each_cross_decoration(v, t, l_prime, l_dprime, s, params, [&](const CrossTerm& ct) {
        if (ct.omega != 0) acc += (ct.psi / static_cast<double>(ct.omega)) * ct.prod;
    });
    return acc;
}

double psi_weight(const BranchingTree& t, const Decoration& k, int l_prime, double s) {
    t.validate();
    long long om = root_omega(t, k);
    if (om == 0) throw std::invalid_argument("psi_weight: requires a non-resonant decoration");
    long long om0 = sgn(t, t.n0) * k[static_cast<std::size_t>(t.n0)].norm2() +
                    sgn(t, l_prime) * k[static_cast<std::size_t>(l_prime)].norm2();
    if (om0 == 0)
        throw std::domain_error("psi_weight: degenerate paired case (zero block denominator)");
    double psi0 = sgn(t, t.n0) * norm_pow(k[static_cast<std::size_t>(t.n0)], 2.0 * s) +
                  sgn(t, l_prime) * norm_pow(k[static_cast<std::size_t>(l_prime)], 2.0 * s);
    return root_psi(t, k, s) / static_cast<double>(om) - psi0 / static_cast<double>(om0);
}

double cancellation_check(const SpectralField& v, const BranchingTree& t, int l_prime,
                          int l_dprime, double s, const ThresholdParams& params) {
    // Ω ≠ 0 dropped (it is asymmetric between the two sides of the tree and
    // would break the block factorization); whole Ω⁰ = 0 blocks skipped.
    cplx acc{0.0, 0.0};
    for_each_cross_decoration(v, t, l_prime, l_dprime, s, params, [&](const CrossTerm& ct) {
        if (ct.omega0 != 0) acc += (ct.psi0 / static_cast<double>(ct.omega0)) * ct.prod;
    });
    return std::abs(acc.imag());
}

cplx remainder_form(const SpectralField& v, const BranchingTree& t, double s,
                    const ThresholdParams& params) {
    cplx acc = tree_energy_form(t, v, s);
    for (const auto& [lp, ld] : admissible_cross_pairs(t))
        acc -= singular_sum(v, t, lp, ld, s, params);
    return acc;
}

}  // namespace nlslab
