#include "nlslab/counting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "nlslab/energy.hpp"  // kTupleBudget, SignedTuple

namespace nlslab {

namespace {

void check_query(const CountQuery& q) {
    std::size_t n = q.sizes.size();
    if (n < 2 || q.signs.size() != n) throw std::invalid_argument("count_K: need n >= 2 slots");
    for (std::size_t j = 0; j < n; ++j) {
        if (q.signs[j] != 1 && q.signs[j] != -1)
            throw std::invalid_argument("count_K: signs must be +-1");
        if (q.sizes[j] > static_cast<double>(q.cap))
            throw std::runtime_error("count_K: shell size exceeds the cap");
        if (j > 0 && q.sizes[j] > q.sizes[j - 1])
            throw std::invalid_argument("count_K: sizes must be non-increasing");
    }
}

bool unpaired(const std::vector<Mode>& k, const std::vector<int>& s) {
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = i + 1; j < k.size(); ++j)
            if (s[i] + s[j] == 0 && k[i] == k[j]) return false;
    return true;
}

}  // namespace

long long count_K(const CountQuery& q) {
    check_query(q);
    std::size_t n = q.sizes.size();
    std::vector<std::vector<Mode>> shells;
    double cost = 1.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        shells.push_back(dyadic_shell(q.sizes[j]));
        cost *= static_cast<double>(shells.back().size());
        if (cost > kTupleBudget) throw std::runtime_error("count_K: enumeration too large");
    }

    std::vector<Mode> k(n);
    long long count = 0;
    std::function<void(std::size_t, Mode, long long)> rec = [&](std::size_t j, Mode msum,
                                                                long long osum) {
        if (j + 1 == n) {
            // ι_n k_n = a − Σ_{j<n} ι_j k_j
            Mode kn = q.signs[j] * (q.a - msum);
            if (!in_dyadic_shell(q.sizes[j], kn)) return;
            if (osum + q.signs[j] * kn.norm2() != q.kappa) return;
            k[j] = kn;
            if (unpaired(k, q.signs)) ++count;
            return;
        }
        for (const Mode& m : shells[j]) {
            k[j] = m;
            rec(j + 1, msum + q.signs[j] * m, osum + q.signs[j] * m.norm2());
        }
    };
    rec(0, Mode{0, 0}, 0);
    return count;
}

// ── CSV ledger ───────────────────────────────────────────────────────────────

namespace {

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

std::string bound_report_csv_row(const BoundReport& r) {
    return csv_quote(r.lemma_id) + "," + csv_quote(r.parameters) + "," + num(r.empirical_sup) +
           "," + num(r.paper_bound) + "," + num(r.ratio) + "," + csv_quote(r.witness);
}

void append_report_csv(const std::string& path, const BoundReport& r) {
    bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("append_report_csv: cannot open " + path);
    if (fresh) out << "lemma_id,parameters,empirical_sup,paper_bound,ratio,witness\n";
    out << bound_report_csv_row(r) << "\n";
}

// ── sup scan for n = 3 ───────────────────────────────────────────────────────

namespace {

// a dyadic shell bucketed by x: for each column, (y, x² + y²) pairs
struct ShellCols {
    int R = 0;                                               // |x|, |y| ≤ R
    std::vector<std::vector<std::pair<int, long long>>> aug;  // [x+R] → (y, |k|²)
    std::size_t card = 0;
};

ShellCols make_cols(double L) {
    ShellCols c;
    std::vector<Mode> shell = dyadic_shell(L);
    c.card = shell.size();
    c.R = L == 0.0 ? 0 : 2 * static_cast<int>(L) - 1;
    c.aug.resize(static_cast<std::size_t>(2 * c.R + 1));
    for (const Mode& m : shell)
        c.aug[static_cast<std::size_t>(m.x + c.R)].emplace_back(m.y, m.norm2());
    return c;
}

}  // namespace

BoundReport sup_count3(double L1, double L2, double L3, const std::array<int, 3>& signs,
                       double eps, int cap) {
    if (L1 < L2 || L2 < L3) throw std::invalid_argument("sup_count3: sizes must be sorted");
    if (L1 > static_cast<double>(cap)) throw std::runtime_error("sup_count3: cap exceeded");
    for (int s : signs)
        if (s != 1 && s != -1) throw std::invalid_argument("sup_count3: signs must be +-1");

    const int s1 = signs[0], s2 = signs[1], s3 = signs[2];
    ShellCols c1 = make_cols(L1), c2 = make_cols(L2), c3 = make_cols(L3);

    const int Ay = static_cast<int>(2.0 * (L1 + L2 + L3)) + 1;
    const long long K = static_cast<long long>(4.0 * (L1 * L1 + L2 * L2 + L3 * L3)) + 1;
    const long long W = 2 * K + 1;
    std::vector<std::int32_t> slice(static_cast<std::size_t>(2 * Ay + 1) * W, 0);

    // Inclusion–exclusion corrections: a sign-opposite pair (i, j) forces
    // k_i = k_j, which is only possible when L_i = L_j (distinct dyadic shells
    // are disjoint); such tuples land at (ι_r k_r, ι_r |k_r|²).  Two active
    // pairs overlap exactly on the all-equal tuples.
    struct Corr {
        int ax, ay;
        long long kap;
        std::int32_t delta;
    };
    std::vector<Corr> corrs;
    std::vector<std::array<int, 3>> pair_slots;  // (i, j, remaining)
    const double Ls[3] = {L1, L2, L3};
    const int ss[3] = {s1, s2, s3};
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (ss[i] + ss[j] == 0 && Ls[i] == Ls[j]) pair_slots.push_back({i, j, 3 - i - j});
    for (const auto& ps : pair_slots) {
        int r = ps[2];
        auto paired_card = static_cast<std::int32_t>(r == 0   ? c2.card
                                                     : r == 1 ? c1.card
                                                              : c1.card);
        for (const Mode& m : dyadic_shell(Ls[r]))
            corrs.push_back({ss[r] * m.x, ss[r] * m.y, ss[r] * m.norm2(), -paired_card});
    }
    if (pair_slots.size() == 2 && L1 == L3) {
        int st = s1 + s2 + s3;  // ±1
        for (const Mode& m : dyadic_shell(L1))
            corrs.push_back({st * m.x, st * m.y, st * m.norm2(), +1});
    }

    long long best = -1;
    Mode best_a{0, 0};
    long long best_kappa = 0;

    // x-reflection symmetry: scan a.x ≥ 0 only
    for (int X = 0; X <= c1.R + c2.R + c3.R; ++X) {
        std::fill(slice.begin(), slice.end(), 0);
        bool touched = false;
        for (int x1 = -c1.R; x1 <= c1.R; ++x1) {
            const auto& col1 = c1.aug[static_cast<std::size_t>(x1 + c1.R)];
            if (col1.empty()) continue;
            for (int x2 = -c2.R; x2 <= c2.R; ++x2) {
                const auto& col2 = c2.aug[static_cast<std::size_t>(x2 + c2.R)];
                if (col2.empty()) continue;
                int x3 = s3 * (X - s1 * x1 - s2 * x2);
                if (x3 < -c3.R || x3 > c3.R) continue;
                const auto& col3 = c3.aug[static_cast<std::size_t>(x3 + c3.R)];
                if (col3.empty()) continue;
                touched = true;
                for (const auto& [y1, n1] : col1) {
                    long long o1 = s1 * n1;
                    long long a1 = s1 * y1;
                    for (const auto& [y2, n2] : col2) {
                        // flat base index for (a.y, κ) = (a1 + s2 y2, o1 + s2 n2)
                        long long base = (a1 + s2 * y2 + Ay) * W + (o1 + s2 * n2 + K);
                        for (const auto& [y3, n3] : col3)
                            ++slice[static_cast<std::size_t>(base + s3 * (y3 * W + n3))];
                    }
                }
            }
        }
        if (!touched) continue;
        for (const Corr& c : corrs)
            if (c.ax == X)
                slice[static_cast<std::size_t>((c.ay + Ay) * W + (c.kap + K))] += c.delta;
        for (int ay = -Ay; ay <= Ay; ++ay)
            for (long long kap = -K; kap <= K; ++kap) {
                std::int32_t v = slice[static_cast<std::size_t>((ay + Ay) * W + (kap + K))];
                if (v > best) {
                    best = v;
                    best_a = Mode{X, ay};
                    best_kappa = kap;
                }
            }
    }

    BoundReport rep;
    rep.lemma_id = "threevectorcounting-n3";
    {
        std::ostringstream os;
        os << "L1=" << L1 << ";L2=" << L2 << ";L3=" << L3 << ";signs=" << (s1 > 0 ? '+' : '-')
           << (s2 > 0 ? '+' : '-') << (s3 > 0 ? '+' : '-') << ";eps=" << eps;
        rep.parameters = os.str();
    }
    rep.empirical_sup = static_cast<double>(std::max(best, 0ll));
    rep.paper_bound = std::pow(L2, 1.0 + eps) * L3;
    rep.ratio = rep.paper_bound > 0.0 ? rep.empirical_sup / rep.paper_bound : 0.0;
    {
        std::ostringstream os;
        os << "a=(" << best_a.x << "," << best_a.y << ");kappa=" << best_kappa
           << ";count=" << std::max(best, 0ll);
        rep.witness = os.str();
    }
    return rep;
}

// ── ψ_{2s} weight bound ──────────────────────────────────────────────────────

BoundReport verify_psi_bound(int max_norm, double s, int n) {
    if (n < 4 || n % 2 != 0)
        throw std::invalid_argument("verify_psi_bound: tuple length must be even and >= 4");
    if (s < 1.0) throw std::invalid_argument("verify_psi_bound: s >= 1 required");
    ModeBall ball(max_norm);
    const std::size_t M = ball.size();
    double cost = 1.0;
    for (int j = 0; j + 1 < n; ++j) cost *= static_cast<double>(M);
    if (cost > kTupleBudget) throw std::runtime_error("verify_psi_bound: enumeration too large");

    std::vector<long long> n2(M);
    std::vector<double> p2s(M), nrm(M);
    for (std::size_t i = 0; i < M; ++i) {
        n2[i] = ball.modes()[i].norm2();
        p2s[i] = norm_pow(ball.modes()[i], 2.0 * s);
        nrm[i] = ball.modes()[i].norm();
    }

    double sup = 0.0;
    std::vector<Mode> witness;
    std::vector<Mode> k(static_cast<std::size_t>(n));
    std::vector<double> mags(static_cast<std::size_t>(n));

    // alternating signs, zero momentum: the last slot is derived
    std::function<void(int, Mode, long long, double)> rec = [&](int j, Mode msum, long long om,
                                                                double psi) {
        if (j + 1 == n) {
            Mode kn = msum;  // ι_n = −1 (n even): k_n = Σ_{j<n} ι_j k_j
            int i = ball.index(kn);
            if (i < 0) return;
            k[static_cast<std::size_t>(j)] = kn;
            long long omega_v = om - n2[static_cast<std::size_t>(i)];
            double psi_v = psi - p2s[static_cast<std::size_t>(i)];
            for (int l = 0; l < n; ++l) mags[static_cast<std::size_t>(l)] = k[static_cast<std::size_t>(l)].norm();
            std::sort(mags.begin(), mags.end(), std::greater<double>());
            double lam1 = mags[0], lam3 = mags[2];
            double denom = std::pow(lam1, 2.0 * s - 2.0) *
                           (static_cast<double>(std::llabs(omega_v)) + lam3 * lam3);
            if (denom == 0.0) return;  // forces ψ = 0 (all magnitudes tie)
            double ratio = std::abs(psi_v) / denom;
            if (ratio > sup) {
                sup = ratio;
                witness = k;
            }
            return;
        }
        int sj = (j % 2 == 0) ? 1 : -1;
        for (std::size_t i = 0; i < M; ++i) {
            k[static_cast<std::size_t>(j)] = ball.modes()[i];
            rec(j + 1, msum + sj * ball.modes()[i], om + sj * n2[i], psi + sj * p2s[i]);
        }
    };
    rec(0, Mode{0, 0}, 0, 0.0);

    BoundReport rep;
    rep.lemma_id = "boundpsi2s";
    {
        std::ostringstream os;
        os << "max_norm=" << max_norm << ";s=" << s << ";n=" << n;
        rep.parameters = os.str();
    }
    rep.empirical_sup = sup;
    rep.paper_bound = 1.0;  // the lemma asserts ratio ≲ 1
    rep.ratio = sup;
    {
        std::ostringstream os;
        for (const Mode& m : witness) os << "(" << m.x << "," << m.y << ")";
        rep.witness = os.str();
    }
    return rep;
}

// ── adapted weighted sums ────────────────────────────────────────────────────

namespace {

std::vector<double> ordered_leaf_sizes(const BranchingTree& t, const DyadicProfile& p) {
    std::vector<double> out;
    for (int l : quasi_order(t, p)) out.push_back(p.sizes[static_cast<std::size_t>(l)]);
    return out;
}

std::string decoration_string(const Decoration& k) {
    std::ostringstream os;
    for (const Mode& m : k) os << "(" << m.x << "," << m.y << ")";
    return os.str();
}

bool has_pairing(const BranchingTree& t, const Decoration& k, const std::vector<int>& leaves) {
    for (std::size_t i = 0; i < leaves.size(); ++i)
        for (std::size_t j = i + 1; j < leaves.size(); ++j) {
            int a = leaves[i], b = leaves[j];
            if (t.nodes[static_cast<std::size_t>(a)].sign +
                        t.nodes[static_cast<std::size_t>(b)].sign ==
                    0 &&
                k[static_cast<std::size_t>(a)] == k[static_cast<std::size_t>(b)])
                return true;
        }
    return false;
}

}  // namespace

BoundReport weighted_sum_scale1(const BranchingTree& t, const DyadicProfile& p, double s,
                                SumMode mode, double eps) {
    t.validate();
    if (t.scale() != 1) throw std::invalid_argument("weighted_sum_scale1: scale-1 tree required");
    if (t.size() < 4) throw std::invalid_argument("weighted_sum_scale1: size >= 4 required");

    std::vector<int> leaves = t.leaves();
    double acc = 0.0, best_term = -1.0;
    Decoration best;
    for_each_adapted_decoration(t, p, [&](const Decoration& k) {
        if (has_pairing(t, k, leaves)) return;
        long long om = root_omega(t, k);
        double term = std::abs(root_psi(t, k, s)) /
                      std::sqrt(1.0 + static_cast<double>(om) * static_cast<double>(om));
        acc += mode == SumMode::L1 ? term : term * term;
        if (term > best_term) {
            best_term = term;
            best = k;
        }
    });
    double value = mode == SumMode::L1 ? acc : std::sqrt(acc);

    std::vector<double> N = ordered_leaf_sizes(t, p);
    double bound;
    double tail = 1.0;
    if (mode == SumMode::L1) {
        for (std::size_t j = 3; j < N.size(); ++j) tail *= N[j] * N[j];
        bound = std::pow(N[0], 2.0 * (s - 1.0)) *
                (N[1] * N[1] * N[2] * N[2] + std::pow(N[2], 3.0) * std::pow(N[1], 1.0 + eps)) *
                tail;
    } else {
        for (std::size_t j = 3; j < N.size(); ++j) tail *= N[j];
        bound = std::pow(N[0], 2.0 * (s - 1.0)) *
                (N[1] * N[2] + std::pow(N[2], 2.5) * std::pow(N[1], 0.5 + eps)) * tail;
    }

    BoundReport rep;
    rep.lemma_id = mode == SumMode::L1 ? "frequentterm-l1" : "frequentterm-l2";
    {
        std::ostringstream os;
        os << "s=" << s << ";eps=" << eps << ";sizes=";
        for (double L : p.sizes) os << L << " ";
        rep.parameters = os.str();
    }
    rep.empirical_sup = value;
    rep.paper_bound = bound;
    rep.ratio = bound > 0.0 ? value / bound : 0.0;
    rep.witness = best_term >= 0.0 ? decoration_string(best) : "";
    return rep;
}

Scale2Report weighted_sum_scale2(const BranchingTree& t, const DyadicProfile& p, double s,
                                 double eps) {
    t.validate();
    if (t.scale() != 2) throw std::invalid_argument("weighted_sum_scale2: scale-2 tree required");
    if (t.size() < 6) throw std::invalid_argument("weighted_sum_scale2: size >= 6 required");

    std::vector<int> gen_root = t.root_leaves();
    std::vector<int> gen_n0 = t.n0_leaves();
    int sn0 = t.nodes[static_cast<std::size_t>(t.n0)].sign;

    double acc = 0.0, deg = 0.0, best_term = -1.0;
    Decoration best;
    for_each_adapted_decoration(t, p, [&](const Decoration& k) {
        if (has_pairing(t, k, gen_root) || has_pairing(t, k, gen_n0)) return;
        long long om = root_omega(t, k);
        double term = std::abs(root_psi(t, k, s)) /
                      std::sqrt(1.0 + static_cast<double>(om) * static_cast<double>(om));
        double sq = term * term;
        acc += sq;
        bool degenerate = false;
        for (int lp : gen_root) {
            Mode z = sn0 * k[static_cast<std::size_t>(t.n0)] +
                     t.nodes[static_cast<std::size_t>(lp)].sign * k[static_cast<std::size_t>(lp)];
            if (z == Mode{0, 0}) {
                degenerate = true;
                break;
            }
        }
        if (degenerate) deg += sq;
        if (term > best_term) {
            best_term = term;
            best = k;
        }
    });

    std::vector<double> N = ordered_leaf_sizes(t, p);
    double tail = 1.0;
    for (std::size_t j = 3; j < N.size(); ++j) tail *= N[j] * N[j];
    double bound = std::pow(N[0], 4.0 * s - 2.0 + eps) * std::pow(N[2], 4.0) * tail;

    Scale2Report out;
    out.report.lemma_id = "wcounting-scale2";
    {
        std::ostringstream os;
        os << "s=" << s << ";eps=" << eps << ";sizes=";
        for (double L : p.sizes) os << L << " ";
        out.report.parameters = os.str();
    }
    out.report.empirical_sup = acc;
    out.report.paper_bound = bound;
    out.report.ratio = bound > 0.0 ? acc / bound : 0.0;
    out.report.witness = best_term >= 0.0 ? decoration_string(best) : "";
    out.degenerate_share = acc > 0.0 ? deg / acc : 0.0;
    return out;
}

}  // namespace nlslab
