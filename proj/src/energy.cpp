#include "nlslab/energy.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nlslab/flow.hpp"

namespace nlslab {

long long SignedTuple::signed_momentum_x() const {
    long long s = 0;
    for (std::size_t j = 0; j < modes.size(); ++j) s += (j % 2 == 0 ? 1 : -1) * modes[j].x;
    return s;
}
long long SignedTuple::signed_momentum_y() const {
    long long s = 0;
    for (std::size_t j = 0; j < modes.size(); ++j) s += (j % 2 == 0 ? 1 : -1) * modes[j].y;
    return s;
}

long long omega(const SignedTuple& t) {
    long long s = 0;
    for (std::size_t j = 0; j < t.modes.size(); ++j)
        s += (j % 2 == 0 ? 1 : -1) * t.modes[j].norm2();
    return s;
}

double psi2s(const SignedTuple& t, double s) {
    if (s < 0.0) throw std::invalid_argument("psi2s: s must be >= 0");
    double acc = 0.0;
    for (std::size_t j = 0; j < t.modes.size(); ++j)
        acc += (j % 2 == 0 ? 1.0 : -1.0) * norm_pow(t.modes[j], 2.0 * s);
    return acc;
}

namespace {

struct BallTables {
    const ModeBall& ball;
    std::vector<long long> n2;
    std::vector<double> p2s;  // |k|^{2s}

    BallTables(const ModeBall& b, double s) : ball(b) {
        n2.reserve(b.size());
        p2s.reserve(b.size());
        for (const Mode& k : b.modes()) {
            n2.push_back(k.norm2());
            p2s.push_back(norm_pow(k, 2.0 * s));
        }
    }
};

void check_budget(std::size_t ball_size, int free_slots) {
    double cost = std::pow(static_cast<double>(ball_size), free_slots);
    if (cost > kTupleBudget)
        throw std::runtime_error("tuple enumeration exceeds the complexity budget");
}

// Enumerates zero-momentum 2m-tuples (k₁,…,k_{2m}), signs +,−,+,−,…, all
// modes in the ball; the last slot is derived from momentum conservation.
// The callback receives the ball indices of slots 1 and 2, the exact Ω, the
// weight ψ_{2s}, and three running products of v-factors over the whole
// tuple: `full`, `minus0` (slot-1 factor omitted), `minus1` (slot-2 factor
// omitted).  Fixed lexicographic order ⇒ deterministic accumulation.
template <class Fn>
void tuples_rec(const BallTables& tb, const std::vector<cplx>& v, int two_m, int slot, int i0,
                int i1, long long px, long long py, long long om, double psi, cplx full,
                cplx minus0, cplx minus1, Fn&& fn) {
    const auto& ball = tb.ball;
    if (slot == two_m - 1) {
        // last slot, sign −1: momentum zero forces k_last = (px, py)
        if (px < -ball.cutoff() || px > ball.cutoff() || py < -ball.cutoff() ||
            py > ball.cutoff())
            return;
        int li = ball.index({static_cast<int>(px), static_cast<int>(py)});
        if (li < 0) return;
        cplx alast = std::conj(v[static_cast<std::size_t>(li)]);
        fn(i0, i1, om - tb.n2[li], psi - tb.p2s[li], full * alast, minus0 * alast,
           minus1 * alast);
        return;
    }
    int sgn = (slot % 2 == 0) ? 1 : -1;
    for (std::size_t i = 0; i < ball.size(); ++i) {
        const Mode& k = ball.modes()[i];
        cplx f = sgn > 0 ? v[i] : std::conj(v[i]);
        tuples_rec(tb, v, two_m, slot + 1, slot == 0 ? static_cast<int>(i) : i0,
                   slot == 1 ? static_cast<int>(i) : i1, px + sgn * k.x, py + sgn * k.y,
                   om + sgn * tb.n2[i], psi + sgn * tb.p2s[i], full * f,
                   slot == 0 ? minus0 : minus0 * f, slot == 1 ? minus1 : minus1 * f, fn);
    }
}

template <class Fn>
void for_each_tuple(const BallTables& tb, const std::vector<cplx>& v, int two_m, Fn&& fn) {
    check_budget(tb.ball.size(), two_m - 1);
    tuples_rec(tb, v, two_m, 0, -1, -1, 0, 0, 0, 0.0, cplx{1.0, 0.0}, cplx{1.0, 0.0},
               cplx{1.0, 0.0}, fn);
}

inline cplx phase_of(double t, long long om) {
    if (t == 0.0 || om == 0) return cplx{1.0, 0.0};
    double a = -t * static_cast<double>(om);
    return cplx{std::cos(a), std::sin(a)};
}

}  // namespace

double correction_R_s(const SpectralField& u, double s, int m, int N, double t) {
    if (m < 2) throw std::invalid_argument("correction_R_s: m must be >= 2");
    ModeBall ball(N);
    BallTables tb(ball, s);
    std::vector<cplx> v = ball.dense(project(u, N));
    double acc = 0.0;
    // Im[(ψ/(−iΩ)) z] = (ψ/Ω)·Re z
    for_each_tuple(tb, v, 2 * m,
                   [&](int, int, long long om, double psi, cplx full, cplx, cplx) {
                       if (om == 0) return;
                       acc += (psi / static_cast<double>(om)) *
                              (phase_of(t, om) * full).real();
                   });
    return acc / (2.0 * m);
}

EnergyReport modified_energy_E_s(const SpectralField& u, double s, int m, int N, double t) {
    EnergyReport r;
    r.s = s;
    r.m = m;
    r.N = N;
    r.t = t;
    r.input_hash = field_hash(u);
    double nrm = sobolev_norm(project(u, N), s, NormConvention::Equivalent);
    r.h_s_half_sq = 0.5 * nrm * nrm;
    r.r_s = correction_R_s(u, s, m, N, t);
    r.e_s = r.h_s_half_sq + r.r_s;
    return r;
}

EnergyReport derivative_terms(const SpectralField& v, double t, double s, int m, int N) {
    if (m < 2) throw std::invalid_argument("derivative_terms: m must be >= 2");
    EnergyReport r;
    r.s = s;
    r.m = m;
    r.N = N;
    r.t = t;
    r.input_hash = field_hash(v);

    ModeBall ball(N);
    BallTables tb(ball, s);
    SpectralField vproj = project(v, N);
    std::vector<cplx> vd = ball.dense(vproj);

    // i∂_t v_k = e^{it|k|²} (π_N |u|^{2m−2}u)_k with u = e^{itΔ}v
    SpectralField u = linear_propagate(vproj, t);
    SpectralField g = power_nonlinearity(u, m, N);
    std::vector<cplx> W = ball.dense(g);
    for (std::size_t i = 0; i < W.size(); ++i) {
        double a = t * static_cast<double>(tb.n2[i]);
        W[i] *= cplx{std::cos(a), std::sin(a)};
    }

    double accI = 0.0, accII = 0.0, accIII = 0.0;
    for_each_tuple(tb, vd, 2 * m,
                   [&](int i0, int i1, long long om, double psi, cplx full, cplx minus0,
                       cplx minus1) {
                       if (om == 0) {
                           accI += psi * full.imag();
                           return;
                       }
                       double w = psi / static_cast<double>(om);
                       cplx ph = phase_of(t, om);
                       accII += w * (ph * W[static_cast<std::size_t>(i0)] * minus0).imag();
                       accIII += w *
                                 (ph * std::conj(W[static_cast<std::size_t>(i1)]) * minus1)
                                     .imag();
                   });
    r.term_I = -accI / (2.0 * m);
    r.term_II = 0.5 * accII;
    r.term_III = -0.5 * accIII;
    r.q_n = r.term_I + r.term_II + r.term_III;
    return r;
}

double q_n_at_zero(const SpectralField& u, double s, int m, int N) {
    return derivative_terms(u, 0.0, s, m, N).q_n;
}

double literal_II_plus_III(const SpectralField& v, double t, double s, int m, int N) {
    ModeBall ball(N);
    BallTables tb(ball, s);
    std::vector<cplx> vd = ball.dense(project(v, N));
    check_budget(ball.size(), (2 * m - 1) + (2 * m - 2));

    // inner sums: for each k in the ball,
    //   inner[k] = Σ_{p₁−p₂+···+p_{2m−1} = k} e^{−itΩ(p⃗)} v_{p₁}v̄_{p₂}···v_{p_{2m−1}}
    // with Ω(p⃗) = Σ ι_j|p_j|² − |k|², by brute-force enumeration.
    std::vector<cplx> inner(ball.size(), cplx{0.0, 0.0});
    int n_free = 2 * m - 2;  // slots p₁..p_{2m−2}; p_{2m−1} (sign +) is derived
    std::vector<std::size_t> idx(static_cast<std::size_t>(n_free), 0);
    for (std::size_t target = 0; target < ball.size(); ++target) {
        Mode kt = ball.modes()[target];
        cplx acc{0.0, 0.0};
        std::fill(idx.begin(), idx.end(), 0);
        bool done = ball.size() == 0;
        while (!done) {
            long long px = 0, py = 0, om = -tb.n2[target];
            cplx prod{1.0, 0.0};
            for (int j = 0; j < n_free; ++j) {
                int sgn = (j % 2 == 0) ? 1 : -1;
                const Mode& p = ball.modes()[idx[static_cast<std::size_t>(j)]];
                px += sgn * p.x;
                py += sgn * p.y;
                om += sgn * tb.n2[idx[static_cast<std::size_t>(j)]];
                cplx f = vd[idx[static_cast<std::size_t>(j)]];
                prod *= sgn > 0 ? f : std::conj(f);
            }
            Mode last{static_cast<int>(kt.x - px), static_cast<int>(kt.y - py)};
            int li = ball.index(last);
            if (li >= 0) {
                om += tb.n2[li];
                prod *= vd[static_cast<std::size_t>(li)];
                acc += phase_of(t, om) * prod;
            }
            // odometer
            int j = n_free - 1;
            for (; j >= 0; --j) {
                if (++idx[static_cast<std::size_t>(j)] < ball.size()) break;
                idx[static_cast<std::size_t>(j)] = 0;
            }
            done = j < 0;
        }
        inner[target] = acc;
    }

    double accII = 0.0, accIII = 0.0;
    for_each_tuple(tb, vd, 2 * m,
                   [&](int i0, int i1, long long om, double psi, cplx, cplx minus0,
                       cplx minus1) {
                       if (om == 0) return;
                       double w = psi / static_cast<double>(om);
                       cplx ph = phase_of(t, om);
                       accII += w * (ph * inner[static_cast<std::size_t>(i0)] * minus0).imag();
                       accIII += w *
                                 (ph * std::conj(inner[static_cast<std::size_t>(i1)]) * minus1)
                                     .imag();
                   });
    return 0.5 * accII - 0.5 * accIII;
}

std::string report_to_json(const EnergyReport& r) {
    nlohmann::json j;
    j["h_s_half_sq"] = r.h_s_half_sq;
    j["r_s"] = r.r_s;
    j["e_s"] = r.e_s;
    j["term_I"] = r.term_I;
    j["term_II"] = r.term_II;
    j["term_III"] = r.term_III;
    j["q_n"] = r.q_n;
    j["s"] = r.s;
    j["m"] = r.m;
    j["N"] = r.N;
    j["t"] = r.t;
    j["input_hash"] = r.input_hash;
    return j.dump();
}

}  // namespace nlslab
