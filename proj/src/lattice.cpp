#include "nlslab/lattice.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace nlslab {

double sobolev_norm(const SpectralField& u, double s, NormConvention conv) {
    if (s < 0.0) throw std::invalid_argument("sobolev_norm: s must be >= 0");
    double acc = 0.0;
    for (const auto& [k, a] : u.coeffs()) {
        double w = (conv == NormConvention::Equivalent)
                       ? 1.0 + norm_pow(k, 2.0 * s)
                       : std::pow(1.0 + static_cast<double>(k.norm2()), s);
        acc += w * std::norm(a);
    }
    return std::sqrt(acc);
}

double mass(const SpectralField& u) {
    double acc = 0.0;
    for (const auto& [k, a] : u.coeffs()) acc += std::norm(a);
    return kTorusArea * acc;
}

SpectralField project(const SpectralField& u, int N) {
    if (N < 0) throw std::invalid_argument("project: negative N");
    SpectralField out(N);
    for (const auto& [k, a] : u.coeffs())
        if (out.in_ball(k)) out.set(k, a);
    return out;
}

// ── FFT engine ───────────────────────────────────────────────────────────────
// One cached FFTW plan pair per grid size.  Plans are created with
// FFTW_ESTIMATE so the transform algorithm (and hence the bit pattern of the
// result) depends only on the grid size.
namespace {

struct FftPlans {
    int G;
    fftw_complex* buf;
    fftw_plan fwd;
    fftw_plan bwd;

    explicit FftPlans(int g) : G(g) {
        buf = fftw_alloc_complex(static_cast<std::size_t>(G) * G);
        fwd = fftw_plan_dft_2d(G, G, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(G, G, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPlans() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
};

FftPlans& plans_for(int G) {
    static std::mutex mu;
    static std::unordered_map<int, std::unique_ptr<FftPlans>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[G];
    if (!slot) slot = std::make_unique<FftPlans>(G);
    return *slot;
}

inline int wrap(int k, int G) {
    int r = k % G;
    return r < 0 ? r + G : r;
}

}  // namespace

std::vector<cplx> grid_values(const SpectralField& u, int G) {
    if (G < 1) throw std::invalid_argument("grid_values: G must be >= 1");
    auto& p = plans_for(G);
    std::size_t n = static_cast<std::size_t>(G) * G;
    for (std::size_t i = 0; i < n; ++i) p.buf[i][0] = p.buf[i][1] = 0.0;
    for (const auto& [k, a] : u.coeffs()) {
        std::size_t idx = static_cast<std::size_t>(wrap(k.x, G)) * G + wrap(k.y, G);
        p.buf[idx][0] += a.real();
        p.buf[idx][1] += a.imag();
    }
    // u(x_g) = Σ_k a_k e^{2πi(k·g)/G}: an unnormalized inverse DFT
    fftw_execute(p.bwd);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = cplx{p.buf[i][0], p.buf[i][1]};
    return out;
}

SpectralField coefficients_from_grid(const std::vector<cplx>& vals, int G, int band) {
    if (static_cast<int>(vals.size()) != G * G)
        throw std::invalid_argument("coefficients_from_grid: size mismatch");
    auto& p = plans_for(G);
    std::size_t n = static_cast<std::size_t>(G) * G;
    for (std::size_t i = 0; i < n; ++i) {
        p.buf[i][0] = vals[i].real();
        p.buf[i][1] = vals[i].imag();
    }
    fftw_execute(p.fwd);
    double inv = 1.0 / static_cast<double>(n);
    SpectralField out(band);
    for (int kx = -band; kx <= band; ++kx)
        for (int ky = -band; ky <= band; ++ky) {
            if (static_cast<long long>(kx) * kx + static_cast<long long>(ky) * ky >
                static_cast<long long>(band) * band)
                continue;
            std::size_t idx = static_cast<std::size_t>(wrap(kx, G)) * G + wrap(ky, G);
            cplx a{p.buf[idx][0] * inv, p.buf[idx][1] * inv};
            if (a != cplx{0.0, 0.0}) out.set({kx, ky}, a);
        }
    return out;
}

double hamiltonian(const SpectralField& u, int m) {
    return hamiltonian(u, m, GridSpec::minimal(u.cutoff(), m));
}

double hamiltonian(const SpectralField& u, int m, const GridSpec& grid) {
    if (m < 2) throw std::invalid_argument("hamiltonian: m must be >= 2");
    if (grid.cutoff_N < u.cutoff() || grid.degree_m < m || !grid.compliant())
        throw std::invalid_argument("hamiltonian: grid not compliant for (N, m)");
    double kinetic = 0.0;
    for (const auto& [k, a] : u.coeffs())
        kinetic += static_cast<double>(k.norm2()) * std::norm(a);
    kinetic *= 0.5 * kTorusArea;

    // ∫|u|^{2m} = (2π)² × mean of |u(x_g)|^{2m}; exact because |u|^{2m} has
    // degree 2m ≤ G−1 in each factor band, so its zero mode is alias-free.
    int G = grid.grid_points_per_axis;
    auto vals = grid_values(u, G);
    double acc = 0.0;
    for (const auto& v : vals) acc += std::pow(std::norm(v), m);
    double integral = kTorusArea * acc / static_cast<double>(vals.size());
    return kinetic + integral / (2.0 * m);
}

SpectralField power_nonlinearity(const SpectralField& u, int m, int target_band) {
    int N = u.cutoff();
    int band = target_band < 0 ? (2 * m - 1) * N : target_band;
    // alias-free recovery of |k| ≤ band needs G ≥ band + (2m−1)N + 1
    GridSpec grid{N, m, band + (2 * m - 1) * N + 1};
    return power_nonlinearity(u, m, target_band, grid);
}

SpectralField power_nonlinearity(const SpectralField& u, int m, int target_band,
                                 const GridSpec& grid) {
    if (m < 2) throw std::invalid_argument("power_nonlinearity: m must be >= 2");
    int N = u.cutoff();
    int band = target_band < 0 ? (2 * m - 1) * N : target_band;
    if (band < 0) throw std::invalid_argument("power_nonlinearity: negative band");
    int G = grid.grid_points_per_axis;
    if (G < band + (2 * m - 1) * N + 1)
        throw std::invalid_argument("power_nonlinearity: grid too small for exact band");
    auto vals = grid_values(u, G);
    for (auto& v : vals) {
        double amp2 = std::norm(v);
        v *= std::pow(amp2, m - 1);  // |u|^{2m−2} u
    }
    return coefficients_from_grid(vals, G, band);
}

SpectralField renormalized_cubic(const SpectralField& v) {
    SpectralField cubic = power_nonlinearity(v, 2);
    // (1/(2π²))‖v‖²_{L²} = 2 Σ|v_k|²
    double rate = mass(v) / (kTorusArea / 2.0);
    for (const auto& [k, a] : v.coeffs()) cubic.add(k, -rate * a);
    return cubic;
}

// ── Serialization ────────────────────────────────────────────────────────────

std::string field_to_json(const SpectralField& u) {
    nlohmann::json j;
    j["cutoff"] = u.cutoff();
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [k, a] : u.coeffs())  // map order = lexicographic (kx, ky)
        coeffs.push_back({k.x, k.y, a.real(), a.imag()});
    j["coeffs"] = std::move(coeffs);
    return j.dump();
}

SpectralField field_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SpectralField u(j.at("cutoff").get<int>());
    for (const auto& row : j.at("coeffs")) {
        Mode k{row.at(0).get<int>(), row.at(1).get<int>()};
        u.set(k, cplx{row.at(2).get<double>(), row.at(3).get<double>()});
    }
    return u;
}

std::uint64_t field_hash(const SpectralField& u) {
    std::string s = field_to_json(u);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace nlslab
