/*
 * lattice.hpp — Band-limited fields on the torus T² = [0,2π]² and their
 * exact spectral algebra.
 *
 * Conventions (fixed once, used everywhere):
 *   basis       e^{ik·x}, k ∈ Z²;  ∫_{T²} e^{i(k−k′)·x} dx = (2π)² δ_{kk′}
 *   bracket     ⟨k⟩ = sqrt(1 + |k|²)
 *   mass        M[u]  = ∫ |u|² dx           = (2π)² Σ_k |u_k|²
 *   energy      H[u]  = ½∫|∇u|² + (1/2m)∫|u|^{2m}
 *                     = ½(2π)² Σ |k|²|u_k|² + (1/2m)∫|u|^{2m}
 *   Sobolev     coefficient-space sums, no volume factor:
 *                 Equivalent:  |||u|||²_{H^s} = Σ (1 + |k|^{2s}) |u_k|²
 *                 Bracket:     ‖u‖²_{H^s}    = Σ ⟨k⟩^{2s} |u_k|²
 *
 * The truncation ball is Euclidean: π_N keeps modes with |k| ≤ N.
 * Lattice arithmetic (|k|², resonance functions) is exact integer math;
 * amplitudes are double-precision complex.
 *
 * Products |u|^{2m−2}u are evaluated by FFT on a zero-padded grid.  A grid
 * with G points per axis recovers the coefficients of a degree-(2m−1)
 * product exactly on the band |k| ≤ B provided G ≥ B + (2m−1)N + 1: any
 * aliased frequency k + Gj (j ≠ 0) then falls outside the source band.
 * The GridSpec invariant G ≥ 2mN + 1 is this condition for B = N.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kTorusArea = kTwoPi * kTwoPi;  // (2π)²

// ── Mode ─────────────────────────────────────────────────────────────────────
// A lattice frequency k = (kx, ky) ∈ Z².
struct Mode {
    int x = 0;
    int y = 0;

    long long norm2() const {
        return static_cast<long long>(x) * x + static_cast<long long>(y) * y;
    }
    double norm() const { return std::sqrt(static_cast<double>(norm2())); }

    friend bool operator==(const Mode& a, const Mode& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const Mode& a, const Mode& b) { return !(a == b); }
    // lexicographic (kx, ky): the canonical serialization order
    friend bool operator<(const Mode& a, const Mode& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    }
    friend Mode operator+(Mode a, Mode b) { return {a.x + b.x, a.y + b.y}; }
    friend Mode operator-(Mode a, Mode b) { return {a.x - b.x, a.y - b.y}; }
    friend Mode operator-(Mode a) { return {-a.x, -a.y}; }
    friend Mode operator*(int c, Mode a) { return {c * a.x, c * a.y}; }
};

// ⟨k⟩ = sqrt(1 + |k|²)
inline double bracket(Mode k) { return std::sqrt(1.0 + static_cast<double>(k.norm2())); }

// |k|^{2s} as a double (exact 0 for k = 0)
inline double norm_pow(Mode k, double two_s) {
    long long n2 = k.norm2();
    if (n2 == 0) return 0.0;
    return std::pow(static_cast<double>(n2), 0.5 * two_s);
}

// ── GridSpec ─────────────────────────────────────────────────────────────────
// Quadrature/FFT grid with G points per axis.  Compliant for (N, m) when
// G ≥ 2mN + 1, which makes the ball-N projection of a degree-(2m−1) product
// alias-free and the quadrature of |u|^{2m} exact.
struct GridSpec {
    int cutoff_N = 0;
    int degree_m = 2;
    int grid_points_per_axis = 1;

    bool compliant() const { return grid_points_per_axis >= 2 * degree_m * cutoff_N + 1; }
    static GridSpec minimal(int N, int m) { return GridSpec{N, m, 2 * m * N + 1}; }
};

// ── SpectralField ────────────────────────────────────────────────────────────
// Finitely many Fourier amplitudes supported in the ball |k| ≤ cutoff_N.
// Absent modes are implicitly zero.  The coefficient map is ordered
// lexicographically by (kx, ky), so iteration (and thus every reduction in
// this library) has a fixed deterministic order.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(int cutoff) : cutoff_(cutoff) {
        if (cutoff < 0) throw std::invalid_argument("SpectralField: negative cutoff");
    }

    int cutoff() const { return cutoff_; }
    bool in_ball(Mode k) const {
        return k.norm2() <= static_cast<long long>(cutoff_) * cutoff_;
    }

    cplx at(Mode k) const {
        auto it = coef_.find(k);
        return it == coef_.end() ? cplx{0.0, 0.0} : it->second;
    }
    void set(Mode k, cplx a) {
        if (!in_ball(k)) throw std::out_of_range("SpectralField::set: mode outside ball");
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw std::invalid_argument("SpectralField::set: non-finite amplitude");
        if (a == cplx{0.0, 0.0})
            coef_.erase(k);
        else
            coef_[k] = a;
    }
    void add(Mode k, cplx a) { set(k, at(k) + a); }

    const std::map<Mode, cplx>& coeffs() const { return coef_; }
    std::size_t support_size() const { return coef_.size(); }

    // vector-space operations (used by the integrators)
    SpectralField& operator+=(const SpectralField& o) {
        for (const auto& [k, a] : o.coef_) add(k, a);
        return *this;
    }
    SpectralField& operator*=(cplx c) {
        for (auto& [k, a] : coef_) a *= c;
        prune();
        return *this;
    }
    SpectralField& axpy(cplx c, const SpectralField& o) {
        for (const auto& [k, a] : o.coef_) add(k, c * a);
        return *this;
    }

    friend bool operator==(const SpectralField& a, const SpectralField& b) {
        return a.cutoff_ == b.cutoff_ && a.coef_ == b.coef_;
    }

  private:
    void prune() {
        for (auto it = coef_.begin(); it != coef_.end();)
            it = (it->second == cplx{0.0, 0.0}) ? coef_.erase(it) : std::next(it);
    }
    int cutoff_ = 0;
    std::map<Mode, cplx> coef_;
};

// ── ModeBall ─────────────────────────────────────────────────────────────────
// Dense indexing of the ball |k| ≤ N: a fixed mode list (lexicographic) plus
// an O(1) lookup table.  Hot loops convert a SpectralField to a flat
// amplitude vector once and index into it.
class ModeBall {
  public:
    explicit ModeBall(int N) : N_(N), side_(2 * N + 1) {
        table_.assign(static_cast<std::size_t>(side_) * side_, -1);
        for (int x = -N; x <= N; ++x)
            for (int y = -N; y <= N; ++y)
                if (static_cast<long long>(x) * x + static_cast<long long>(y) * y <=
                    static_cast<long long>(N) * N) {
                    table_[flat(x, y)] = static_cast<int>(modes_.size());
                    modes_.push_back({x, y});
                }
    }

    int cutoff() const { return N_; }
    const std::vector<Mode>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }

    // index of k in the mode list, or -1 if outside the ball
    int index(Mode k) const {
        if (k.x < -N_ || k.x > N_ || k.y < -N_ || k.y > N_) return -1;
        return table_[flat(k.x, k.y)];
    }

    std::vector<cplx> dense(const SpectralField& u) const {
        std::vector<cplx> a(modes_.size(), cplx{0.0, 0.0});
        for (const auto& [k, v] : u.coeffs()) {
            int i = index(k);
            if (i >= 0) a[static_cast<std::size_t>(i)] = v;
        }
        return a;
    }

  private:
    std::size_t flat(int x, int y) const {
        return static_cast<std::size_t>(x + N_) * side_ + static_cast<std::size_t>(y + N_);
    }
    int N_;
    int side_;
    std::vector<Mode> modes_;
    std::vector<int> table_;
};

// ── Norm conventions ─────────────────────────────────────────────────────────
enum class NormConvention {
    Equivalent,  // weight 1 + |k|^{2s}   (the ||| · ||| norm of the modified energy)
    Bracket      // weight ⟨k⟩^{2s}
};

// ── Spectral algebra ─────────────────────────────────────────────────────────
double sobolev_norm(const SpectralField& u, double s, NormConvention conv);
double mass(const SpectralField& u);

// H[u] = ½(2π)²Σ|k|²|u_k|² + (1/2m)∫|u|^{2m}dx with the integral evaluated by
// exact quadrature.  `grid` must be compliant when given; by default the
// minimal compliant grid is used.
double hamiltonian(const SpectralField& u, int m);
double hamiltonian(const SpectralField& u, int m, const GridSpec& grid);

SpectralField project(const SpectralField& u, int N);

// Coefficients of |u|^{2m−2}u on the band |k| ≤ target_band (default: the
// full product band (2m−1)·cutoff), via padded forward/inverse FFT.
SpectralField power_nonlinearity(const SpectralField& u, int m, int target_band = -1);
SpectralField power_nonlinearity(const SpectralField& u, int m, int target_band,
                                 const GridSpec& grid);

// :|v|²v: = |v|²v − (1/(2π²))‖v‖²_{L²} v  (Wick-ordered cubic)
SpectralField renormalized_cubic(const SpectralField& v);

// Samples u on the G×G grid x_g = 2π g/G (row-major, x index major).
std::vector<cplx> grid_values(const SpectralField& u, int G);
// Inverse: band-limited coefficients |k| ≤ band from grid samples.
SpectralField coefficients_from_grid(const std::vector<cplx>& vals, int G, int band);

// ── Serialization ────────────────────────────────────────────────────────────
// {"cutoff": N, "coeffs": [[kx, ky, re, im], ...]} sorted lexicographically.
std::string field_to_json(const SpectralField& u);
SpectralField field_from_json(const std::string& text);

// FNV-1a over the canonical JSON serialization; used to stamp reports.
std::uint64_t field_hash(const SpectralField& u);

}  // namespace nlslab
