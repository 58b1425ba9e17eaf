#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nlslab/ensemble.hpp"
#include "nlslab/lattice.hpp"

using namespace nlslab;

namespace {

SpectralField random_field(int N, std::uint64_t seed) {
    EnsembleSpec spec;
    spec.cutoff_N = N;
    spec.base_seed = seed;
    return sample_mu_s(spec, 0);
}

// convolution oracle: (|u|²u)_k = Σ_{k₁−k₂+k₃=k} a_{k₁} ā_{k₂} a_{k₃}
cplx cubic_coeff_oracle(const SpectralField& u, Mode k) {
    cplx acc{0.0, 0.0};
    for (const auto& [k1, a1] : u.coeffs())
        for (const auto& [k2, a2] : u.coeffs())
            for (const auto& [k3, a3] : u.coeffs())
                if (k1 - k2 + k3 == k) acc += a1 * std::conj(a2) * a3;
    return acc;
}

// ∫|u|⁴ = (2π)² Σ_{k₁−k₂+k₃−k₄=0} a₁ā₂a₃ā₄
double quartic_integral_oracle(const SpectralField& u) {
    cplx acc{0.0, 0.0};
    for (const auto& [k1, a1] : u.coeffs())
        for (const auto& [k2, a2] : u.coeffs())
            for (const auto& [k3, a3] : u.coeffs())
                for (const auto& [k4, a4] : u.coeffs())
                    if (k1 - k2 + k3 - k4 == Mode{0, 0})
                        acc += a1 * std::conj(a2) * a3 * std::conj(a4);
    return kTorusArea * acc.real();
}

}  // namespace

TEST_CASE("mode arithmetic and ordering") {
    Mode a{1, -2}, b{3, 4};
    CHECK((a + b) == Mode{4, 2});
    CHECK((a - b) == Mode{-2, -6});
    CHECK((-a) == Mode{-1, 2});
    CHECK((2 * b) == Mode{6, 8});
    CHECK(b.norm2() == 25);
    CHECK(a < b);
    CHECK(Mode{1, -3} < a);
    CHECK(bracket(Mode{0, 0}) == doctest::Approx(1.0));
    CHECK(norm_pow(Mode{0, 0}, 5.0) == 0.0);
    CHECK(norm_pow(Mode{2, 0}, 2.0) == doctest::Approx(4.0));
}

TEST_CASE("grid spec invariant") {
    CHECK(GridSpec::minimal(3, 2).grid_points_per_axis == 13);
    CHECK(GridSpec::minimal(3, 2).compliant());
    CHECK_FALSE(GridSpec{3, 2, 12}.compliant());
}

TEST_CASE("ball membership and projection") {
    SpectralField u(3);
    CHECK(u.in_ball({3, 0}));
    CHECK_FALSE(u.in_ball({3, 1}));  // |k|² = 10 > 9
    CHECK_THROWS(u.set({3, 1}, cplx{1.0, 0.0}));
    u.set({2, 2}, cplx{1.0, 1.0});  // |k|² = 8 ≤ 9
    u.set({1, 0}, cplx{0.5, 0.0});
    SpectralField p = project(u, 2);  // (2,2) leaves the Euclidean ball: 8 > 4
    CHECK(p.support_size() == 1);
    CHECK(p.at({1, 0}) == cplx{0.5, 0.0});
    SpectralField q = project(u, 1);
    CHECK(q.support_size() == 1);
    CHECK(q.at({1, 0}) == cplx{0.5, 0.0});
}

TEST_CASE("mode ball indexing") {
    ModeBall ball(2);
    CHECK(ball.size() == 13);
    CHECK(ball.index({0, 0}) >= 0);
    CHECK(ball.index({2, 2}) == -1);
    CHECK(ball.index({3, 0}) == -1);
    for (std::size_t i = 0; i < ball.size(); ++i)
        CHECK(ball.index(ball.modes()[i]) == static_cast<int>(i));
    CHECK(ModeBall(3).size() == 29);
    CHECK(ModeBall(4).size() == 49);
    CHECK(ModeBall(8).size() == 197);
}

TEST_CASE("norms and mass on a hand field") {
    SpectralField u(2);
    u.set({0, 0}, cplx{1.0, 0.0});
    u.set({1, 1}, cplx{0.0, 2.0});
    // Equivalent: 1·1 + (1 + 2^s)·4,  Bracket: 1·1 + 3^s·4 at s = 1.5
    double s = 1.5;
    double eq = 1.0 + (1.0 + std::pow(2.0, s)) * 4.0;
    double br = 1.0 + std::pow(3.0, s) * 4.0;
    CHECK(sobolev_norm(u, s, NormConvention::Equivalent) == doctest::Approx(std::sqrt(eq)));
    CHECK(sobolev_norm(u, s, NormConvention::Bracket) == doctest::Approx(std::sqrt(br)));
    CHECK(mass(u) == doctest::Approx(kTorusArea * 5.0));
}

TEST_CASE("grid transform round trip is exact") {
    SpectralField u = random_field(4, 11);
    int G = 9;  // 2N + 1 suffices for a pure round trip
    auto vals = grid_values(u, G);
    SpectralField back = coefficients_from_grid(vals, G, 4);
    for (const auto& [k, a] : u.coeffs()) {
        CHECK(std::abs(back.at(k) - a) < 1e-12);
    }
    CHECK(back.support_size() == u.support_size());
}

TEST_CASE("Plancherel identity on the grid") {
    SpectralField u = random_field(3, 7);
    auto vals = grid_values(u, 8);
    double grid_mean = 0.0;
    for (const auto& v : vals) grid_mean += std::norm(v);
    grid_mean /= static_cast<double>(vals.size());
    double coeff_sum = 0.0;
    for (const auto& [k, a] : u.coeffs()) coeff_sum += std::norm(a);
    CHECK(grid_mean == doctest::Approx(coeff_sum).epsilon(1e-12));
}

TEST_CASE("power nonlinearity matches the convolution oracle") {
    SpectralField u = random_field(2, 3);
    SpectralField f = power_nonlinearity(u, 2);
    CHECK(f.cutoff() == 6);
    for (int kx = -6; kx <= 6; ++kx)
        for (int ky = -6; ky <= 6; ++ky) {
            Mode k{kx, ky};
            if (!f.in_ball(k)) continue;
            CHECK(std::abs(f.at(k) - cubic_coeff_oracle(u, k)) < 1e-12);
        }
    SpectralField fb = power_nonlinearity(u, 2, 2);
    CHECK(fb.cutoff() == 2);
    CHECK(std::abs(fb.at({1, 1}) - cubic_coeff_oracle(u, {1, 1})) < 1e-12);
}

TEST_CASE("hamiltonian matches the quartic tuple oracle") {
    SpectralField u = random_field(2, 19);
    double kinetic = 0.0;
    for (const auto& [k, a] : u.coeffs())
        kinetic += static_cast<double>(k.norm2()) * std::norm(a);
    double oracle = 0.5 * kTorusArea * kinetic + quartic_integral_oracle(u) / 4.0;
    CHECK(hamiltonian(u, 2) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK_THROWS(hamiltonian(u, 2, GridSpec{2, 2, 8}));  // non-compliant grid
}

TEST_CASE("renormalized cubic kills a single mode") {
    SpectralField u(2);
    cplx a{0.7, -0.3};
    u.set({1, 0}, a);
    // :|u|²u: at k = |a|²a − 2|a|²a = −|a|²a
    SpectralField w = renormalized_cubic(u);
    CHECK(std::abs(w.at({1, 0}) + std::norm(a) * a) < 1e-12);
    for (const auto& [k, c] : w.coeffs())
        if (k != Mode{1, 0}) CHECK(std::abs(c) < 1e-12);
}

TEST_CASE("json round trip and hash stability") {
    SpectralField u = random_field(3, 5);
    SpectralField back = field_from_json(field_to_json(u));
    CHECK(back == u);
    CHECK(field_hash(u) == field_hash(back));
    SpectralField v = u;
    v.set({0, 1}, v.at({0, 1}) + cplx{1e-9, 0.0});
    CHECK(field_hash(u) != field_hash(v));
}
