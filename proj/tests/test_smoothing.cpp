#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "nlslab/smoothing.hpp"

using namespace nlslab;
using namespace std::complex_literals;

namespace {

SpectralField two_mode_seed() {
    SpectralField phi(2);
    phi.set({1, 0}, cplx{0.7, 0.2});
    phi.set({0, 1}, cplx{-0.3, 0.5});
    phi.set({1, -1}, cplx{0.1, -0.4});
    return phi;
}

}  // namespace

TEST_CASE("counterexample data stays norm-bounded up to n = 128") {
    double sigma = 0.5;
    for (int n : {1, 2, 4, 8, 16, 32, 64, 128}) {
        SpectralField phi = CounterexampleData{n, sigma}.field();
        CHECK(phi.cutoff() == 2 * n);
        // slab amplitudes plus the two unit atoms
        CHECK(phi.at({0, n}) == cplx{std::pow(n, -sigma - 0.5), 0.0});
        CHECK(phi.at({1, 0}) == cplx{1.0, 0.0});
        CHECK(phi.at({2, 0}) == cplx{1.0, 0.0});
        double nrm = sobolev_norm(phi, sigma, NormConvention::Bracket);
        CHECK(nrm >= 0.5);
        CHECK(nrm <= 5.0);
    }
    CHECK_THROWS_AS((CounterexampleData{0, 0.5}.field()), std::invalid_argument);
}

TEST_CASE("picard iterate vanishes at t = 0 and is gauge covariant") {
    SpectralField phi = two_mode_seed();
    CHECK(picard_iterate(phi, 0.0).support_size() == 0);

    double t = 0.8, alpha = 1.234;
    SpectralField rotated = gauge_rotate(phi, alpha);
    SpectralField a = picard_iterate(rotated, t);
    SpectralField b = picard_iterate(phi, t);
    b *= std::exp(1i * alpha);
    a.axpy(cplx{-1.0, 0.0}, b);
    CHECK(sobolev_norm(a, 0.0, NormConvention::Bracket) < 1e-12);
}

TEST_CASE("closed-form iterate matches the Simpson Duhamel oracle") {
    SpectralField phi = two_mode_seed();
    double t = 0.7;
    // physical iterate = e^{itΔ} of the interaction-picture patch
    SpectralField closed = linear_propagate(picard_iterate(phi, t), t);
    SpectralField oracle = duhamel_oracle(phi, t, 400);
    SpectralField diff = oracle;
    diff.axpy(cplx{-1.0, 0.0}, closed);
    double rel = sobolev_norm(diff, 0.0, NormConvention::Bracket) /
                 sobolev_norm(closed, 0.0, NormConvention::Bracket);
    CHECK(rel < 1e-6);

    CHECK_THROWS_AS(duhamel_oracle(phi, t, 3), std::invalid_argument);
}

TEST_CASE("principal triples: Omega = 2 and the predicted slab-image coefficient") {
    int n = 8;
    double sigma = 0.5, t = 1.0;
    // both ((0,η),(1,0),(2,0)) and ((2,0),(1,0),(0,η)) resonate at Ω = 2
    for (int eta : {n, n + 2, 2 * n}) {
        Mode k1{0, eta}, k2{1, 0}, k3{2, 0}, k{1, eta};
        CHECK(k1 - k2 + k3 == k);
        CHECK(k1.norm2() - k2.norm2() + k3.norm2() - k.norm2() == 2);
    }
    // interior η: exactly the two principal triples contribute, the Wick
    // diagonal vanishes there (φ̂_{(1,η)} = 0)
    SpectralField it = picard_iterate(CounterexampleData{n, sigma}.field(), t);
    int eta = n + 2;
    cplx predicted = 2.0 * (std::sin(t) / 1i) * std::exp(-1i * t) *
                     std::pow(static_cast<double>(n), -sigma - 0.5);
    CHECK(std::abs(it.at({1, eta}) - predicted) < 1e-12);
}

TEST_CASE("divergence scan recovers the slope sigma1 - sigma") {
    DivergenceFit fit = divergence_scan(0.5, 1.0, 1.0, {8, 16, 32, 64});
    CHECK(fit.norms.size() == 4);
    for (double v : fit.norms) CHECK(std::isfinite(v));
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(0.2));
    CHECK(std::abs(fit.slope - 0.5) < 0.1);

    // matching regularities: no growth
    DivergenceFit flat = divergence_scan(0.5, 0.5, 1.0, {8, 16, 32});
    CHECK(std::abs(flat.slope) < 0.1);

    CHECK_THROWS_AS(divergence_scan(0.5, 1.0, 1.0, {8}), std::invalid_argument);
}

TEST_CASE("slab block collapses on the exceptional set t in pi Z") {
    CounterexampleData d{16, 0.5};
    double at_one = slab_block_norm(d, 1.0, 1.0);
    double at_pi = slab_block_norm(d, 3.14159265358979323846, 1.0);
    CHECK(at_one > 0.0);
    CHECK(at_pi * 10.0 <= at_one);
}

TEST_CASE("smoothing remainder is zero along the gauged free flow") {
    SpectralField phi = two_mode_seed();
    double rate = gauge_rate(phi);
    CHECK(rate == doctest::Approx(2.0 * (std::norm(cplx{0.7, 0.2}) + std::norm(cplx{-0.3, 0.5}) +
                                         std::norm(cplx{0.1, -0.4}))));
    std::vector<FlowState> traj;
    for (double t : {0.0, 0.25, 0.5})
        traj.push_back({t, gauge_rotate(linear_propagate(phi, t), -rate * t)});
    SmoothingReport rep = smoothing_remainder(phi, traj, 1.9);
    REQUIRE(rep.w_norms.size() == 3);
    CHECK(rep.gauge_phase_rate == doctest::Approx(rate));
    CHECK(rep.times[2] == 0.5);
    for (double w : rep.w_norms) CHECK(w < 1e-12);

    // trajectory must start at (0, phi)
    std::vector<FlowState> bad{{0.0, linear_propagate(phi, 0.1)}};
    CHECK_THROWS_AS(smoothing_remainder(phi, bad, 1.9), std::invalid_argument);
    CHECK_THROWS_AS(smoothing_remainder(phi, {}, 1.9), std::invalid_argument);
}

TEST_CASE("smoothing remainder along the nonlinear flow") {
    SpectralField phi = two_mode_seed();
    IntegratorSpec spec;
    spec.scheme = Scheme::RK4Interaction;
    spec.dt = 1e-2;
    spec.N = 2;
    spec.m = 2;
    spec.snapshot_stride = 5;
    auto traj = evolve(phi, 0.2, spec);
    SmoothingReport rep = smoothing_remainder(phi, traj, 1.9);
    CHECK(rep.w_norms.front() == 0.0);
    CHECK(rep.w_norms.back() > 0.0);
    // the truncated cubic flow differs from the gauged free flow at O(t·‖φ‖³)
    for (double w : rep.w_norms) CHECK(w < 1.0);
}
