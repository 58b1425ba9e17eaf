#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nlslab/energy.hpp"
#include "nlslab/ensemble.hpp"
#include "nlslab/flow.hpp"

#include <nlohmann/json.hpp>

using namespace nlslab;

namespace {

SpectralField small_sample(int N, std::uint64_t seed, double scale = 0.5) {
    EnsembleSpec spec;
    spec.cutoff_N = N;
    spec.base_seed = seed;
    SpectralField u = sample_mu_s(spec, 0);
    u *= scale;
    return u;
}

// Independent R_{s,t} oracle: four explicit nested loops over the ball with
// the momentum condition checked directly (no derived slot, no shared code
// with the library's enumerator).
double r_oracle(const SpectralField& v, double s, int m, int N, double t) {
    REQUIRE(m == 2);
    ModeBall ball(N);
    double acc = 0.0;
    for (Mode k1 : ball.modes())
        for (Mode k2 : ball.modes())
            for (Mode k3 : ball.modes())
                for (Mode k4 : ball.modes()) {
                    if (k1 - k2 + k3 - k4 != Mode{0, 0}) continue;
                    SignedTuple tup{{k1, k2, k3, k4}};
                    long long om = omega(tup);
                    if (om == 0) continue;
                    double psi = psi2s(tup, s);
                    cplx prod = v.at(k1) * std::conj(v.at(k2)) * v.at(k3) *
                                std::conj(v.at(k4));
                    cplx phase{std::cos(-t * static_cast<double>(om)),
                               std::sin(-t * static_cast<double>(om))};
                    acc += (psi / static_cast<double>(om)) * (phase * prod).real();
                }
    return acc / 4.0;
}

}  // namespace

TEST_CASE("omega and psi on hand tuples") {
    SignedTuple t{{{1, 0}, {1, 1}, {0, 1}, {0, 0}}};
    CHECK(t.signed_momentum_x() == 0);
    CHECK(t.signed_momentum_y() == 0);
    CHECK(omega(t) == 1 - 2 + 1 - 0);
    double s = 2.0;
    CHECK(psi2s(t, s) == doctest::Approx(1.0 - 4.0 + 1.0 - 0.0));
    // resonant tuple (k, k, p, p) has omega and psi exactly zero
    SignedTuple r{{{2, 1}, {2, 1}, {-1, 2}, {-1, 2}}};
    CHECK(omega(r) == 0);
    CHECK(psi2s(r, 2.5) == 0.0);
}

TEST_CASE("correction vanishes on a single mode") {
    SpectralField u(3);
    u.set({2, 1}, cplx{0.3, 0.9});
    CHECK(correction_R_s(u, 2.5, 2, 3) == 0.0);
}

TEST_CASE("correction matches the four-loop oracle") {
    SpectralField u = small_sample(2, 13);
    for (double t : {0.0, 0.37}) {
        double lib = correction_R_s(u, 2.5, 2, 2, t);
        double orc = r_oracle(u, 2.5, 2, 2, t);
        CHECK(lib == doctest::Approx(orc).epsilon(1e-12));
    }
}

TEST_CASE("modified energy assembles norm and correction") {
    SpectralField u = small_sample(2, 29);
    EnergyReport r = modified_energy_E_s(u, 2.5, 2, 2);
    double nrm = sobolev_norm(u, 2.5, NormConvention::Equivalent);
    CHECK(r.h_s_half_sq == doctest::Approx(0.5 * nrm * nrm));
    CHECK(r.e_s == doctest::Approx(r.h_s_half_sq + r.r_s));
    CHECK(r.input_hash == field_hash(u));
}

TEST_CASE("I+II+III equals the time derivative of E_{s,t}(v(t))") {
    double s = 2.5;
    int N = 2, m = 2;
    SpectralField u0 = small_sample(N, 41);
    IntegratorSpec spec{Scheme::RK4Interaction, 1e-4, N, m, 1};

    for (double t0 : {0.0, 0.2}) {
        double delta = 1e-3;
        auto E_at = [&](double t) {
            SpectralField u = t == 0.0 ? project(u0, N) : evolve_to(u0, t, spec);
            SpectralField v = interaction_picture({t, u});
            return modified_energy_E_s(v, s, m, N, t).e_s;
        };
        double fd = (E_at(t0 + delta) - E_at(t0 - delta)) / (2.0 * delta);

        SpectralField ut = t0 == 0.0 ? project(u0, N) : evolve_to(u0, t0, spec);
        SpectralField vt = interaction_picture({t0, ut});
        EnergyReport r = derivative_terms(vt, t0, s, m, N);
        CHECK(r.q_n == doctest::Approx(r.term_I + r.term_II + r.term_III));
        CHECK(std::abs(fd - r.q_n) < 5e-6);
    }
}

TEST_CASE("substitution route equals the literal double sum") {
    SpectralField v = small_sample(2, 61);
    for (double t : {0.0, 0.37}) {
        EnergyReport r = derivative_terms(v, t, 2.5, 2, 2);
        double literal = literal_II_plus_III(v, t, 2.5, 2, 2);
        CHECK(std::abs((r.term_II + r.term_III) - literal) < 1e-10);
    }
}

TEST_CASE("q_n at zero is the t=0 derivative") {
    SpectralField u = small_sample(3, 71);
    EnergyReport r = derivative_terms(u, 0.0, 2.5, 2, 3);
    CHECK(q_n_at_zero(u, 2.5, 2, 3) == r.q_n);
}

TEST_CASE("enumeration budget guard trips") {
    SpectralField u(60);
    // ball of N = 60 has ~11310 modes; 11310³ > 4e9
    CHECK_THROWS_AS(correction_R_s(u, 2.5, 2, 60), std::runtime_error);
}

TEST_CASE("report serializes every field") {
    SpectralField u = small_sample(2, 83);
    EnergyReport r = derivative_terms(u, 0.1, 2.5, 2, 2);
    auto j = nlohmann::json::parse(report_to_json(r));
    for (const char* key : {"h_s_half_sq", "r_s", "e_s", "term_I", "term_II", "term_III",
                            "q_n", "s", "m", "N", "t", "input_hash"})
        CHECK(j.contains(key));
    CHECK(j["q_n"].get<double>() == r.q_n);
}
