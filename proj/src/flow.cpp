#include "nlslab/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace nlslab {

SpectralField linear_propagate(const SpectralField& u, double t) {
    SpectralField out(u.cutoff());
    for (const auto& [k, a] : u.coeffs()) {
        double phase = -t * static_cast<double>(k.norm2());
        out.set(k, a * cplx{std::cos(phase), std::sin(phase)});
    }
    return out;
}

SpectralField interaction_picture(const FlowState& state) {
    return linear_propagate(state.field, -state.time);
}

SpectralField gauge_rotate(const SpectralField& u, double phase) {
    SpectralField out(u.cutoff());
    cplx rot{std::cos(phase), std::sin(phase)};
    for (const auto& [k, a] : u.coeffs()) out.set(k, a * rot);
    return out;
}

namespace {

bool finite(const SpectralField& u) {
    for (const auto& [k, a] : u.coeffs())
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    return true;
}

// interaction-picture right side: ∂_t v = −i e^{−itΔ} π_N F(e^{itΔ} v)
SpectralField rk4_rhs(const SpectralField& v, double t, int N, int m) {
    SpectralField u = linear_propagate(v, t);
    SpectralField g = power_nonlinearity(u, m, N);
    SpectralField out = linear_propagate(g, -t);
    out *= cplx{0.0, -1.0};
    return out;
}

SpectralField rk4_step(const SpectralField& v, double t, double h, int N, int m) {
    SpectralField k1 = rk4_rhs(v, t, N, m);
    SpectralField y2 = v;
    y2.axpy(0.5 * h, k1);
    SpectralField k2 = rk4_rhs(y2, t + 0.5 * h, N, m);
    SpectralField y3 = v;
    y3.axpy(0.5 * h, k2);
    SpectralField k3 = rk4_rhs(y3, t + 0.5 * h, N, m);
    SpectralField y4 = v;
    y4.axpy(h, k3);
    SpectralField k4 = rk4_rhs(y4, t + h, N, m);
    SpectralField out = v;
    out.axpy(h / 6.0, k1);
    out.axpy(h / 3.0, k2);
    out.axpy(h / 3.0, k3);
    out.axpy(h / 6.0, k4);
    return out;
}

// exact nonlinear rotation u ↦ e^{−i·h·|u|^{2m−2}}u on the grid, then π_N
SpectralField nonlinear_rotation(const SpectralField& u, double h, int m) {
    int N = u.cutoff();
    int G = 2 * m * N + 1;  // compliant grid for the band-N projection
    auto vals = grid_values(u, G);
    for (auto& v : vals) {
        double amp = std::pow(std::norm(v), m - 1);  // |u|^{2m−2}
        double phase = -h * amp;
        v *= cplx{std::cos(phase), std::sin(phase)};
    }
    return coefficients_from_grid(vals, G, N);
}

}  // namespace

std::vector<FlowState> evolve(const SpectralField& u0, double T, const IntegratorSpec& spec) {
    if (spec.dt <= 0.0) throw std::invalid_argument("evolve: dt must be positive");
    if (spec.m < 2) throw std::invalid_argument("evolve: m must be >= 2");
    if (u0.cutoff() > spec.N)
        throw std::invalid_argument("evolve: initial data exceeds the flow cutoff");

    SpectralField u = project(u0, spec.N);
    double dir = T < 0.0 ? -1.0 : 1.0;
    double span = std::abs(T);
    long long steps = static_cast<long long>(std::ceil(span / spec.dt - 1e-12));
    if (steps < 1) steps = 1;

    std::vector<FlowState> traj;
    traj.push_back({0.0, u});

    // RK4 advances the interaction-picture unknown; Strang advances u itself.
    SpectralField v = u;
    double t = 0.0;
    for (long long i = 0; i < steps; ++i) {
        double h = dir * std::min(spec.dt, span - std::abs(t));
        if (spec.scheme == Scheme::RK4Interaction) {
            v = rk4_step(v, t, h, spec.N, spec.m);
            t += h;
            u = linear_propagate(v, t);
        } else {
            u = linear_propagate(u, 0.5 * h);
            u = nonlinear_rotation(u, h, spec.m);
            u = linear_propagate(u, 0.5 * h);
            t += h;
        }
        if (!finite(u)) break;  // abort with the last good state recorded
        bool record = ((i + 1) % std::max(1, spec.snapshot_stride) == 0) || i + 1 == steps;
        if (record) traj.push_back({t, u});
    }
    return traj;
}

SpectralField evolve_to(const SpectralField& u0, double T, const IntegratorSpec& spec) {
    IntegratorSpec s = spec;
    s.snapshot_stride = 1 << 30;  // record only the endpoint
    return evolve(u0, T, s).back().field;
}

}  // namespace nlslab
