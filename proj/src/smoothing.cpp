#include "nlslab/smoothing.hpp"

#include <cmath>
#include <stdexcept>

#include "nlslab/energy.hpp"

namespace nlslab {

SpectralField CounterexampleData::field() const {
    if (n < 1) throw std::invalid_argument("CounterexampleData: n must be >= 1");
    if (sigma < 0.0) throw std::invalid_argument("CounterexampleData: sigma must be >= 0");
    SpectralField phi(2 * n);
    double amp = std::pow(static_cast<double>(n), -sigma - 0.5);
    for (int eta = n; eta <= 2 * n; ++eta) phi.set({0, eta}, cplx{amp, 0.0});
    phi.add({1, 0}, cplx{1.0, 0.0});
    phi.add({2, 0}, cplx{1.0, 0.0});
    return phi;
}

// (1/2π²)·mass = 2Σ|φ_k|²
double gauge_rate(const SpectralField& phi) { return 2.0 * mass(phi) / kTorusArea; }

SmoothingReport smoothing_remainder(const SpectralField& phi,
                                    const std::vector<FlowState>& trajectory, double s1) {
    if (trajectory.empty()) throw std::invalid_argument("smoothing_remainder: empty trajectory");
    if (trajectory.front().time != 0.0 || !(trajectory.front().field == phi))
        throw std::invalid_argument("smoothing_remainder: trajectory does not start at (0, phi)");
    SmoothingReport rep;
    rep.gauge_phase_rate = gauge_rate(phi);
    for (const FlowState& st : trajectory) {
        SpectralField w = gauge_rotate(st.field, rep.gauge_phase_rate * st.time);
        w.axpy(cplx{-1.0, 0.0}, linear_propagate(phi, st.time));
        rep.times.push_back(st.time);
        rep.w_norms.push_back(sobolev_norm(w, s1, NormConvention::Bracket));
    }
    return rep;
}

SpectralField picard_iterate(const SpectralField& phi, double t) {
    const auto& c = phi.coeffs();
    double n3 = static_cast<double>(c.size());
    if (n3 * n3 * n3 > static_cast<double>(kTupleBudget))
        throw std::runtime_error("picard_iterate: support too large");
    SpectralField out(3 * phi.cutoff());
    for (const auto& [k1, a1] : c)
        for (const auto& [k2, a2] : c) {
            if (k2 == k1) continue;
            for (const auto& [k3, a3] : c) {
                if (k2 == k3) continue;
                Mode k = k1 - k2 + k3;
                long long om = k1.norm2() - k2.norm2() + k3.norm2() - k.norm2();
                cplx coef;
                if (om == 0) {
                    coef = cplx{0.0, -t};  // limit value t/i
                } else {
                    double w = static_cast<double>(om);
                    coef = cplx{0.0, -2.0 * std::sin(0.5 * t * w) / w} *
                           std::exp(cplx{0.0, -0.5 * t * w});
                }
                out.add(k, coef * a1 * std::conj(a2) * a3);
            }
        }
    // Wick diagonal: −(t/i)|φ_k|²φ_k = +it|φ_k|²φ_k
    for (const auto& [k, a] : c) out.add(k, cplx{0.0, t} * std::norm(a) * a);
    return out;
}

SpectralField duhamel_oracle(const SpectralField& phi, double t, int panels) {
    if (panels < 2 || panels % 2 != 0)
        throw std::invalid_argument("duhamel_oracle: panels must be even and >= 2");
    double h = t / panels;
    SpectralField acc(3 * phi.cutoff());
    for (int j = 0; j <= panels; ++j) {
        double tj = h * j;
        double w = (j == 0 || j == panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        SpectralField nl = renormalized_cubic(linear_propagate(phi, tj));
        acc.axpy(cplx{w, 0.0}, linear_propagate(nl, t - tj));
    }
    acc *= cplx{0.0, -h / 3.0};  // (1/i)·Simpson weight
    return acc;
}

DivergenceFit divergence_scan(double sigma, double sigma1, double t,
                              const std::vector<int>& n_list) {
    if (n_list.size() < 2) throw std::invalid_argument("divergence_scan: need >= 2 sizes");
    DivergenceFit fit;
    for (int n : n_list) {
        SpectralField it = picard_iterate(CounterexampleData{n, sigma}.field(), t);
        fit.n_values.push_back(n);
        fit.norms.push_back(sobolev_norm(it, sigma1, NormConvention::Bracket));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = fit.norms.size();
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::log(static_cast<double>(fit.n_values[i]));
        double y = std::log(fit.norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double dm = static_cast<double>(m);
    fit.slope = (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
    double icpt = (sy - fit.slope * sx) / dm;
    double rss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double r = std::log(fit.norms[i]) -
                   (icpt + fit.slope * std::log(static_cast<double>(fit.n_values[i])));
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / dm);
    return fit;
}

double slab_block_norm(const CounterexampleData& d, double t, double sigma1) {
    SpectralField it = picard_iterate(d.field(), t);
    double acc = 0.0;
    for (int eta = d.n; eta <= 2 * d.n; ++eta) {
        Mode k{1, eta};
        acc += std::pow(bracket(k), 2.0 * sigma1) * std::norm(it.at(k));
    }
    return std::sqrt(acc);
}

}  // namespace nlslab
