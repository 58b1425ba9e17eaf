#include "nlslab/ensemble.hpp"

#include <cmath>
#include <string>
#include <thread>

namespace nlslab {

SpectralField sample_mu_s(const EnsembleSpec& spec, std::uint64_t index) {
    if (index >= spec.sample_count) throw std::out_of_range("sample_mu_s: index out of range");
    if (spec.s <= 1.0) throw std::invalid_argument("sample_mu_s: requires s > 1");
    SpectralField u(spec.cutoff_N);
    int N = spec.cutoff_N;
    for (int kx = -N; kx <= N; ++kx)
        for (int ky = -N; ky <= N; ++ky) {
            Mode k{kx, ky};
            if (!u.in_ball(k)) continue;
            cplx g = complex_gaussian(spec.base_seed, index, kx, ky);
            u.set(k, g * std::pow(1.0 + static_cast<double>(k.norm2()), -0.5 * spec.s));
        }
    return u;
}

double pairwise_sum(const std::vector<double>& x) {
    std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t lo,
                                                              std::size_t hi) -> double {
        if (hi - lo <= 8) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += x[i];
            return s;
        }
        std::size_t mid = lo + (hi - lo) / 2;
        return rec(lo, mid) + rec(mid, hi);
    };
    return x.empty() ? 0.0 : rec(0, x.size());
}

std::vector<double> mc_values(const std::function<double(const SpectralField&)>& F,
                              const EnsembleSpec& spec) {
    std::vector<double> vals(spec.sample_count, 0.0);
    int workers = std::max(1, spec.workers);
    auto run = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) vals[i] = F(sample_mu_s(spec, i));
    };
    if (workers == 1) {
        run(0, spec.sample_count);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (spec.sample_count + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            std::uint64_t lo = std::min<std::uint64_t>(w * chunk, spec.sample_count);
            std::uint64_t hi = std::min<std::uint64_t>(lo + chunk, spec.sample_count);
            if (lo < hi) pool.emplace_back(run, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    for (std::uint64_t i = 0; i < vals.size(); ++i)
        if (!std::isfinite(vals[i]))
            throw std::runtime_error("mc_values: non-finite functional value at index " +
                                     std::to_string(i));
    return vals;
}

MCEstimate summarize(const std::vector<double>& values) {
    MCEstimate est;
    est.count = values.size();
    if (values.empty()) return est;
    double n = static_cast<double>(values.size());
    est.mean = pairwise_sum(values) / n;
    if (values.size() > 1) {
        std::vector<double> sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            double d = values[i] - est.mean;
            sq[i] = d * d;
        }
        double var = pairwise_sum(sq) / (n - 1.0);
        est.stderr_est = std::sqrt(var / n);
    }
    return est;
}

MCEstimate lp_from_values(const std::vector<double>& values, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_from_values: p must be >= 1");
    std::vector<double> powed(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) powed[i] = std::pow(std::abs(values[i]), p);
    MCEstimate moment = summarize(powed);
    MCEstimate est;
    est.count = moment.count;
    if (moment.mean <= 0.0) return est;  // all-zero sample: estimate 0
    est.mean = std::pow(moment.mean, 1.0 / p);
    // delta method: d(m^{1/p})/dm = (1/p) m^{1/p−1}
    est.stderr_est = (1.0 / p) * std::pow(moment.mean, 1.0 / p - 1.0) * moment.stderr_est;
    return est;
}

MCEstimate mc_expectation(const std::function<double(const SpectralField&)>& F,
                          const EnsembleSpec& spec) {
    return summarize(mc_values(F, spec));
}

MCEstimate mc_lp_norm(const std::function<double(const SpectralField&)>& F, double p,
                      const EnsembleSpec& spec) {
    return lp_from_values(mc_values(F, spec), p);
}

}  // namespace nlslab
