#include "nlslab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nlslab/energy.hpp"

namespace nlslab {

namespace {

void check_params(const DensityBoundParams& p) {
    if (p.C0 < 0.0 || p.M_p <= 0.0) throw std::invalid_argument("C0, M_p must be positive");
    if (p.alpha <= 0.0 || p.alpha >= 1.0) throw std::invalid_argument("alpha must be in (0,1)");
    if (p.T < 1.0) throw std::invalid_argument("T must be >= 1");
    if (p.q <= 1.0) throw std::invalid_argument("q must be > 1");
}

// one pass over the ensemble: values[i] = accepted ? f(u_i) : 0
struct CutoffPass {
    std::vector<double> values;
    double acceptance = 0.0;
    std::uint64_t accepted = 0;
};

CutoffPass cutoff_values(const std::function<double(const SpectralField&)>& f, double lambda,
                         int m, const EnsembleSpec& spec) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    CutoffPass out;
    out.values.reserve(spec.sample_count);
    for (std::uint64_t i = 0; i < spec.sample_count; ++i) {
        SpectralField u = sample_mu_s(spec, i);
        bool acc = hamiltonian(u, m) / kTorusArea <= lambda;
        out.accepted += acc ? 1 : 0;
        out.values.push_back(acc ? f(u) : 0.0);
    }
    out.acceptance = static_cast<double>(out.accepted) / static_cast<double>(spec.sample_count);
    return out;
}

}  // namespace

WeightedMomentResult weighted_functional_moment(
    const std::function<double(const SpectralField&)>& G, double lambda, int m, double p,
    const EnsembleSpec& spec) {
    if (p < 1.0) throw std::invalid_argument("p must be >= 1");
    CutoffPass pass = cutoff_values(
        [&](const SpectralField& u) { return std::exp(std::abs(G(u))); }, lambda, m, spec);
    WeightedMomentResult r;
    r.acceptance_fraction = pass.acceptance;
    r.valid = pass.accepted > 0;
    if (r.valid) r.estimate = lp_from_values(pass.values, p);
    return r;
}

WeightedMomentResult weighted_density_moments(double s, double lambda, int N, double p,
                                              const EnsembleSpec& spec) {
    if (s <= 2.0) throw std::invalid_argument("weighted_density_moments: s must be > 2");
    EnsembleSpec es = spec;
    es.s = s;
    es.cutoff_N = N;
    return weighted_functional_moment(
        [&](const SpectralField& u) { return correction_R_s(u, s, 2, N); }, lambda, 2, p, es);
}

namespace {

// unweighted least squares of y against x, with the slope's standard error
// propagated from per-point uncertainties sigma_y
void fit_line(const std::vector<double>& x, const std::vector<double>& y,
              const std::vector<double>& sigma_y, double& slope, double& slope_sigma) {
    std::size_t n = x.size();
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    slope = sxy / sxx;
    for (std::size_t i = 0; i < n; ++i) {
        double c = (x[i] - xbar) / sxx;
        var += c * c * sigma_y[i] * sigma_y[i];
    }
    slope_sigma = std::sqrt(var);
}

}  // namespace

MomentScan functional_moment_scan(const std::function<double(const SpectralField&)>& F,
                                  double lambda, int m, const std::vector<double>& p_values,
                                  const EnsembleSpec& spec) {
    if (p_values.size() < 2) throw std::invalid_argument("moment scan: need >= 2 p values");
    for (std::size_t i = 1; i < p_values.size(); ++i)
        if (p_values[i] <= p_values[i - 1])
            throw std::invalid_argument("moment scan: p values must be strictly increasing");
    CutoffPass pass = cutoff_values(
        [&](const SpectralField& u) { return std::abs(F(u)); }, lambda, m, spec);
    if (pass.accepted == 0) throw std::runtime_error("moment scan: no sample passed the cutoff");

    MomentScan scan;
    scan.p_values = p_values;
    scan.acceptance_fraction = pass.acceptance;
    std::vector<double> x, y, sig;
    for (double p : p_values) {
        MCEstimate e = lp_from_values(pass.values, p);
        scan.estimates.push_back(e);
        if (e.mean <= 0.0)
            throw std::runtime_error("moment scan: vanishing estimate, beta fit undefined");
        x.push_back(std::log(p));
        y.push_back(std::log(e.mean));
        sig.push_back(e.stderr_est / e.mean);  // delta method on the log
    }
    double sigma = 0.0;
    fit_line(x, y, sig, scan.fitted_beta, sigma);
    scan.beta_ci = 2.0 * sigma;
    return scan;
}

MomentScan qn_moment_scan(double s, double lambda, int N, const std::vector<double>& p_values,
                          const EnsembleSpec& spec) {
    if (s <= 2.0) throw std::invalid_argument("qn_moment_scan: s must be > 2");
    EnsembleSpec es = spec;
    es.s = s;
    es.cutoff_N = N;
    return functional_moment_scan(
        [&](const SpectralField& u) { return q_n_at_zero(u, s, 2, N); }, lambda, 2, p_values,
        es);
}

namespace {

// log b / (log log b)^{1−α} ≤ b^{α/2}, defined for b > e
bool condition_one(double b, double alpha) {
    double ll = std::log(std::log(b));
    if (ll <= 0.0) return false;
    return std::log(b) / std::pow(ll, 1.0 - alpha) <= std::pow(b, 0.5 * alpha);
}

}  // namespace

double admissible_b0(const DensityBoundParams& params) {
    check_params(params);
    double M = std::max(params.C0, params.M_p);
    double lower = std::exp(1.0) + 1e-9;  // log log b must be positive
    lower = std::max(lower, std::pow(params.T / (4.0 * params.q), 2.0 / params.alpha));
    lower = std::max(lower, std::exp(std::exp(std::log(M) / (4.0 * params.q))));
    if (condition_one(lower, params.alpha)) return lower;
    // doubling scan for the first admissible b, then bisect onto the boundary
    double hi = 2.0 * lower;
    while (!condition_one(hi, params.alpha)) {
        hi *= 2.0;
        if (hi > 1e300) throw std::runtime_error("admissible_b0: no admissible b found");
    }
    double lo = hi / 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (condition_one(mid, params.alpha) ? hi : lo) = mid;
    }
    return std::max(hi, lower);
}

double gronwall_envelope(double y0, const DensityBoundParams& params, double r, double t) {
    check_params(params);
    if (r <= 1.0) throw std::invalid_argument("gronwall_envelope: r must be > 1");
    if (y0 < 0.0) throw std::invalid_argument("gronwall_envelope: y0 must be >= 0");
    return std::pow(std::pow(y0, 1.0 / r) + params.C0 * std::abs(t) * std::pow(r, -params.alpha),
                    r);
}

double weak_lq_bound(const DensityBoundParams& params) {
    check_params(params);
    double b0 = params.b0 > 0.0 ? params.b0 : admissible_b0(params);
    double M = std::max(params.C0, params.M_p);
    double q = params.q, T = params.T, alpha = params.alpha;

    // branch 1: small sets mu(E) = e^{−b}, b ≥ b0, r = b/log log b
    auto exponent = [&](double b) {
        double r = b / std::log(std::log(b));
        return r * std::log(M) - b / (2.0 * q) +
               T * std::pow(r, 1.0 - alpha) * std::exp((b / r) * (1.0 - 1.0 / (2.0 * q)));
    };
    const int kGrid = 20000;
    double bmax = 4.0 * b0;
    double log_branch1 = 0.0;
    for (int pass = 0;; ++pass) {
        double best = -std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i <= kGrid; ++i) {
            double b = b0 * std::pow(bmax / b0, static_cast<double>(i) / kGrid);
            double e = exponent(b);
            if (e > best) {
                best = e;
                best_i = i;
            }
        }
        if (best_i < kGrid - kGrid / 100) {
            log_branch1 = best;
            break;
        }
        if (pass >= 30) {
            std::ostringstream os;
            os << "weak_lq_bound: branch-1 scan did not converge on [" << b0 << ", " << bmax
               << "]";
            throw std::runtime_error(os.str());
        }
        bmax *= 2.0;  // sup still at the right edge: extend
    }

    // branch 2: large sets mu(E) = e^{−beta} ≥ e^{−b0}, r = 2 via the envelope
    double log_branch2 = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
        double beta = b0 * static_cast<double>(i) / kGrid;
        // log[ rho^{−(1−1/q)} (M_p rho^{(1−1/(2q))/2} + C0 T 2^{−α})² ], rho = e^{−beta}
        double v = (1.0 - 1.0 / q) * beta +
                   2.0 * std::log(params.M_p * std::exp(-beta * (1.0 - 1.0 / (2.0 * q)) / 2.0) +
                                  params.C0 * T * std::pow(2.0, -alpha));
        log_branch2 = std::max(log_branch2, v);
    }

    return std::exp(std::max(log_branch1, log_branch2));
}

double transported_set_bound(double rho_A, const DensityBoundParams& params, double eps0) {
    if (rho_A < 0.0 || rho_A > 1.0)
        throw std::invalid_argument("transported_set_bound: rho_A must be in [0,1]");
    if (eps0 <= 0.0 || eps0 >= 1.0)
        throw std::invalid_argument("transported_set_bound: eps0 must be in (0,1)");
    if (rho_A == 0.0) return 0.0;
    return weak_lq_bound(params) * std::pow(rho_A, 1.0 - eps0);
}

namespace {

void append_csv_line(const std::string& path, const std::string& header,
                     const std::string& line) {
    bool fresh = !std::ifstream(path).good();
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open csv ledger: " + path);
    if (fresh) out << header << "\n";
    out << line << "\n";
}

}  // namespace

void append_moment_csv(const std::string& path, double s, double lambda, int N, double p,
                       const MCEstimate& e) {
    std::ostringstream os;
    os.precision(17);
    os << s << "," << lambda << "," << N << "," << p << "," << e.mean << "," << e.stderr_est
       << "," << e.count;
    append_csv_line(path, "s,lambda,N,p,mean,stderr,count", os.str());
}

void append_bound_csv(const std::string& path, const std::string& params, double value) {
    std::ostringstream os;
    os.precision(17);
    os << "\"" << params << "\"," << value;
    append_csv_line(path, "params,value", os.str());
}

}  // namespace nlslab
