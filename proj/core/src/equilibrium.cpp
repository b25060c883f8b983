#include "nlfujita/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "nlfujita/error.hpp"
#include "nlfujita/report.hpp"

namespace nlf {

namespace {

using Vec = std::array<double, 3>;

double norm2(const Vec& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

Vec sub(const Vec& a, const Vec& c) { return {a[0] - c[0], a[1] - c[1], a[2] - c[2]}; }

// Log of rho(x, eta) = (1 + |x|^2/eta)^{1/2}.
double log_rho(const Vec& x, double eta) { return 0.5 * std::log1p(norm2(x) / eta); }

// Points spread over several orders of magnitude relative to sqrt(eta).
class PointSampler {
public:
    PointSampler(std::uint64_t seed, int dim, double eta) : rng_(seed), dim_(dim), root_eta_(std::sqrt(eta)) {}

    Vec point() {
        const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 2.0)(rng_)) * root_eta_;
        std::normal_distribution<double> nd(0.0, scale);
        Vec v{0.0, 0.0, 0.0};
        for (int d = 0; d < dim_; ++d) v[d] = nd(rng_);
        return v;
    }

    double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
    int dim_;
    double root_eta_;
};

std::string vec_str(const Vec& v, int dim) {
    std::string s = "(";
    for (int d = 0; d < dim; ++d) s += fmt::format("{}{:.6g}", d ? ", " : "", v[d]);
    return s + ")";
}

void record(PropertyResult& res, double margin, const std::string& where) {
    ++res.samples;
    if (margin < -1e-12) ++res.violations;
    if (margin < res.tightest_margin) {
        res.tightest_margin = margin;
        res.worst_case = where;
    }
}

}  // namespace

double AuxFunction::exponent() const {
    switch (kind) {
    case AuxKind::gamma: return b;
    case AuxKind::rho: return 1.0;
    case AuxKind::phi_R: return -b;
    }
    return b;
}

double gamma_eval_r2(const AuxFunction& aux, double r_squared) {
    if (!(aux.eta > 0.0)) throw Error("eta must be positive");
    const double e = aux.exponent();
    return e == 0.0 ? 1.0 : std::pow(1.0 + r_squared / aux.eta, 0.5 * e);
}

double gamma_eval(const AuxFunction& aux, const Point& x) {
    return gamma_eval_r2(aux, x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

SandwichResult sandwich_check(const AuxFunction& aux, const Grid& grid) {
    if (!(aux.eta >= 1.0)) throw Error("sandwich needs eta >= 1");
    const double b = aux.exponent();
    const double b_plus = std::max(b, 0.0), b_minus = std::min(b, 0.0);
    const double lower_c = std::pow(aux.eta, -0.5 * b_plus);
    const double upper_c = std::pow(aux.eta, -0.5 * b_minus);
    SandwichResult res;
    res.worst_slack = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r2 = grid.radius_squared(i);
        const double w = std::pow(1.0 + r2, 0.5 * b);
        const double g = gamma_eval_r2(aux, r2);
        res.worst_slack = std::min({res.worst_slack, g / (lower_c * w) - 1.0, (upper_c * w) / g - 1.0});
    }
    res.passed = res.worst_slack >= -1e-12;
    return res;
}

PropertyResult quotient_bound_check(double b, double eta, std::size_t sample_count, std::uint64_t seed, int dim) {
    if (!(eta >= 2.0)) throw Error("quotient bound needs eta >= 2");
    PointSampler sampler(seed, dim, eta);
    PropertyResult res;
    for (std::size_t n = 0; n < sample_count; ++n) {
        const Vec x = sampler.point();
        // Half the draws put y near x to probe the |x - y| <= 1 branch.
        Vec y = sampler.point();
        if (n % 2 == 1) {
            std::normal_distribution<double> nd(0.0, 0.5);
            for (int d = 0; d < dim; ++d) y[d] = x[d] + nd(sampler.rng());
        }
        const double r = sampler.unit(), s = sampler.unit();
        const double rx = 1.0 + norm2(x) / eta, ry = 1.0 + norm2(y) / eta;
        const double lhs = 0.5 * b * std::log((r * ry + (1.0 - r) * rx) / (s * ry + (1.0 - s) * rx));
        const double rhs = 0.5 * std::abs(b) * std::log(2.0) + 0.5 * std::abs(b) * std::log1p(norm2(sub(x, y)));
        record(res, rhs - lhs, fmt::format("x={} y={} r={:.4g} s={:.4g}", vec_str(x, dim), vec_str(y, dim), r, s));
    }
    res.passed = res.violations == 0;
    return res;
}

PropertyResult chain_inequality_check(double b, double eta, int k, std::size_t sample_count, std::uint64_t seed,
                                      int dim) {
    if (!(eta > 0.0)) throw Error("eta must be positive");
    if (k < 1) throw Error("chain length must be >= 1");
    PointSampler sampler(seed, dim, eta);
    PropertyResult res;
    std::vector<Vec> xs(static_cast<std::size_t>(k) + 1);
    for (std::size_t n = 0; n < sample_count; ++n) {
        // Build the chain backwards from x_k with steps of a common random scale.
        xs[static_cast<std::size_t>(k)] = sampler.point();
        for (int j = k - 1; j >= 0; --j) {
            const Vec step = sampler.point();
            for (int d = 0; d < 3; ++d) xs[j][d] = xs[j + 1][d] + step[d];
        }
        const double lhs = b * log_rho(xs[0], eta);
        double rhs = 0.0;
        if (b >= 0.0) {
            for (int j = 1; j <= k; ++j) rhs += b * log_rho(sub(xs[j - 1], xs[j]), 0.5 * eta);
            rhs += b * log_rho(xs[static_cast<std::size_t>(k)], 0.5 * eta);
        } else {
            for (int j = 1; j <= k; ++j) rhs += std::abs(b) * log_rho(sub(xs[j - 1], xs[j]), eta);
            rhs += b * log_rho(xs[static_cast<std::size_t>(k)], 2.0 * eta);
        }
        std::string where;
        for (int j = 0; j <= k; ++j) where += fmt::format("{}x{}={}", j ? " " : "", j, vec_str(xs[j], dim));
        record(res, rhs - lhs, where);
    }
    res.passed = res.violations == 0;
    return res;
}

PropertyResult elementary_inequality_check(double p, std::size_t sample_count, std::uint64_t seed) {
    if (!(p >= 1.0)) throw Error("invalid exponent");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(-6.0, 6.0);
    PropertyResult res;
    for (std::size_t n = 0; n < sample_count; ++n) {
        const double a = std::pow(10.0, mag(rng)), c = std::pow(10.0, mag(rng));
        const double lhs = std::abs(std::pow(a, p) - std::pow(c, p));
        const double rhs = p * std::pow(std::max(a, c), p - 1.0) * std::abs(a - c);
        // Relative margin; both sides vanish only when a == c.
        const double margin = rhs > 0.0 ? (rhs - lhs) / rhs : 0.0;
        record(res, margin, fmt::format("a={:.6g} c={:.6g}", a, c));
    }
    res.passed = res.violations == 0;
    return res;
}

EquilibriumResult epsilon_equilibrium_constant(const Kernel& kernel, double b, const std::vector<double>& etas,
                                               const ConvolutionPlan& plan) {
    if (etas.empty()) throw Error("empty eta list");
    for (double eta : etas)
        if (!(eta >= 2.0)) throw Error(fmt::format("eta must be >= 2 (got {})", eta));
    const Grid grid = kernel.state_grid();
    if (!plan.grid().same_box(grid)) throw Error("grid mismatch");
    const MomentProbe pr = probe_weighted_moment(kernel, 2.0 + std::abs(b));
    if (!pr.converged)
        throw HypothesisError(fmt::format("kernel is not certified in L1_{}", 2.0 + std::abs(b)),
                              check_hypotheses(kernel, GreenFarHypothesis{2.0 + std::abs(b)}).render());

    const int n = grid.dim();
    const int M = grid.cells_per_dim();
    const double L = grid.half_width();
    const double margin = kernel.effective_radius(1e-8);
    if (margin >= L) throw Error("convolution support exceeds interior margin");

    // Doubled box with the same spacing; the kernel keeps its support.
    const Grid wide(n, 2.0 * L, 2 * M);
    const Grid wide_lat = wide.lattice();
    const Grid lat = grid.lattice();
    GridFunction j_wide(wide_lat);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        auto idx = lat.unflatten(i);
        for (int d = 0; d < n; ++d) idx[d] += M / 2;
        j_wide[wide_lat.flatten(idx)] = kernel.samples()[i];
    }
    const ConvolutionPlan wide_plan(wide, plan.mode());
    const SpectralKernel j_hat = wide_plan.transform(j_wide);

    std::vector<std::size_t> interior;  // (cell index on grid, cell index on wide)
    std::vector<std::size_t> interior_wide;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (L - grid.max_abs_coordinate(i) < margin) continue;
        auto idx = grid.unflatten(i);
        for (int d = 0; d < n; ++d) idx[d] += M / 2;
        interior.push_back(i);
        interior_wide.push_back(wide.flatten(idx));
    }
    if (interior.empty()) throw Error("convolution support exceeds interior margin");

    EquilibriumResult res;
    res.b = b;
    res.margin = margin;
    res.interior_nodes = interior.size();
    const double a0 = kernel.alpha0();
    for (double eta : etas) {
        const AuxFunction aux{b, eta, AuxKind::gamma};
        const GridFunction gamma = GridFunction::sample(wide, [&](const Point& x) { return gamma_eval(aux, x); });
        const GridFunction jg = wide_plan.apply(j_hat, gamma);
        double eps = 0.0;
        for (std::size_t w : interior_wide) eps = std::max(eps, std::abs(jg[w] - a0 * gamma[w]) / gamma[w]);
        res.profile.push_back({eta, eps, eta * eps});
        res.d_hat = std::max(res.d_hat, eta * eps);
    }
    res.moment_2_plus_b = kernel.weighted_moment(2.0 + std::abs(b));
    res.empirical_C_b = res.d_hat / res.moment_2_plus_b;
    return res;
}

void write_profile_csv(std::ostream& out, const EquilibriumResult& result, const std::string& version) {
    out << "# nlfujita " << version << "\n";
    out << "# b = " << format_number(result.b) << "\n";
    out << "# d_hat = " << format_number(result.d_hat) << "\n";
    out << "# margin = " << format_number(result.margin) << "\n";
    out << "# moment_2_plus_abs_b = " << format_number(result.moment_2_plus_b) << "\n";
    out << "# empirical_C_b = " << format_number(result.empirical_C_b) << "\n";
    out << "eta,eps_hat,eta_times_eps_hat\n";
    for (const auto& r : result.profile)
        out << format_number(r.eta) << ',' << format_number(r.eps_hat) << ',' << format_number(r.eta_times_eps_hat)
            << "\n";
}

double EntropyMonitor::eval_phi(double s) const {
    switch (phi) {
    case EntropyPhi::square: return s * s;
    case EntropyPhi::identity: return s;
    case EntropyPhi::abs_power: return std::pow(std::abs(s), r);
    }
    return s * s;
}

double default_entropy_nu(double d_hat, double b) { return 2.0 * d_hat + std::abs(b); }

EntropyTrace entropy_trace(EntropyMonitor& monitor, const std::vector<GridFunction>& states,
                           const std::vector<double>& times, double b, double eta0, bool blown_up) {
    if (blown_up) throw Error("entropy trace refuses a blown-up trajectory");
    if (states.size() != times.size()) throw Error("states and times differ in length");
    if (!(eta0 >= 2.0)) throw Error("eta0 must be >= 2");
    if (monitor.phi == EntropyPhi::abs_power && !(monitor.r > 1.0)) throw Error("abs_power needs r > 1");
    EntropyTrace tr;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const double t = times[s];
        if (s > 0 && !(t > times[s - 1])) throw Error("times must be increasing");
        const GridFunction& u = states[s];
        if (!u.is_finite()) throw Error("non-finite input");
        const Grid& g = u.grid();
        const AuxFunction aux{b, eta0 + t, AuxKind::gamma};
        const double lam = std::pow(1.0 + t, -monitor.nu);
        double acc = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double gam = gamma_eval_r2(aux, g.radius_squared(i));
            acc += monitor.eval_phi(lam * u[i] / gam) * gam;
        }
        const double value = acc * g.cell_volume();
        tr.times.push_back(t);
        tr.values.push_back(value);
        monitor.times.push_back(t);
        monitor.values.push_back(value);
    }
    tr.nonincreasing = true;
    if (!tr.values.empty()) {
        const double tol = 1e-8 * std::abs(tr.values.front());
        for (std::size_t s = 1; s < tr.values.size(); ++s) {
            const double rise = tr.values[s] - tr.values[s - 1];
            tr.worst_increase = std::max(tr.worst_increase, rise);
            if (rise > tol) tr.nonincreasing = false;
        }
    }
    return tr;
}

}  // namespace nlf
