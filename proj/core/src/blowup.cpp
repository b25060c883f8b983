#include "nlfujita/blowup.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "nlfujita/error.hpp"
#include "nlfujita/report.hpp"

namespace nlf {

namespace {

constexpr double kExponentTol = 1e-12;

double sphere_area(int n) {
    switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    }
    throw Error("dimension must be 1, 2 or 3");
}

std::string mode_name(ThresholdMode m) { return m == ThresholdMode::quadrature ? "quadrature" : "closed_form"; }

}  // namespace

bool bernoulli_criterion(const BernoulliODE& ode) {
    if (!(ode.f0 > 0.0)) return false;
    if (ode.lambda == 0.0) return true;
    return ode.f0 > std::pow(ode.lambda / ode.mu, 1.0 / (ode.p - 1.0));
}

BernoulliBarrier bernoulli_barrier(const BernoulliODE& ode, double t) {
    if (!(ode.p > 1.0)) throw Error("exponent out of range");
    if (!(ode.mu > 0.0)) throw Error("mu must be positive");
    if (!(ode.lambda >= 0.0)) throw Error("lambda must be nonnegative");
    if (!(ode.f0 >= 0.0)) throw Error("f0 must be nonnegative");
    if (t < ode.t0) throw Error("t must be >= t0");

    BernoulliBarrier out;
    const double q = ode.p - 1.0;
    if (ode.f0 == 0.0) {
        out.delta = kInf;
        out.lower_bound = 0.0;
        return out;
    }
    const double f_pow = std::pow(ode.f0, -q);  // f0^{1-p}
    if (ode.lambda == 0.0) {
        out.delta = f_pow - q * ode.mu * (t - ode.t0);
        out.horizon = ode.t0 + f_pow / (q * ode.mu);
    } else {
        const double ratio = ode.mu / ode.lambda;
        out.delta = (f_pow - ratio) * std::exp(-q * ode.lambda * ode.t0) + ratio * std::exp(-q * ode.lambda * t);
        if (bernoulli_criterion(ode))
            out.horizon = ode.t0 - std::log1p(-f_pow / ratio) / (q * ode.lambda);
    }
    out.lower_bound = out.delta > 0.0 ? std::exp(-ode.lambda * t) * std::pow(out.delta, -1.0 / q) : kInf;
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
    case Regime::below_sigma_over_n: return "p<1+sigma/n";
    case Regime::at_sigma_over_n: return "p=1+sigma/n";
    case Regime::subcritical: return "1+sigma/n<p<p_F";
    case Regime::critical: return "p=p_F";
    case Regime::supercritical: return "p>p_F";
    }
    return "unknown";
}

double fujita_exponent(int n, double sigma) { return 1.0 + (sigma + 2.0) / n; }

void validate(const RegimeParams& params) {
    if (params.n < 1 || params.n > 3) throw Error("dimension must be 1, 2 or 3");
    if (!(params.p > 1.0)) throw Error("exponent out of range");
    if (!(params.sigma > -2.0)) throw Error("sigma must be > -2");
    if (!(params.b > params.n)) throw Error("test function exponent b must exceed n");
    if (!(params.R >= 2.0)) throw Error("R must be >= 2");
    if (!(params.d_hat >= 0.0)) throw Error("d must be nonnegative");
    if (!(params.C_lower > 0.0)) throw Error("coefficient lower constant must be positive");
}

Regime classify_regime(int n, double sigma, double p) {
    const double s = 1.0 + sigma / n;
    const double pf = fujita_exponent(n, sigma);
    if (std::abs(p - pf) <= kExponentTol) return Regime::critical;
    if (p > pf) return Regime::supercritical;
    if (std::abs(p - s) <= kExponentTol) return Regime::at_sigma_over_n;
    if (p < s) return Regime::below_sigma_over_n;
    return Regime::subcritical;
}

double phi_R(const RegimeParams& params, const Point& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return std::pow(1.0 + r2 / params.R, -0.5 * params.b);
}

GridFunction sample_phi_R(const RegimeParams& params, const Grid& grid) {
    return GridFunction::sample(grid, [&](const Point& x) { return phi_R(params, x); });
}

std::pair<double, double> mu_lambda(const RegimeParams& params) {
    validate(params);
    const double lambda = params.d_hat / params.R;
    const double n = params.n, p = params.p, s = params.sigma;
    const double border = 1.0 + s / n;
    double mu;
    if (std::abs(p - border) <= kExponentTol)
        mu = std::pow(std::log(params.R), 1.0 - p);
    else if (p < border)
        mu = 1.0;
    else
        mu = std::pow(params.R, -0.5 * (n * (p - 1.0) - s));
    return {lambda, mu};
}

std::pair<double, double> critical_mass(int n, double sigma, double p, double d, double C3) {
    if (!(p > 1.0)) throw Error("exponent out of range");
    if (!(p > fujita_exponent(n, sigma) + kExponentTol)) throw Error("not super-critical");
    if (!(C3 > 0.0)) throw Error("C3 must be positive");
    const double b0 = std::max<double>(n, n - sigma / (p - 1.0));
    const double m0 = std::pow(d / C3, 1.0 / (p - 1.0)) * std::pow(2.0, -0.5 * ((sigma + 2.0) / (p - 1.0) - n));
    return {b0, m0};
}

HolderIntegral holder_integral(const RegimeParams& params, const Grid& grid) {
    validate(params);
    if (grid.dim() != params.n) throw Error("grid dimension differs from n");
    const double L = grid.half_width();
    const double w = params.sigma / (params.p - 1.0);
    const double e = params.b + w;
    if (!(e > params.n)) throw Error("need b + sigma/(p-1) > n for a finite Holder integral");
    if (!(L >= 1.0)) throw Error("box half width must be >= 1");

    HolderIntegral h;
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r2 = grid.radius_squared(i);
        acc += std::pow(1.0 + r2 / params.R, -0.5 * params.b) * std::pow(1.0 + r2, -0.5 * w);
    }
    h.inside = acc * grid.cell_volume();
    const double c = params.sigma >= 0.0 ? 1.0 : std::pow(2.0, std::abs(params.sigma) / (2.0 * (params.p - 1.0)));
    h.tail_bound = c * std::pow(params.R, 0.5 * params.b) * sphere_area(params.n) * std::pow(L, params.n - e) /
                   (e - params.n);
    return h;
}

double quadrature_mu(const RegimeParams& params, const Grid& grid) {
    return params.C_lower * std::pow(holder_integral(params, grid).total(), -(params.p - 1.0));
}

namespace {

// (lambda, mu) used by the Bernoulli step at params.R.
std::pair<double, double> bernoulli_coefficients(const RegimeParams& params, const Grid& grid) {
    const double lambda = params.d_hat / params.R;
    if (params.mode == ThresholdMode::quadrature) return {lambda, quadrature_mu(params, grid)};
    const auto [lam, mu_table] = mu_lambda(params);
    double C = params.C3;
    switch (classify_regime(params.n, params.sigma, params.p)) {
    case Regime::below_sigma_over_n: C = params.C1; break;
    case Regime::at_sigma_over_n: C = params.C2; break;
    default: break;
    }
    if (!(C > 0.0)) throw Error("case constant must be positive");
    return {lam, C * mu_table};
}

}  // namespace

double regime_threshold(const RegimeParams& params, const Grid& grid) {
    const auto [lambda, mu] = bernoulli_coefficients(params, grid);
    return std::pow(lambda / mu, 1.0 / (params.p - 1.0));
}

BlowupVerdict regime_criterion(const RegimeParams& params, const GridFunction& u0) {
    validate(params);
    const Grid& grid = u0.grid();
    if (grid.dim() != params.n) throw Error("grid dimension differs from n");
    if (!u0.is_finite()) throw Error("non-finite input");
    if (min_value(u0) < 0.0) throw Error("initial data must be nonnegative");

    BlowupVerdict v;
    v.regime = classify_regime(params.n, params.sigma, params.p);
    v.mode = params.mode;
    const double L = grid.half_width();
    const double R_max = std::max(2.0, 0.25 * L * L);

    std::vector<double> radii;
    if (v.regime == Regime::supercritical) {
        radii.push_back(2.0);
    } else {
        for (double R = 2.0; R <= R_max * (1.0 + 1e-12); R *= 2.0) radii.push_back(R);
    }

    for (double R : radii) {
        RegimeParams at = params;
        at.R = R;
        double f0;
        double threshold;
        std::pair<double, double> lm;
        if (v.regime == Regime::supercritical && params.mode == ThresholdMode::closed_form) {
            // Mass condition with weight (1 + |x|^2/2)^{-b}, which is below phi_2.
            double acc = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                acc += std::pow(1.0 + 0.5 * grid.radius_squared(i), -params.b) * u0[i];
            f0 = acc * grid.cell_volume();
            threshold = critical_mass(params.n, params.sigma, params.p, params.d_hat, params.C3).second;
            lm = bernoulli_coefficients(at, grid);
        } else {
            const GridFunction phi = sample_phi_R(at, grid);
            double acc = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) acc += phi[i] * u0[i];
            f0 = acc * grid.cell_volume();
            lm = bernoulli_coefficients(at, grid);
            threshold = std::pow(lm.first / lm.second, 1.0 / (params.p - 1.0));
        }
        v.R_used = R;
        v.f_R0 = f0;
        v.threshold = threshold;
        if (f0 > threshold && f0 > 0.0) {
            v.met = true;
            const BernoulliODE ode{lm.first, lm.second, params.p, f0, 0.0};
            v.horizon_upper_bound = bernoulli_barrier(ode, 0.0).horizon;
            return v;
        }
    }
    v.note = "not established at this scan range";
    return v;
}

void write_verdict_csv(std::ostream& out, const RegimeParams& params, const BlowupVerdict& v,
                       const std::string& version) {
    out << "# nlfujita " << version << "\n";
    out << fmt::format("# n = {}\n# sigma = {}\n# p = {}\n# b = {}\n# d_hat = {}\n# C_lower = {}\n# mode = {}\n",
                       params.n, format_number(params.sigma), format_number(params.p), format_number(params.b),
                       format_number(params.d_hat), format_number(params.C_lower), mode_name(params.mode));
    if (params.mode == ThresholdMode::closed_form)
        out << fmt::format("# C1 = {}\n# C2 = {}\n# C3 = {}\n", format_number(params.C1), format_number(params.C2),
                           format_number(params.C3));
    if (!v.note.empty()) out << "# note: " << v.note << "\n";
    out << "regime,R_used,f_R0,threshold,met,horizon_upper_bound\n";
    out << to_string(v.regime) << ',' << format_number(v.R_used) << ',' << format_number(v.f_R0) << ','
        << format_number(v.threshold) << ',' << (v.met ? "true" : "false") << ','
        << (v.horizon_upper_bound ? format_number(*v.horizon_upper_bound) : std::string("none")) << "\n";
}

}  // namespace nlf
