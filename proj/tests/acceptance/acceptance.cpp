// Runs the ten acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]  (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "nlfujita/blowup.hpp"
#include "nlfujita/cli/sweep.hpp"
#include "nlfujita/convolution.hpp"
#include "nlfujita/equilibrium.hpp"
#include "nlfujita/error.hpp"
#include "nlfujita/green.hpp"
#include "nlfujita/simulate.hpp"

using namespace nlf;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        lines.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
    }
};

// Worst min(u)/||u||_inf over every trajectory the suite produces.
double g_positivity_floor = 0.0;

void track(const Trajectory& tr) { g_positivity_floor = std::min(g_positivity_floor, tr.positivity_floor); }

double normal_pdf(double x, double var) { return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var); }

// e^{-t} sum_{k>=0} t^k/k! N(x; v0 + k): G(t) applied to N(0, v0) for J = N(0, 1).
double gaussian_series(double x, double t, double v0) {
    double acc = 0.0;
    for (int k = 0; k < 4000; ++k) {
        const double w = std::exp(-t + k * std::log(t) - std::lgamma(k + 1.0));
        acc += w * normal_pdf(x, v0 + k);
        if (k > t && w < 1e-22) break;
    }
    return acc;
}

double max_rel_diff(const GridFunction& a, const GridFunction& b) {
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return d / s;
}

std::vector<double> geometric_times(double t0, double t1, int count) {
    std::vector<double> t;
    for (int i = 0; i < count; ++i) t.push_back(t0 * std::pow(t1 / t0, static_cast<double>(i) / (count - 1)));
    return t;
}

ReactionCoefficient linear_flow() {
    ReactionCoefficient a;
    a.scale = 0.0;
    return a;
}

// 1. Fast convolution against the direct sum.
Outcome convolution_oracle() {
    Outcome out;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const auto start = std::chrono::steady_clock::now();
    auto pairs = [&](int dim, int M, int count) {
        const Grid g(dim, 4.0, M);
        const ConvolutionPlan plan(g);
        double worst = 0.0;
        for (int i = 0; i < count; ++i) {
            GridFunction f(g), k(g.lattice());
            for (std::size_t j = 0; j < f.size(); ++j) f[j] = U(rng);
            for (std::size_t j = 0; j < k.size(); ++j) k[j] = U(rng);
            worst = std::max(worst, max_rel_diff(plan.convolve(k, f), direct_convolve(k, f)));
        }
        return worst;
    };
    const double w1 = pairs(1, 64, 50);
    const double w2 = pairs(2, 32, 10);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.check(w1 <= 1e-10, fmt::format("1D M=64, 50 pairs: max relative error {:.3g} <= 1e-10", w1));
    out.check(w2 <= 1e-10, fmt::format("2D M=32, 10 pairs: max relative error {:.3g} <= 1e-10", w2));
    out.check(secs < 10.0, fmt::format("runtime {:.2f} s < 10 s", secs));
    return out;
}

// 2. G(t) on a Gaussian against the scalar series.
Outcome gaussian_green_oracle() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    const Grid g(1, 40.0, 4096);
    const Kernel k = Kernel::build(KernelSpec::gaussian(1.0), g);
    const ConvolutionPlan plan(g);
    const GreenSeries gs(k, plan, 50.0);
    const auto f = GridFunction::sample(g, [](const Point& x) { return normal_pdf(x[0], 1.0); });
    // The origin is not a cell node; compare at the node nearest to it.
    const int centre = g.cells_per_dim() / 2;
    const double x0 = g.coordinate(centre);
    for (double t : {0.5, 5.0, 50.0}) {
        const double got = gs.apply(f, t)[centre];
        const double want = gaussian_series(x0, t, 1.0);
        const double rel = std::abs(got - want) / want;
        const double tol = t <= 5.0 ? 1e-6 : 1e-4;
        out.check(rel <= tol, fmt::format("t = {}: relative error {:.3g} <= {:g}", t, rel, tol));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.check(secs < 30.0, fmt::format("runtime {:.2f} s < 30 s", secs));
    return out;
}

// 3. Weighted boundedness of G(t) in L^q_b.
Outcome weighted_boundedness() {
    Outcome out;
    const Grid g(1, 60.0, 1024);
    const ConvolutionPlan plan(g);
    std::vector<double> times;
    for (int i = 0; i <= 50; ++i) times.push_back(i);
    const std::vector<std::pair<std::string, std::function<double(const Point&)>>> data{
        {"gaussian", [](const Point& x) { return std::exp(-0.5 * x[0] * x[0]); }},
        {"bracket^-3", [](const Point& x) { return std::pow(1.0 + x[0] * x[0], -1.5); }},
        {"indicator", [](const Point& x) { return std::abs(x[0]) <= 1.0 ? 1.0 : 0.0; }},
    };
    for (const auto& spec : {KernelSpec::gaussian(1.0), KernelSpec::compact_bump(1.0)}) {
        const Kernel k = Kernel::build(spec, g);
        const GreenSeries gs(k, plan, 50.0);
        int passed = 0, total = 0;
        double worst = 0.0;
        for (const auto& [name, fn] : data) {
            const auto f = GridFunction::sample(g, fn);
            for (double b : {-2.0, -1.0, 0.0, 1.0, 2.0})
                for (double q : {1.0, kInf}) {
                    const auto rep = verify_weighted_estimate(gs, f, b, q, times);
                    ++total;
                    if (rep.passed) {
                        ++passed;
                    } else {
                        out.lines.push_back(fmt::format("     {} f={} b={} q={} failed the trend gate",
                                                        to_string(spec.shape), name, b, q));
                    }
                    worst = std::max(worst, rep.sup_ratio);
                }
        }
        out.check(passed == total, fmt::format("{} kernel: {}/{} (b, q, f) cases trend stable, sup ratio {:.4g}",
                                               to_string(spec.shape), passed, total, worst));
    }
    return out;
}

// 4. Pointwise decay of the remainder R_N.
Outcome remainder_decay() {
    Outcome out;
    const auto times = geometric_times(10.0, 200.0, 16);
    auto one = [&](int dim, double L, int M, KernelSpec spec) {
        const Grid g(dim, L, M);
        const Kernel k = Kernel::build(spec, g);
        const GreenSeries gs(k, ConvolutionPlan(g), 200.0);
        const auto rep = verify_remainder_decay(gs, 2, dim + 1.0, 1.0, times);
        out.check(rep.passed, fmt::format("n = {} {} N = 2: slope {:.4f} (target {:.2f} +- {:.2f}), constant "
                                          "spread {:.3f} <= 2",
                                          dim, to_string(spec.shape), rep.fit.slope, -0.5 * dim, 0.05 * dim,
                                          rep.sup_ratio / rep.min_ratio));
    };
    one(1, 128.0, 1024, KernelSpec::gaussian(1.0));
    one(2, 24.0, 192, KernelSpec::compact_bump(1.0));
    return out;
}

// 5. Epsilon-equilibrium constants.
Outcome equilibrium() {
    Outcome out;
    const Grid g(1, 16.0, 1024);
    const Kernel k = Kernel::build(KernelSpec::gaussian(1.0), g);
    const ConvolutionPlan plan(g);
    const auto zero = epsilon_equilibrium_constant(k, 0.0, {2.0, 8.0, 32.0}, plan);
    out.check(zero.d_hat <= 1e-10, fmt::format("b = 0: d_hat {:.3g} <= 1e-10", zero.d_hat));
    std::vector<double> etas;
    for (double eta = 2.0; eta <= 1024.0; eta *= 2.0) etas.push_back(eta);
    const auto two = epsilon_equilibrium_constant(k, 2.0, etas, plan);
    out.check(std::abs(two.d_hat - 1.0) <= 1e-4, fmt::format("b = 2: d_hat {:.10f} = 1 +- 1e-4", two.d_hat));
    std::vector<double> lx, ly;
    for (const auto& row : two.profile) {
        lx.push_back(std::log(row.eta));
        ly.push_back(std::log(row.eps_hat));
    }
    const double slope = least_squares(lx, ly).slope;
    out.check(std::abs(slope + 1.0) <= 0.05, fmt::format("b = 2: log eps vs log eta slope {:.5f} = -1 +- 0.05", slope));
    return out;
}

// 6. Bernoulli barrier.
Outcome bernoulli() {
    Outcome out;
    const auto exact = bernoulli_barrier(BernoulliODE{1.0, 2.0, 2.0, 1.0, 0.0}, 0.0);
    const double err = exact.horizon ? std::abs(*exact.horizon - std::log(2.0)) : kInf;
    out.check(err <= 1e-8, fmt::format("(1, 2, 2, 1): horizon error vs ln 2 {:.3g} <= 1e-8", err));

    namespace ode = boost::numeric::odeint;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int draws = 0; draws < 20;) {
        const double lambda = 2.0 * U(rng);
        const double mu = 0.2 + 2.0 * U(rng);
        const double p = 1.2 + 2.8 * U(rng);
        const double f0 = 0.05 + 3.0 * U(rng);
        const BernoulliODE b{lambda, mu, p, f0, 0.0};
        if (!bernoulli_criterion(b)) continue;
        ++draws;
        const double T = *bernoulli_barrier(b, 0.0).horizon;
        std::vector<double> f{f0};
        auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy, double) {
            dy[0] = -lambda * y[0] + mu * std::pow(y[0], p);
        };
        auto stepper = ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_fehlberg78<std::vector<double>>());
        double t = 0.0;
        for (int i = 1; i <= 99; ++i) {
            const double target = 0.01 * i * T;
            ode::integrate_adaptive(stepper, rhs, f, t, target, 1e-4 * T);
            t = target;
            const double barrier = bernoulli_barrier(b, t).lower_bound;
            worst = std::max(worst, std::abs(f[0] - barrier) / barrier);
        }
    }
    out.check(worst <= 1e-6, fmt::format("20 draws, RK78 vs barrier to 99% of horizon: max relative {:.3g} <= 1e-6",
                                         worst));
    return out;
}

// 7. Fujita bracket sweeps.
Outcome fujita() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    auto report = [&](const cli::SweepTable& t, double blowup_below) {
        const int n = t.config.n;
        for (const auto& r : t.rows) {
            const bool sub = r.p <= blowup_below;
            out.lines.push_back(fmt::format("     n={} p={}: small {}{}, large {}{}", n, r.p, to_string(r.small.status),
                                            r.small.T_num ? fmt::format(" (T={:.3g})", *r.small.T_num) : "",
                                            to_string(r.large.status),
                                            r.large.T_num ? fmt::format(" (T={:.3g})", *r.large.T_num) : ""));
            if (sub) {
                out.check(r.small.status == TrajectoryStatus::blown_up && r.large.status == TrajectoryStatus::blown_up,
                          fmt::format("n = {}, p = {} < p_F: both data blow up before {}", n, r.p,
                                      t.config.stepper.horizon));
            } else {
                out.check(r.small.status == TrajectoryStatus::global_decay,
                          fmt::format("n = {}, p = {} > p_F: small data decay globally", n, r.p));
            }
        }
        const std::string lo = t.p_lo ? fmt::format("{}", *t.p_lo) : "none";
        const std::string hi = t.p_hi ? fmt::format("{}", *t.p_hi) : "none";
        out.check(t.brackets(t.fujita()), fmt::format("n = {}: bracket [{}, {}] contains p_F = {}", n, lo, hi,
                                                      t.fujita()));
        g_positivity_floor = std::min(g_positivity_floor, t.positivity_floor());
    };

    cli::SweepConfig one;
    one.n = 1;
    one.p_list = {1.5, 2.0, 2.5, 3.5, 4.0};
    report(cli::fujita_sweep(one), 2.5);

    cli::SweepConfig two;
    two.n = 2;
    two.L = 96.0;
    two.M = 256;
    two.p_list = {1.5, 1.75, 2.5, 3.0};
    report(cli::fujita_sweep(two), 1.75);

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.check(secs < 600.0, fmt::format("runtime {:.1f} s < 600 s", secs));
    return out;
}

// 8. Decay rates of the linear flow and of small supercritical data.
Outcome decay_rates() {
    Outcome out;
    auto linear = [&](int dim, double L, int M, double horizon) {
        const Grid g(dim, L, M);
        const Kernel k = Kernel::build(KernelSpec::gaussian(1.0), g);
        StepperOptions opts;
        opts.horizon = horizon;
        opts.dt0 = 1.0;
        opts.dt_max = 2.0;
        const auto tr = run(bump(g, 1.0, 1.0), k, linear_flow(), 2.0, opts);
        track(tr);
        if (tr.status != TrajectoryStatus::global_decay) {
            out.check(false, fmt::format("linear flow n = {}: status {} {}", dim, to_string(tr.status),
                                         tr.warnings.empty() ? "" : tr.warnings.front()));
            return;
        }
        const auto fit = decay_rate_fit(tr, NormKind::Linf, 0.1 * horizon);
        const double target = -0.5 * dim;
        out.check(std::abs(fit.slope - target) <= 0.15 * std::abs(target),
                  fmt::format("linear flow n = {}: L^inf slope {:.4f} = {:.2f} +- 15%", dim, fit.slope, target));
    };
    linear(1, 96.0, 384, 200.0);
    linear(2, 64.0, 256, 100.0);

    // (n, sigma, p) = (1, 1, 4) with weight b = sigma/(p-1) = 1/3 and beta = (n - b)/2.
    const Grid g(1, 96.0, 768);
    const Kernel k = Kernel::build(KernelSpec::gaussian(1.0), g);
    ReactionCoefficient a;
    a.sigma = 1.0;
    a.clip_radius = 0.9 * g.half_width();
    StepperOptions opts;
    opts.horizon = 200.0;
    opts.dt0 = 0.25;
    opts.dt_max = 2.0;
    const auto tr = run(bump(g, 1.0, 1e-3), k, a, 4.0, opts);
    track(tr);
    const double b = 1.0 / 3.0, beta = (1.0 - b) / 2.0;
    if (tr.status != TrajectoryStatus::global_decay) {
        out.check(false, fmt::format("(1, 1, 4) small data: status {} (expected global_decay) {}", to_string(tr.status),
                                     tr.warnings.empty() ? "" : tr.warnings.front()));
        return out;
    }
    const auto fit = decay_rate_fit(tr, NormKind::Linf_b, 20.0);
    out.check(std::abs(fit.slope + beta) <= 0.2 * beta,
              fmt::format("(1, 1, 4) small data: L^inf_b slope {:.4f} = {:.4f} +- 20% (b = {:.4f})", fit.slope, -beta,
                          tr.weight_b));
    return out;
}

// 9. Entropy along the linear flow.
Outcome entropy() {
    Outcome out;
    const Grid g(1, 16.0, 1024);
    const Kernel k = Kernel::build(KernelSpec::gaussian(1.0), g);
    const ConvolutionPlan plan(g);
    const double b = 2.0;
    const auto eq = epsilon_equilibrium_constant(k, b, {2.0, 8.0, 32.0}, plan);
    const GreenSeries gs(k, plan, 1.0);
    const auto prop = gs.propagator(0.5);
    std::vector<GridFunction> states{GridFunction::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); })};
    std::vector<double> times{0.0};
    for (int s = 1; s <= 40; ++s) {
        states.push_back(gs.apply(prop, states.back()));
        times.push_back(0.5 * s);
    }
    EntropyMonitor mon{EntropyPhi::square, 2.0, default_entropy_nu(eq.d_hat, b), {}, {}};
    const auto tr = entropy_trace(mon, states, times, b, 2.0);
    out.check(tr.nonincreasing, fmt::format("square entropy over {} steps: worst increase {:.3g} <= 1e-8 x {:.4g}",
                                            times.size() - 1, tr.worst_increase, tr.values.front()));
    return out;
}

// 10. Mass conservation of the linear flow and the positivity floor.
Outcome invariants() {
    Outcome out;
    const Grid g(1, 48.0, 512);
    const Kernel k = Kernel::build(KernelSpec::gaussian(1.0), g);
    StepperOptions opts;
    opts.horizon = 50.0;
    opts.dt0 = 0.5;
    opts.dt_max = 1.0;
    const auto tr = run(bump(g, 1.0, 1.0), k, linear_flow(), 2.0, opts);
    track(tr);
    double drift = 0.0;
    for (const auto& s : tr.norms) drift = std::max(drift, std::abs(s.L1 - tr.norms.front().L1));
    drift /= tr.norms.front().L1;
    out.check(drift <= 1e-6, fmt::format("linear flow mass drift over [0, 50]: {:.3g} <= 1e-6", drift));
    out.check(g_positivity_floor >= -1e-8,
              fmt::format("positivity floor over all acceptance runs: {:.3g} >= -1e-8 ||u||_inf", g_positivity_floor));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
        {"convolution oracle", convolution_oracle},
        {"gaussian green oracle", gaussian_green_oracle},
        {"weighted boundedness", weighted_boundedness},
        {"remainder decay", remainder_decay},
        {"epsilon equilibrium", equilibrium},
        {"bernoulli barrier", bernoulli},
        {"fujita bracket", fujita},
        {"decay rates", decay_rates},
        {"entropy monotonicity", entropy},
        {"mass and positivity", invariants},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.contains(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, fmt::format("threw: {}", e.what()));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& l : o.lines) std::cout << "    " << l << "\n";
        std::cout << fmt::format("criterion {:2d} {} {} ({:.1f} s)", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                                 secs)
                  << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
