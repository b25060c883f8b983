#include "nlfujita/cli/suites.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "nlfujita/blowup.hpp"
#include "nlfujita/cli/sweep.hpp"
#include "nlfujita/equilibrium.hpp"
#include "nlfujita/green.hpp"
#include "nlfujita/report.hpp"
#include "nlfujita/simulate.hpp"

namespace nlf::cli {

void SuiteResult::check(bool ok, const std::string& what) {
    passed = passed && ok;
    lines.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
}

std::string SuiteResult::summary() const {
    std::string out = fmt::format("{}: {}\n", name, passed ? "PASS" : "FAIL");
    for (const auto& l : lines) out += "  " + l + "\n";
    for (const auto& f : files) out += "  wrote " + f.string() + "\n";
    return out;
}

namespace {

std::string label(double v) { return std::isinf(v) ? "inf" : fmt::format("{:g}", v); }

std::ofstream open_csv(const RunContext& ctx, const std::string& file, SuiteResult& res) {
    std::filesystem::create_directories(ctx.out_dir);
    const auto path = ctx.out_dir / file;
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    res.files.push_back(path);
    return out;
}

// Header echoing every parameter the suite read.
// The core writers add their own version line; `with_version` covers the others.
void echo_config(std::ostream& out, const ExperimentConfig& cfg, const RunContext& ctx, const std::string& suite,
                 bool with_version = false) {
    if (with_version) out << "# nlfujita " << ctx.version << "\n";
    out << "# suite = " << suite << "\n# seed = " << ctx.seed << "\n";
    for (const auto& [k, v] : cfg.recorded()) out << "# " << k << " = " << v << "\n";
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

double series_tol(const ExperimentConfig& cfg) {
    const double tol = cfg.real("time.tol", kDefaultSeriesTol);
    require(tol > 0.0 && tol < 1e-2, "time.tol must lie in (0, 1e-2)");
    return tol;
}

ReactionCoefficient coefficient_from(const ExperimentConfig& cfg, const Grid& grid) {
    ReactionCoefficient a;
    a.sigma = cfg.real("coefficient.sigma", 0.0);
    a.scale = cfg.real("coefficient.C_a", 1.0);
    a.clip_radius = cfg.real("coefficient.clip_radius", 0.9 * grid.half_width());
    require(a.scale >= 0.0, "coefficient.C_a must be nonnegative");
    require(a.sigma > -2.0, "coefficient.sigma must exceed -2");
    require(a.clip_radius > 0.0, "coefficient.clip_radius must be positive");
    return a;
}

StepperOptions stepper_from(const ExperimentConfig& cfg, const std::string& section, double horizon, double dt0,
                            double dt_max, double rtol) {
    StepperOptions o;
    o.horizon = cfg.real(cfg.resolve(section, "time", "horizon"), horizon);
    o.dt0 = cfg.real(cfg.resolve(section, "time", "dt0"), dt0);
    o.dt_max = cfg.real(cfg.resolve(section, "time", "dt_max"), dt_max);
    o.rtol = cfg.real(cfg.resolve(section, "time", "rtol"), rtol);
    require(o.horizon > 0.0 && std::isfinite(o.horizon), fmt::format("[{}] horizon must be positive", section));
    require(o.dt0 > 0.0 && o.dt0 <= o.dt_max, fmt::format("[{}] need 0 < dt0 <= dt_max", section));
    require(o.dt_max <= o.horizon, fmt::format("[{}] dt_max must not exceed the horizon", section));
    require(o.rtol > 0.0 && o.rtol < 1.0, fmt::format("[{}] rtol must lie in (0, 1)", section));
    return o;
}

void write_report(const RunContext& ctx, const ExperimentConfig& cfg, SuiteResult& res, const std::string& file,
                  const EstimateReport& rep) {
    auto out = open_csv(ctx, file, res);
    echo_config(out, cfg, ctx, res.name);
    write_csv(out, rep, ctx.version);
}

// ---- kernel-check -----------------------------------------------------------

SuiteResult kernel_check(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"kernel-check"};
    const Grid grid = grid_from(cfg, "kernel-check");
    const Kernel kernel = kernel_from(cfg, grid);
    const double delta = cfg.real("kernel-check.delta", 4.0);
    const double beta = cfg.real("kernel-check.beta", grid.dim() + 1.0);
    const double eps0 = cfg.real("kernel-check.eps0", 1.0);
    const std::string which = cfg.text("kernel-check.hypotheses", "greenfar, interp, blowup, global");
    require(delta >= 0.0, "kernel-check.delta must be nonnegative");
    require(eps0 > 0.0, "kernel-check.eps0 must be positive");

    std::vector<Hypothesis> hyps;
    std::stringstream ss(which);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (item == "greenfar") hyps.emplace_back(GreenFarHypothesis{delta});
        else if (item == "interp") hyps.emplace_back(InterpHypothesis{beta, eps0});
        else if (item == "blowup") hyps.emplace_back(BlowupHypothesis{});
        else if (item == "global") hyps.emplace_back(GlobalHypothesis{eps0});
        else if (!item.empty()) throw ConfigError(fmt::format("kernel-check.hypotheses: unknown '{}'", item));
    }
    require(!hyps.empty(), "kernel-check.hypotheses is empty");

    auto out = open_csv(ctx, "kernel_check.csv", res);
    echo_config(out, cfg, ctx, res.name, true);
    const double cdelta = certified_delta(kernel);
    out << "# alpha0 = " << format_number(kernel.alpha0()) << "\n# certified_delta = " << format_number(cdelta) << "\n";
    out << "hypothesis,check,passed,value,detail\n";
    for (const auto& h : hyps) {
        const Certificate c = check_hypotheses(kernel, h);
        for (const auto& chk : c.checks)
            out << c.hypothesis << ',' << chk.name << ',' << (chk.passed ? 1 : 0) << ',' << format_number(chk.value)
                << ",\"" << chk.detail << "\"\n";
        res.check(c.passed, c.hypothesis);
        if (!c.passed)
            for (const auto& chk : c.checks)
                if (!chk.passed) res.note(fmt::format("{}: {}", chk.name, chk.detail));
    }
    res.note(fmt::format("alpha0 = {:.12g}, certified delta = {}", kernel.alpha0(), cdelta));
    return res;
}

// ---- green-verify ----------------------------------------------------------

SuiteResult green_verify(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"green-verify"};
    const Grid grid = grid_from(cfg, "green");
    const Kernel kernel = kernel_from(cfg, grid);
    const auto bs = cfg.reals("green.b_list", {-2.0, -1.0, 0.0, 1.0, 2.0});
    const auto qs = cfg.reals("green.q_list", {1.0, kInf});
    const auto times = times_from(cfg, "green", 0.0, 50.0, 51, "linear");
    const auto f = datum_from(cfg, "green", grid, "gaussian", ctx.seed);
    const double tol = series_tol(cfg);
    for (double q : qs) require(q == 1.0 || q == 2.0 || std::isinf(q), "green.q_list entries must be 1, 2 or inf");
    const double delta = certified_delta(kernel);
    for (double b : bs)
        if (std::abs(b) > delta - 2.0 + 1e-12)
            throw HypothesisError(
                fmt::format("weighted estimate needs |b| <= delta - 2; got |b| = {} with certified delta = {} "
                            "(largest of 2, 4, 8, 16 with convergent moments)",
                            std::abs(b), delta),
                check_hypotheses(kernel, GreenFarHypothesis{delta}).render());

    const ConvolutionPlan plan(grid);
    const GreenSeries gs(kernel, plan, times.back(), tol);
    for (double b : bs)
        for (double q : qs) {
            const auto rep = verify_weighted_estimate(gs, f, b, q, times);
            write_report(ctx, cfg, res, fmt::format("green_b{}_q{}.csv", label(b), label(q)), rep);
            res.check(rep.passed, fmt::format("b = {}, q = {}: sup ratio {:.6g}, trend stable", b, label(q),
                                              rep.sup_ratio));
        }
    return res;
}

// ---- interp-verify ---------------------------------------------------------

SuiteResult interp_verify(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"interp-verify"};
    const Grid grid = grid_from(cfg, "interp");
    const Kernel kernel = kernel_from(cfg, grid);
    const double b = cfg.real("interp.b", 0.0);
    const double q = cfg.real("interp.q", 1.0);
    const double Q = cfg.real("interp.Q", kInf);
    const double beta = cfg.real("interp.beta", grid.dim() + 3.0);
    const double eps0 = cfg.real("interp.eps0", 1.0);
    const auto times = times_from(cfg, "interp", 1.0, 50.0, 50, "linear");
    const auto f = datum_from(cfg, "interp", grid, "gaussian", ctx.seed);
    const double tol = series_tol(cfg);
    require(q >= 1.0 && Q >= q, "interp needs 1 <= q <= Q <= inf");
    const double n = grid.dim();
    const double limit = beta - n * ((std::isinf(Q) ? 0.0 : 1.0 / Q) - (std::isinf(q) ? 0.0 : 1.0 / q) + 1.0);
    require(std::abs(b) < limit,
            fmt::format("interpolation needs |b| < beta - n(1/Q - 1/q + 1): |b| = {} but the bound is {}",
                        std::abs(b), limit));
    require(eps0 > 0.0, "interp.eps0 must be positive");
    const Certificate cert = check_hypotheses(kernel, InterpHypothesis{beta, eps0});
    if (!cert.passed) throw HypothesisError("kernel fails the interpolation hypothesis", cert.render());

    const ConvolutionPlan plan(grid);
    const GreenSeries gs(kernel, plan, times.back(), tol);
    const auto rep = verify_interpolation(gs, f, b, q, Q, beta, eps0, times);
    write_report(ctx, cfg, res, "interp.csv", rep);
    res.check(rep.passed, fmt::format("b = {}, q = {}, Q = {}: sup ratio {:.6g}", b, label(q), label(Q),
                                      rep.sup_ratio));
    return res;
}

// ---- remainder-decay -------------------------------------------------------

SuiteResult remainder_decay(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"remainder-decay"};
    const Grid grid = grid_from(cfg, "remainder");
    const Kernel kernel = kernel_from(cfg, grid);
    const int N = cfg.integer("remainder.N", 2);
    const double beta = cfg.real("remainder.beta", 4.0);
    const double eps0 = cfg.real("remainder.eps0", 1.0);
    const auto times = times_from(cfg, "remainder", 10.0, 200.0, 16, "geometric");
    const double tol = series_tol(cfg);
    require(eps0 > 0.0, "remainder.eps0 must be positive");
    const int n_min = static_cast<int>(std::ceil(1.0 / eps0)) + 1;
    require(N >= n_min, fmt::format("remainder split needs N >= ceil(1/eps0) + 1 = {}; got N = {}", n_min, N));
    const Certificate cert = check_hypotheses(kernel, InterpHypothesis{beta, eps0});
    if (!cert.passed) throw HypothesisError("kernel fails the remainder-decay hypothesis", cert.render());

    const ConvolutionPlan plan(grid);
    const GreenSeries gs(kernel, plan, times.back(), tol);
    const auto rep = verify_remainder_decay(gs, N, beta, eps0, times);
    write_report(ctx, cfg, res, "remainder.csv", rep);
    const double target = -0.5 * grid.dim();
    res.check(rep.passed, fmt::format("N = {}: slope {:.4f} (target {:.2f} +- 10%), constant spread {:.3f}", N,
                                      rep.fit.slope, target, rep.sup_ratio / rep.min_ratio));
    for (const auto& w : gs.warnings()) res.note(w);
    return res;
}

// ---- equilibrium ------------------------------------------------------------

SuiteResult equilibrium(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"equilibrium"};
    const Grid grid = grid_from(cfg, "equilibrium");
    const Kernel kernel = kernel_from(cfg, grid);
    const auto bs = cfg.reals("equilibrium.b_list", {0.0, 2.0, -1.0});
    const auto etas = cfg.reals("equilibrium.eta_list", {2.0, 8.0, 32.0, 128.0});
    const int samples = cfg.integer("equilibrium.samples", 100000);
    const double p = cfg.real("exponent.p", 2.0);
    require(!bs.empty() && !etas.empty(), "equilibrium needs b_list and eta_list");
    for (double eta : etas) require(eta >= 2.0, "equilibrium.eta_list entries must be >= 2");
    require(samples > 0, "equilibrium.samples must be positive");
    require(p >= 1.0, "exponent.p must be >= 1");

    const ConvolutionPlan plan(grid);
    for (double b : bs) {
        const auto eq = epsilon_equilibrium_constant(kernel, b, etas, plan);
        auto out = open_csv(ctx, fmt::format("equilibrium_b{}.csv", label(b)), res);
        echo_config(out, cfg, ctx, res.name);
        write_profile_csv(out, eq, ctx.version);
        if (b == 0.0) {
            res.check(eq.d_hat <= 1e-10, fmt::format("b = 0: d_hat = {:.3g} <= 1e-10", eq.d_hat));
        } else {
            double lo = kInf, hi = 0.0;
            for (const auto& row : eq.profile) {
                lo = std::min(lo, row.eta_times_eps_hat);
                hi = std::max(hi, row.eta_times_eps_hat);
            }
            res.check(std::isfinite(hi) && lo > 0.0 && hi <= 2.0 * lo,
                      fmt::format("b = {}: d_hat = {:.8g}, eta eps_hat within {:.3f}x over eta, empirical C_b = {:.6g}",
                                  b, eq.d_hat, hi / lo, eq.empirical_C_b));
        }
        bool sandwich = true;
        for (double eta : etas) sandwich = sandwich && sandwich_check(AuxFunction{b, eta, AuxKind::gamma}, grid).passed;
        res.check(sandwich, fmt::format("b = {}: weight sandwich at every node", b));
        const auto qb = quotient_bound_check(b, etas.front(), static_cast<std::size_t>(samples), ctx.seed);
        res.check(qb.passed, fmt::format("b = {}: quotient bound on {} samples, tightest margin {:.3g}", b, qb.samples,
                                         qb.tightest_margin));
    }
    const auto el = elementary_inequality_check(p, static_cast<std::size_t>(samples), ctx.seed);
    res.check(el.passed, fmt::format("|a^p - c^p| <= p max^(p-1) |a - c| for p = {} on {} samples", p, el.samples));
    return res;
}

// ---- entropy ----------------------------------------------------------------

SuiteResult entropy(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"entropy"};
    const Grid grid = grid_from(cfg, "entropy");
    const Kernel kernel = kernel_from(cfg, grid);
    const double b = cfg.real("entropy.b", 2.0);
    const double eta0 = cfg.real("entropy.eta0", 2.0);
    const std::string phi = cfg.text("entropy.phi", "square");
    const double r = cfg.real("entropy.r", 2.0);
    const double horizon = cfg.real("entropy.horizon", 20.0);
    const double dt = cfg.real("entropy.dt", 0.5);
    const auto u0 = datum_from(cfg, "entropy", grid, "gaussian", ctx.seed);
    const double tol = series_tol(cfg);
    require(eta0 >= 2.0, "entropy.eta0 must be >= 2");
    require(dt > 0.0 && horizon >= dt && std::isfinite(horizon), "entropy needs 0 < dt <= horizon");
    EntropyMonitor mon;
    if (phi == "square") mon.phi = EntropyPhi::square;
    else if (phi == "identity") mon.phi = EntropyPhi::identity;
    else if (phi == "abs_power") mon.phi = EntropyPhi::abs_power;
    else throw ConfigError("entropy.phi must be square, identity or abs_power");
    require(mon.phi != EntropyPhi::abs_power || r > 1.0, "entropy.r must exceed 1");
    mon.r = r;

    const ConvolutionPlan plan(grid);
    const auto eq = epsilon_equilibrium_constant(kernel, b, {eta0, 4.0 * eta0, 16.0 * eta0}, plan);
    mon.nu = cfg.real("entropy.nu", default_entropy_nu(eq.d_hat, b));
    require(mon.nu >= 0.0, "entropy.nu must be nonnegative");
    const GreenSeries gs(kernel, plan, dt, tol);
    const auto prop = gs.propagator(dt);
    std::vector<GridFunction> states{u0};
    std::vector<double> times{0.0};
    const int steps = static_cast<int>(std::floor(horizon / dt + 1e-9));
    for (int s = 1; s <= steps; ++s) {
        states.push_back(gs.apply(prop, states.back()));
        times.push_back(dt * s);
    }
    const auto tr = entropy_trace(mon, states, times, b, eta0);

    auto out = open_csv(ctx, "entropy.csv", res);
    echo_config(out, cfg, ctx, res.name, true);
    out << "# d_hat = " << format_number(eq.d_hat) << "\n# nu = " << format_number(mon.nu) << "\n";
    out << "# nonincreasing = " << (tr.nonincreasing ? 1 : 0) << "\n# worst_increase = "
        << format_number(tr.worst_increase) << "\nt,value\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        out << format_number(tr.times[i]) << ',' << format_number(tr.values[i]) << "\n";
    res.check(tr.nonincreasing, fmt::format("{} entropy nonincreasing over {} steps (nu = {:.6g}, worst rise {:.3g})",
                                            phi, steps, mon.nu, tr.worst_increase));
    return res;
}

// ---- blowup-ode -------------------------------------------------------------

SuiteResult blowup_ode(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"blowup-ode"};
    BernoulliODE ode;
    ode.lambda = cfg.real("blowup-ode.lambda", 0.0);
    ode.mu = cfg.real("blowup-ode.mu", 1.0);
    ode.p = cfg.real("blowup-ode.p", 2.0);
    ode.f0 = cfg.real("blowup-ode.f0", 1.0);
    ode.t0 = cfg.real("blowup-ode.t0", 0.0);
    const int samples = cfg.integer("blowup-ode.samples", 100);
    require(ode.lambda >= 0.0, "blowup-ode.lambda must be >= 0");
    require(ode.mu > 0.0, "blowup-ode.mu must be > 0");
    require(ode.p > 1.0, "exponent out of range");
    require(ode.f0 >= 0.0 && ode.t0 >= 0.0, "blowup-ode needs f0 >= 0 and t0 >= 0");
    require(samples >= 2, "blowup-ode.samples must be >= 2");

    const auto start = bernoulli_barrier(ode, ode.t0);
    const double span = start.horizon ? 0.99 * (*start.horizon - ode.t0) : 1.0;
    auto out = open_csv(ctx, "blowup_ode.csv", res);
    echo_config(out, cfg, ctx, res.name, true);
    out << "# criterion_met = " << (start.horizon ? 1 : 0) << "\n";
    out << "# horizon = " << (start.horizon ? format_number(*start.horizon) : "none") << "\n";
    out << "t,delta,lower_bound,ode\n";

    namespace odeint = boost::numeric::odeint;
    std::vector<double> f{ode.f0};
    auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy, double) {
        dy[0] = -ode.lambda * y[0] + ode.mu * std::pow(y[0], ode.p);
    };
    auto stepper = odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<std::vector<double>>());
    double t = ode.t0, worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double target = ode.t0 + span * i / (samples - 1);
        if (target > t) odeint::integrate_adaptive(stepper, rhs, f, t, target, 1e-4 * span);
        t = target;
        const auto bb = bernoulli_barrier(ode, t);
        if (bb.lower_bound > 0.0) worst = std::max(worst, std::abs(f[0] - bb.lower_bound) / bb.lower_bound);
        out << format_number(t) << ',' << format_number(bb.delta) << ',' << format_number(bb.lower_bound) << ','
            << format_number(f[0]) << "\n";
    }
    if (start.horizon) {
        res.lines.push_back(fmt::format("horizon {:.12f}", *start.horizon));
    } else {
        res.lines.push_back(fmt::format("criterion f0 > (lambda/mu)^(1/(p-1)) not met; no finite horizon"));
    }
    res.check(worst <= 1e-6, fmt::format("barrier vs RK78 integration of the equality ODE: max relative {:.3g}", worst));
    return res;
}

// ---- blowup-criterion ------------------------------------------------------

SuiteResult blowup_criterion(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"blowup-criterion"};
    const Grid grid = grid_from(cfg, "blowup");
    const Kernel kernel = kernel_from(cfg, grid);
    RegimeParams params;
    params.n = grid.dim();
    params.sigma = cfg.real("coefficient.sigma", 0.0);
    params.C_lower = cfg.real("coefficient.C_a", 1.0);
    params.p = cfg.real("exponent.p", 2.0);
    params.b = cfg.real("blowup.b", grid.dim() + 1.0);
    params.R = 2.0;
    const std::string mode = cfg.text("blowup.mode", "quadrature");
    params.C1 = cfg.real("blowup.C1", 1.0);
    params.C2 = cfg.real("blowup.C2", 1.0);
    params.C3 = cfg.real("blowup.C3", 1.0);
    const auto u0 = datum_from(cfg, "blowup", grid, "bump", ctx.seed);
    if (mode == "quadrature") params.mode = ThresholdMode::quadrature;
    else if (mode == "closed_form") params.mode = ThresholdMode::closed_form;
    else throw ConfigError("blowup.mode must be quadrature or closed_form");
    try {
        validate(params);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    require(params.C_lower > 0.0, "coefficient.C_a must be positive for the blow-up criterion");
    require(std::abs(kernel.alpha0() - 1.0) <= 1e-9, "blow-up criteria need a kernel of unit mass (alpha0 = 1)");
    const Certificate cert = check_hypotheses(kernel, BlowupHypothesis{});
    if (!cert.passed) throw HypothesisError("kernel fails the blow-up hypothesis", cert.render());

    if (cfg.has("blowup.d_hat")) {
        params.d_hat = cfg.real("blowup.d_hat", 1.0);
    } else {
        std::vector<double> radii;
        for (double R = 2.0; R <= std::max(2.0, 0.25 * grid.half_width() * grid.half_width()); R *= 2.0)
            radii.push_back(R);
        params.d_hat = epsilon_equilibrium_constant(kernel, -params.b, radii, ConvolutionPlan(grid)).d_hat;
    }
    require(params.d_hat > 0.0, "blow-up criterion needs d_hat > 0");
    const auto v = regime_criterion(params, u0);
    params.R = v.R_used;
    auto out = open_csv(ctx, "blowup_verdict.csv", res);
    echo_config(out, cfg, ctx, res.name);
    write_verdict_csv(out, params, v, ctx.version);
    res.note(fmt::format("regime {}, d_hat = {:.6g}", to_string(v.regime), params.d_hat));
    res.check(v.met, v.met ? fmt::format("f_R(0) = {:.6g} > threshold {:.6g} at R = {}", v.f_R0, v.threshold, v.R_used)
                           : fmt::format("{} (last R = {})", v.note, v.R_used));
    if (v.horizon_upper_bound) res.note(fmt::format("blow-up horizon upper bound {:.6g}", *v.horizon_upper_bound));
    return res;
}

// ---- simulate -----------------------------------------------------------------

SuiteResult simulate(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"simulate"};
    const Grid grid = grid_from(cfg, "simulate");
    const Kernel kernel = kernel_from(cfg, grid);
    const ReactionCoefficient a = coefficient_from(cfg, grid);
    const double p = cfg.real("exponent.p", 2.0);
    StepperOptions opts = stepper_from(cfg, "simulate", 50.0, 0.125, 1.0, 1e-5);
    const int outputs = cfg.integer("simulate.outputs", 10);
    const bool snapshot = cfg.integer("simulate.snapshot", 0) != 0;
    const std::string expect = cfg.text("simulate.expect", "");
    const std::string norm = cfg.text("simulate.fit_norm", "Linf");
    const auto u0 = datum_from(cfg, "simulate", grid, "bump", ctx.seed);
    require(p > 1.0, "exponent out of range");
    require(outputs >= 1, "simulate.outputs must be >= 1");
    require(expect.empty() || expect == "blown_up" || expect == "global_decay",
            "simulate.expect must be empty, blown_up or global_decay");
    const NormKind kind = [&] {
        try {
            return parse_norm_kind(norm);
        } catch (const Error& e) {
            throw ConfigError(fmt::format("simulate.fit_norm: {}", e.what()));
        }
    }();
    require(min_value(u0) >= 0.0 || a.vanishes(), "simulate needs nonnegative initial data");
    for (int i = 1; i <= outputs; ++i) opts.output_times.push_back(opts.horizon * i / outputs);
    opts.keep_snapshots = snapshot;

    const auto tr = run(u0, kernel, a, p, opts);
    {
        auto out = open_csv(ctx, "trajectory.csv", res);
        echo_config(out, cfg, ctx, res.name);
        write_trajectory_csv(out, tr, {}, ctx.version);
    }
    if (snapshot && !tr.snapshots.empty()) {
        const auto stem = ctx.out_dir / "snapshot_final";
        write_snapshot(stem, tr.snapshots.back(), tr.snapshot_times.back());
        res.files.push_back(stem.string() + ".bin");
    }
    res.note(fmt::format("status {}, {} accepted and {} rejected steps, t_end = {:.6g}", to_string(tr.status),
                         tr.accepted_steps, tr.rejected_steps, tr.norms.back().t));
    if (tr.T_num) res.note(fmt::format("T_num = {:.6g}", *tr.T_num));
    for (const auto& w : tr.warnings) res.note(w);
    if (tr.status == TrajectoryStatus::global_decay) {
        const auto fit = decay_rate_fit(tr, kind, 0.1 * opts.horizon);
        res.note(fmt::format("{} decay slope {:.4f} +- {:.2g} vs log<t>", norm, fit.slope, fit.slope_stderr));
    }
    res.check(tr.status != TrajectoryStatus::inconclusive, "trajectory classified");
    res.check(tr.positivity_floor >= -1e-8, fmt::format("positivity floor {:.3g} >= -1e-8", tr.positivity_floor));
    if (!expect.empty())
        res.check(to_string(tr.status) == expect, fmt::format("status {} as expected", expect));
    return res;
}

// ---- fujita-sweep ------------------------------------------------------------

SuiteResult fujita_sweep_suite(const ExperimentConfig& cfg, const RunContext& ctx) {
    SuiteResult res{"fujita-sweep"};
    SweepConfig sc;
    sc.n = cfg.integer(cfg.resolve("sweep", "grid", "n"), 1);
    sc.L = cfg.real("sweep.L", 96.0);
    sc.M = cfg.integer("sweep.M", sc.n == 1 ? 768 : 256);
    sc.sigma = cfg.real("coefficient.sigma", 0.0);
    sc.C_a = cfg.real("coefficient.C_a", 1.0);
    const double pF = fujita_exponent(sc.n, sc.sigma);
    // Default list for (1, 0) is the canonical one; elsewhere two points on each side of p_F.
    const std::vector<double> fallback =
        pF == 3.0 ? sc.p_list : std::vector<double>{1.0 + 0.25 * (pF - 1.0), 1.0 + 0.75 * (pF - 1.0), pF + 0.5, pF + 1.0};
    sc.p_list = cfg.reals("sweep.p_list", fallback);
    sc.radius = cfg.real("sweep.radius", 1.0);
    sc.m_small = cfg.real("sweep.m_small", 0.5);
    sc.m_large = cfg.real("sweep.m_large", 8.0);
    sc.stepper = stepper_from(cfg, "sweep", 200.0, 0.125, 2.0, 1e-3);
    sc.threads = ctx.threads;
    const std::string shape = cfg.text("kernel.shape", "gaussian");
    require(shape != "table", "fujita-sweep needs a built-in kernel shape");
    sc.kernel.shape = parse_kernel_shape(shape);
    sc.kernel.scale = cfg.real("kernel.scale", 1.0);
    require(sc.n >= 1 && sc.n <= 3, "sweep.n must be 1, 2 or 3");
    require(sc.M >= 8 && sc.M % 2 == 0, "sweep.M must be even and >= 8");
    require(sc.L > 0.0, "sweep.L must be positive");
    require(sc.sigma >= 0.0, "fujita sweep needs sigma >= 0");
    require(sc.m_small > 0.0 && sc.m_large >= sc.m_small, "need 0 < m_small <= m_large");
    require(!sc.p_list.empty() && *std::min_element(sc.p_list.begin(), sc.p_list.end()) < pF &&
                *std::max_element(sc.p_list.begin(), sc.p_list.end()) > pF,
            fmt::format("sweep.p_list must bracket 1 + (sigma + 2)/n = {}", pF));

    const auto table = cli::fujita_sweep(sc);
    auto out = open_csv(ctx, "fujita_sweep.csv", res);
    echo_config(out, cfg, ctx, res.name);
    write_sweep_csv(out, table, ctx.version);
    for (const auto& r : table.rows)
        res.note(fmt::format("p = {}: small {}, large {}{}", r.p, to_string(r.small.status), to_string(r.large.status),
                             r.flagged ? " (flagged)" : ""));
    const std::string lo = table.p_lo ? fmt::format("{}", *table.p_lo) : "none";
    const std::string hi = table.p_hi ? fmt::format("{}", *table.p_hi) : "none";
    res.check(table.brackets(pF), fmt::format("bracket [{}, {}] contains p_F = {}", lo, hi, pF));
    res.check(table.positivity_floor() >= -1e-8, "positivity floor >= -1e-8 on every run");
    return res;
}

using SuiteFn = SuiteResult (*)(const ExperimentConfig&, const RunContext&);

const std::map<std::string, SuiteFn>& registry() {
    static const std::map<std::string, SuiteFn> r{
        {"kernel-check", kernel_check},     {"green-verify", green_verify},
        {"interp-verify", interp_verify},   {"remainder-decay", remainder_decay},
        {"equilibrium", equilibrium},       {"entropy", entropy},
        {"blowup-ode", blowup_ode},         {"blowup-criterion", blowup_criterion},
        {"simulate", simulate},             {"fujita-sweep", fujita_sweep_suite},
    };
    return r;
}

void write_summary(const SuiteResult& res, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out_dir);
    std::ofstream out(ctx.out_dir / (res.name + "_summary.txt"));
    out << res.summary();
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"kernel-check",  "green-verify", "interp-verify",    "remainder-decay",
                                                "equilibrium",   "entropy",      "blowup-ode",       "blowup-criterion",
                                                "simulate",      "fujita-sweep", "selftest"};
    return names;
}

SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg, const RunContext& ctx) {
    if (name == "selftest") {
        SuiteResult all{"selftest"};
        for (const auto& sub : suite_names()) {
            if (sub == "selftest") continue;
            const SuiteResult r = run_suite(sub, cfg, ctx);
            all.check(r.passed, sub);
            for (const auto& l : r.lines) all.lines.push_back("  " + l);
        }
        write_summary(all, ctx);
        return all;
    }
    const auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError(fmt::format("unknown subcommand '{}'", name));
    cfg.begin_record();
    SuiteResult res = it->second(cfg, ctx);
    write_summary(res, ctx);
    return res;
}

}  // namespace nlf::cli
