#include "nlfujita/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "nlfujita/error.hpp"

namespace nlf {

double ReactionCoefficient::profile_at(double t) const {
    if (profile.empty()) return 1.0;
    if (t <= profile.front().first) return profile.front().second;
    if (t >= profile.back().first) return profile.back().second;
    const auto hi = std::upper_bound(profile.begin(), profile.end(), t,
                                     [](double v, const std::pair<double, double>& e) { return v < e.first; });
    const auto lo = hi - 1;
    const double w = (t - lo->first) / (hi->first - lo->first);
    return (1.0 - w) * lo->second + w * hi->second;
}

double ReactionCoefficient::operator()(const Point& x, double t) const {
    const double r = std::min(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), clip_radius);
    return scale * (sigma == 0.0 ? 1.0 : std::pow(1.0 + r * r, 0.5 * sigma)) * profile_at(t);
}

GridFunction ReactionCoefficient::spatial(const Grid& grid) const {
    return GridFunction::sample(grid, [&](const Point& x) {
        const double r = std::min(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), clip_radius);
        return scale * (sigma == 0.0 ? 1.0 : std::pow(1.0 + r * r, 0.5 * sigma));
    });
}

std::string to_string(TrajectoryStatus s) {
    switch (s) {
    case TrajectoryStatus::running: return "running";
    case TrajectoryStatus::global_decay: return "global_decay";
    case TrajectoryStatus::blown_up: return "blown_up";
    case TrajectoryStatus::inconclusive: return "inconclusive";
    }
    return "unknown";
}

GridFunction nonlinearity(const GridFunction& u, const GridFunction& a_spatial, double profile, double p) {
    GridFunction out(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u[i];
        if (v == 0.0) continue;
        const double m = std::pow(std::abs(v), p);
        out[i] = a_spatial[i] * profile * (v > 0.0 ? m : -m);
    }
    return out;
}

namespace {

StepResult step_impl(const GreenSeries& gs, const GreenPropagator& g, const GridFunction& u, double t, double dt,
                     const ReactionCoefficient& a, const GridFunction& a_spatial, double p) {
    GridFunction Gu = gs.apply(g, u);
    if (a.vanishes()) return StepResult{Gu, Gu, 0.0};
    const GridFunction N0 = nonlinearity(u, a_spatial, a.profile_at(t), p);
    const GridFunction GN = gs.apply(g, N0);
    GridFunction pred = Gu;
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += dt * GN[i];
    const GridFunction N1 = pred.is_finite() ? nonlinearity(pred, a_spatial, a.profile_at(t + dt), p) : pred;
    GridFunction corr = std::move(Gu);
    double err = 0.0;
    for (std::size_t i = 0; i < corr.size(); ++i) {
        corr[i] += 0.5 * dt * (GN[i] + N1[i]);
        err = std::max(err, std::abs(corr[i] - pred[i]));
    }
    if (!std::isfinite(err)) err = kInf;
    return StepResult{std::move(pred), std::move(corr), err};
}

NormSample measure(const GridFunction& u, double t, double b) {
    return NormSample{t, weighted_norm(u, 1.0, 0.0), weighted_norm(u, kInf, 0.0), weighted_norm(u, 1.0, b),
                      weighted_norm(u, kInf, b)};
}

// Root of w = y^{1-p}, fitted linearly in t over the last samples.
std::optional<double> extrapolate_blowup(const std::vector<NormSample>& norms, double p) {
    std::vector<double> ts, ws;
    for (auto it = norms.rbegin(); it != norms.rend() && ts.size() < 6; ++it) {
        if (!(it->Linf > 0.0) || !std::isfinite(it->Linf)) continue;
        ts.push_back(it->t);
        ws.push_back(std::pow(it->Linf, 1.0 - p));
    }
    if (ts.size() < 2) return std::nullopt;
    try {
        const LinearFit fit = least_squares(ts, ws);
        if (!(fit.slope < 0.0)) return std::nullopt;
        return -fit.intercept / fit.slope;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

StepResult step(const GreenSeries& gs, const GreenPropagator& g, const GridFunction& u, double t, double dt,
                const ReactionCoefficient& a, double p) {
    if (!(dt > 0.0)) throw Error("dt must be positive");
    if (!u.is_finite()) throw Error("non-finite input");
    return step_impl(gs, g, u, t, dt, a, a.spatial(u.grid()), p);
}

StepResult step(const GreenSeries& gs, const GridFunction& u, double t, double dt, const ReactionCoefficient& a,
                double p) {
    if (!(dt > 0.0)) throw Error("dt must be positive");
    return step(gs, gs.propagator(dt), u, t, dt, a, p);
}

Trajectory run(const GreenSeries& gs, const GridFunction& u0, const ReactionCoefficient& a_in, double p,
               const StepperOptions& opts) {
    if (!(p > 1.0)) throw Error("exponent out of range");
    if (!(opts.horizon > 0.0)) throw Error("horizon must be positive");
    if (!(opts.dt0 > 0.0) || opts.dt0 > opts.dt_max) throw Error("need 0 < dt0 <= dt_max");
    if (opts.dt_max > gs.t_max() * (1.0 + 1e-12)) throw Error("Green series does not cover dt_max");
    if (!u0.is_finite()) throw Error("non-finite input");
    const Grid& grid = u0.grid();

    ReactionCoefficient a = a_in;
    a.clip_radius = std::min(a.clip_radius, grid.half_width());
    const GridFunction a_spatial = a.spatial(grid);

    Trajectory tr;
    tr.dim = grid.dim();
    tr.p = p;
    tr.horizon = opts.horizon;
    tr.weight_b = std::isnan(opts.weight_b) ? a.sigma / (p - 1.0) : opts.weight_b;

    std::vector<double> outputs;
    for (double t : opts.output_times)
        if (t > 0.0 && t <= opts.horizon) outputs.push_back(t);
    std::sort(outputs.begin(), outputs.end());
    if (outputs.empty() || outputs.back() < opts.horizon) outputs.push_back(opts.horizon);

    const double limit = opts.blowup_factor * std::max(1.0, max_abs(u0));
    std::map<int, GreenPropagator> cache;
    auto propagator_for = [&](int j) -> const GreenPropagator& {
        auto it = cache.find(j);
        if (it == cache.end()) it = cache.emplace(j, gs.propagator(std::ldexp(opts.dt0, j))).first;
        return it->second;
    };
    int j_max = 0;
    while (std::ldexp(opts.dt0, j_max + 1) <= opts.dt_max * (1.0 + 1e-12)) ++j_max;

    GridFunction u = u0;
    double t = 0.0;
    int j = 0;
    std::size_t next_out = 0;
    bool leak_warned = false;
    tr.norms.push_back(measure(u, t, tr.weight_b));
    if (opts.keep_snapshots) {
        tr.snapshot_times.push_back(0.0);
        tr.snapshots.push_back(u);
    }

    while (next_out < outputs.size()) {
        const double target = outputs[next_out];
        const double dt_nominal = std::ldexp(opts.dt0, j);
        const bool landing = t + dt_nominal >= target - 1e-12 * opts.horizon;
        const double dt = landing ? target - t : dt_nominal;
        if (!(dt > 0.0)) {
            ++next_out;
            continue;
        }
        StepResult res = landing && std::abs(dt - dt_nominal) > 1e-14 * dt_nominal
                             ? step_impl(gs, gs.propagator(dt), u, t, dt, a, a_spatial, p)
                             : step_impl(gs, propagator_for(j), u, t, dt, a, a_spatial, p);
        const double scale = max_abs(res.corrector);
        const bool finite = res.corrector.is_finite();
        const bool ok = finite && (!opts.adaptive || res.error <= opts.rtol * std::max(scale, 1e-300));
        if (!ok) {
            ++tr.rejected_steps;
            if (!opts.adaptive && !finite) {
                tr.status = TrajectoryStatus::blown_up;
                break;
            }
            --j;
            if (std::ldexp(opts.dt0, j) < opts.dt_min) {
                tr.status = TrajectoryStatus::blown_up;
                tr.warnings.push_back(fmt::format("step size fell below dt_min at t = {}", t));
                break;
            }
            continue;
        }
        ++tr.accepted_steps;
        u = std::move(res.corrector);
        t = landing ? target : t + dt;
        tr.norms.push_back(measure(u, t, tr.weight_b));
        if (scale > 0.0) tr.positivity_floor = std::min(tr.positivity_floor, min_value(u) / scale);
        if (landing) {
            ++next_out;
            if (opts.keep_snapshots) {
                tr.snapshot_times.push_back(t);
                tr.snapshots.push_back(u);
            }
            const double leak = outer_shell_fraction(u, 0.1);
            if (leak > opts.leak_threshold && !leak_warned) {
                tr.warnings.push_back(fmt::format("mass leak: outer shell holds {:.3g} of the mass at t = {}", leak, t));
                leak_warned = true;
            }
        }
        if (scale > limit) {
            tr.status = TrajectoryStatus::blown_up;
            break;
        }
        if (opts.adaptive && !landing && j < j_max && res.error <= opts.rtol * scale / 16.0) ++j;
    }

    if (tr.status == TrajectoryStatus::blown_up) {
        const auto root = extrapolate_blowup(tr.norms, p);
        tr.T_num = std::min(opts.horizon, std::max(t, root.value_or(t)));
        return tr;
    }

    // Decay gate on <t>^{n/2} ||u||_inf over the last third of the horizon.
    const double t_third = opts.horizon * 2.0 / 3.0;
    const double half_n = 0.5 * tr.dim;
    double start = -1.0, peak = 0.0;
    for (const auto& s : tr.norms) {
        if (s.t < t_third) continue;
        const double g = std::pow(1.0 + s.t * s.t, 0.5 * half_n) * s.Linf;
        if (start < 0.0) start = g;
        peak = std::max(peak, g);
    }
    const bool decays = start >= 0.0 && peak <= 1.05 * start;
    tr.status = decays && !leak_warned ? TrajectoryStatus::global_decay : TrajectoryStatus::inconclusive;
    return tr;
}

Trajectory run(const GridFunction& u0, const Kernel& kernel, const ReactionCoefficient& a, double p,
               const StepperOptions& opts, ConvolutionMode mode) {
    const ConvolutionPlan plan(u0.grid(), mode);
    const GreenSeries gs(kernel, plan, opts.dt_max);
    return run(gs, u0, a, p, opts);
}

NormKind parse_norm_kind(const std::string& name) {
    if (name == "L1") return NormKind::L1;
    if (name == "Linf") return NormKind::Linf;
    if (name == "L1_b") return NormKind::L1_b;
    if (name == "Linf_b") return NormKind::Linf_b;
    throw Error("unknown norm '" + name + "'");
}

LinearFit decay_rate_fit(const Trajectory& traj, NormKind which, double t_min) {
    if (traj.status != TrajectoryStatus::global_decay) throw Error("decay fit needs a global_decay trajectory");
    std::vector<double> x, y;
    for (const auto& s : traj.norms) {
        if (s.t < t_min) continue;
        double v = 0.0;
        switch (which) {
        case NormKind::L1: v = s.L1; break;
        case NormKind::Linf: v = s.Linf; break;
        case NormKind::L1_b: v = s.L1_b; break;
        case NormKind::Linf_b: v = s.Linf_b; break;
        }
        if (!(v > 0.0)) continue;
        x.push_back(0.5 * std::log1p(s.t * s.t));
        y.push_back(std::log(v));
    }
    if (x.size() < 8) throw Error(fmt::format("decay fit needs at least 8 samples beyond t_min, found {}", x.size()));
    return least_squares(x, y);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::map<std::string, std::string>& params,
                          const std::string& version) {
    out << "# nlfujita " << version << "\n";
    for (const auto& [k, v] : params) out << "# " << k << " = " << v << "\n";
    out << "# weight_b = " << format_number(traj.weight_b) << "\n";
    out << "# status = " << to_string(traj.status) << "\n";
    if (traj.T_num) out << "# T_num = " << format_number(*traj.T_num) << "\n";
    out << "# positivity_floor = " << format_number(traj.positivity_floor) << "\n";
    for (const auto& w : traj.warnings) out << "# warning: " << w << "\n";
    out << "t,L1,Linf,L1_b,Linf_b,status\n";
    for (std::size_t i = 0; i < traj.norms.size(); ++i) {
        const auto& s = traj.norms[i];
        const bool last = i + 1 == traj.norms.size();
        out << format_number(s.t) << ',' << format_number(s.L1) << ',' << format_number(s.Linf) << ','
            << format_number(s.L1_b) << ',' << format_number(s.Linf_b) << ','
            << (last ? to_string(traj.status) : std::string("running")) << "\n";
    }
}

void write_snapshot(const std::filesystem::path& stem, const GridFunction& u, double t) {
    const Grid& g = u.grid();
    std::filesystem::path bin = stem, txt = stem;
    bin += ".bin";
    txt += ".txt";
    std::ofstream b(bin, std::ios::binary);
    if (!b) throw Error("cannot write " + bin.string());
    b.write(reinterpret_cast<const char*>(u.values().data()), static_cast<std::streamsize>(sizeof(double) * u.size()));
    std::ofstream s(txt);
    if (!s) throw Error("cannot write " + txt.string());
    s << "n " << g.dim() << "\nL " << format_number(g.half_width()) << "\nM " << g.cells_per_dim() << "\nt "
      << format_number(t) << "\n";
}

std::pair<GridFunction, double> read_snapshot(const std::filesystem::path& stem) {
    std::filesystem::path bin = stem, txt = stem;
    bin += ".bin";
    txt += ".txt";
    std::ifstream s(txt);
    if (!s) throw Error("cannot read " + txt.string());
    int n = 0, M = 0;
    double L = 0.0, t = 0.0;
    std::string key;
    while (s >> key) {
        if (key == "n") s >> n;
        else if (key == "L") s >> L;
        else if (key == "M") s >> M;
        else if (key == "t") s >> t;
    }
    const Grid g(n, L, M);
    std::vector<double> v(g.size());
    std::ifstream b(bin, std::ios::binary);
    if (!b) throw Error("cannot read " + bin.string());
    b.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * v.size()));
    if (b.gcount() != static_cast<std::streamsize>(sizeof(double) * v.size())) throw Error("snapshot is truncated");
    return {GridFunction(g, std::move(v)), t};
}

GridFunction bump(const Grid& grid, double radius, double mass_value) {
    if (!(radius > 0.0)) throw Error("bump radius must be positive");
    GridFunction f = GridFunction::sample(grid, [&](const Point& x) {
        const double z = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (radius * radius);
        return z < 1.0 ? std::exp(-1.0 / (1.0 - z)) : 0.0;
    });
    const double m = mass(f);
    if (!(m > 0.0)) throw Error("bump is not resolved by the grid");
    f *= mass_value / m;
    return f;
}

}  // namespace nlf
