#include "nlfujita/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "nlfujita/error.hpp"

namespace nlf {

namespace {

constexpr double kCachedOrders[] = {0.0, 2.0, 4.0, 8.0, 16.0};
constexpr double kTailFraction = 1e-3;
constexpr double kIncrementRatio = 0.75;

double shape_value(const KernelSpec& spec, double r2) {
    switch (spec.shape) {
    case KernelShape::gaussian:
        return std::exp(-0.5 * r2 / (spec.scale * spec.scale));
    case KernelShape::compact_bump: {
        const double z = r2 / (spec.scale * spec.scale);
        return z < 1.0 ? std::exp(-1.0 / (1.0 - z)) : 0.0;
    }
    case KernelShape::exponential:
        return std::exp(-spec.scale * std::sqrt(r2));
    case KernelShape::table:
        break;
    }
    throw Error("table kernels are not sampled from a formula");
}

// Sum over lattice nodes with max|x_k| <= box of integrand(i), times h^n.
template <typename F>
double box_sum(const GridFunction& s, double box, F&& integrand) {
    const Grid& g = s.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (g.max_abs_coordinate(i) <= box) acc += integrand(i);
    }
    return acc * g.cell_volume();
}

template <typename F>
MomentProbe probe(const GridFunction& s, F&& integrand) {
    const double L = s.grid().half_width();
    const double eps = 1e-12 * L;
    MomentProbe pr;
    pr.quarter = box_sum(s, 0.25 * L + eps, integrand);
    pr.half = box_sum(s, 0.5 * L + eps, integrand);
    pr.full = box_sum(s, L + eps, integrand);
    const double inner = pr.half - pr.quarter;
    const double outer = pr.full - pr.half;
    pr.tail_fraction = pr.full > 0.0 ? outer / pr.full : 0.0;
    pr.increment_ratio = inner > 0.0 ? outer / inner : (outer > 0.0 ? kInf : 0.0);
    pr.converged = !(pr.tail_fraction > kTailFraction && pr.increment_ratio >= kIncrementRatio);
    return pr;
}

double weight_power(const Grid& g, std::size_t i, double delta) {
    return delta == 0.0 ? 1.0 : std::pow(1.0 + g.radius_squared(i), 0.5 * delta);
}

}  // namespace

std::string to_string(KernelShape shape) {
    switch (shape) {
    case KernelShape::gaussian: return "gaussian";
    case KernelShape::compact_bump: return "compact_bump";
    case KernelShape::exponential: return "exponential";
    case KernelShape::table: return "table";
    }
    return "unknown";
}

KernelShape parse_kernel_shape(const std::string& name) {
    if (name == "gaussian") return KernelShape::gaussian;
    if (name == "compact_bump" || name == "bump") return KernelShape::compact_bump;
    if (name == "exponential") return KernelShape::exponential;
    if (name == "table") return KernelShape::table;
    throw Error("unknown kernel shape '" + name + "'");
}

Kernel::Kernel(KernelSpec spec, GridFunction samples) : spec_(spec), samples_(std::move(samples)) {
    alpha0_ = mass(samples_);
    nonnegative_ = min_value(samples_) >= 0.0;
    for (double d : kCachedOrders) moments_[d] = weighted_moment(d);
}

Kernel Kernel::build(const KernelSpec& spec, const Grid& grid) {
    if (spec.shape == KernelShape::table) throw Error("table kernels are built with from_table");
    if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) throw Error("kernel parameter must be positive");
    if (spec.shape == KernelShape::compact_bump && spec.scale >= grid.half_width())
        throw Error("kernel support exceeds box");

    const Grid lat = grid.lattice();
    GridFunction s(lat);
    for (std::size_t i = 0; i < lat.size(); ++i) s[i] = shape_value(spec, lat.radius_squared(i));
    const double m = mass(s);
    if (!(m > 0.0)) throw Error("kernel has zero mass on this grid");
    s *= 1.0 / m;
    return Kernel(spec, std::move(s));
}

Kernel Kernel::from_table(const Grid& grid, std::vector<double> lattice_values) {
    const Grid lat = grid.lattice();
    GridFunction s(lat, std::move(lattice_values));
    if (!s.is_finite()) throw Error("non-finite input");

    // Even symmetry J(x) = J(-x): the mirror of node index i is extent-1-i per axis.
    const int e = lat.extent();
    double scale = max_abs(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto idx = lat.unflatten(i);
        for (int d = 0; d < lat.dim(); ++d) idx[d] = e - 1 - idx[d];
        const std::size_t j = lat.flatten(idx);
        if (j <= i) continue;
        if (std::abs(s[i] - s[j]) > 1e-12 * scale)
            throw Error(fmt::format("kernel table is not even: J({}) != J(-x) at flat index {}", s[i], i));
        const double avg = 0.5 * (s[i] + s[j]);
        s[i] = avg;
        s[j] = avg;
    }
    if (!(mass(s) > 0.0)) throw Error("kernel table must have positive mass");
    return Kernel(KernelSpec{KernelShape::table, 0.0}, std::move(s));
}

double Kernel::weighted_moment(double delta) const {
    if (auto it = moments_.find(delta); it != moments_.end()) return it->second;
    const Grid& g = samples_.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) acc += std::abs(samples_[i]) * weight_power(g, i, delta);
    return acc * g.cell_volume();
}

double Kernel::lp_weighted_moment(double p, double beta) const {
    if (!(p >= 1.0)) throw Error("invalid exponent");
    const Grid& g = samples_.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i)
        acc += std::pow(std::abs(samples_[i]) * weight_power(g, i, beta), p);
    return acc * g.cell_volume();
}

double Kernel::second_moment() const {
    const Grid& g = samples_.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) acc += samples_[i] * g.radius_squared(i);
    return acc * g.cell_volume();
}

double Kernel::effective_radius(double fraction) const {
    const Grid& g = samples_.grid();
    std::vector<std::pair<double, double>> by_radius;
    by_radius.reserve(samples_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double a = std::abs(samples_[i]);
        if (a == 0.0) continue;
        by_radius.emplace_back(std::sqrt(g.radius_squared(i)), a);
        total += a;
    }
    if (by_radius.empty()) return 0.0;
    std::sort(by_radius.begin(), by_radius.end());
    // Walk inward from the largest radius while the outer mass stays below the budget.
    double outer = 0.0;
    const double budget = fraction * total;
    for (auto it = by_radius.rbegin(); it != by_radius.rend(); ++it) {
        if (outer + it->second > budget) return it->first;
        outer += it->second;
    }
    return 0.0;
}

Kernel load_kernel_table(std::istream& in, const Grid& grid) {
    std::string line;
    bool have_header = false;
    const Grid lat = grid.lattice();
    std::vector<double> values(lat.size(), 0.0);
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string word;
            hs >> word;
            if (word != "kernel") continue;
            int n = 0, M = 0;
            double L = 0.0;
            while (hs >> word) {
                const auto eq = word.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = word.substr(0, eq), val = word.substr(eq + 1);
                if (key == "n") n = std::stoi(val);
                else if (key == "L") L = std::stod(val);
                else if (key == "M") M = std::stoi(val);
            }
            if (n != grid.dim() || M != grid.cells_per_dim() ||
                std::abs(L - grid.half_width()) > 1e-12 * grid.half_width())
                throw Error(fmt::format("kernel table header n={} L={} M={} does not match grid n={} L={} M={}", n,
                                        L, M, grid.dim(), grid.half_width(), grid.cells_per_dim()));
            have_header = true;
            continue;
        }
        if (!have_header) throw Error("kernel table is missing the '# kernel n= L= M=' header");
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(fmt::format("kernel table line {}: expected index,value", line_no));
        const long long idx = std::stoll(line.substr(0, comma));
        const double v = std::stod(line.substr(comma + 1));
        if (idx < 0 || static_cast<std::size_t>(idx) >= values.size())
            throw Error(fmt::format("kernel table line {}: index {} outside lattice", line_no, idx));
        values[static_cast<std::size_t>(idx)] = v;
    }
    if (!have_header) throw Error("kernel table is missing the '# kernel n= L= M=' header");
    return Kernel::from_table(grid, std::move(values));
}

void write_kernel_table(std::ostream& out, const Kernel& kernel) {
    const Grid g = kernel.state_grid();
    out << fmt::format("# kernel n={} L={} M={}\n", g.dim(), g.half_width(), g.cells_per_dim());
    const auto& s = kernel.samples();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != 0.0) out << fmt::format("{},{:.17g}\n", i, s[i]);
    }
}

MomentProbe probe_weighted_moment(const Kernel& kernel, double delta) {
    const auto& s = kernel.samples();
    const Grid& g = s.grid();
    return probe(s, [&](std::size_t i) { return std::abs(s[i]) * weight_power(g, i, delta); });
}

MomentProbe probe_lp_weighted_moment(const Kernel& kernel, double p, double beta) {
    const auto& s = kernel.samples();
    const Grid& g = s.grid();
    return probe(s, [&](std::size_t i) { return std::pow(std::abs(s[i]) * weight_power(g, i, beta), p); });
}

namespace {

HypothesisCheck moment_check(const std::string& name, const MomentProbe& pr) {
    HypothesisCheck c;
    c.name = name;
    c.passed = pr.converged && std::isfinite(pr.full);
    c.value = pr.full;
    c.detail = fmt::format("boxes L/4,L/2,L: {:.6g}, {:.6g}, {:.6g}; tail fraction {:.3g}; increment ratio {:.3g}{}",
                           pr.quarter, pr.half, pr.full, pr.tail_fraction, pr.increment_ratio,
                           c.passed ? "" : " (moment diverges with L)");
    return c;
}

HypothesisCheck sign_check(const Kernel& kernel) {
    HypothesisCheck c;
    c.name = "J >= 0";
    c.value = min_value(kernel.samples());
    c.passed = c.value >= 0.0;
    c.detail = c.passed ? "all samples nonnegative" : fmt::format("J >= 0 violated (min sample {:.6g})", c.value);
    return c;
}

}  // namespace

std::string Certificate::render() const {
    std::string out = fmt::format("hypothesis {}: {}\n", hypothesis, passed ? "PASS" : "FAIL");
    for (const auto& c : checks)
        out += fmt::format("  [{}] {} = {:.6g}  {}\n", c.passed ? "ok" : "FAIL", c.name, c.value, c.detail);
    return out;
}

Certificate check_hypotheses(const Kernel& kernel, const Hypothesis& hypothesis) {
    Certificate cert;
    const double n = kernel.dim();
    std::visit(
        [&](const auto& h) {
            using T = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<T, GreenFarHypothesis>) {
                cert.hypothesis = fmt::format("greenfar(delta={})", h.delta);
                cert.checks.push_back(
                    moment_check(fmt::format("L1_{}", h.delta), probe_weighted_moment(kernel, h.delta)));
            } else if constexpr (std::is_same_v<T, InterpHypothesis>) {
                cert.hypothesis = fmt::format("interp(beta={}, eps0={})", h.beta, h.eps0);
                HypothesisCheck bc;
                bc.name = "beta > n";
                bc.value = h.beta;
                bc.passed = h.beta > n;
                bc.detail = fmt::format("n = {}", n);
                cert.checks.push_back(bc);
                HypothesisCheck ec;
                ec.name = "eps0 > 0";
                ec.value = h.eps0;
                ec.passed = h.eps0 > 0.0;
                cert.checks.push_back(ec);
                cert.checks.push_back(
                    moment_check(fmt::format("L1_{}", 2.0 + h.beta), probe_weighted_moment(kernel, 2.0 + h.beta)));
                if (h.eps0 > 0.0)
                    cert.checks.push_back(moment_check(fmt::format("L^{}_{}", 1.0 + h.eps0, h.beta),
                                                       probe_lp_weighted_moment(kernel, 1.0 + h.eps0, h.beta)));
            } else if constexpr (std::is_same_v<T, BlowupHypothesis>) {
                cert.hypothesis = "blowup";
                cert.checks.push_back(sign_check(kernel));
                for (double d : kInfinityProbeOrders)
                    cert.checks.push_back(moment_check(fmt::format("L1_{}", d), probe_weighted_moment(kernel, d)));
            } else {
                cert.hypothesis = fmt::format("global(eps0={})", h.eps0);
                cert.checks.push_back(sign_check(kernel));
                for (double d : kInfinityProbeOrders)
                    cert.checks.push_back(moment_check(fmt::format("L1_{}", d), probe_weighted_moment(kernel, d)));
                HypothesisCheck ec;
                ec.name = "eps0 > 0";
                ec.value = h.eps0;
                ec.passed = h.eps0 > 0.0;
                cert.checks.push_back(ec);
                if (h.eps0 > 0.0)
                    for (double d : kInfinityProbeOrders)
                        cert.checks.push_back(moment_check(fmt::format("L^{}_{}", 1.0 + h.eps0, d),
                                                           probe_lp_weighted_moment(kernel, 1.0 + h.eps0, d)));
            }
        },
        hypothesis);
    cert.passed = std::all_of(cert.checks.begin(), cert.checks.end(), [](const auto& c) { return c.passed; });
    return cert;
}

double certified_delta(const Kernel& kernel) {
    double best = 0.0;
    for (double d : kInfinityProbeOrders) {
        if (!probe_weighted_moment(kernel, d).converged) break;
        best = d;
    }
    return best;
}

}  // namespace nlf
