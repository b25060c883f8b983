#include "nlfujita/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nlfujita/error.hpp"

namespace nlf {

namespace {

double tbracket(double t) { return std::sqrt(1.0 + t * t); }

std::string q_label(double q) { return std::isinf(q) ? "inf" : fmt::format("{}", q); }

void require_valid_times(std::span<const double> times) {
    if (times.empty()) throw Error("empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i])) throw Error("times must be finite and nonnegative");
        if (i > 0 && !(times[i] > times[i - 1])) throw Error("times must be increasing");
    }
}

}  // namespace

int GreenSeries::truncation_index(double m, double tol) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error("series truncation not certified");
    if (!(tol > 0.0)) throw Error("series tolerance must be positive");
    if (m == 0.0) return 0;
    const double log_tol = std::log(tol);
    for (int K = std::max(0, static_cast<int>(std::floor(m)) - 1);; ++K) {
        if (!(K + 2 > m)) continue;
        const double log_bound = -m + (K + 1) * std::log(m) - std::lgamma(K + 2.0) - std::log1p(-m / (K + 2));
        if (log_bound < log_tol) return K;
    }
}

GreenSeries::GreenSeries(const Kernel& kernel, const ConvolutionPlan& plan, double t_max, double tol)
    : kernel_(kernel), plan_(plan), t_max_(t_max), tol_(tol) {
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw Error("time range must be finite and nonnegative");
    if (!plan_.grid().same_box(kernel.state_grid())) throw Error("grid mismatch");
    n_max_ = truncation_index(kernel.alpha0() * t_max, tol);
    KernelIterates cache(kernel_, plan_);
    iterates_.reserve(static_cast<std::size_t>(n_max_));
    for (int k = 1; k <= n_max_; ++k) iterates_.push_back(cache.get(k));
    warnings_ = cache.warnings();
}

int GreenSeries::truncation_index(double t) const {
    check_time(t);
    return truncation_index(alpha0() * t, tol_);
}

void GreenSeries::check_time(double t) const {
    if (!(t >= 0.0) || t > t_max_ * (1.0 + 1e-12)) throw Error("series truncation not certified");
}

double GreenSeries::weight(int k, double t) const {
    if (t == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-alpha0() * t + k * std::log(t) - std::lgamma(k + 1.0));
}

const GridFunction& GreenSeries::iterate(int k) const {
    if (k < 1 || k > n_max_) throw Error(fmt::format("iterate {} outside 1..{}", k, n_max_));
    return iterates_[static_cast<std::size_t>(k - 1)];
}

GridFunction GreenSeries::kernel_function_part(double t, int k_from, int k_to) const {
    check_time(t);
    const int K = truncation_index(t);
    const int last = k_to < 0 ? K : std::min(k_to, K);
    GridFunction out(kernel_.samples().grid());
    auto dst = out.values();
    for (int k = std::max(1, k_from); k <= last; ++k) {
        const double w = weight(k, t);
        if (w == 0.0) continue;
        const auto src = iterates_[static_cast<std::size_t>(k - 1)].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    }
    return out;
}

GreenPropagator GreenSeries::propagator(double t) const {
    return GreenPropagator{t, weight(0, t), plan_.transform(kernel_function_part(t))};
}

GridFunction GreenSeries::apply(const GreenPropagator& g, const GridFunction& f) const {
    if (f.grid().centering() != Centering::cell) throw Error("grid mismatch");
    GridFunction out = plan_.apply(g.kernel, f);
    auto o = out.values();
    const auto v = f.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += g.identity_weight * v[i];
    return out;
}

GridFunction GreenSeries::apply(const GridFunction& f, double t) const {
    check_time(t);
    if (t == 0.0) return f;
    return apply(propagator(t), f);
}

GreenSplit GreenSeries::split(double t, int N) const {
    if (N < 1 || N > std::max(1, n_max_)) throw Error(fmt::format("split index {} outside 1..{}", N, n_max_));
    check_time(t);
    return GreenSplit{kernel_function_part(t, 1, N - 1), kernel_function_part(t, N), weight(0, t)};
}

EstimateReport verify_weighted_estimate(const GreenSeries& gs, const GridFunction& f, double b, double q,
                                        std::span<const double> times) {
    require_valid_times(times);
    if (!(q == 1.0 || q == 2.0 || std::isinf(q))) throw Error("q must be 1, 2 or inf");
    const double delta = certified_delta(gs.kernel());
    if (std::abs(b) > delta - 2.0 + 1e-12) {
        const Certificate cert = check_hypotheses(gs.kernel(), GreenFarHypothesis{std::abs(b) + 2.0});
        throw HypothesisError(
            fmt::format("weighted estimate needs |b| <= delta - 2; got |b| = {} with certified delta = {}",
                        std::abs(b), delta),
            cert.render());
    }
    EstimateReport rep;
    rep.name = "weighted_estimate";
    rep.parameters = {{"b", fmt::format("{}", b)},
                      {"q", q_label(q)},
                      {"delta", fmt::format("{}", delta)},
                      {"tol", fmt::format("{}", gs.tol())}};
    const double f_norm = weighted_norm(f, q, b);
    if (!(f_norm > 0.0)) throw Error("f must be nonzero");
    for (double t : times) {
        const GridFunction u = gs.apply(f, t);
        rep.add(t, weighted_norm(u, q, b), std::pow(tbracket(t), 0.5 * std::abs(b)) * f_norm);
    }
    rep.summarise();
    const auto r = rep.ratios();
    rep.passed = std::isfinite(rep.sup_ratio) && trend_stable(r);
    return rep;
}

EstimateReport verify_interpolation(const GreenSeries& gs, const GridFunction& f, double b, double q, double Q,
                                    double beta, double eps0, std::span<const double> times) {
    require_valid_times(times);
    if (!(q >= 1.0 && Q >= q)) throw Error("interpolation needs 1 <= q <= Q <= inf");
    const double n = f.grid().dim();
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    const double inv_Q = std::isinf(Q) ? 0.0 : 1.0 / Q;
    const double limit = beta - n * (inv_Q - inv_q + 1.0);
    if (!(std::abs(b) < limit))
        throw Error(fmt::format("interpolation needs |b| < beta - n(1/Q - 1/q + 1): |b| = {} but the bound is {}",
                                std::abs(b), limit));
    const Certificate cert = check_hypotheses(gs.kernel(), InterpHypothesis{beta, eps0});
    if (!cert.passed) throw HypothesisError("kernel fails the interpolation hypothesis", cert.render());

    EstimateReport rep;
    rep.name = "interpolation";
    rep.parameters = {{"b", fmt::format("{}", b)},   {"q", q_label(q)},
                      {"Q", q_label(Q)},             {"beta", fmt::format("{}", beta)},
                      {"eps0", fmt::format("{}", eps0)}, {"tol", fmt::format("{}", gs.tol())}};
    const double f_q = weighted_norm(f, q, 0.0);
    const double f_qb = weighted_norm(f, q, b);
    const double f_Qb = weighted_norm(f, Q, b);
    const double e1 = 0.5 * n * (inv_Q - inv_q + std::abs(b) / n);
    const double e2 = 0.5 * n * (inv_Q - inv_q);
    for (double t : times) {
        const GridFunction u = gs.apply(f, t);
        const double tb = tbracket(t);
        rep.add(t, weighted_norm(u, Q, b), std::pow(tb, e1) * f_q + std::pow(tb, e2) * f_qb + std::exp(-0.5 * t) * f_Qb);
    }
    rep.summarise();
    rep.passed = std::isfinite(rep.sup_ratio) && trend_stable(rep.ratios());
    return rep;
}

EstimateReport verify_remainder_decay(const GreenSeries& gs, int N, double beta, double eps0,
                                      std::span<const double> times) {
    require_valid_times(times);
    if (!(eps0 > 0.0)) throw Error("eps0 must be positive");
    const int n_min = static_cast<int>(std::ceil(1.0 / eps0)) + 1;
    if (N < n_min) throw Error(fmt::format("remainder split needs N >= ceil(1/eps0) + 1 = {}; got N = {}", n_min, N));
    const Certificate cert = check_hypotheses(gs.kernel(), InterpHypothesis{beta, eps0});
    if (!cert.passed) throw HypothesisError("kernel fails the remainder-decay hypothesis", cert.render());

    EstimateReport rep;
    rep.name = "remainder_decay";
    rep.parameters = {{"N", fmt::format("{}", N)},
                      {"beta", fmt::format("{}", beta)},
                      {"eps0", fmt::format("{}", eps0)},
                      {"tol", fmt::format("{}", gs.tol())}};
    const Grid& lat = gs.kernel().samples().grid();
    const double n = lat.dim();
    std::vector<double> log_t, log_norm;
    for (double t : times) {
        if (t == 0.0) continue;  // R_N(., 0) = 0
        const GridFunction R = gs.split(t, N).remainder;
        const double tb = tbracket(t);
        double weighted = 0.0;
        for (std::size_t i = 0; i < R.size(); ++i) {
            const double s = (1.0 + lat.radius_squared(i)) / tb;
            weighted = std::max(weighted, std::abs(R[i]) * std::pow(1.0 + s * s, 0.25 * beta));
        }
        rep.add(t, weighted, std::pow(tb, -0.5 * n));
        log_t.push_back(std::log(t));
        log_norm.push_back(std::log(max_abs(R)));
    }
    if (log_t.size() < 8) throw Error("remainder decay fit needs at least 8 positive times");
    rep.summarise();
    rep.has_fit = true;
    rep.fit = least_squares(log_t, log_norm);
    const double target = -0.5 * n;
    const bool slope_ok = std::abs(rep.fit.slope - target) <= 0.1 * std::abs(target);
    const bool spread_ok = rep.min_ratio > 0.0 && rep.sup_ratio <= 2.0 * rep.min_ratio;
    rep.notes.push_back(fmt::format("constant spread max/min = {:.6g}", rep.sup_ratio / rep.min_ratio));
    rep.passed = std::isfinite(rep.sup_ratio) && trend_stable(rep.ratios()) && slope_ok && spread_ok;
    return rep;
}

RegvarValue regvar_series(double b, int N, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error("t must be positive");
    if (N < 0) throw Error("N must be nonnegative");
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (4.0 * eps * (t * std::abs(std::log(t)) + t) > 1e-8) throw Error("precision");

    const double log_t = std::log(t);
    const double log_norm = b * log_t + t;
    double ratio = 0.0;
    const int mode = static_cast<int>(std::floor(t));
    for (int k = N;; ++k) {
        if (k == 0 && b != 0.0) {
            if (b < 0.0) throw Error("k^b is undefined at k = 0 for b < 0");
            continue;  // 0^b = 0
        }
        const double log_term = b * (k == 0 ? 0.0 : std::log(static_cast<double>(k))) + k * log_t -
                                std::lgamma(k + 1.0) - log_norm;
        const double term = std::exp(log_term);
        ratio += term;
        if (k > mode + 2 && term < 1e-18 * ratio) break;
        if (k > mode + 2 && ratio == 0.0 && log_term < -800.0) break;
    }
    RegvarValue out;
    out.ratio = ratio;
    out.log_value = std::log(ratio) + log_norm;
    out.value = std::exp(out.log_value);
    return out;
}

}  // namespace nlf
