#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nlfujita/convolution.hpp"
#include "nlfujita/grid.hpp"
#include "nlfujita/kernels.hpp"
#include "nlfujita/report.hpp"

namespace nlf {

inline constexpr double kDefaultSeriesTol = 1e-10;

/// G(t) prepared for repeated application: G(t) f = identity_weight * f + kernel * f.
struct GreenPropagator {
    double t = 0.0;
    double identity_weight = 1.0;
    SpectralKernel kernel;
};

/// Leading/remainder split of the function part of G(t) at index N:
///   leading   = e^{-a0 t} sum_{k=1}^{N-1} t^k/k! J_k
///   remainder = e^{-a0 t} sum_{k>=N}     t^k/k! J_k   (to the truncation index)
/// The k = 0 term is the scalar `identity_weight` = e^{-a0 t} times the identity.
struct GreenSplit {
    GridFunction leading;
    GridFunction remainder;
    double identity_weight = 1.0;
};

/// The Poisson-weighted series of kernel iterates representing G(t) on [0, t_max].
///
/// All iterates J_1..J_{N_max} are computed at construction, N_max being the
/// truncation index certified at t_max. Immutable afterwards.
class GreenSeries {
public:
    GreenSeries(const Kernel& kernel, const ConvolutionPlan& plan, double t_max, double tol = kDefaultSeriesTol);

    /// Smallest K with the Poisson upper-tail bound
    ///   e^{-m} m^{K+1}/(K+1)! / (1 - m/(K+2)) < tol,  K + 2 > m,
    /// where m = a0 t.
    static int truncation_index(double alpha0_t, double tol);
    int truncation_index(double t) const;

    /// e^{-a0 t} t^k / k!, evaluated in log space.
    double weight(int k, double t) const;

    const Kernel& kernel() const { return kernel_; }
    const ConvolutionPlan& plan() const { return plan_; }
    double alpha0() const { return kernel_.alpha0(); }
    double t_max() const { return t_max_; }
    double tol() const { return tol_; }
    int n_max() const { return n_max_; }
    const GridFunction& iterate(int k) const;
    std::vector<std::string> warnings() const { return warnings_; }

    /// e^{-a0 t} sum_{k=k_from}^{min(k_to, K(t))} t^k/k! J_k on the lattice.
    GridFunction kernel_function_part(double t, int k_from = 1, int k_to = -1) const;

    GreenPropagator propagator(double t) const;
    GridFunction apply(const GreenPropagator& g, const GridFunction& f) const;
    /// G(t) f. Throws "series truncation not certified" for t outside [0, t_max].
    GridFunction apply(const GridFunction& f, double t) const;

    /// Requires 1 <= N <= N_max.
    GreenSplit split(double t, int N) const;

private:
    void check_time(double t) const;

    Kernel kernel_;
    ConvolutionPlan plan_;
    double t_max_;
    double tol_;
    int n_max_;
    std::vector<GridFunction> iterates_;
    std::vector<std::string> warnings_;
};

/// ||G(t) f||_{L^q_b} / (<t>^{|b|/2} ||f||_{L^q_b}) over `times`; passes when
/// the ratio series is finite and trend stable.
/// Refuses (HypothesisError) when |b| > delta - 2 for the kernel's certified delta.
EstimateReport verify_weighted_estimate(const GreenSeries& gs, const GridFunction& f, double b, double q,
                                        std::span<const double> times);

/// ||G(t) f||_{L^Q_b} against
///   <t>^{n/2 (1/Q - 1/q + |b|/n)} ||f||_{L^q} + <t>^{n/2 (1/Q - 1/q)} ||f||_{L^q_b} + e^{-t/2} ||f||_{L^Q_b}
/// with unit constants. Requires 1 <= q <= Q <= inf, |b| < beta - n (1/Q - 1/q + 1)
/// and the interpolation hypothesis on the kernel for (beta, eps0).
EstimateReport verify_interpolation(const GreenSeries& gs, const GridFunction& f, double b, double q, double Q,
                                    double beta, double eps0, std::span<const double> times);

/// Pointwise remainder decay. For every t the row holds
///   measured_norm = sup_x |R_N(x,t)| <<x>^2/<t>>^{beta/2},
///   bound_value   = <t>^{-n/2},
///   ratio         = the weighted sup constant.
/// The fit is log ||R_N(.,t)||_inf against log t. Passes when the constant is
/// trend stable and within a factor 2 over the times, and the slope is
/// -n/2 within 10%. Needs N >= ceil(1/eps0) + 1, at least 8 positive times,
/// and the interpolation hypothesis.
EstimateReport verify_remainder_decay(const GreenSeries& gs, int N, double beta, double eps0,
                                      std::span<const double> times);

struct RegvarValue {
    double log_value = 0.0;  ///< log of sum_{k>=N} k^b t^k / k!
    double value = 0.0;      ///< exp(log_value); may overflow to inf
    double ratio = 0.0;      ///< value / (t^b e^t)
};

/// sum_{k>=N} k^b t^k/k! summed to the machine tail in log space.
/// Throws "precision" when t is so large that the log-space terms lose more
/// than 1e-8 relative accuracy.
RegvarValue regvar_series(double b, int N, double t);

}  // namespace nlf
