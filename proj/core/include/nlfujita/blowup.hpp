#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlfujita/grid.hpp"

namespace nlf {

/// f'(t) >= -lambda f + mu f^p with data f(t0) = f0.
struct BernoulliODE {
    double lambda = 0.0;
    double mu = 1.0;
    double p = 2.0;
    double f0 = 0.0;
    double t0 = 0.0;
};

struct BernoulliBarrier {
    double delta = 0.0;        ///< Delta_lambda(t)
    double lower_bound = 0.0;  ///< e^{-lambda t} Delta^{-1/(p-1)}; inf once Delta <= 0
    std::optional<double> horizon;  ///< root of Delta_lambda when the criterion holds
};

/// f0 > (lambda/mu)^{1/(p-1)}.
bool bernoulli_criterion(const BernoulliODE& ode);

/// Closed-form barrier of the Bernoulli inequality:
///   lambda = 0: Delta(t) = f0^{1-p} - (p-1) mu (t - t0)
///   lambda > 0: Delta(t) = [f0^{1-p} - mu/lambda] e^{-(p-1) lambda t0} + (mu/lambda) e^{-(p-1) lambda t}
/// The horizon is an upper bound for the blow-up time of any f satisfying the inequality.
BernoulliBarrier bernoulli_barrier(const BernoulliODE& ode, double t);

/// How the blow-up threshold is computed.
///   quadrature:      mu_R = C_lower * H_R^{-(p-1)} with H_R = int phi_R <x>^{-sigma/(p-1)} dx
///                    evaluated on the grid plus an analytic bound for the region outside the box;
///                    threshold = (d / (R mu_R))^{1/(p-1)} at every R.
///   closed_form:     the case thresholds with user constants C1, C2, C3, and the
///                    critical mass m0 at R = 2 for p above the Fujita exponent.
enum class ThresholdMode { quadrature, closed_form };

enum class Regime {
    below_sigma_over_n,  ///< 1 < p < 1 + sigma/n
    at_sigma_over_n,     ///< p = 1 + sigma/n
    subcritical,         ///< 1 + sigma/n < p < p_F
    critical,            ///< p = p_F
    supercritical        ///< p > p_F
};

std::string to_string(Regime r);

struct RegimeParams {
    int n = 1;
    double sigma = 0.0;
    double p = 2.0;
    double b = 2.0;
    double R = 2.0;
    double d_hat = 1.0;
    double C_lower = 1.0;
    ThresholdMode mode = ThresholdMode::quadrature;
    double C1 = 1.0;
    double C2 = 1.0;
    double C3 = 1.0;
};

/// 1 + (sigma + 2)/n.
double fujita_exponent(int n, double sigma);

/// Throws with the violated condition: p > 1 ("exponent out of range"),
/// sigma > -2, b > n, R >= 2.
void validate(const RegimeParams& params);

/// Regime of p relative to 1 + sigma/n and p_F (equalities to 1e-12).
Regime classify_regime(int n, double sigma, double p);

/// (1 + |x|^2/R)^{-b/2}.
double phi_R(const RegimeParams& params, const Point& x);
GridFunction sample_phi_R(const RegimeParams& params, const Grid& grid);

/// (lambda_R, mu_R) = (d/R, case table value) with
///   mu_R = 1                       if p < 1 + sigma/n
///   mu_R = (ln R)^{1-p}            if p = 1 + sigma/n
///   mu_R = R^{-(n(p-1) - sigma)/2} if p > 1 + sigma/n
std::pair<double, double> mu_lambda(const RegimeParams& params);

/// b0 = max{n, n - sigma/(p-1)}, m0 = (d/C3)^{1/(p-1)} 2^{-((sigma+2)/(p-1) - n)/2}.
/// Throws "not super-critical" for p <= p_F.
std::pair<double, double> critical_mass(int n, double sigma, double p, double d, double C3);

struct HolderIntegral {
    double inside = 0.0;     ///< quadrature over the box
    double tail_bound = 0.0; ///< analytic bound for the region outside the box
    double total() const { return inside + tail_bound; }
};

/// H_R = int phi_R(x) <x>^{-sigma/(p-1)} dx at params.R, split into the grid
/// quadrature and a bound on the outside of the box,
///   c R^{b/2} omega_n L^{n-e}/(e-n),  e = b + sigma/(p-1),
/// c = 1 for sigma >= 0 and 2^{|sigma|/(2(p-1))} otherwise. Needs e > n and L >= 1.
HolderIntegral holder_integral(const RegimeParams& params, const Grid& grid);

/// Exact Holder constant for the grid: C_lower * H_R^{-(p-1)}.
double quadrature_mu(const RegimeParams& params, const Grid& grid);

struct BlowupVerdict {
    Regime regime = Regime::subcritical;
    ThresholdMode mode = ThresholdMode::quadrature;
    double R_used = 0.0;
    double f_R0 = 0.0;
    double threshold = 0.0;
    bool met = false;
    std::optional<double> horizon_upper_bound;
    std::string note;
};

/// Scans R in {2, 4, ..., L^2/4} (R = 2 only above the Fujita exponent) and
/// reports the first R at which f_R(0) = int phi_R u0 exceeds the regime
/// threshold. When nothing is met the last R scanned is reported with
/// note "not established at this scan range". Refuses u0 with negative values.
BlowupVerdict regime_criterion(const RegimeParams& params, const GridFunction& u0);

/// Threshold alone at params.R (no scan).
double regime_threshold(const RegimeParams& params, const Grid& grid);

void write_verdict_csv(std::ostream& out, const RegimeParams& params, const BlowupVerdict& v,
                       const std::string& version);

}  // namespace nlf
