#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlfujita/convolution.hpp"
#include "nlfujita/grid.hpp"
#include "nlfujita/kernels.hpp"

namespace nlf {

enum class AuxKind { gamma, rho, phi_R };

/// (1 + |x|^2/eta)^{e/2} with e = b for gamma, 1 for rho and -b for phi_R
/// (where eta plays the role of R).
struct AuxFunction {
    double b = 0.0;
    double eta = 2.0;
    AuxKind kind = AuxKind::gamma;

    double exponent() const;
};

double gamma_eval(const AuxFunction& aux, const Point& x);
double gamma_eval_r2(const AuxFunction& aux, double r_squared);

struct SandwichResult {
    bool passed = false;
    /// Smallest relative slack over both sides and all nodes (0 when tight).
    double worst_slack = 0.0;
};

/// eta^{-b+/2} <x>^b <= Gamma(x) <= eta^{-b-/2} <x>^b at every node, for the
/// gamma exponent b of `aux`. Requires eta >= 1.
SandwichResult sandwich_check(const AuxFunction& aux, const Grid& grid);

struct PropertyResult {
    bool passed = false;
    /// Smallest observed log(rhs) - log(lhs); negative means a violation.
    double tightest_margin = kInf;
    std::size_t samples = 0;
    std::size_t violations = 0;
    std::string worst_case;
};

/// Random test of
///   ((r rho(y)^2 + (1-r) rho(x)^2) / (s rho(y)^2 + (1-s) rho(x)^2))^{b/2} <= 2^{|b|/2} <x-y>^{|b|}
/// with rho(x) = (1 + |x|^2/eta)^{1/2}, x, y in R^dim, r, s in [0, 1].
PropertyResult quotient_bound_check(double b, double eta, std::size_t sample_count, std::uint64_t seed = 0,
                                    int dim = 2);

/// Random test of the chain bound for points x_0..x_k:
///   b >= 0: rho(x_0, eta)^b <= prod_j rho(x_{j-1} - x_j, eta/2)^b * rho(x_k, eta/2)^b
///   b <  0: rho(x_0, eta)^b <= prod_j rho(x_{j-1} - x_j, eta)^{|b|} * rho(x_k, 2 eta)^b
/// with rho(x, eta) = (1 + |x|^2/eta)^{1/2}.
PropertyResult chain_inequality_check(double b, double eta, int k, std::size_t sample_count, std::uint64_t seed = 0,
                                      int dim = 2);

/// |a^p - c^p| <= p max(a, c)^{p-1} |a - c| for a, c >= 0, p >= 1.
PropertyResult elementary_inequality_check(double p, std::size_t sample_count, std::uint64_t seed = 0);

struct EquilibriumProfileRow {
    double eta = 0.0;
    double eps_hat = 0.0;
    double eta_times_eps_hat = 0.0;
};

struct EquilibriumResult {
    double b = 0.0;
    double d_hat = 0.0;
    std::vector<EquilibriumProfileRow> profile;
    /// Boundary margin excluded from the sup.
    double margin = 0.0;
    std::size_t interior_nodes = 0;
    /// ||J||_{L^1_{2+|b|}} and the empirical C_b = d_hat / that moment.
    double moment_2_plus_b = 0.0;
    double empirical_C_b = 0.0;
};

/// eps_hat(eta) = sup |J * Gamma - a0 Gamma| / Gamma over nodes at distance at
/// least the kernel's 1e-8-mass radius from the box boundary, and
/// d_hat = sup_eta eta * eps_hat(eta).
///
/// Gamma is sampled on a box twice as wide so that J * Gamma is the full
/// lattice sum at every retained node. Requires eta >= 2 for every eta and
/// a kernel with a convergent L^1_{2+|b|} moment.
EquilibriumResult epsilon_equilibrium_constant(const Kernel& kernel, double b, const std::vector<double>& etas,
                                               const ConvolutionPlan& plan);

void write_profile_csv(std::ostream& out, const EquilibriumResult& result, const std::string& version);

// ---- relative entropy ------------------------------------------------------

enum class EntropyPhi { square, identity, abs_power };

struct EntropyMonitor {
    EntropyPhi phi = EntropyPhi::square;
    /// Exponent r of |s|^r for abs_power (r > 1).
    double r = 2.0;
    double nu = 0.0;
    std::vector<double> times;
    std::vector<double> values;

    double eval_phi(double s) const;
};

/// nu = 2 d_hat + |b|.
double default_entropy_nu(double d_hat, double b);

struct EntropyTrace {
    std::vector<double> times;
    std::vector<double> values;
    bool nonincreasing = false;
    /// Largest increase between consecutive samples.
    double worst_increase = 0.0;
};

/// Evaluates int Phi((1+t)^{-nu} u / Gamma_t) Gamma_t dx with
/// Gamma_t = (1 + |x|^2/(eta0 + t))^{b/2} at each sample and records it in
/// the monitor. The trace is nonincreasing when no step rises by more than
/// 1e-8 times the initial value. Refuses a blown-up trajectory.
EntropyTrace entropy_trace(EntropyMonitor& monitor, const std::vector<GridFunction>& states,
                           const std::vector<double>& times, double b, double eta0, bool blown_up = false);

}  // namespace nlf
