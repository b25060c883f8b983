#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlfujita/grid.hpp"

namespace nlf {

enum class KernelShape { gaussian, compact_bump, exponential, table };

/// Shape and scale of a diffusion kernel J.
///   gaussian(s):      J ~ exp(-|x|^2 / (2 s^2))           (variance s^2 per axis)
///   compact_bump(r):  J ~ exp(-1 / (1 - |x/r|^2)) on |x| < r
///   exponential(a):   J ~ exp(-a |x|)
/// Built-ins are renormalised to unit discrete mass.
struct KernelSpec {
    KernelShape shape = KernelShape::gaussian;
    double scale = 1.0;

    static KernelSpec gaussian(double s) { return {KernelShape::gaussian, s}; }
    static KernelSpec compact_bump(double r) { return {KernelShape::compact_bump, r}; }
    static KernelSpec exponential(double a) { return {KernelShape::exponential, a}; }
};

std::string to_string(KernelShape shape);
KernelShape parse_kernel_shape(const std::string& name);

/// A diffusion kernel sampled on the displacement lattice of a state grid.
///
/// Immutable after construction. The moments used by the hypothesis gates
/// (delta in {0, 2, 4, 8, 16}) are computed at build time; other orders are
/// evaluated on demand without touching shared state.
class Kernel {
public:
    /// Samples a built-in shape on `grid.lattice()`.
    /// Throws "kernel support exceeds box" when a bump radius reaches L.
    static Kernel build(const KernelSpec& spec, const Grid& grid);

    /// Wraps raw lattice values (cell averages). The table must be even,
    /// J(x) = J(-x) componentwise, to relative 1e-12; it is then symmetrised
    /// exactly. alpha0 is the discrete mass of the table.
    static Kernel from_table(const Grid& grid, std::vector<double> lattice_values);

    const KernelSpec& spec() const { return spec_; }
    int dim() const { return samples_.grid().dim(); }
    /// The cell grid the kernel acts on.
    Grid state_grid() const { return samples_.grid().cells(); }
    /// Samples on the displacement lattice.
    const GridFunction& samples() const { return samples_; }
    double alpha0() const { return alpha0_; }
    bool nonnegative() const { return nonnegative_; }

    /// int |J| <x>^delta dx.
    double weighted_moment(double delta) const;
    /// int (|J| <x>^beta)^p dx (the integral itself, not its p-th root).
    double lp_weighted_moment(double p, double beta) const;
    /// int J(x) |x|^2 dx.
    double second_moment() const;

    /// Smallest radius outside of which |J| carries at most `fraction` of its mass.
    double effective_radius(double fraction = 1e-8) const;

    const std::map<double, double>& cached_moments() const { return moments_; }

private:
    Kernel(KernelSpec spec, GridFunction samples);

    KernelSpec spec_;
    GridFunction samples_;
    double alpha0_ = 0.0;
    bool nonnegative_ = true;
    std::map<double, double> moments_;
};

/// Reads a custom kernel table: a header line `# kernel n=<n> L=<L> M=<M>`
/// followed by `index,value` rows, index being the flat lattice index.
/// Missing indices are zero. The header must match `grid`.
Kernel load_kernel_table(std::istream& in, const Grid& grid);
void write_kernel_table(std::ostream& out, const Kernel& kernel);

// ---- hypothesis gates -------------------------------------------------------

/// J in L^1_delta.
struct GreenFarHypothesis { double delta; };
/// J in L^1_{2+beta} and L^{1+eps0}_beta, beta > n.
struct InterpHypothesis { double beta; double eps0; };
/// J >= 0 and J in L^1_infinity.
struct BlowupHypothesis {};
/// J >= 0, J in L^1_infinity and L^{1+eps0}_infinity.
struct GlobalHypothesis { double eps0; };

using Hypothesis = std::variant<GreenFarHypothesis, InterpHypothesis, BlowupHypothesis, GlobalHypothesis>;

/// Convergence probe of a moment integral on the nested boxes L/4, L/2, L.
/// The integral is declared divergent when the outer shell carries more than
/// 1e-3 of the total and the shell increments are not shrinking (ratio of the
/// outer to the inner increment at least 0.75).
struct MomentProbe {
    double quarter = 0.0;
    double half = 0.0;
    double full = 0.0;
    double tail_fraction = 0.0;
    double increment_ratio = 0.0;
    bool converged = true;
};

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
};

struct Certificate {
    std::string hypothesis;
    bool passed = true;
    std::vector<HypothesisCheck> checks;

    std::string render() const;
};

/// Orders used to test L^1_infinity membership.
inline constexpr double kInfinityProbeOrders[] = {2.0, 4.0, 8.0, 16.0};

MomentProbe probe_weighted_moment(const Kernel& kernel, double delta);
MomentProbe probe_lp_weighted_moment(const Kernel& kernel, double p, double beta);

Certificate check_hypotheses(const Kernel& kernel, const Hypothesis& hypothesis);

/// Largest delta in {2, 4, 8, 16} such that the L^1_delta moments of all the
/// listed orders up to it converge on the box (0 if delta = 2 already fails).
double certified_delta(const Kernel& kernel);

}  // namespace nlf
