#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlfujita/green.hpp"
#include "nlfujita/grid.hpp"
#include "nlfujita/report.hpp"

namespace nlf {

/// a(x, t) = scale * <min(|x|, clip)>^sigma * profile(t). The profile is 1 or
/// a piecewise linear table of (t, value) pairs, held constant past its ends.
struct ReactionCoefficient {
    double sigma = 0.0;
    double scale = 1.0;
    std::vector<std::pair<double, double>> profile;
    double clip_radius = kInf;

    double profile_at(double t) const;
    double operator()(const Point& x, double t) const;
    /// Spatial factor scale * <min(|x|, clip)>^sigma at every node.
    GridFunction spatial(const Grid& grid) const;
    bool vanishes() const { return scale == 0.0; }
};

enum class TrajectoryStatus { running, global_decay, blown_up, inconclusive };

std::string to_string(TrajectoryStatus s);

struct StepperOptions {
    double horizon = 1.0;
    double dt0 = 0.125;
    /// Largest step; also the range of the Green series. Steps are dt0 * 2^j <= dt_max.
    double dt_max = 1.0;
    double dt_min = 1e-12;
    double rtol = 1e-6;
    bool adaptive = true;
    double blowup_factor = 1e6;
    /// Exponent of the weighted norms; NaN selects sigma/(p-1).
    double weight_b = std::numeric_limits<double>::quiet_NaN();
    /// The run lands exactly on these times (sorted, within the horizon).
    std::vector<double> output_times;
    /// Keep the state at each output time.
    bool keep_snapshots = false;
    /// Outer shell fraction above which the mass-leak monitor warns.
    double leak_threshold = 1e-6;
};

struct NormSample {
    double t = 0.0;
    double L1 = 0.0;
    double Linf = 0.0;
    double L1_b = 0.0;
    double Linf_b = 0.0;
};

struct Trajectory {
    int dim = 1;
    double p = 2.0;
    double weight_b = 0.0;
    double horizon = 0.0;
    std::vector<NormSample> norms;
    std::vector<double> snapshot_times;
    std::vector<GridFunction> snapshots;
    TrajectoryStatus status = TrajectoryStatus::running;
    std::optional<double> T_num;
    std::vector<std::string> warnings;
    /// min over accepted steps of min(u) / ||u||_inf (0 for u = 0).
    double positivity_floor = 0.0;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

struct StepResult {
    GridFunction predictor;
    GridFunction corrector;
    double error = 0.0;  ///< ||corrector - predictor||_inf
};

/// Pointwise a(x,t) sign(u)|u|^p given the spatial factor of a.
GridFunction nonlinearity(const GridFunction& u, const GridFunction& a_spatial, double profile, double p);

/// One exponential trapezoid step of the mild formulation:
///   u*  = G(dt) (u + dt N(u, t))
///   u+  = G(dt) (u + dt/2 N(u, t)) + dt/2 N(u*, t + dt)
StepResult step(const GreenSeries& gs, const GreenPropagator& g, const GridFunction& u, double t, double dt,
                const ReactionCoefficient& a, double p);
StepResult step(const GreenSeries& gs, const GridFunction& u, double t, double dt, const ReactionCoefficient& a,
                double p);

/// Integrates to the horizon or blow-up and classifies the trajectory:
///   blown_up      ||u||_inf > blowup_factor max(1, ||u0||_inf), or no step above dt_min is accepted
///   global_decay  max over the last third of <t>^{n/2} ||u||_inf is at most 1.05 times its value
///                 at the start of the last third
///   inconclusive  otherwise, or when the mass-leak monitor fired on an otherwise decaying run.
/// `gs` must cover steps up to opts.dt_max.
Trajectory run(const GreenSeries& gs, const GridFunction& u0, const ReactionCoefficient& a, double p,
               const StepperOptions& opts);

/// Builds the Green series for opts.dt_max and runs.
Trajectory run(const GridFunction& u0, const Kernel& kernel, const ReactionCoefficient& a, double p,
               const StepperOptions& opts, ConvolutionMode mode = ConvolutionMode::fast);

enum class NormKind { L1, Linf, L1_b, Linf_b };

NormKind parse_norm_kind(const std::string& name);

/// Least-squares slope of log norm against log <t> over samples with t >= t_min.
/// Needs status global_decay and at least 8 samples.
LinearFit decay_rate_fit(const Trajectory& traj, NormKind which, double t_min);

/// CSV with columns t, L1, Linf, L1_b, Linf_b, status.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::map<std::string, std::string>& params,
                          const std::string& version);

/// Writes `<stem>.bin` (raw doubles, native byte order, row-major) and
/// `<stem>.txt` holding n, L, M and t.
void write_snapshot(const std::filesystem::path& stem, const GridFunction& u, double t);
/// Reads a snapshot written by write_snapshot; returns the state and its time.
std::pair<GridFunction, double> read_snapshot(const std::filesystem::path& stem);

/// C-infinity bump mass * c exp(-1/(1 - |x/r|^2)) normalised to the given quadrature mass.
GridFunction bump(const Grid& grid, double radius, double mass);

}  // namespace nlf
