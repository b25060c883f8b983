#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlfujita/kernels.hpp"
#include "nlfujita/simulate.hpp"

namespace nlf::cli {

struct SweepConfig {
    int n = 1;
    double sigma = 0.0;
    std::vector<double> p_list{1.5, 2.0, 2.5, 3.5, 4.0};
    double L = 96.0;
    int M = 768;
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    double C_a = 1.0;
    /// Integrability order for the global hypothesis gate.
    double eps0 = 1.0;
    /// Canonical data are bumps of this radius with masses m_small and m_large.
    double radius = 1.0;
    double m_small = 0.5;
    double m_large = 8.0;
    StepperOptions stepper;
    unsigned threads = 1;

    SweepConfig();
};

struct SweepRun {
    TrajectoryStatus status = TrajectoryStatus::running;
    std::optional<double> T_num;
    double final_t = 0.0;
    double final_Linf = 0.0;
    double positivity_floor = 0.0;
    std::vector<std::string> warnings;
};

struct SweepRow {
    double p = 0.0;
    SweepRun small;
    SweepRun large;
    bool flagged = false;
};

struct SweepTable {
    SweepConfig config;
    std::vector<SweepRow> rows;
    /// Largest p with small-data blow-up and smallest p above it with
    /// small-data global decay. Inconclusive rows push the ends outward.
    std::optional<double> p_lo;
    std::optional<double> p_hi;

    double fujita() const { return 1.0 + (config.sigma + 2.0) / config.n; }
    bool brackets(double p) const { return p_lo && p_hi && *p_lo < p && p < *p_hi; }
    /// Worst positivity floor over all runs.
    double positivity_floor() const;
};

/// Runs every (p, mass) pair on a worker pool and derives the bracket.
/// Rows are reported in p order regardless of completion order.
SweepTable fujita_sweep(const SweepConfig& config);

/// Bracket from per-row small-data statuses (exposed for tests).
void derive_bracket(SweepTable& table);

void write_sweep_csv(std::ostream& out, const SweepTable& table, const std::string& version);

}  // namespace nlf::cli
