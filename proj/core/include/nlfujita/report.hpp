#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace nlf {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t samples = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs at least 2 points.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Bounded-and-trend-stable gate on a ratio series sampled at increasing
/// times: the max over the last quarter must not exceed `factor` times the
/// max over the middle half (samples [n/4, 3n/4)). Non-finite ratios fail.
bool trend_stable(std::span<const double> ratios, double factor = 1.05);

/// One row per time sample of a measured quantity against its bound.
struct EstimateRow {
    double t = 0.0;
    double measured_norm = 0.0;
    double bound_value = 0.0;
    double ratio = 0.0;
};

/// Outcome of a numerical estimate verification.
struct EstimateReport {
    std::string name;
    std::map<std::string, std::string> parameters;
    std::vector<EstimateRow> rows;
    double sup_ratio = 0.0;
    double min_ratio = 0.0;
    /// Slope of log measured_norm vs log t where a fit was requested.
    bool has_fit = false;
    LinearFit fit;
    bool passed = false;
    std::vector<std::string> notes;

    void add(double t, double measured, double bound);
    /// Recomputes sup/min ratio over the rows.
    void summarise();
    std::vector<double> ratios() const;
};

/// CSV with columns t, measured_norm, bound_value, ratio; the header lines
/// echo the parameters, summary values and `version`.
void write_csv(std::ostream& out, const EstimateReport& report, const std::string& version);

/// Formats a double for CSV output with round-trip precision.
std::string format_number(double v);

}  // namespace nlf
