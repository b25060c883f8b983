#include "nlfujita/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "nlfujita/error.hpp"

namespace nlf {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("fit needs equally many x and y values");
    const std::size_t n = x.size();
    if (n < 2) throw Error("fit needs at least 2 samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw Error("fit needs distinct x values");
    LinearFit fit;
    fit.samples = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

bool trend_stable(std::span<const double> ratios, double factor) {
    const std::size_t n = ratios.size();
    if (n < 4) return false;
    if (!std::all_of(ratios.begin(), ratios.end(), [](double r) { return std::isfinite(r); })) return false;
    const std::size_t q1 = n / 4, q3 = (3 * n) / 4;
    const double middle = *std::max_element(ratios.begin() + static_cast<long>(q1), ratios.begin() + static_cast<long>(q3));
    const double last = *std::max_element(ratios.begin() + static_cast<long>(q3), ratios.end());
    return last <= factor * middle;
}

void EstimateReport::add(double t, double measured, double bound) {
    rows.push_back({t, measured, bound, measured / bound});
}

void EstimateReport::summarise() {
    if (rows.empty()) return;
    sup_ratio = rows.front().ratio;
    min_ratio = rows.front().ratio;
    for (const auto& r : rows) {
        sup_ratio = std::max(sup_ratio, r.ratio);
        min_ratio = std::min(min_ratio, r.ratio);
    }
}

std::vector<double> EstimateReport::ratios() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.ratio);
    return out;
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

void write_csv(std::ostream& out, const EstimateReport& report, const std::string& version) {
    out << "# nlfujita " << version << "\n";
    out << "# report " << report.name << "\n";
    for (const auto& [k, v] : report.parameters) out << "# " << k << " = " << v << "\n";
    out << "# sup_ratio = " << format_number(report.sup_ratio) << "\n";
    if (report.has_fit)
        out << "# slope = " << format_number(report.fit.slope) << " +- " << format_number(report.fit.slope_stderr)
            << "\n";
    out << "# passed = " << (report.passed ? "true" : "false") << "\n";
    for (const auto& note : report.notes) out << "# note: " << note << "\n";
    out << "t,measured_norm,bound_value,ratio\n";
    for (const auto& r : report.rows)
        out << format_number(r.t) << ',' << format_number(r.measured_norm) << ',' << format_number(r.bound_value)
            << ',' << format_number(r.ratio) << "\n";
}

}  // namespace nlf
