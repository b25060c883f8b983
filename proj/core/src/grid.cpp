#include "nlfujita/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlfujita/error.hpp"

namespace nlf {

Grid::Grid(int dim, double half_width, int cells_per_dim, Centering centering)
    : dim_(dim), half_width_(half_width), cells_(cells_per_dim), centering_(centering) {
    if (dim < 1 || dim > 3) throw Error("grid dimension must be 1, 2 or 3");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw Error("grid half width must be positive");
    if (cells_per_dim < 8 || cells_per_dim % 2 != 0)
        throw Error("grid needs an even number of cells per dimension, at least 8");
    spacing_ = 2.0 * half_width / cells_per_dim;
    cell_volume_ = std::pow(spacing_, dim);
    size_ = 1;
    for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(extent());
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    const auto e = static_cast<std::size_t>(extent());
    for (int d = dim_ - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % e);
        flat /= e;
    }
    return idx;
}

std::size_t Grid::flatten(const std::array<int, 3>& index) const {
    const auto e = static_cast<std::size_t>(extent());
    std::size_t flat = 0;
    for (int d = 0; d < dim_; ++d) flat = flat * e + static_cast<std::size_t>(index[d]);
    return flat;
}

Point Grid::point(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Point x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim_; ++d) x[d] = coordinate(idx[d]);
    return x;
}

double Grid::radius_squared(std::size_t flat) const {
    const auto x = point(flat);
    return x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
}

double Grid::max_abs_coordinate(std::size_t flat) const {
    const auto x = point(flat);
    return std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
}

GridFunction::GridFunction(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw Error("grid function has " + std::to_string(values_.size()) + " values, grid has " +
                    std::to_string(grid_.size()) + " nodes");
}

bool GridFunction::is_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    if (!(other.grid_ == grid_)) throw Error("grid mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
}

double bracket(std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::sqrt(1.0 + r2);
}

double bracket_scalar(double s) { return std::sqrt(1.0 + s * s); }

double mass(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_volume();
}

double weighted_norm(const GridFunction& f, double q, double b) {
    if (std::isnan(q) || q < 1.0) throw Error("invalid exponent");
    if (!f.is_finite()) throw Error("non-finite input");
    const Grid& g = f.grid();
    const auto v = f.values();
    // <x>^b = (1 + |x|^2)^{b/2}
    const auto weight = [&](std::size_t i) {
        return b == 0.0 ? 1.0 : std::pow(1.0 + g.radius_squared(i), 0.5 * b);
    };
    if (std::isinf(q)) {
        double m = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(weight(i) * v[i]));
        return m;
    }
    double s = 0.0;
    if (q == 1.0) {
        for (std::size_t i = 0; i < v.size(); ++i) s += std::abs(weight(i) * v[i]);
        return s * g.cell_volume();
    }
    for (std::size_t i = 0; i < v.size(); ++i) s += std::pow(std::abs(weight(i) * v[i]), q);
    return std::pow(s * g.cell_volume(), 1.0 / q);
}

double max_abs(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double min_value(const GridFunction& f) {
    const auto v = f.values();
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

double outer_shell_fraction(const GridFunction& f, double shell) {
    const Grid& g = f.grid();
    const double inner = (1.0 - shell) * g.half_width();
    double total = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        total += a;
        if (g.max_abs_coordinate(i) > inner) outer += a;
    }
    return total > 0.0 ? outer / total : 0.0;
}

}  // namespace nlf
