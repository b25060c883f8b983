#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace nlf {

/// Coordinates of a node; components beyond the grid dimension are zero.
using Point = std::array<double, 3>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Where the nodes of a grid sit.
///
/// `cell` nodes are cell centres x_i = (i - (M-1)/2) h, i = 0..M-1. The origin
/// is never a node (M is even) and the node set is exactly symmetric.
///
/// `vertex` nodes are x_i = (i - M/2) h, i = 0..M. This is the displacement
/// lattice: every difference of two cell nodes lands on it, so convolution
/// kernels are stored here.
enum class Centering { cell, vertex };

/// Uniform tensor grid on the box [-L, L]^n, n in {1,2,3}, with M (even, >= 8)
/// cells per dimension and spacing h = 2L/M.
class Grid {
public:
    Grid(int dim, double half_width, int cells_per_dim, Centering centering = Centering::cell);

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    int cells_per_dim() const { return cells_; }
    double spacing() const { return spacing_; }
    Centering centering() const { return centering_; }

    /// Nodes per dimension: M for cell grids, M + 1 for the lattice.
    int extent() const { return centering_ == Centering::cell ? cells_ : cells_ + 1; }
    std::size_t size() const { return size_; }

    /// Quadrature weight h^n of every node.
    double cell_volume() const { return cell_volume_; }

    /// 1D coordinate of node index i along any axis. Exactly odd in i about the
    /// centre, so J(x) = J(-x) holds bit-for-bit for radial samples.
    double coordinate(int i) const {
        const int twice = centering_ == Centering::cell ? 2 * i - cells_ + 1 : 2 * i - cells_;
        return twice * (0.5 * spacing_);
    }

    std::array<int, 3> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::array<int, 3>& index) const;

    Point point(std::size_t flat) const;
    double radius_squared(std::size_t flat) const;

    /// Largest |x_k| over the components of node `flat` (distance to the
    /// box boundary is L minus this).
    double max_abs_coordinate(std::size_t flat) const;

    /// The vertex lattice sharing this grid's box and spacing.
    Grid lattice() const { return Grid(dim_, half_width_, cells_, Centering::vertex); }
    /// The cell grid sharing this grid's box and spacing.
    Grid cells() const { return Grid(dim_, half_width_, cells_, Centering::cell); }

    /// Same box, spacing and dimension (centering may differ).
    bool same_box(const Grid& other) const {
        return dim_ == other.dim_ && half_width_ == other.half_width_ && cells_ == other.cells_;
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.same_box(b) && a.centering_ == b.centering_;
    }

private:
    int dim_;
    double half_width_;
    int cells_;
    Centering centering_;
    double spacing_;
    double cell_volume_;
    std::size_t size_;
};

/// Values of a function at the nodes of a grid.
class GridFunction {
public:
    explicit GridFunction(Grid grid);
    GridFunction(Grid grid, std::vector<double> values);

    /// Samples `f(const Point&)` at every node.
    template <typename F>
    static GridFunction sample(const Grid& grid, F&& f) {
        GridFunction out(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.point(i));
        return out;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::vector<double>& storage() { return values_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool is_finite() const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator*=(double s);

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Japanese bracket <x> = (1 + |x|^2)^{1/2}.
double bracket(std::span<const double> x);
/// Bracket of a scalar: (1 + s^2)^{1/2}.
double bracket_scalar(double s);

/// Quadrature mass sum_i f(x_i) h^n.
double mass(const GridFunction& f);

/// ||<.>^b f||_{L^q} by midpoint quadrature; q = kInf gives the nodal max.
/// Throws "non-finite input" or "invalid exponent".
double weighted_norm(const GridFunction& f, double q, double b);

double max_abs(const GridFunction& f);
double min_value(const GridFunction& f);

/// Mass of |f| on the nodes whose max-norm exceeds (1 - shell) L, divided by
/// the total mass of |f|. Used as the box-truncation leak monitor.
double outer_shell_fraction(const GridFunction& f, double shell = 0.1);

}  // namespace nlf
