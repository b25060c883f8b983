#pragma once

#include <deque>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "nlfujita/grid.hpp"
#include "nlfujita/kernels.hpp"

namespace nlf {

enum class ConvolutionMode { fast, direct };

/// A function on the displacement lattice prepared for repeated convolution.
/// In fast mode this holds its zero-padded transform (already scaled by h^n
/// and the inverse transform length); in direct mode only the samples.
class SpectralKernel {
public:
    const GridFunction& samples() const { return samples_; }

private:
    friend class ConvolutionPlan;
    explicit SpectralKernel(GridFunction samples) : samples_(std::move(samples)) {}

    GridFunction samples_;
    std::shared_ptr<const std::vector<double>> spectrum_;  // interleaved re/im
};

/// Linear (non-circular) convolution on a box.
///
/// (f * g)(x) = sum_j f(x - x_j) g(x_j) h^n with zero extension outside the
/// box. The output node set follows from the inputs:
///   lattice * cell    -> cell
///   lattice * lattice -> lattice
///   cell * cell       -> lattice
/// Fast mode zero-pads to 2M per dimension; direct mode is the O(N^2) sum.
/// Plans are immutable and can be shared between threads.
class ConvolutionPlan {
public:
    explicit ConvolutionPlan(const Grid& grid, ConvolutionMode mode = ConvolutionMode::fast);
    ~ConvolutionPlan();
    ConvolutionPlan(const ConvolutionPlan&);
    ConvolutionPlan& operator=(const ConvolutionPlan&);

    const Grid& grid() const { return grid_; }
    ConvolutionMode mode() const { return mode_; }
    /// Padded transform length per dimension.
    int padded_extent() const { return 2 * grid_.cells_per_dim(); }

    /// Throws "grid mismatch" unless both inputs share the plan's box.
    GridFunction convolve(const GridFunction& f, const GridFunction& g) const;

    SpectralKernel transform(const GridFunction& lattice_function) const;
    /// k * f for a prepared lattice function k.
    GridFunction apply(const SpectralKernel& k, const GridFunction& f) const;

private:
    struct Impl;
    Grid grid_;
    ConvolutionMode mode_;
    std::shared_ptr<Impl> impl_;
};

/// Reference O(N^2) convolution, independent of any transform.
GridFunction direct_convolve(const GridFunction& f, const GridFunction& g);

/// Kernel iterates J_1 = J, J_k = J * J_{k-1}, computed on demand and kept.
///
/// Single-writer, many-reader: concurrent `get` calls are safe; references
/// stay valid for the lifetime of the cache.
class KernelIterates {
public:
    KernelIterates(const Kernel& kernel, const ConvolutionPlan& plan);

    const Kernel& kernel() const { return kernel_; }
    const ConvolutionPlan& plan() const { return plan_; }

    /// J_k for k >= 1.
    const GridFunction& get(int k);
    /// Number of iterates currently held.
    int size() const;

    /// "box too small for k iterations" messages raised so far.
    std::vector<std::string> warnings() const;

private:
    Kernel kernel_;
    ConvolutionPlan plan_;
    SpectralKernel spectral_j_;
    mutable std::shared_mutex mutex_;
    std::deque<GridFunction> iterates_;
    std::vector<std::string> warnings_;
};

/// J_k without a persistent cache. `warning` receives the leak message if any.
GridFunction kernel_iterate(const Kernel& kernel, int k, const ConvolutionPlan& plan,
                            std::string* warning = nullptr);

/// Sharp Young constant C_p = sqrt(p^{1/p} / q^{1/q}), 1/p + 1/q = 1.
/// C_1 = C_inf = 1.
double sharp_young_constant(double p);

}  // namespace nlf
