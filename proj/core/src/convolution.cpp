#include "nlfujita/convolution.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>

#include <fftw3.h>
#include <fmt/format.h>

#include "nlfujita/error.hpp"

namespace nlf {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

RealBuffer alloc_real(std::size_t n) {
    return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}

ComplexBuffer alloc_complex(std::size_t n) {
    return ComplexBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

// Index offset added to (a + b) to land on output node o, per dimension.
int output_offset(Centering a, Centering b, int M) {
    if (a != b) return M / 2;
    return a == Centering::vertex ? M / 2 : M / 2 - 1;
}

Centering output_centering(Centering a, Centering b) {
    return a == b ? Centering::vertex : Centering::cell;
}

void require_box(const Grid& plan_grid, const GridFunction& f) {
    if (!plan_grid.same_box(f.grid())) throw Error("grid mismatch");
}

}  // namespace

struct ConvolutionPlan::Impl {
    int dim = 1;
    int padded = 0;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    Impl(int n, int P) : dim(n), padded(P) {
        real_size = 1;
        for (int d = 0; d < n; ++d) real_size *= static_cast<std::size_t>(P);
        complex_size = real_size / static_cast<std::size_t>(P) * static_cast<std::size_t>(P / 2 + 1);
        int dims[3] = {P, P, P};
        auto in = alloc_real(real_size);
        auto out = alloc_complex(complex_size);
        std::lock_guard lock(planner_mutex());
        forward = fftw_plan_dft_r2c(n, dims, in.get(), out.get(), FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r(n, dims, out.get(), in.get(), FFTW_ESTIMATE);
        if (!forward || !backward) throw Error("FFTW planning failed");
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }

    // Copies f into a zero-padded P^n array (node index a -> padded index a).
    RealBuffer pad(const GridFunction& f) const {
        auto buf = alloc_real(real_size);
        std::memset(buf.get(), 0, sizeof(double) * real_size);
        const Grid& g = f.grid();
        const std::size_t P = static_cast<std::size_t>(padded);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const auto idx = g.unflatten(i);
            std::size_t flat = 0;
            for (int d = 0; d < dim; ++d) flat = flat * P + static_cast<std::size_t>(idx[d]);
            buf.get()[flat] = f[i];
        }
        return buf;
    }

    ComplexBuffer forward_transform(const GridFunction& f) const {
        auto in = pad(f);
        auto out = alloc_complex(complex_size);
        fftw_execute_dft_r2c(forward, in.get(), out.get());
        return out;
    }

    // Reads the linear convolution c at s = o + offset for every output node o.
    GridFunction extract(const double* c, const Grid& out_grid, int offset) const {
        GridFunction out(out_grid);
        const std::size_t P = static_cast<std::size_t>(padded);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto idx = out_grid.unflatten(i);
            std::size_t flat = 0;
            for (int d = 0; d < dim; ++d) flat = flat * P + static_cast<std::size_t>((idx[d] + offset) % padded);
            out[i] = c[flat];
        }
        return out;
    }

    GridFunction multiply_and_invert(const fftw_complex* a, const double* spectrum, const Grid& out_grid,
                                     int offset) const {
        auto prod = alloc_complex(complex_size);
        for (std::size_t i = 0; i < complex_size; ++i) {
            const std::complex<double> x(a[i][0], a[i][1]);
            const std::complex<double> y(spectrum[2 * i], spectrum[2 * i + 1]);
            const auto z = x * y;
            prod.get()[i][0] = z.real();
            prod.get()[i][1] = z.imag();
        }
        auto real = alloc_real(real_size);
        fftw_execute_dft_c2r(backward, prod.get(), real.get());
        return extract(real.get(), out_grid, offset);
    }
};

ConvolutionPlan::ConvolutionPlan(const Grid& grid, ConvolutionMode mode) : grid_(grid.cells()), mode_(mode) {
    if (mode_ == ConvolutionMode::fast) impl_ = std::make_shared<Impl>(grid_.dim(), padded_extent());
}

ConvolutionPlan::~ConvolutionPlan() = default;
ConvolutionPlan::ConvolutionPlan(const ConvolutionPlan&) = default;
ConvolutionPlan& ConvolutionPlan::operator=(const ConvolutionPlan&) = default;

GridFunction direct_convolve(const GridFunction& f, const GridFunction& g) {
    const Grid& gf = f.grid();
    const Grid& gg = g.grid();
    if (!gf.same_box(gg)) throw Error("grid mismatch");
    const int n = gf.dim();
    const int M = gf.cells_per_dim();
    const int offset = output_offset(gf.centering(), gg.centering(), M);
    const Grid out_grid(n, gf.half_width(), M, output_centering(gf.centering(), gg.centering()));
    GridFunction out(out_grid);
    const int ef = gf.extent();
    for (std::size_t o = 0; o < out.size(); ++o) {
        const auto oi = out_grid.unflatten(o);
        double acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (g[j] == 0.0) continue;
            const auto bj = gg.unflatten(j);
            std::array<int, 3> a{0, 0, 0};
            bool inside = true;
            for (int d = 0; d < n && inside; ++d) {
                a[d] = oi[d] + offset - bj[d];
                inside = a[d] >= 0 && a[d] < ef;
            }
            if (inside) acc += f[gf.flatten(a)] * g[j];
        }
        out[o] = acc * gf.cell_volume();
    }
    return out;
}

GridFunction ConvolutionPlan::convolve(const GridFunction& f, const GridFunction& g) const {
    require_box(grid_, f);
    require_box(grid_, g);
    if (!f.is_finite() || !g.is_finite()) throw Error("non-finite input");
    if (mode_ == ConvolutionMode::direct) return direct_convolve(f, g);

    const int M = grid_.cells_per_dim();
    const Centering cf = f.grid().centering(), cg = g.grid().centering();
    const Grid out_grid(grid_.dim(), grid_.half_width(), M, output_centering(cf, cg));
    auto a = impl_->forward_transform(f);
    auto b = impl_->forward_transform(g);
    const double scale = grid_.cell_volume() / static_cast<double>(impl_->real_size);
    std::vector<double> spec(2 * impl_->complex_size);
    for (std::size_t i = 0; i < impl_->complex_size; ++i) {
        spec[2 * i] = b.get()[i][0] * scale;
        spec[2 * i + 1] = b.get()[i][1] * scale;
    }
    return impl_->multiply_and_invert(a.get(), spec.data(), out_grid, output_offset(cf, cg, M));
}

SpectralKernel ConvolutionPlan::transform(const GridFunction& lattice_function) const {
    require_box(grid_, lattice_function);
    if (!lattice_function.is_finite()) throw Error("non-finite input");
    SpectralKernel k(lattice_function);
    if (mode_ == ConvolutionMode::fast) {
        auto t = impl_->forward_transform(lattice_function);
        const double scale = grid_.cell_volume() / static_cast<double>(impl_->real_size);
        auto spec = std::make_shared<std::vector<double>>(2 * impl_->complex_size);
        for (std::size_t i = 0; i < impl_->complex_size; ++i) {
            (*spec)[2 * i] = t.get()[i][0] * scale;
            (*spec)[2 * i + 1] = t.get()[i][1] * scale;
        }
        k.spectrum_ = std::move(spec);
    }
    return k;
}

GridFunction ConvolutionPlan::apply(const SpectralKernel& k, const GridFunction& f) const {
    require_box(grid_, f);
    require_box(grid_, k.samples_);
    if (!f.is_finite()) throw Error("non-finite input");
    if (mode_ == ConvolutionMode::direct || !k.spectrum_) return direct_convolve(k.samples_, f);
    const int M = grid_.cells_per_dim();
    const Centering ck = k.samples_.grid().centering(), cf = f.grid().centering();
    const Grid out_grid(grid_.dim(), grid_.half_width(), M, output_centering(ck, cf));
    auto a = impl_->forward_transform(f);
    return impl_->multiply_and_invert(a.get(), k.spectrum_->data(), out_grid, output_offset(ck, cf, M));
}

KernelIterates::KernelIterates(const Kernel& kernel, const ConvolutionPlan& plan)
    : kernel_(kernel), plan_(plan), spectral_j_(plan.transform(kernel.samples())) {
    if (!plan_.grid().same_box(kernel.state_grid())) throw Error("grid mismatch");
    iterates_.push_back(kernel.samples());
}

int KernelIterates::size() const {
    std::shared_lock lock(mutex_);
    return static_cast<int>(iterates_.size());
}

std::vector<std::string> KernelIterates::warnings() const {
    std::shared_lock lock(mutex_);
    return warnings_;
}

const GridFunction& KernelIterates::get(int k) {
    if (k < 1) throw Error("iterate index must be >= 1");
    {
        std::shared_lock lock(mutex_);
        if (k <= static_cast<int>(iterates_.size())) return iterates_[static_cast<std::size_t>(k - 1)];
    }
    std::unique_lock lock(mutex_);
    const double a0 = kernel_.alpha0();
    while (static_cast<int>(iterates_.size()) < k) {
        GridFunction next = plan_.apply(spectral_j_, iterates_.back());
        const int j = static_cast<int>(iterates_.size()) + 1;
        const double expected = std::pow(a0, j);
        const double leak = std::abs(expected - mass(next));
        if (leak > 1e-4 * std::abs(expected))
            warnings_.push_back(fmt::format("box too small for k iterations (k = {}, mass leak {:.3g} of {:.6g})", j,
                                            leak, expected));
        iterates_.push_back(std::move(next));
    }
    return iterates_[static_cast<std::size_t>(k - 1)];
}

GridFunction kernel_iterate(const Kernel& kernel, int k, const ConvolutionPlan& plan, std::string* warning) {
    KernelIterates cache(kernel, plan);
    GridFunction out = cache.get(k);
    if (warning) {
        const auto w = cache.warnings();
        *warning = w.empty() ? std::string() : w.front();
    }
    return out;
}

double sharp_young_constant(double p) {
    if (!(p >= 1.0)) throw Error("invalid exponent");
    if (p == 1.0 || std::isinf(p)) return 1.0;
    const double q = p / (p - 1.0);
    return std::sqrt(std::pow(p, 1.0 / p) / std::pow(q, 1.0 / q));
}

}  // namespace nlf
