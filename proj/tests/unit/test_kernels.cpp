#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "nlfujita/error.hpp"
#include "nlfujita/kernels.hpp"

using namespace nlf;

namespace {

const Grid& line() {
    static const Grid g(1, 12.0, 2048);
    return g;
}

}  // namespace

TEST(Kernel, BuiltinsHaveUnitMass) {
    for (const auto& spec : {KernelSpec::gaussian(1.0), KernelSpec::compact_bump(1.0), KernelSpec::exponential(1.0)}) {
        const Kernel k = Kernel::build(spec, line());
        EXPECT_NEAR(k.alpha0(), 1.0, 1e-12) << to_string(spec.shape);
        EXPECT_NEAR(mass(k.samples()), k.alpha0(), 1e-12);
        EXPECT_TRUE(k.nonnegative());
    }
}

TEST(Kernel, BumpMustFitInBox) {
    try {
        Kernel::build(KernelSpec::compact_bump(12.0), line());
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "kernel support exceeds box");
    }
}

TEST(Kernel, ExactSymmetryAndZeroFirstMoment) {
    const Grid g(2, 6.0, 64);
    const Kernel k = Kernel::build(KernelSpec::exponential(1.3), g);
    const auto& s = k.samples();
    const Grid& lat = s.grid();
    double first[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto idx = lat.unflatten(i);
        auto mirror = idx;
        for (int d = 0; d < 2; ++d) mirror[d] = lat.extent() - 1 - idx[d];
        EXPECT_EQ(s[i], s[lat.flatten(mirror)]);
        const Point x = lat.point(i);
        first[0] += s[i] * x[0];
        first[1] += s[i] * x[1];
    }
    // Samples are mirror-exact; only the summation order leaves roundoff.
    EXPECT_NEAR(first[0], 0.0, 1e-14);
    EXPECT_NEAR(first[1], 0.0, 1e-14);
}

TEST(Kernel, WeightedMoments) {
    const Kernel gauss = Kernel::build(KernelSpec::gaussian(1.0), line());
    EXPECT_DOUBLE_EQ(gauss.weighted_moment(0.0), gauss.alpha0());
    // int (1 + x^2) phi = 1 + variance.
    EXPECT_NEAR(gauss.weighted_moment(2.0), 2.0, 1e-6);
    // int (1 + x^2) e^{-|x|}/2 = 1 + 2. The kink at 0 costs h^2/6 in the
    // renormalised mass, so this needs a fine lattice.
    const Kernel expo = Kernel::build(KernelSpec::exponential(1.0), Grid(1, 30.0, 32768));
    EXPECT_NEAR(expo.weighted_moment(2.0), 3.0, 1e-6);
    EXPECT_NEAR(gauss.second_moment(), 1.0, 1e-8);
}

TEST(Kernel, MomentsNondecreasingInDelta) {
    for (const auto& spec : {KernelSpec::gaussian(0.7), KernelSpec::compact_bump(2.0), KernelSpec::exponential(2.0)}) {
        const Kernel k = Kernel::build(spec, line());
        double prev = k.weighted_moment(0.0);
        for (double d = 0.25; d <= 16.0; d += 0.25) {
            const double cur = k.weighted_moment(d);
            EXPECT_GE(cur, prev);
            prev = cur;
        }
    }
}

TEST(Kernel, LpMoments) {
    const Kernel gauss = Kernel::build(KernelSpec::gaussian(1.0), line());
    EXPECT_NEAR(gauss.lp_weighted_moment(2.0, 0.0), 0.5 / std::sqrt(std::numbers::pi), 1e-6);
    for (double beta : {0.0, 1.0, 3.0})
        EXPECT_NEAR(gauss.lp_weighted_moment(1.0 + 1e-9, beta), gauss.weighted_moment(beta),
                    1e-7 * gauss.weighted_moment(beta));
    const Kernel bump = Kernel::build(KernelSpec::compact_bump(1.0), line());
    for (double p : {1.5, 2.0, 8.0})
        for (double beta : {0.0, 4.0, 16.0}) EXPECT_TRUE(std::isfinite(bump.lp_weighted_moment(p, beta)));
}

TEST(Kernel, EffectiveRadius) {
    const Kernel bump = Kernel::build(KernelSpec::compact_bump(2.0), line());
    EXPECT_LE(bump.effective_radius(0.0), 2.0);
    const Kernel gauss = Kernel::build(KernelSpec::gaussian(1.0), line());
    EXPECT_GT(gauss.effective_radius(1e-8), 5.0);
    EXPECT_LT(gauss.effective_radius(1e-8), 6.5);
}

TEST(KernelTable, OddTableRejected) {
    const Grid g(1, 4.0, 16);
    std::vector<double> v(17, 0.0);
    v[8] = 1.0;
    v[9] = 0.5;
    EXPECT_THROW(Kernel::from_table(g, v), Error);
    v[7] = 0.5;
    const Kernel k = Kernel::from_table(g, v);
    EXPECT_NEAR(k.alpha0(), 2.0 * 0.5, 1e-15);
}

TEST(KernelTable, RoundTrip) {
    const Grid g(2, 3.0, 16);
    const Kernel k = Kernel::build(KernelSpec::gaussian(0.8), g);
    std::stringstream ss;
    write_kernel_table(ss, k);
    const Kernel back = load_kernel_table(ss, g);
    ASSERT_EQ(back.samples().size(), k.samples().size());
    for (std::size_t i = 0; i < k.samples().size(); ++i) EXPECT_EQ(back.samples()[i], k.samples()[i]);
}

TEST(KernelTable, HeaderMustMatchGrid) {
    std::stringstream ss("# kernel n=1 L=4 M=16\n8,1\n");
    EXPECT_THROW(load_kernel_table(ss, Grid(1, 4.0, 32)), Error);
    std::stringstream missing("8,1\n");
    EXPECT_THROW(load_kernel_table(missing, Grid(1, 4.0, 16)), Error);
}

TEST(Hypotheses, GaussianPassesGlobal) {
    const Kernel gauss = Kernel::build(KernelSpec::gaussian(1.0), line());
    const Certificate c = check_hypotheses(gauss, GlobalHypothesis{1.0});
    EXPECT_TRUE(c.passed) << c.render();
    EXPECT_EQ(certified_delta(gauss), 16.0);
}

TEST(Hypotheses, AlgebraicTailFailsGreenFar) {
    // <x>^{-(n+1)} in 1D: the L1_2 integrand tends to a constant.
    const Grid g(1, 64.0, 1024);
    std::vector<double> v(g.lattice().size());
    const Grid lat = g.lattice();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + lat.radius_squared(i));
    const Kernel k = Kernel::from_table(g, v);
    const Certificate c = check_hypotheses(k, GreenFarHypothesis{2.0});
    EXPECT_FALSE(c.passed);
    EXPECT_NE(c.render().find("moment diverges with L"), std::string::npos);
    EXPECT_TRUE(check_hypotheses(k, GreenFarHypothesis{0.5}).passed);
    EXPECT_EQ(certified_delta(k), 0.0);
}

TEST(Hypotheses, NegativeSampleFailsBlowup) {
    const Grid g(1, 4.0, 64);
    const Kernel bump = Kernel::build(KernelSpec::compact_bump(1.0), g);
    auto v = std::vector<double>(bump.samples().values().begin(), bump.samples().values().end());
    v[32 + 3] = -1e-3;
    v[32 - 3] = -1e-3;
    const Kernel bad = Kernel::from_table(g, v);
    EXPECT_FALSE(bad.nonnegative());
    const Certificate c = check_hypotheses(bad, BlowupHypothesis{});
    EXPECT_FALSE(c.passed);
    EXPECT_NE(c.render().find("J >= 0 violated"), std::string::npos);
    EXPECT_TRUE(check_hypotheses(bump, BlowupHypothesis{}).passed);
}

TEST(Hypotheses, InterpNeedsBetaAboveDimension) {
    const Kernel gauss = Kernel::build(KernelSpec::gaussian(1.0), line());
    EXPECT_TRUE(check_hypotheses(gauss, InterpHypothesis{4.0, 1.0}).passed);
    EXPECT_FALSE(check_hypotheses(gauss, InterpHypothesis{0.5, 1.0}).passed);
}
