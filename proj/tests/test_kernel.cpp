#include <pse/kernel.h>

#include "oracles.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

namespace pse {
namespace {

ResidualMap random_map(int w, int h, Rng& rng) {
    ResidualMap m(w, h);
    for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
    return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

TEST(GaussianKernel, DeltaAtZeroSigma) {
    const GaussianKernel k(0.0);
    EXPECT_EQ(k.radius(), 0);
    ASSERT_EQ(k.weights_1d().size(), 1u);
    EXPECT_EQ(k.weights_1d()[0], 1.0);
}

TEST(GaussianKernel, UnitSumSymmetryAndRadius) {
    for (double sigma : {0.0, 0.3, 0.5, 1.0, 1.7, 2.0, 4.0, 8.0}) {
        const GaussianKernel k(sigma);
        EXPECT_EQ(k.radius(), static_cast<int>(std::ceil(2 * sigma)));
        const auto w2 = k.weights_2d();
        const double sum = std::accumulate(w2.begin(), w2.end(), 0.0);
        EXPECT_NEAR(sum, 1.0, 1e-12) << sigma;
        const int r = k.radius();
        for (int y = -r; y <= r; ++y) {
            for (int x = -r; x <= r; ++x) {
                EXPECT_GE(k.weight_2d(x, y), 0.0);
                EXPECT_EQ(k.weight_2d(x, y), k.weight_2d(-x, -y));
                EXPECT_EQ(k.weight_2d(x, y), k.weight_2d(y, x));
            }
        }
    }
}

TEST(GaussianKernel, SigmaOneMatchesDirectEvaluation) {
    const GaussianKernel k(1.0);
    ASSERT_EQ(k.radius(), 2);
    const std::vector<double> expected = {0.05448868454964294, 0.24420134200323332,
                                          0.4026199468942474, 0.24420134200323332,
                                          0.05448868454964294};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR(k.weights_1d()[i], expected[i], 1e-15);
    }
    // Outer product equals sampling the 2D Gaussian and renormalizing.
    int r = 0;
    const auto w2 = oracle::gaussian_2d(1.0, r);
    const auto mine = k.weights_2d();
    EXPECT_LT(max_abs_diff(mine, w2), 1e-15);
}

TEST(GaussianKernel, RejectsInvalidSigma) {
    EXPECT_THROW(GaussianKernel(-0.1), Error);
    EXPECT_THROW(GaussianKernel(std::numeric_limits<double>::infinity()), Error);
    EXPECT_THROW(GaussianKernel(std::numeric_limits<double>::quiet_NaN()), Error);
}

TEST(Convolve, DeltaKernelIsIdentity) {
    Rng rng(4);
    const ResidualMap m = random_map(9, 6, rng);
    EXPECT_EQ(convolve(m, GaussianKernel(0.0)), m);
    EXPECT_EQ(convolve_separable(m, GaussianKernel(0.0)), m);
}

TEST(Convolve, ConstantInteriorPreserved) {
    const ResidualMap c(20, 20, 0.7);
    const GaussianKernel k(1.5);
    const ResidualMap out = convolve(c, k);
    const int r = k.radius();
    for (int y = r; y < 20 - r; ++y)
        for (int x = r; x < 20 - r; ++x) EXPECT_NEAR(out(x, y), 0.7, 1e-12);
    // Zero padding loses mass at the border.
    EXPECT_LT(out(0, 0), 0.7);
}

TEST(Convolve, ImpulseReproducesKernel) {
    ResidualMap m(11, 11);
    m(5, 5) = 1.0;
    for (double sigma : {0.5, 1.0, 2.0}) {
        const GaussianKernel k(sigma);
        const ResidualMap out = convolve(m, k);
        const auto direct = oracle::convolve_direct(m.values(), 11, 11, sigma);
        EXPECT_LT(max_abs_diff(out.data(), direct), 1e-15);
        const int r = k.radius();
        for (int y = 0; y < 11; ++y) {
            for (int x = 0; x < 11; ++x) {
                const int dx = x - 5, dy = y - 5;
                const double expected =
                    (std::abs(dx) <= r && std::abs(dy) <= r) ? k.weight_2d(dx, dy) : 0.0;
                EXPECT_EQ(out(x, y), expected);
            }
        }
    }
}

TEST(Convolve, SeparableMatchesDirect) {
    Rng rng(5);
    for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
        const GaussianKernel k(sigma);
        for (int t = 0; t < 20; ++t) {
            const ResidualMap m = random_map(16, 16, rng);
            const ResidualMap direct = convolve(m, k);
            EXPECT_LT(max_abs_diff(convolve_separable(m, k).data(), direct.data()), 1e-10);
            EXPECT_LT(max_abs_diff(direct.data(), oracle::convolve_direct(m.values(), 16, 16, sigma)),
                      1e-12);
        }
    }
    // Kernels wider than the map.
    const ResidualMap small = random_map(3, 2, rng);
    const GaussianKernel wide(4.0);
    EXPECT_LT(max_abs_diff(convolve_separable(small, wide).data(), convolve(small, wide).data()), 1e-12);
}

TEST(Convolve, ZeroMapStaysZero) {
    const ResidualMap z(8, 8);
    for (double v : convolve_separable(z, GaussianKernel(2.0)).values()) EXPECT_EQ(v, 0.0);
}

TEST(Convolve, Linearity) {
    Rng rng(6);
    const GaussianKernel k(1.3);
    for (int t = 0; t < 10; ++t) {
        const ResidualMap a = random_map(12, 9, rng);
        const ResidualMap b = random_map(12, 9, rng);
        const double ca = rng.uniform(-2, 2), cb = rng.uniform(-2, 2);
        ResidualMap mix(12, 9);
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = ca * a[i] + cb * b[i];
        const ResidualMap lhs = convolve_separable(mix, k);
        const ResidualMap ka = convolve_separable(a, k), kb = convolve_separable(b, k);
        for (std::size_t i = 0; i < mix.size(); ++i) {
            EXPECT_NEAR(lhs[i], ca * ka[i] + cb * kb[i], 1e-10);
        }
    }
}

TEST(Convolve, SelfAdjointUnderZeroPadding) {
    Rng rng(7);
    for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
        const GaussianKernel k(sigma);
        for (int t = 0; t < 10; ++t) {
            const ResidualMap a = random_map(10, 13, rng);
            const ResidualMap b = random_map(10, 13, rng);
            const ResidualMap ka = convolve(a, k), kb = convolve(b, k);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                lhs += ka[i] * b[i];
                rhs += a[i] * kb[i];
            }
            EXPECT_NEAR(lhs, rhs, 1e-10);
        }
    }
}

}  // namespace
}  // namespace pse
