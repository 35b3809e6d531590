/**
 * @file kernel.h
 * @brief Discrete Gaussian kernels and zero-padded same-size convolution
 *
 * The kernel is sampled at integer offsets in [−⌈2σ⌉, ⌈2σ⌉] and renormalized to
 * unit sum. σ = 0 is the delta kernel, under which every convolution is the identity.
 */
#pragma once

#include <pse/image.h>

#include <vector>

namespace pse {

class GaussianKernel {
public:
    /// Throws pse::Error for negative or non-finite sigma.
    explicit GaussianKernel(double sigma);

    double sigma() const noexcept { return sigma_; }
    int radius() const noexcept { return radius_; }
    int taps() const noexcept { return 2 * radius_ + 1; }
    bool is_delta() const noexcept { return radius_ == 0; }

    /// Unit-sum symmetric 1D weights, index radius() is the center.
    const std::vector<double>& weights_1d() const noexcept { return weights_; }
    /// Weight at 2D offset (dx, dy), both in [−radius, radius].
    double weight_2d(int dx, int dy) const noexcept {
        return weights_[static_cast<std::size_t>(dx + radius_)] *
               weights_[static_cast<std::size_t>(dy + radius_)];
    }
    /// Outer product of the 1D weights, row-major (2r+1)×(2r+1).
    std::vector<double> weights_2d() const;

private:
    double sigma_;
    int radius_;
    std::vector<double> weights_;
};

/// Same as constructing GaussianKernel(sigma).
GaussianKernel gaussian_kernel(double sigma);

/// Truncation radius ⌈2σ⌉.
int kernel_radius(double sigma);

/// Direct 2D convolution, zero padding outside the map.
ResidualMap convolve(const ResidualMap& map, const GaussianKernel& k);

/// Horizontal then vertical 1D pass; agrees with convolve() to ~1e-15.
ResidualMap convolve_separable(const ResidualMap& map, const GaussianKernel& k);

}  // namespace pse
