#include <pse/kernel.h>

#include <cmath>
#include <numeric>

namespace pse {

int kernel_radius(double sigma) {
    if (!std::isfinite(sigma) || sigma < 0.0) {
        throw Error("gaussian kernel: sigma must be finite and >= 0, got " + std::to_string(sigma));
    }
    return static_cast<int>(std::ceil(2.0 * sigma));
}

GaussianKernel::GaussianKernel(double sigma) : sigma_(sigma), radius_(kernel_radius(sigma)) {
    if (radius_ == 0) {
        weights_ = {1.0};
        return;
    }
    weights_.resize(static_cast<std::size_t>(taps()));
    const double denom = 2.0 * sigma * sigma;
    for (int x = -radius_; x <= radius_; ++x) {
        weights_[static_cast<std::size_t>(x + radius_)] = std::exp(-(x * x) / denom);
    }
    // Sum symmetrically from the tails inward so that w[i] == w[−i] stays exact after scaling.
    double total = weights_[static_cast<std::size_t>(radius_)];
    for (int x = radius_; x >= 1; --x) {
        total += 2.0 * weights_[static_cast<std::size_t>(radius_ + x)];
    }
    for (double& w : weights_) {
        w /= total;
    }
}

std::vector<double> GaussianKernel::weights_2d() const {
    const int n = taps();
    std::vector<double> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            out[static_cast<std::size_t>(y * n + x)] =
                weights_[static_cast<std::size_t>(x)] * weights_[static_cast<std::size_t>(y)];
        }
    }
    return out;
}

GaussianKernel gaussian_kernel(double sigma) { return GaussianKernel(sigma); }

ResidualMap convolve(const ResidualMap& map, const GaussianKernel& k) {
    if (map.empty()) {
        throw Error("convolve: empty map");
    }
    const int w = map.width();
    const int h = map.height();
    const int r = k.radius();
    ResidualMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const int sy = y + dy;
                if (sy < 0 || sy >= h) continue;
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = x + dx;
                    if (sx < 0 || sx >= w) continue;
                    acc += k.weight_2d(dx, dy) * map(sx, sy);
                }
            }
            out(x, y) = acc;
        }
    }
    return out;
}

ResidualMap convolve_separable(const ResidualMap& map, const GaussianKernel& k) {
    if (map.empty()) {
        throw Error("convolve_separable: empty map");
    }
    if (k.is_delta()) {
        return map;
    }
    const int w = map.width();
    const int h = map.height();
    const int r = k.radius();
    const auto& wt = k.weights_1d();

    ResidualMap rows(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            const int lo = std::max(-r, -x);
            const int hi = std::min(r, w - 1 - x);
            for (int d = lo; d <= hi; ++d) {
                acc += wt[static_cast<std::size_t>(d + r)] * map(x + d, y);
            }
            rows(x, y) = acc;
        }
    }
    ResidualMap out(w, h);
    for (int y = 0; y < h; ++y) {
        const int lo = std::max(-r, -y);
        const int hi = std::min(r, h - 1 - y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = lo; d <= hi; ++d) {
                acc += wt[static_cast<std::size_t>(d + r)] * rows(x, y + d);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

}  // namespace pse
