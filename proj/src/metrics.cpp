#include <pse/metrics.h>

#include <algorithm>

namespace pse {

double mean_of_squares(std::span<const double> values) {
    double acc = 0.0;
    for (double v : values) {
        acc += v * v;
    }
    return acc / static_cast<double>(values.size());
}

double mse(const Image& y_hat, const Image& y) {
    return mean_of_squares(residual(y_hat, y).data());
}

Heatmap pse_heatmap(const ResidualMap& r, const GaussianKernel& k) {
    const ResidualMap smoothed = convolve_separable(r, k);
    Heatmap h(r.width(), r.height());
    for (std::size_t i = 0; i < h.size(); ++i) {
        h[i] = smoothed[i] * smoothed[i];
    }
    return h;
}

Heatmap pse_heatmap(const Image& y_hat, const Image& y, double sigma) {
    const GaussianKernel k(sigma);
    return pse_heatmap(residual(y_hat, y), k);
}

double pse(const Image& y_hat, const Image& y, double sigma) {
    const GaussianKernel k(sigma);
    const ResidualMap smoothed = convolve_separable(residual(y_hat, y), k);
    return mean_of_squares(smoothed.data());
}

ResidualMap mse_gradient(const Image& y_hat, const Image& y) {
    ResidualMap g = residual(y_hat, y);
    const double scale = 2.0 / static_cast<double>(g.size());
    for (double& v : g.data()) {
        v = scale * v;
    }
    return g;
}

ResidualMap pse_gradient(const Image& y_hat, const Image& y, double sigma) {
    const GaussianKernel k(sigma);
    ResidualMap g = convolve_separable(convolve_separable(residual(y_hat, y), k), k);
    const double scale = 2.0 / static_cast<double>(g.size());
    for (double& v : g.data()) {
        v = scale * v;
    }
    return g;
}

double max_score(const Heatmap& h) {
    if (h.empty()) {
        throw Error("max_score: empty heatmap");
    }
    return *std::max_element(h.data().begin(), h.data().end());
}

}  // namespace pse
