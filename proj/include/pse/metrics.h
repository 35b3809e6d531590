/**
 * @file metrics.h
 * @brief MSE, Proximally Sensitive Error (PSE), PSE heatmaps and gradients
 *
 * PSE is the mean of the squared Gaussian-smoothed residual:
 *
 *     PSE = (1/MN) Σ ([R ∗ k(σ)]_ij)²,   R = Ŷ − Y
 *
 * Grouped residuals reinforce each other under smoothing while isolated ones
 * are spread out, so PSE ranks spatially concentrated errors above scattered
 * errors of equal MSE. With σ = 0 the kernel is a delta and PSE is exactly MSE.
 */
#pragma once

#include <pse/image.h>
#include <pse/kernel.h>

namespace pse {

/// (1/MN)·Σ R².
double mse(const Image& y_hat, const Image& y);

/// Mean of pse_heatmap(y_hat, y, sigma).
double pse(const Image& y_hat, const Image& y, double sigma);

/// Per-pixel squared smoothed residual ([R∗k]_ij)².
Heatmap pse_heatmap(const Image& y_hat, const Image& y, double sigma);
Heatmap pse_heatmap(const ResidualMap& r, const GaussianKernel& k);

/// ∂MSE/∂Ŷ = (2/MN)·R.
ResidualMap mse_gradient(const Image& y_hat, const Image& y);

/// ∂PSE/∂Ŷ = (2/MN)·k∗(R∗k). The kernel is symmetric and zero padding makes the
/// convolution self-adjoint, so the same operator is applied twice.
ResidualMap pse_gradient(const Image& y_hat, const Image& y, double sigma);

/// Largest heatmap value; throws on an empty heatmap.
double max_score(const Heatmap& h);

/// Row-major sequential mean of squares; shared by mse and pse so σ = 0 agrees bitwise.
double mean_of_squares(std::span<const double> values);

}  // namespace pse
