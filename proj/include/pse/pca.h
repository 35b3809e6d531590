/**
 * @file pca.h
 * @brief PCA image model fitted on non-anomalous images
 */
#pragma once

#include <pse/image.h>

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

namespace pse {

struct PcaModel {
    int width = 0;
    int height = 0;
    Eigen::VectorXd mean;             ///< length width·height
    Eigen::MatrixXd components;       ///< rank × dim, orthonormal rows
    Eigen::VectorXd singular_values;  ///< nonincreasing, all > 0

    int dim() const noexcept { return width * height; }
    int rank() const noexcept { return static_cast<int>(components.rows()); }
    Image mean_image() const;

    bool operator==(const PcaModel& other) const;
};

/// Fits on row-major flattened, mean-centered images via SVD of the data matrix.
/// Keeps min(max_components, n−1, dim) components, minus any with a numerically
/// zero singular value. Each component's largest-magnitude entry is made nonnegative.
PcaModel pca_fit(const std::vector<Image>& images, int max_components);

/// mean + Σ_{j<c} ⟨x−mean, v_j⟩·v_j, not clamped.
Image pca_reconstruct(const PcaModel& model, const Image& img, int n_components);

/// Binary model file: 16-byte header ("PSEPCA\0\0", u32 version, u32 reserved),
/// u64 width/height/rank, then mean, singular values and row-major components,
/// all little-endian.
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace pse
