/**
 * @file anomaly.h
 * @brief Few-shot anomaly scoring: PCA reconstruction → PSE heatmap → max value
 */
#pragma once

#include <pse/image.h>
#include <pse/pca.h>

#include <span>
#include <string>
#include <vector>

namespace pse {

struct HyperParams {
    double sigma = 0.0;
    int n_components = 0;

    bool operator==(const HyperParams&) const = default;
};

/// How an image-level score is derived from the reconstruction.
enum class ScoreMode {
    MaxHeatmap,  ///< max of the PSE heatmap; σ = 0 gives the max squared residual
    ScalarMse,   ///< whole-image MSE, σ ignored
};

struct ScoredSample {
    std::string id;
    double score = 0.0;
    int label = 0;  ///< 0 normal, 1 anomalous
    double heatmap_scale = 0.0;  ///< max of the heatmap, used to normalize exports
};

struct LabeledImage {
    std::string id;
    Image image;
    int label = 0;
};

struct AnomalyScore {
    double score = 0.0;
    Heatmap heatmap;
};

AnomalyScore anomaly_score(const PcaModel& model, const Image& img, const HyperParams& hp,
                           ScoreMode mode = ScoreMode::MaxHeatmap);

/// Mean precision at each positive's rank, scores sorted descending with ties
/// ranked pessimistically (negatives first). Throws if there are no positives.
double average_precision(std::span<const ScoredSample> samples);

struct GridCell {
    HyperParams hp;
    double ap = 0.0;
};

struct GridSearchResult {
    HyperParams best;
    double best_ap = 0.0;
    PcaModel model;               ///< fitted once at the largest grid component count
    std::vector<GridCell> cells;  ///< every evaluated cell in search order
};

/// Fits PCA once, scores every few-shot sample for each (σ, c) cell and keeps the
/// highest AP; ties go to the smaller σ, then the smaller c. Component counts above
/// the fitted rank are clamped to the rank.
GridSearchResult grid_search(const std::vector<Image>& normals_train,
                             std::span<const LabeledImage> few_shot,
                             std::span<const double> sigma_grid, std::span<const int> comp_grid,
                             ScoreMode mode = ScoreMode::MaxHeatmap);

/// Same search over an already fitted model.
GridSearchResult grid_search(const PcaModel& model, std::span<const LabeledImage> few_shot,
                             std::span<const double> sigma_grid, std::span<const int> comp_grid,
                             ScoreMode mode = ScoreMode::MaxHeatmap);

struct Evaluation {
    double ap = 0.0;
    std::vector<ScoredSample> samples;
};

Evaluation evaluate(const PcaModel& model, const HyperParams& hp,
                    std::span<const LabeledImage> test, ScoreMode mode = ScoreMode::MaxHeatmap);

std::vector<double> default_sigma_grid();
/// {0,1,2,4,8,16,32,min(rank,64)} with entries above the rank dropped.
std::vector<int> default_component_grid(int rank);

}  // namespace pse
