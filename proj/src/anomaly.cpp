#include <pse/anomaly.h>

#include <pse/metrics.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pse {

AnomalyScore anomaly_score(const PcaModel& model, const Image& img, const HyperParams& hp,
                           ScoreMode mode) {
    const Image recon = pca_reconstruct(model, img, hp.n_components);
    AnomalyScore out;
    out.heatmap = pse_heatmap(img, recon, hp.sigma);
    out.score = mode == ScoreMode::ScalarMse ? mse(img, recon) : max_score(out.heatmap);
    if (!std::isfinite(out.score)) {
        throw Error("anomaly_score: non-finite score");
    }
    return out;
}

double average_precision(std::span<const ScoredSample> samples) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& sa = samples[a];
        const auto& sb = samples[b];
        if (sa.score != sb.score) return sa.score > sb.score;
        return sa.label < sb.label;
    });
    double precision_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (samples[order[rank]].label == 1) {
            ++hits;
            precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    if (hits == 0) {
        throw Error("average_precision: no positive samples");
    }
    return precision_sum / static_cast<double>(hits);
}

namespace {

void check_few_shot(std::span<const LabeledImage> few_shot) {
    const bool has_pos = std::any_of(few_shot.begin(), few_shot.end(),
                                     [](const LabeledImage& s) { return s.label == 1; });
    const bool has_neg = std::any_of(few_shot.begin(), few_shot.end(),
                                     [](const LabeledImage& s) { return s.label == 0; });
    if (!has_pos || !has_neg) {
        throw Error("grid_search: few-shot set needs at least one normal and one anomalous sample");
    }
}

}  // namespace

GridSearchResult grid_search(const PcaModel& model, std::span<const LabeledImage> few_shot,
                             std::span<const double> sigma_grid, std::span<const int> comp_grid,
                             ScoreMode mode) {
    if (sigma_grid.empty() || comp_grid.empty()) {
        throw Error("grid_search: empty grid");
    }
    check_few_shot(few_shot);

    std::vector<double> sigmas(sigma_grid.begin(), sigma_grid.end());
    std::sort(sigmas.begin(), sigmas.end());
    sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());
    std::vector<int> comps;
    for (int c : comp_grid) {
        if (c < 0) throw Error("grid_search: negative component count");
        comps.push_back(std::min(c, model.rank()));
    }
    std::sort(comps.begin(), comps.end());
    comps.erase(std::unique(comps.begin(), comps.end()), comps.end());

    GridSearchResult result;
    result.best_ap = -1.0;
    for (double sigma : sigmas) {
        for (int c : comps) {
            const HyperParams hp{sigma, c};
            const double ap = evaluate(model, hp, few_shot, mode).ap;
            result.cells.push_back({hp, ap});
            if (ap > result.best_ap) {
                result.best_ap = ap;
                result.best = hp;
            }
        }
    }
    result.model = model;
    return result;
}

GridSearchResult grid_search(const std::vector<Image>& normals_train,
                             std::span<const LabeledImage> few_shot,
                             std::span<const double> sigma_grid, std::span<const int> comp_grid,
                             ScoreMode mode) {
    if (sigma_grid.empty() || comp_grid.empty()) {
        throw Error("grid_search: empty grid");
    }
    check_few_shot(few_shot);
    const int max_c = std::max(1, *std::max_element(comp_grid.begin(), comp_grid.end()));
    return grid_search(pca_fit(normals_train, max_c), few_shot, sigma_grid, comp_grid, mode);
}

Evaluation evaluate(const PcaModel& model, const HyperParams& hp,
                    std::span<const LabeledImage> test, ScoreMode mode) {
    if (test.empty()) {
        throw Error("evaluate: empty test set");
    }
    Evaluation ev;
    ev.samples.reserve(test.size());
    for (const auto& item : test) {
        const AnomalyScore s = anomaly_score(model, item.image, hp, mode);
        ev.samples.push_back({item.id, s.score, item.label, max_score(s.heatmap)});
    }
    ev.ap = average_precision(ev.samples);
    return ev;
}

std::vector<double> default_sigma_grid() { return {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}; }

std::vector<int> default_component_grid(int rank) {
    std::vector<int> grid;
    for (int c : {0, 1, 2, 4, 8, 16, 32}) {
        if (c <= rank) grid.push_back(c);
    }
    const int top = std::min(rank, 64);
    if (grid.empty() || grid.back() != top) grid.push_back(top);
    return grid;
}

}  // namespace pse
