/**
 * @file datasets.h
 * @brief Synthetic generators, the MNISTX transform and loaders for user-supplied data
 */
#pragma once

#include <pse/autoenc.h>
#include <pse/image.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pse {

struct ManifestEntry {
    std::filesystem::path path;  ///< resolved against the manifest directory
    int label = 0;
};

struct Manifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

/// CSV with header `path,label`; relative paths resolve against the CSV's directory.
Manifest load_manifest(const std::filesystem::path& csv);
/// Writes `path,label` rows with paths relative to the manifest's directory.
void write_manifest(const Manifest& manifest, const std::filesystem::path& csv);

struct EqualMsePair {
    Image base;
    Image block;    ///< one contiguous patch×patch square raised by magnitude
    Image scatter;  ///< patch² isolated pixels raised by magnitude
};

/// Scattered pixels sit on a lattice with spacing 2·⌈2·sigma_max⌉ + 1, so their
/// kernel supports never overlap for any σ ≤ sigma_max.
EqualMsePair gen_equal_mse_pair(int size, int patch, double magnitude, std::uint64_t seed,
                                double sigma_max = 2.0);

struct AnomalyBenchmarkConfig {
    int n_normal = 100;
    int n_anomalous = 20;
    int size = 64;
    std::uint64_t seed = 0;
    double noise_amplitude = 0.02;
    int patch_min = 8;
    int patch_max = 16;
    double min_shift = 0.3;
    /// Per-pixel probability of an isolated 0/1 impulse, in normal and anomalous images alike.
    double impulse_p = 0.002;
};

struct LabeledImages {
    std::vector<std::string> ids;
    std::vector<Image> images;
    std::vector<int> labels;
};

/// Normals: fixed smooth pattern plus uniform noise. Anomalies additionally carry an
/// opaque square patch whose intensity differs from the pattern by at least min_shift.
/// Normals come first, then anomalies.
LabeledImages make_anomaly_benchmark(const AnomalyBenchmarkConfig& cfg);
/// Writes each image as PGM plus `manifest.csv` into out_dir; returns the manifest.
Manifest gen_anomaly_benchmark(const AnomalyBenchmarkConfig& cfg, const std::filesystem::path& out_dir);

/// Zero-pads a square image to three times its side (original centered), then replaces
/// each pixel with 0 or 1 (even odds) with probability noise_p.
Image mnistx_transform(const Image& img, double noise_p, std::uint64_t seed);

/// IDX image file (magic 0x00000803), bytes scaled by 1/255.
std::vector<Image> read_idx_images(const std::filesystem::path& path);
/// IDX label file (magic 0x00000801).
std::vector<int> read_idx_labels(const std::filesystem::path& path);

struct DigitSetConfig {
    int count = 500;
    int size = 28;
    int num_classes = 10;
    int jitter = 3;
    double noise_p = 0.05;
    std::uint64_t seed = 0;
};

/// Ten seven-segment digit glyphs drawn with random offset and stroke intensity, plus
/// salt-and-pepper noise. Labels cycle through the classes so the set is balanced.
std::vector<ClassSample> make_digit_set(const DigitSetConfig& cfg);

}  // namespace pse
