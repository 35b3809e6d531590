/**
 * @file image.h
 * @brief Grayscale rasters, image IO, preprocessing and residuals
 */
#pragma once

#include <pse/error.h>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pse {

/// Row-major H×W raster of doubles. The tag keeps images, residuals and
/// heatmaps from being mixed up at call sites.
template <class Tag>
class Raster {
public:
    Raster() = default;

    Raster(int width, int height, double fill = 0.0) : width_(width), height_(height) {
        if (width < 1 || height < 1) {
            throw Error("raster dimensions must be >= 1, got " + std::to_string(width) + "x" +
                        std::to_string(height));
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Raster(int width, int height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width < 1 || height < 1) {
            throw Error("raster dimensions must be >= 1");
        }
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw Error("raster data length " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(width) + "x" + std::to_string(height));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(int x, int y) const { return data_[index(x, y)]; }
    double& operator()(int x, int y) { return data_[index(x, y)]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    const std::vector<double>& values() const& noexcept { return data_; }
    std::vector<double> values() && noexcept { return std::move(data_); }

    template <class Other>
    bool same_shape(const Raster<Other>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Raster&) const = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

struct ImageTag {};
struct ResidualTag {};
struct HeatmapTag {};

/// Grayscale image. Loaders produce values in [0,1]; reconstructions may leave that range.
using Image = Raster<ImageTag>;
/// Signed per-pixel difference between two images (also used for gradients).
using ResidualMap = Raster<ResidualTag>;
/// Nonnegative per-pixel error map.
using Heatmap = Raster<HeatmapTag>;

template <class To, class From>
Raster<To> raster_cast(const Raster<From>& r) {
    return Raster<To>(r.width(), r.height(), r.values());
}

template <class A, class B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw Error(std::string(what) + ": shape mismatch " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
    }
}

/// Luminance with 0.299/0.587/0.114 weights.
double to_grayscale(double r, double g, double b) noexcept;

/// Loads an 8-bit grayscale/RGB PNG or a binary PGM (P5, maxval 255) scaled to [0,1].
Image load_image(const std::filesystem::path& path);

/// Writes PGM P5; each pixel stored as round(255·clamp(v,0,1)).
void save_pgm(const Image& img, const std::filesystem::path& path);
/// Writes an 8-bit grayscale PNG with the same quantization as save_pgm.
void save_png(const Image& img, const std::filesystem::path& path);

/// Bilinear resize on a corner-aligned grid (output corners sample input corners).
Image resize_bilinear(const Image& img, int new_width, int new_height);

/// Elementwise y_hat − y.
ResidualMap residual(const Image& y_hat, const Image& y);

/// 8-bit quantization used by every writer.
unsigned char quantize_u8(double v) noexcept;

}  // namespace pse
