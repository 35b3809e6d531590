#include <pse/image.h>

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace pse {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error("file missing: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("file unreadable: " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(const std::vector<unsigned char>& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(bytes[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        tok.push_back(static_cast<char>(bytes[pos++]));
    }
    return tok;
}

int parse_dim(const std::string& tok, const std::filesystem::path& path) {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit) || tok.size() > 9) {
        throw Error("malformed PGM header in " + path.string());
    }
    return std::stoi(tok);
}

Image decode_pgm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    std::size_t pos = 2;
    const int w = parse_dim(pgm_token(bytes, pos), path);
    const int h = parse_dim(pgm_token(bytes, pos), path);
    const int maxval = parse_dim(pgm_token(bytes, pos), path);
    if (w < 1 || h < 1) {
        throw Error("PGM has zero dimension: " + path.string());
    }
    if (maxval != 255) {
        throw Error("unsupported bit depth (PGM maxval " + std::to_string(maxval) +
                    "): " + path.string());
    }
    ++pos;  // single whitespace byte after maxval
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (pos > bytes.size() || bytes.size() - pos < n) {
        throw Error("truncated payload in " + path.string());
    }
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        data[i] = bytes[pos + i] / 255.0;
    }
    return Image(w, h, std::move(data));
}

Image decode_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
        throw Error("unsupported format (" + std::string(png.message) + "): " + path.string());
    }
    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw Error("unsupported bit depth (16-bit PNG): " + path.string());
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    // Alpha is read and ignored so that stored samples pass through unchanged.
    if (color) {
        png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    } else {
        png.format = alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
    }
    const int channels = PNG_IMAGE_PIXEL_CHANNELS(png.format);
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw Error("truncated payload or corrupt PNG (" + msg + "): " + path.string());
    }
    const int w = static_cast<int>(png.width);
    const int h = static_cast<int>(png.height);
    std::vector<double> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const unsigned char* px = &buf[i * static_cast<std::size_t>(channels)];
        if (color) {
            data[i] = std::clamp(to_grayscale(px[0] / 255.0, px[1] / 255.0, px[2] / 255.0), 0.0, 1.0);
        } else {
            data[i] = px[0] / 255.0;
        }
    }
    return Image(w, h, std::move(data));
}

constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

double to_grayscale(double r, double g, double b) noexcept {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

unsigned char quantize_u8(double v) noexcept {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    if (v >= 1.0) return 255;
    return static_cast<unsigned char>(std::lround(255.0 * v));
}

Image load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
        return decode_pgm(bytes, path);
    }
    if (bytes.size() >= kPngSignature.size() &&
        std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
        return decode_png(bytes, path);
    }
    throw Error("unsupported format (expected PNG or binary PGM): " + path.string());
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<char> bytes(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        bytes[i] = static_cast<char>(quantize_u8(img[i]));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

void save_png(const Image& img, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        bytes[i] = quantize_u8(img[i]);
    }
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width());
    png.height = static_cast<png_uint_32>(img.height());
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        throw Error("cannot write PNG " + path.string() + ": " + png.message);
    }
}

Image resize_bilinear(const Image& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1) {
        throw Error("resize_bilinear: zero target dimension");
    }
    if (new_width == img.width() && new_height == img.height()) {
        return img;
    }
    const auto source_coord = [](int i, int n_out, int n_in) {
        if (n_out == 1 || n_in == 1) return 0.0;
        return static_cast<double>(i) * (n_in - 1) / (n_out - 1);
    };
    Image out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        const double sy = source_coord(y, new_height, img.height());
        const int y0 = std::min(static_cast<int>(sy), img.height() - 1);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double ty = sy - y0;
        for (int x = 0; x < new_width; ++x) {
            const double sx = source_coord(x, new_width, img.width());
            const int x0 = std::min(static_cast<int>(sx), img.width() - 1);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double tx = sx - x0;
            // a + t·(b − a) keeps constant inputs exact.
            const double top = img(x0, y0) + tx * (img(x1, y0) - img(x0, y0));
            const double bottom = img(x0, y1) + tx * (img(x1, y1) - img(x0, y1));
            out(x, y) = std::clamp(top + ty * (bottom - top), 0.0, 1.0);
        }
    }
    return out;
}

ResidualMap residual(const Image& y_hat, const Image& y) {
    require_same_shape(y_hat, y, "residual");
    ResidualMap r(y.width(), y.height());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = y_hat[i] - y[i];
    }
    return r;
}

}  // namespace pse
