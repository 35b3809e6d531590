#include <pse/datasets.h>

#include <pse/kernel.h>
#include <pse/rng.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pse {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error("file missing: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("file unreadable: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
           (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

// Checks the magic and returns the payload offset plus the declared dimensions.
std::vector<std::uint64_t> idx_header(const std::vector<unsigned char>& bytes, std::uint32_t magic,
                                      const std::filesystem::path& path) {
    if (bytes.size() < 4) throw Error("truncated file: " + path.string());
    if (be32(bytes, 0) != magic) {
        std::ostringstream msg;
        msg << "bad magic 0x" << std::hex << be32(bytes, 0) << " in " << path.string();
        throw Error(msg.str());
    }
    const std::size_t ndims = magic & 0xff;
    if (bytes.size() < 4 + 4 * ndims) throw Error("truncated file: " + path.string());
    std::vector<std::uint64_t> dims(ndims);
    for (std::size_t i = 0; i < ndims; ++i) dims[i] = be32(bytes, 4 + 4 * i);
    return dims;
}

// Smooth pattern in [0.35, 0.65] shared by every benchmark image.
double benchmark_pattern(int x, int y, int size) {
    const double u = static_cast<double>(x) / size;
    const double v = static_cast<double>(y) / size;
    return 0.5 + 0.1 * std::sin(2.0 * std::numbers::pi * 2.0 * u) +
           0.05 * std::cos(2.0 * std::numbers::pi * 3.0 * v);
}

// Seven-segment masks, bit order a b c d e f g.
constexpr std::array<unsigned, 10> kDigitSegments = {
    0b1111110, 0b0110000, 0b1101101, 0b1111001, 0b0110011,
    0b1011011, 0b1011111, 0b1110000, 0b1111111, 0b1111011,
};

void fill_rect(Image& img, int x0, int y0, int w, int h, double v) {
    for (int y = std::max(0, y0); y < std::min(img.height(), y0 + h); ++y) {
        for (int x = std::max(0, x0); x < std::min(img.width(), x0 + w); ++x) {
            img(x, y) = v;
        }
    }
}

void draw_digit(Image& img, int digit, int ox, int oy, int glyph_w, int glyph_h, int t, double v) {
    const unsigned mask = kDigitSegments[static_cast<std::size_t>(digit)];
    const int mid = oy + glyph_h / 2 - t / 2;
    const int half = glyph_h / 2;
    const auto on = [mask](int seg) { return (mask >> (6 - seg)) & 1u; };
    if (on(0)) fill_rect(img, ox, oy, glyph_w, t, v);                         // a
    if (on(1)) fill_rect(img, ox + glyph_w - t, oy, t, half + 1, v);          // b
    if (on(2)) fill_rect(img, ox + glyph_w - t, oy + half, t, glyph_h - half, v);  // c
    if (on(3)) fill_rect(img, ox, oy + glyph_h - t, glyph_w, t, v);           // d
    if (on(4)) fill_rect(img, ox, oy + half, t, glyph_h - half, v);           // e
    if (on(5)) fill_rect(img, ox, oy, t, half + 1, v);                        // f
    if (on(6)) fill_rect(img, ox, mid, glyph_w, t, v);                        // g
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    if (!in) throw Error("file missing: " + csv.string());
    Manifest m;
    m.root = csv.parent_path();
    std::string line;
    if (!std::getline(in, line) || trim(line) != "path,label") {
        throw Error("manifest " + csv.string() + ": missing header 'path,label'");
    }
    std::size_t line_no = 1;
    std::vector<std::string> missing;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) {
            throw Error("manifest " + csv.string() + " line " + std::to_string(line_no) +
                        ": expected 'path,label'");
        }
        const std::string rel = trim(line.substr(0, comma));
        const std::string label_text = trim(line.substr(comma + 1));
        int label = 0;
        std::size_t used = 0;
        try {
            label = std::stoi(label_text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (label_text.empty() || used != label_text.size() || label < 0) {
            throw Error("manifest " + csv.string() + " line " + std::to_string(line_no) +
                        ": label '" + label_text + "' is not a nonnegative integer");
        }
        std::filesystem::path p(rel);
        if (p.is_relative()) p = m.root / p;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(p, ec)) missing.push_back(p.string());
        m.entries.push_back({p, label});
    }
    if (!missing.empty()) {
        std::string msg = "manifest " + csv.string() + " references missing files:";
        for (const auto& p : missing) msg += " " + p;
        throw Error(msg);
    }
    return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& csv) {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write " + csv.string());
    out << "path,label\n";
    const auto dir = csv.parent_path();
    for (const auto& e : manifest.entries) {
        out << std::filesystem::path(e.path).lexically_relative(dir.empty() ? "." : dir).generic_string()
            << ',' << e.label << '\n';
    }
    if (!out) throw Error("write failed: " + csv.string());
}

EqualMsePair gen_equal_mse_pair(int size, int patch, double magnitude, std::uint64_t seed,
                                double sigma_max) {
    if (size < 1 || patch < 1) throw Error("gen_equal_mse_pair: size and patch must be >= 1");
    if (!(magnitude >= 0.0 && magnitude <= 1.0)) {
        throw Error("gen_equal_mse_pair: magnitude must lie in [0,1]");
    }
    const int spacing = 2 * kernel_radius(sigma_max) + 1;
    const int lattice_extent = (patch - 1) * spacing + 1;
    if (patch > size || lattice_extent > size) {
        throw Error("gen_equal_mse_pair: " + std::to_string(patch * patch) +
                    " pixels with spacing " + std::to_string(spacing) + " do not fit in " +
                    std::to_string(size) + "x" + std::to_string(size));
    }
    Rng rng(seed);
    EqualMsePair out{Image(size, size), Image(size, size), Image(size, size)};
    for (double& v : out.base.data()) v = rng.uniform(0.0, 1.0 - magnitude);
    out.block = out.base;
    out.scatter = out.base;

    const int bx = rng.uniform_int(0, size - patch);
    const int by = rng.uniform_int(0, size - patch);
    for (int y = by; y < by + patch; ++y)
        for (int x = bx; x < bx + patch; ++x) out.block(x, y) = out.base(x, y) + magnitude;

    const int sx = rng.uniform_int(0, size - lattice_extent);
    const int sy = rng.uniform_int(0, size - lattice_extent);
    for (int j = 0; j < patch; ++j) {
        for (int i = 0; i < patch; ++i) {
            const int x = sx + i * spacing;
            const int y = sy + j * spacing;
            out.scatter(x, y) = out.base(x, y) + magnitude;
        }
    }
    return out;
}

LabeledImages make_anomaly_benchmark(const AnomalyBenchmarkConfig& cfg) {
    if (cfg.n_normal < 0 || cfg.n_anomalous < 0 || cfg.n_normal + cfg.n_anomalous < 1) {
        throw Error("anomaly benchmark: counts must be >= 0 with at least one image");
    }
    if (cfg.size < 1 || cfg.patch_min < 1 || cfg.patch_max < cfg.patch_min || cfg.patch_max > cfg.size) {
        throw Error("anomaly benchmark: invalid patch geometry");
    }
    if (cfg.min_shift < 0.0 || cfg.min_shift > 0.35) {
        throw Error("anomaly benchmark: min_shift must lie in [0, 0.35]");
    }
    if (!(cfg.impulse_p >= 0.0 && cfg.impulse_p <= 1.0)) {
        throw Error("anomaly benchmark: impulse_p must lie in [0,1]");
    }
    Rng rng(cfg.seed);
    LabeledImages out;
    const int total = cfg.n_normal + cfg.n_anomalous;
    for (int i = 0; i < total; ++i) {
        const bool anomalous = i >= cfg.n_normal;
        Image img(cfg.size, cfg.size);
        for (int y = 0; y < cfg.size; ++y) {
            for (int x = 0; x < cfg.size; ++x) {
                img(x, y) = benchmark_pattern(x, y, cfg.size) +
                            rng.uniform(-cfg.noise_amplitude, cfg.noise_amplitude);
            }
        }
        if (cfg.impulse_p > 0.0) {
            for (double& v : img.data()) {
                if (rng.bernoulli(cfg.impulse_p)) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
            }
        }
        if (anomalous) {
            const int side = rng.uniform_int(cfg.patch_min, cfg.patch_max);
            const int px = rng.uniform_int(0, cfg.size - side);
            const int py = rng.uniform_int(0, cfg.size - side);
            // The pattern spans [0.35, 0.65], so these levels keep every pixel at least
            // min_shift away from it.
            const bool bright = rng.bernoulli(0.5);
            const double span = 0.35 - cfg.min_shift;
            const double level = bright ? 1.0 - rng.uniform(0.0, span) : rng.uniform(0.0, span);
            for (int y = py; y < py + side; ++y) {
                for (int x = px; x < px + side; ++x) {
                    img(x, y) = level;
                }
            }
        }
        for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
        char name[32];
        std::snprintf(name, sizeof name, "%s_%04d", anomalous ? "anomaly" : "normal",
                      anomalous ? i - cfg.n_normal : i);
        out.ids.emplace_back(name);
        out.images.push_back(std::move(img));
        out.labels.push_back(anomalous ? 1 : 0);
    }
    return out;
}

Manifest gen_anomaly_benchmark(const AnomalyBenchmarkConfig& cfg, const std::filesystem::path& out_dir) {
    const LabeledImages data = make_anomaly_benchmark(cfg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
    Manifest m;
    m.root = out_dir;
    for (std::size_t i = 0; i < data.images.size(); ++i) {
        const auto path = out_dir / (data.ids[i] + ".pgm");
        save_pgm(data.images[i], path);
        m.entries.push_back({path, data.labels[i]});
    }
    write_manifest(m, out_dir / "manifest.csv");
    return m;
}

Image mnistx_transform(const Image& img, double noise_p, std::uint64_t seed) {
    if (img.width() != img.height()) throw Error("mnistx_transform: image must be square");
    if (!(noise_p >= 0.0 && noise_p <= 1.0)) {
        throw Error("mnistx_transform: noise_p must lie in [0,1]");
    }
    const int side = img.width();
    Image out(3 * side, 3 * side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) out(x + side, y + side) = img(x, y);
    if (noise_p > 0.0) {
        Rng rng(seed);
        for (double& v : out.data()) {
            if (rng.bernoulli(noise_p)) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
        }
    }
    return out;
}

std::vector<Image> read_idx_images(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    const auto dims = idx_header(bytes, 0x00000803, path);
    const std::uint64_t count = dims[0], rows = dims[1], cols = dims[2];
    constexpr std::uint64_t kMaxSide = 1u << 16;
    if (rows == 0 || cols == 0 || rows > kMaxSide || cols > kMaxSide) {
        throw Error("dimension overflow in " + path.string());
    }
    const std::uint64_t per_image = rows * cols;
    const std::size_t offset = 16;
    // count and per_image are each below 2^32, so the product cannot wrap.
    if (bytes.size() - offset < count * per_image) {
        throw Error("truncated file: " + path.string());
    }
    std::vector<Image> images;
    images.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::vector<double> data(per_image);
        const std::size_t base = offset + i * per_image;
        for (std::size_t p = 0; p < per_image; ++p) data[p] = bytes[base + p] / 255.0;
        images.emplace_back(static_cast<int>(cols), static_cast<int>(rows), std::move(data));
    }
    return images;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    const auto dims = idx_header(bytes, 0x00000801, path);
    const std::uint64_t count = dims[0];
    const std::size_t offset = 8;
    if (bytes.size() - offset < count) throw Error("truncated file: " + path.string());
    std::vector<int> labels(count);
    for (std::size_t i = 0; i < count; ++i) labels[i] = bytes[offset + i];
    return labels;
}

std::vector<ClassSample> make_digit_set(const DigitSetConfig& cfg) {
    if (cfg.num_classes < 1 || cfg.num_classes > 10) {
        throw Error("digit set: num_classes must lie in [1,10]");
    }
    if (cfg.count < 0 || cfg.jitter < 0 || !(cfg.noise_p >= 0.0 && cfg.noise_p <= 1.0)) {
        throw Error("digit set: invalid configuration");
    }
    const int glyph_w = cfg.size * 3 / 7;
    const int glyph_h = cfg.size * 5 / 7;
    const int thickness = std::max(1, cfg.size / 14);
    if (glyph_w < 3 || glyph_h + 2 * cfg.jitter > cfg.size || glyph_w + 2 * cfg.jitter > cfg.size) {
        throw Error("digit set: image too small for glyphs with this jitter");
    }
    Rng rng(cfg.seed);
    std::vector<ClassSample> out;
    out.reserve(static_cast<std::size_t>(cfg.count));
    const int cx = (cfg.size - glyph_w) / 2;
    const int cy = (cfg.size - glyph_h) / 2;
    for (int i = 0; i < cfg.count; ++i) {
        const int label = i % cfg.num_classes;
        Image img(cfg.size, cfg.size);
        const int ox = cx + rng.uniform_int(-cfg.jitter, cfg.jitter);
        const int oy = cy + rng.uniform_int(-cfg.jitter, cfg.jitter);
        draw_digit(img, label, ox, oy, glyph_w, glyph_h, thickness, rng.uniform(0.6, 1.0));
        for (double& v : img.data()) {
            if (rng.bernoulli(cfg.noise_p)) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
        }
        out.push_back({std::move(img), label});
    }
    return out;
}

}  // namespace pse
