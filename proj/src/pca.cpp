#include <pse/pca.h>

#include <pse/binio.h>

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

namespace pse {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'S', 'E', 'P', 'C', 'A', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

// Singular values at or below this are treated as zero variance. Pixel data lives in
// [0,1], so an absolute floor is meaningful alongside the usual relative one.
double rank_tolerance(double largest, Eigen::Index rows, Eigen::Index cols) {
    const double relative = static_cast<double>(std::max(rows, cols)) *
                            std::numeric_limits<double>::epsilon() * largest;
    return std::max(1e-10, relative);
}

Eigen::VectorXd flatten(const Image& img) {
    return Eigen::Map<const Eigen::VectorXd>(img.data().data(), static_cast<Eigen::Index>(img.size()));
}

}  // namespace

Image PcaModel::mean_image() const {
    return Image(width, height, std::vector<double>(mean.data(), mean.data() + mean.size()));
}

bool PcaModel::operator==(const PcaModel& other) const {
    const auto same = [](const auto& a, const auto& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    return width == other.width && height == other.height && same(mean, other.mean) &&
           same(components, other.components) && same(singular_values, other.singular_values);
}

PcaModel pca_fit(const std::vector<Image>& images, int max_components) {
    if (images.size() < 2) {
        throw Error("pca_fit: need at least 2 images, got " + std::to_string(images.size()));
    }
    if (max_components < 1) {
        throw Error("pca_fit: max_components must be >= 1");
    }
    const Image& first = images.front();
    for (std::size_t i = 1; i < images.size(); ++i) {
        if (!images[i].same_shape(first)) {
            throw Error("pca_fit: shape mismatch at image " + std::to_string(i));
        }
    }
    const auto n = static_cast<Eigen::Index>(images.size());
    const auto dim = static_cast<Eigen::Index>(first.size());

    Eigen::MatrixXd data(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        data.row(i) = flatten(images[static_cast<std::size_t>(i)]).transpose();
    }

    PcaModel model;
    model.width = first.width();
    model.height = first.height();
    model.mean = data.colwise().mean().transpose();
    data.rowwise() -= model.mean.transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
        data, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();

    const Eigen::Index cap = std::min<Eigen::Index>({max_components, n - 1, dim});
    const double tol = s.size() > 0 ? rank_tolerance(s(0), n, dim) : 0.0;
    Eigen::Index keep = 0;
    while (keep < cap && s(keep) > tol) {
        ++keep;
    }

    model.singular_values = s.head(keep);
    model.components.resize(keep, dim);
    for (Eigen::Index j = 0; j < keep; ++j) {
        Eigen::VectorXd comp = v.col(j);
        Eigen::Index arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp(arg) < 0.0) {
            comp = -comp;
        }
        model.components.row(j) = comp.transpose();
    }
    return model;
}

Image pca_reconstruct(const PcaModel& model, const Image& img, int n_components) {
    if (img.width() != model.width || img.height() != model.height) {
        throw Error("pca_reconstruct: image " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + " does not match model " +
                    std::to_string(model.width) + "x" + std::to_string(model.height));
    }
    if (n_components < 0 || n_components > model.rank()) {
        throw Error("pca_reconstruct: component count " + std::to_string(n_components) +
                    " out of range [0, " + std::to_string(model.rank()) + "]");
    }
    const Eigen::VectorXd centered = flatten(img) - model.mean;
    const auto basis = model.components.topRows(n_components);
    const Eigen::VectorXd coeffs = basis * centered;
    const Eigen::VectorXd out = model.mean + basis.transpose() * coeffs;
    return Image(model.width, model.height, std::vector<double>(out.data(), out.data() + out.size()));
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(kMagic.data(), kMagic.size());
    binio::write_u32(out, kVersion);
    binio::write_u32(out, 0);
    binio::write_u64(out, static_cast<std::uint64_t>(model.width));
    binio::write_u64(out, static_cast<std::uint64_t>(model.height));
    binio::write_u64(out, static_cast<std::uint64_t>(model.rank()));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i) binio::write_f64(out, model.mean(i));
    for (Eigen::Index i = 0; i < model.singular_values.size(); ++i) {
        binio::write_f64(out, model.singular_values(i));
    }
    for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.components.cols(); ++c) {
            binio::write_f64(out, model.components(r, c));
        }
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

PcaModel load_pca(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("file missing: " + path.string());
    }
    const std::string ctx = path.string();
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw Error("bad magic in PCA model file: " + ctx);
    }
    if (const auto version = binio::read_u32(in, ctx); version != kVersion) {
        throw Error("unsupported PCA model version " + std::to_string(version) + ": " + ctx);
    }
    binio::read_u32(in, ctx);
    const auto width = binio::read_u64(in, ctx);
    const auto height = binio::read_u64(in, ctx);
    const auto rank = binio::read_u64(in, ctx);
    constexpr std::uint64_t kMaxSide = 1u << 16;
    if (width == 0 || height == 0 || width > kMaxSide || height > kMaxSide || rank > width * height) {
        throw Error("corrupt PCA model header: " + ctx);
    }
    PcaModel model;
    model.width = static_cast<int>(width);
    model.height = static_cast<int>(height);
    const auto dim = static_cast<Eigen::Index>(width * height);
    const auto r = static_cast<Eigen::Index>(rank);
    model.mean.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) model.mean(i) = binio::read_f64(in, ctx);
    model.singular_values.resize(r);
    for (Eigen::Index i = 0; i < r; ++i) model.singular_values(i) = binio::read_f64(in, ctx);
    model.components.resize(r, dim);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index c = 0; c < dim; ++c) model.components(i, c) = binio::read_f64(in, ctx);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw Error("trailing bytes in PCA model file: " + ctx);
    }
    return model;
}

}  // namespace pse
