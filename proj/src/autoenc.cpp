#include <pse/autoenc.h>

#include <pse/binio.h>
#include <pse/metrics.h>
#include <pse/rng.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

namespace pse {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'S', 'E', 'A', 'E', '\0', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindAutoencoder = 1;
constexpr std::uint32_t kKindClassifier = 2;

void fill_uniform(Eigen::MatrixXd& w, double bound, Rng& rng) {
    // Row-major fill order so the parameter stream does not depend on Eigen's storage.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            w(r, c) = rng.uniform(-bound, bound);
        }
    }
}

double glorot_bound(int fan_in, int fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Eigen::MatrixXd stack(std::span<const Image> images, int expected_dim) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(images.size()), expected_dim);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (static_cast<int>(images[i].size()) != expected_dim) {
            throw Error("autoencoder: image " + std::to_string(i) + " has " +
                        std::to_string(images[i].size()) + " pixels, network expects " +
                        std::to_string(expected_dim));
        }
        x.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(images[i].data().data(), expected_dim);
    }
    return x;
}

Eigen::MatrixXd stack(std::span<const ClassSample> samples, int expected_dim) {
    std::vector<Image> images;
    images.reserve(samples.size());
    for (const auto& s : samples) images.push_back(s.image);
    return stack(images, expected_dim);
}

struct Activations {
    Eigen::MatrixXd pre_hidden;  // X·W1 + b1
    Eigen::MatrixXd hidden;      // relu
};

Activations encode(const Encoder& enc, const Eigen::MatrixXd& x) {
    Activations a;
    a.pre_hidden = (x * enc.w).rowwise() + enc.b.transpose();
    a.hidden = a.pre_hidden.cwiseMax(0.0);
    return a;
}

Eigen::MatrixXd decode(const MlpAutoencoder& m, const Eigen::MatrixXd& hidden) {
    const Eigen::MatrixXd logits = (hidden * m.w2).rowwise() + m.b2.transpose();
    return logits.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Image row_image(const Eigen::MatrixXd& m, Eigen::Index row, const Image& like) {
    std::vector<double> data(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) data[static_cast<std::size_t>(c)] = m(row, c);
    return Image(like.width(), like.height(), std::move(data));
}

double image_loss(const Image& recon, const Image& target, LossKind kind, double sigma) {
    return kind == LossKind::Mse ? mse(recon, target) : pse(recon, target, sigma);
}

ResidualMap image_loss_gradient(const Image& recon, const Image& target, LossKind kind,
                                double sigma) {
    return kind == LossKind::Mse ? mse_gradient(recon, target) : pse_gradient(recon, target, sigma);
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double top = logits.row(r).maxCoeff();
        double total = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            p(r, c) = std::exp(logits(r, c) - top);
            total += p(r, c);
        }
        p.row(r) /= total;
    }
    return p;
}

Eigen::Index argmax_row(const Eigen::MatrixXd& m, Eigen::Index r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < m.cols(); ++c) {
        if (m(r, c) > m(r, best)) best = c;
    }
    return best;
}

void check_labels(std::span<const ClassSample> samples, int num_classes) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label < 0 || samples[i].label >= num_classes) {
            throw Error("invalid label " + std::to_string(samples[i].label) + " at sample " +
                        std::to_string(i) + " (classes: " + std::to_string(num_classes) + ")");
        }
    }
}

std::vector<std::size_t> epoch_order(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) binio::write_f64(out, m(r, c));
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) binio::write_f64(out, v(i));
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols,
                            const std::string& ctx) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = binio::read_f64(in, ctx);
    return m;
}

Eigen::VectorXd read_vector(std::istream& in, Eigen::Index n, const std::string& ctx) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = binio::read_f64(in, ctx);
    return v;
}

void write_header(std::ostream& out, std::uint32_t kind) {
    out.write(kMagic.data(), kMagic.size());
    binio::write_u32(out, kVersion);
    binio::write_u32(out, kind);
}

void read_header(std::istream& in, std::uint32_t expected_kind, const std::string& ctx) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw Error("bad magic in checkpoint: " + ctx);
    }
    if (binio::read_u32(in, ctx) != kVersion) {
        throw Error("unsupported checkpoint version: " + ctx);
    }
    const auto kind = binio::read_u32(in, ctx);
    if (kind != expected_kind) {
        throw Error(std::string("checkpoint ") + ctx + " holds " +
                    (kind == kKindAutoencoder ? "an autoencoder" : "a classifier") +
                    ", expected " +
                    (expected_kind == kKindAutoencoder ? "an autoencoder" : "a classifier"));
    }
}

Eigen::Index read_dim(std::istream& in, const std::string& ctx) {
    const auto v = binio::read_u64(in, ctx);
    if (v == 0 || v > (1u << 24)) {
        throw Error("corrupt layer shape in checkpoint: " + ctx);
    }
    return static_cast<Eigen::Index>(v);
}

void expect_eof(std::istream& in, const std::string& ctx) {
    if (in.peek() != std::char_traits<char>::eof()) {
        throw Error("trailing bytes in checkpoint: " + ctx);
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw Error("train config: epochs must be >= 0");
    if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error("train config: learning_rate must be > 0");
    }
    if (loss == LossKind::Pse) kernel_radius(sigma);
}

void FinetuneConfig::validate() const {
    if (epochs < 0) throw Error("finetune config: epochs must be >= 0");
    if (batch_size < 1) throw Error("finetune config: batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error("finetune config: learning_rate must be > 0");
    }
}

MlpAutoencoder ae_init(int input_dim, int hidden_dim, std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1) {
        throw Error("ae_init: dimensions must be >= 1");
    }
    Rng rng(seed);
    MlpAutoencoder m;
    const double bound = glorot_bound(input_dim, hidden_dim);
    m.encoder.w.resize(input_dim, hidden_dim);
    fill_uniform(m.encoder.w, bound, rng);
    m.encoder.b = Eigen::VectorXd::Zero(hidden_dim);
    m.w2.resize(hidden_dim, input_dim);
    fill_uniform(m.w2, bound, rng);
    m.b2 = Eigen::VectorXd::Zero(input_dim);
    return m;
}

ClassifierHead head_init(int hidden_dim, int num_classes, std::uint64_t seed) {
    if (hidden_dim < 1 || num_classes < 1) {
        throw Error("head_init: dimensions must be >= 1");
    }
    Rng rng(seed);
    ClassifierHead head;
    head.w.resize(hidden_dim, num_classes);
    fill_uniform(head.w, glorot_bound(hidden_dim, num_classes), rng);
    head.b = Eigen::VectorXd::Zero(num_classes);
    return head;
}

ForwardResult ae_forward(const MlpAutoencoder& m, std::span<const Image> batch) {
    const Eigen::MatrixXd x = stack(batch, m.input_dim());
    Activations a = encode(m.encoder, x);
    const Eigen::MatrixXd recon = decode(m, a.hidden);
    ForwardResult out;
    out.bottleneck = std::move(a.hidden);
    out.reconstructions.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.reconstructions.push_back(row_image(recon, static_cast<Eigen::Index>(i), batch[i]));
    }
    return out;
}

double ae_loss(const MlpAutoencoder& m, std::span<const Image> batch, LossKind kind, double sigma) {
    if (batch.empty()) throw Error("ae_loss: empty batch");
    const ForwardResult f = ae_forward(m, batch);
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += image_loss(f.reconstructions[i], batch[i], kind, sigma);
    }
    return total / static_cast<double>(batch.size());
}

AeGradient ae_loss_gradient(const MlpAutoencoder& m, std::span<const Image> batch, LossKind kind,
                            double sigma) {
    if (batch.empty()) throw Error("ae_loss_gradient: empty batch");
    const Eigen::MatrixXd x = stack(batch, m.input_dim());
    const Activations a = encode(m.encoder, x);
    const Eigen::MatrixXd recon = decode(m, a.hidden);

    const auto n = static_cast<Eigen::Index>(batch.size());
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd delta_out(n, m.input_dim());
    AeGradient g;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Image& target = batch[static_cast<std::size_t>(i)];
        const Image r = row_image(recon, i, target);
        g.loss += image_loss(r, target, kind, sigma);
        const ResidualMap dr = image_loss_gradient(r, target, kind, sigma);
        for (Eigen::Index c = 0; c < delta_out.cols(); ++c) {
            const double y = recon(i, c);
            delta_out(i, c) = inv_n * dr[static_cast<std::size_t>(c)] * y * (1.0 - y);
        }
    }
    g.loss *= inv_n;

    g.w2 = a.hidden.transpose() * delta_out;
    g.b2 = delta_out.colwise().sum().transpose();
    const Eigen::MatrixXd delta_hidden =
        (delta_out * m.w2.transpose()).cwiseProduct((a.pre_hidden.array() > 0.0).cast<double>().matrix());
    g.w1 = x.transpose() * delta_hidden;
    g.b1 = delta_hidden.colwise().sum().transpose();
    return g;
}

TrainResult ae_train(const MlpAutoencoder& m, std::span<const Image> images, const TrainConfig& cfg) {
    cfg.validate();
    if (images.empty()) throw Error("ae_train: no training images");
    for (const auto& img : images) {
        if (!img.same_shape(images.front())) throw Error("ae_train: images differ in shape");
    }
    TrainResult result{m, {}};
    MlpAutoencoder& model = result.model;
    Rng rng(cfg.seed);
    std::vector<Image> batch;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(images.size(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(images[order[i]]);
            const AeGradient g = ae_loss_gradient(model, batch, cfg.loss, cfg.sigma);
            epoch_loss += g.loss * static_cast<double>(batch.size());
            model.encoder.w -= cfg.learning_rate * g.w1;
            model.encoder.b -= cfg.learning_rate * g.b1;
            model.w2 -= cfg.learning_rate * g.w2;
            model.b2 -= cfg.learning_rate * g.b2;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(images.size()));
    }
    return result;
}

ClassifierGradient classifier_gradient(const Encoder& enc, const ClassifierHead& head,
                                       std::span<const ClassSample> batch) {
    if (batch.empty()) throw Error("classifier_gradient: empty batch");
    if (head.w.rows() != enc.hidden_dim()) {
        throw Error("classifier head expects bottleneck " + std::to_string(head.w.rows()) +
                    ", encoder has " + std::to_string(enc.hidden_dim()));
    }
    check_labels(batch, head.num_classes());
    const Eigen::MatrixXd x = stack(batch, enc.input_dim());
    const Activations a = encode(enc, x);
    const Eigen::MatrixXd logits = (a.hidden * head.w).rowwise() + head.b.transpose();
    Eigen::MatrixXd delta = softmax_rows(logits);

    const auto n = static_cast<Eigen::Index>(batch.size());
    const double inv_n = 1.0 / static_cast<double>(n);
    ClassifierGradient g;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index label = batch[static_cast<std::size_t>(i)].label;
        g.loss -= std::log(std::max(delta(i, label), 1e-300));
        delta(i, label) -= 1.0;
    }
    g.loss *= inv_n;
    delta *= inv_n;

    g.head_w = a.hidden.transpose() * delta;
    g.head_b = delta.colwise().sum().transpose();
    const Eigen::MatrixXd delta_hidden =
        (delta * head.w.transpose()).cwiseProduct((a.pre_hidden.array() > 0.0).cast<double>().matrix());
    g.enc_w = x.transpose() * delta_hidden;
    g.enc_b = delta_hidden.colwise().sum().transpose();
    return g;
}

Eigen::MatrixXd predict_proba(const Encoder& enc, const ClassifierHead& head,
                              std::span<const Image> images) {
    const Eigen::MatrixXd x = stack(images, enc.input_dim());
    const Activations a = encode(enc, x);
    return softmax_rows((a.hidden * head.w).rowwise() + head.b.transpose());
}

FinetuneResult finetune_classify(const Encoder& enc, const ClassifierHead& head,
                                 std::span<const ClassSample> labeled, const FinetuneConfig& cfg) {
    cfg.validate();
    if (labeled.empty()) throw Error("finetune_classify: no labeled samples");
    check_labels(labeled, head.num_classes());
    FinetuneResult result{enc, head, {}, {}};
    Rng rng(cfg.seed);
    std::vector<ClassSample> batch;
    std::vector<Image> batch_images;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(labeled.size(), rng);
        double epoch_loss = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            batch_images.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(labeled[order[i]]);
                batch_images.push_back(labeled[order[i]].image);
            }
            const Eigen::MatrixXd proba = predict_proba(result.encoder, result.head, batch_images);
            for (Eigen::Index r = 0; r < proba.rows(); ++r) {
                if (argmax_row(proba, r) == batch[static_cast<std::size_t>(r)].label) ++correct;
            }
            const ClassifierGradient g = classifier_gradient(result.encoder, result.head, batch);
            epoch_loss += g.loss * static_cast<double>(batch.size());
            result.head.w -= cfg.learning_rate * g.head_w;
            result.head.b -= cfg.learning_rate * g.head_b;
            if (!cfg.freeze_encoder) {
                result.encoder.w -= cfg.learning_rate * g.enc_w;
                result.encoder.b -= cfg.learning_rate * g.enc_b;
            }
        }
        const auto n = static_cast<double>(labeled.size());
        result.loss_history.push_back(epoch_loss / n);
        result.train_accuracy.push_back(static_cast<double>(correct) / n);
    }
    return result;
}

double eval_accuracy(const Encoder& enc, const ClassifierHead& head,
                     std::span<const ClassSample> test) {
    if (test.empty()) throw Error("eval_accuracy: empty test set");
    check_labels(test, head.num_classes());
    std::vector<Image> images;
    images.reserve(test.size());
    for (const auto& s : test) images.push_back(s.image);
    const Eigen::MatrixXd proba = predict_proba(enc, head, images);
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < proba.rows(); ++r) {
        if (argmax_row(proba, r) == test[static_cast<std::size_t>(r)].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

void save_autoencoder(const MlpAutoencoder& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_header(out, kKindAutoencoder);
    binio::write_u64(out, static_cast<std::uint64_t>(m.input_dim()));
    binio::write_u64(out, static_cast<std::uint64_t>(m.hidden_dim()));
    write_matrix(out, m.encoder.w);
    write_vector(out, m.encoder.b);
    write_matrix(out, m.w2);
    write_vector(out, m.b2);
    if (!out) throw Error("write failed: " + path.string());
}

MlpAutoencoder load_autoencoder(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("file missing: " + path.string());
    const std::string ctx = path.string();
    read_header(in, kKindAutoencoder, ctx);
    const Eigen::Index d = read_dim(in, ctx);
    const Eigen::Index h = read_dim(in, ctx);
    MlpAutoencoder m;
    m.encoder.w = read_matrix(in, d, h, ctx);
    m.encoder.b = read_vector(in, h, ctx);
    m.w2 = read_matrix(in, h, d, ctx);
    m.b2 = read_vector(in, d, ctx);
    expect_eof(in, ctx);
    return m;
}

void save_classifier(const Encoder& enc, const ClassifierHead& head,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_header(out, kKindClassifier);
    binio::write_u64(out, static_cast<std::uint64_t>(enc.input_dim()));
    binio::write_u64(out, static_cast<std::uint64_t>(enc.hidden_dim()));
    binio::write_u64(out, static_cast<std::uint64_t>(head.num_classes()));
    write_matrix(out, enc.w);
    write_vector(out, enc.b);
    write_matrix(out, head.w);
    write_vector(out, head.b);
    if (!out) throw Error("write failed: " + path.string());
}

std::pair<Encoder, ClassifierHead> load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("file missing: " + path.string());
    const std::string ctx = path.string();
    read_header(in, kKindClassifier, ctx);
    const Eigen::Index d = read_dim(in, ctx);
    const Eigen::Index h = read_dim(in, ctx);
    const Eigen::Index k = read_dim(in, ctx);
    Encoder enc{read_matrix(in, d, h, ctx), read_vector(in, h, ctx)};
    ClassifierHead head{read_matrix(in, h, k, ctx), read_vector(in, k, ctx)};
    expect_eof(in, ctx);
    return {std::move(enc), std::move(head)};
}

}  // namespace pse
