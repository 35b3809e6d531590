/**
 * @file autoenc.h
 * @brief Fully connected autoencoder pre-trained with a PSE or MSE reconstruction
 *        loss, then fine-tuned as a classifier with the decoder discarded
 *
 * Architecture: x → relu(x·W1 + b1) = z → sigmoid(z·W2 + b2) = x̂.
 * Optimizer is plain minibatch gradient descent.
 */
#pragma once

#include <pse/image.h>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pse {

/// Exact equality that tolerates differing shapes.
template <class A, class B>
bool same_values(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

/// Row-major weights: w is d×h so a batch X (n×d) maps to X·w.
struct Encoder {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;

    int input_dim() const noexcept { return static_cast<int>(w.rows()); }
    int hidden_dim() const noexcept { return static_cast<int>(w.cols()); }
    bool operator==(const Encoder& o) const { return same_values(w, o.w) && same_values(b, o.b); }
};

struct MlpAutoencoder {
    Encoder encoder;
    Eigen::MatrixXd w2;  ///< h×d
    Eigen::VectorXd b2;  ///< d

    int input_dim() const noexcept { return encoder.input_dim(); }
    int hidden_dim() const noexcept { return encoder.hidden_dim(); }
    bool operator==(const MlpAutoencoder& o) const {
        return encoder == o.encoder && same_values(w2, o.w2) && same_values(b2, o.b2);
    }
};

struct ClassifierHead {
    Eigen::MatrixXd w;  ///< h×K
    Eigen::VectorXd b;  ///< K

    int num_classes() const noexcept { return static_cast<int>(w.cols()); }
    bool operator==(const ClassifierHead& o) const { return same_values(w, o.w) && same_values(b, o.b); }
};

enum class LossKind { Mse, Pse };

struct TrainConfig {
    LossKind loss = LossKind::Pse;
    double sigma = 0.5;  ///< used only for LossKind::Pse
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FinetuneConfig {
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    bool freeze_encoder = false;

    void validate() const;
};

struct ClassSample {
    Image image;
    int label = 0;
};

/// Weights uniform in ±√(6/(fan_in+fan_out)), biases zero.
MlpAutoencoder ae_init(int input_dim, int hidden_dim, std::uint64_t seed);
ClassifierHead head_init(int hidden_dim, int num_classes, std::uint64_t seed);

struct ForwardResult {
    Eigen::MatrixXd bottleneck;         ///< n×h
    std::vector<Image> reconstructions; ///< shaped like the inputs
};

ForwardResult ae_forward(const MlpAutoencoder& m, std::span<const Image> batch);

/// Batch-mean reconstruction loss and its gradient for every parameter.
struct AeGradient {
    double loss = 0.0;
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
};

double ae_loss(const MlpAutoencoder& m, std::span<const Image> batch, LossKind kind, double sigma);
AeGradient ae_loss_gradient(const MlpAutoencoder& m, std::span<const Image> batch, LossKind kind,
                            double sigma);

struct TrainResult {
    MlpAutoencoder model;
    std::vector<double> loss_history;  ///< mean per-image loss of each epoch
};

TrainResult ae_train(const MlpAutoencoder& m, std::span<const Image> images, const TrainConfig& cfg);

/// Batch-mean cross-entropy of the encoder+head classifier and its gradient.
struct ClassifierGradient {
    double loss = 0.0;
    Eigen::MatrixXd enc_w;
    Eigen::VectorXd enc_b;
    Eigen::MatrixXd head_w;
    Eigen::VectorXd head_b;
};

ClassifierGradient classifier_gradient(const Encoder& enc, const ClassifierHead& head,
                                       std::span<const ClassSample> batch);

/// Softmax class probabilities, one row per image.
Eigen::MatrixXd predict_proba(const Encoder& enc, const ClassifierHead& head,
                              std::span<const Image> images);

struct FinetuneResult {
    Encoder encoder;
    ClassifierHead head;
    std::vector<double> loss_history;
    std::vector<double> train_accuracy;
};

FinetuneResult finetune_classify(const Encoder& enc, const ClassifierHead& head,
                                 std::span<const ClassSample> labeled, const FinetuneConfig& cfg);

/// Fraction of argmax-correct predictions; ties go to the lowest class index.
double eval_accuracy(const Encoder& enc, const ClassifierHead& head,
                     std::span<const ClassSample> test);

/// Checkpoints: 16-byte header ("PSEAE\0\0\0", u32 version, u32 kind), u64 layer
/// shapes, then row-major little-endian doubles.
void save_autoencoder(const MlpAutoencoder& m, const std::filesystem::path& path);
MlpAutoencoder load_autoencoder(const std::filesystem::path& path);
void save_classifier(const Encoder& enc, const ClassifierHead& head,
                     const std::filesystem::path& path);
std::pair<Encoder, ClassifierHead> load_classifier(const std::filesystem::path& path);

}  // namespace pse
