// Command-line driver: metrics, anomaly detection pipeline, autoencoder
// pre-training/fine-tuning, and synthetic data generation.

#include "config.h"

#include <pse/anomaly.h>
#include <pse/autoenc.h>
#include <pse/datasets.h>
#include <pse/metrics.h>
#include <pse/pca.h>
#include <pse/rng.h>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace pse::cli {
namespace {

// Sub-seed streams split off the single `seed` key.
enum Stream : std::uint64_t {
    kInitStream = 1,
    kShuffleStream = 2,
    kHeadStream = 3,
    kFinetuneStream = 4,
    kNoiseStream = 5,
    kTrainSetStream = 6,
    kTestSetStream = 7,
};

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

Image maybe_resize(Image img, int size) {
    return size > 0 ? resize_bilinear(img, size, size) : img;
}

ScoreMode parse_score_mode(const std::string& s) {
    if (s == "max") return ScoreMode::MaxHeatmap;
    if (s == "scalar-mse") return ScoreMode::ScalarMse;
    throw Error("score-mode must be 'max' or 'scalar-mse', got '" + s + "'");
}

LossKind parse_loss(const std::string& s) {
    if (s == "pse") return LossKind::Pse;
    if (s == "mse") return LossKind::Mse;
    throw Error("loss must be 'pse' or 'mse', got '" + s + "'");
}

std::vector<LabeledImage> load_labeled(const fs::path& manifest_path, int size) {
    const Manifest m = load_manifest(manifest_path);
    std::vector<LabeledImage> out;
    for (const auto& e : m.entries) {
        if (e.label != 0 && e.label != 1) {
            throw Error("anomaly manifest " + manifest_path.string() + ": label must be 0 or 1");
        }
        out.push_back({e.path.stem().string(), maybe_resize(load_image(e.path), size), e.label});
    }
    return out;
}

// --- classification data ----------------------------------------------------

const std::vector<KeySpec> kDataKeys = {
    {"data", "", "manifest CSV (path,label) of images"},
    {"idx-images", "", "IDX image file (alternative to --data)"},
    {"idx-labels", "", "IDX label file paired with --idx-images"},
    {"size", "0", "resize images to size×size before use (0 keeps them)"},
    {"mnistx", "false", "apply the MNISTX transform (3× zero padding + salt-and-pepper)"},
    {"noise-p", "0.05", "salt-and-pepper probability for --mnistx"},
};

std::vector<ClassSample> load_class_samples(const RunConfig& cfg, bool need_labels) {
    std::vector<ClassSample> out;
    if (cfg.has("data")) {
        const Manifest m = load_manifest(cfg.path("data"));
        for (const auto& e : m.entries) out.push_back({load_image(e.path), e.label});
    } else if (cfg.has("idx-images")) {
        const auto images = read_idx_images(cfg.path("idx-images"));
        std::vector<int> labels(images.size(), 0);
        if (cfg.has("idx-labels")) {
            labels = read_idx_labels(cfg.path("idx-labels"));
            if (labels.size() != images.size()) throw Error("IDX image and label counts differ");
        } else if (need_labels) {
            throw Error("--idx-labels is required");
        }
        for (std::size_t i = 0; i < images.size(); ++i) out.push_back({images[i], labels[i]});
    } else {
        throw Error("no input data: set --data or --idx-images");
    }
    const int size = cfg.integer("size");
    const bool mnistx = cfg.flag("mnistx");
    const double noise_p = cfg.real("noise-p");
    const std::uint64_t noise_seed = derive_seed(cfg.u64("seed"), kNoiseStream);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].image = maybe_resize(std::move(out[i].image), size);
        if (mnistx) out[i].image = mnistx_transform(out[i].image, noise_p, derive_seed(noise_seed, i));
    }
    if (out.empty()) throw Error("input data is empty");
    return out;
}

std::vector<Image> images_of(const std::vector<ClassSample>& samples) {
    std::vector<Image> out;
    for (const auto& s : samples) out.push_back(s.image);
    return out;
}

std::vector<KeySpec> with(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// --- commands ---------------------------------------------------------------

using Action = std::function<int(const RunConfig&)>;

struct Command {
    std::unique_ptr<RunConfig> cfg;
    Action action;
};

int cmd_metric(const RunConfig& cfg) {
    const Image a = load_image(cfg.path("image-a"));
    const Image b = load_image(cfg.path("image-b"));
    const double sigma = cfg.real("sigma");
    std::cout << "MSE " << fmt12(mse(a, b)) << "\n";
    std::cout << "PSE " << fmt12(pse(a, b, sigma)) << "\n";
    return 0;
}

void export_heatmap(const Heatmap& h, double scale, const fs::path& path) {
    Image img(h.width(), h.height());
    for (std::size_t i = 0; i < h.size(); ++i) img[i] = scale > 0.0 ? h[i] / scale : 0.0;
    ensure_parent(path);
    save_png(img, path);
}

int cmd_heatmap(const RunConfig& cfg) {
    const Image a = load_image(cfg.path("image-a"));
    const Image b = load_image(cfg.path("image-b"));
    const Heatmap h = pse_heatmap(a, b, cfg.real("sigma"));
    const double scale = max_score(h);
    export_heatmap(h, scale, cfg.path("out"));
    std::cout << "max " << fmt12(scale) << "\n";
    std::cout << "scale " << fmt12(scale) << "\n";
    return 0;
}

int cmd_anomaly_train(const RunConfig& cfg) {
    const auto labeled = load_labeled(cfg.path("train"), cfg.integer("size"));
    std::vector<Image> normals;
    for (const auto& s : labeled) {
        if (s.label == 0) normals.push_back(s.image);
    }
    const PcaModel model = pca_fit(normals, cfg.integer("max-components"));
    ensure_parent(cfg.path("model"));
    save_pca(model, cfg.path("model"));
    std::cout << "model " << cfg.str("model") << "\n" << "rank " << model.rank() << "\n";
    return 0;
}

int cmd_anomaly_score(const RunConfig& cfg) {
    const PcaModel model = load_pca(cfg.path("model"));
    const Image img = maybe_resize(load_image(cfg.path("image")), cfg.integer("size"));
    const int c = cfg.has("components") ? cfg.integer("components") : model.rank();
    const HyperParams hp{cfg.real("sigma"), c};
    const AnomalyScore s = anomaly_score(model, img, hp, parse_score_mode(cfg.str("score-mode")));
    const double scale = max_score(s.heatmap);
    if (cfg.has("heatmap")) export_heatmap(s.heatmap, scale, cfg.path("heatmap"));
    std::cout << "score " << fmt12(s.score) << "\n" << "heatmap_scale " << fmt12(scale) << "\n";
    return 0;
}

ordered_json grid_json(const GridSearchResult& r) {
    ordered_json cells = ordered_json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"sigma", c.hp.sigma}, {"n_components", c.hp.n_components}, {"ap", c.ap}});
    }
    return {{"best_ap", r.best_ap},
            {"sigma", r.best.sigma},
            {"n_components", r.best.n_components},
            {"cells", cells}};
}

GridSearchResult run_grid(const RunConfig& cfg, const PcaModel& model,
                          const std::vector<LabeledImage>& few_shot) {
    const std::vector<double> sigmas = cfg.reals("sigma-grid");
    const std::vector<int> comps =
        cfg.has("comp-grid") ? cfg.integers("comp-grid") : default_component_grid(model.rank());
    return grid_search(model, few_shot, sigmas, comps, parse_score_mode(cfg.str("score-mode")));
}

int cmd_anomaly_grid(const RunConfig& cfg) {
    const PcaModel model = load_pca(cfg.path("model"));
    const auto few_shot = load_labeled(cfg.path("few-shot"), cfg.integer("size"));
    const GridSearchResult r = run_grid(cfg, model, few_shot);
    write_text(cfg.path("out"), grid_json(r).dump(2) + "\n");
    std::cout << "best_ap " << fmt12(r.best_ap) << "\n"
              << "sigma " << fmt12(r.best.sigma) << "\n"
              << "n_components " << r.best.n_components << "\n";
    return 0;
}

int cmd_anomaly_eval(const RunConfig& cfg) {
    const PcaModel model = load_pca(cfg.path("model"));
    const int size = cfg.integer("size");
    const ScoreMode mode = parse_score_mode(cfg.str("score-mode"));
    ordered_json summary;
    HyperParams hp;
    if (cfg.has("few-shot")) {
        const GridSearchResult r = run_grid(cfg, model, load_labeled(cfg.path("few-shot"), size));
        hp = r.best;
        summary["grid"] = grid_json(r);
    } else if (cfg.has("hparams")) {
        std::ifstream in(cfg.path("hparams"));
        if (!in) throw Error("file missing: " + cfg.str("hparams"));
        const auto j = nlohmann::json::parse(in);
        hp = {j.at("sigma").get<double>(), j.at("n_components").get<int>()};
    } else {
        hp = {cfg.real("sigma"), cfg.has("components") ? cfg.integer("components") : model.rank()};
    }
    const auto test = load_labeled(cfg.path("test"), size);
    const fs::path out_dir = cfg.path("out-dir");
    fs::create_directories(out_dir);

    const Evaluation ev = evaluate(model, hp, test, mode);
    std::string csv = "id,score,label\n";
    ordered_json scales = ordered_json::object();
    const bool heatmaps = cfg.flag("heatmaps");
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& s = ev.samples[i];
        csv += s.id + "," + fmt17(s.score) + "," + std::to_string(s.label) + "\n";
        scales[s.id] = s.heatmap_scale;
        if (heatmaps) {
            const AnomalyScore a = anomaly_score(model, test[i].image, hp, mode);
            export_heatmap(a.heatmap, s.heatmap_scale, out_dir / "heatmaps" / (s.id + ".png"));
        }
    }
    write_text(out_dir / "scores.csv", csv);
    summary["ap"] = ev.ap;
    summary["sigma"] = hp.sigma;
    summary["n_components"] = hp.n_components;
    summary["score_mode"] = cfg.str("score-mode");
    summary["heatmap_scale"] = scales;
    ordered_json ordered;
    for (const char* key : {"ap", "sigma", "n_components", "score_mode", "heatmap_scale", "grid"}) {
        if (summary.contains(key)) ordered[key] = summary[key];
    }
    write_text(out_dir / "summary.json", ordered.dump(2) + "\n");
    std::cout << "ap " << fmt12(ev.ap) << "\n"
              << "sigma " << fmt12(hp.sigma) << "\n"
              << "n_components " << hp.n_components << "\n";
    return 0;
}

std::string loss_csv(const std::vector<double>& loss, const std::vector<double>* acc) {
    std::string csv = acc ? "epoch,loss,train_acc\n" : "epoch,loss\n";
    for (std::size_t e = 0; e < loss.size(); ++e) {
        csv += std::to_string(e + 1) + "," + fmt17(loss[e]);
        if (acc) csv += "," + fmt17((*acc)[e]);
        csv += "\n";
    }
    return csv;
}

TrainConfig train_config(const RunConfig& cfg) {
    TrainConfig tc;
    tc.loss = parse_loss(cfg.str("loss"));
    tc.sigma = cfg.real("sigma");
    tc.epochs = cfg.integer("epochs");
    tc.batch_size = cfg.integer("batch-size");
    tc.learning_rate = cfg.real("learning-rate");
    tc.seed = derive_seed(cfg.u64("seed"), kShuffleStream);
    return tc;
}

int cmd_pretrain(const RunConfig& cfg) {
    const auto samples = load_class_samples(cfg, false);
    const auto images = images_of(samples);
    const MlpAutoencoder init = ae_init(static_cast<int>(images.front().size()), cfg.integer("bottleneck"),
                                        derive_seed(cfg.u64("seed"), kInitStream));
    const TrainResult r = ae_train(init, images, train_config(cfg));
    ensure_parent(cfg.path("checkpoint"));
    save_autoencoder(r.model, cfg.path("checkpoint"));
    write_text(cfg.path("log"), loss_csv(r.loss_history, nullptr));
    std::cout << "checkpoint " << cfg.str("checkpoint") << "\n";
    if (!r.loss_history.empty()) std::cout << "final_loss " << fmt12(r.loss_history.back()) << "\n";
    return 0;
}

FinetuneConfig finetune_config(const RunConfig& cfg) {
    FinetuneConfig fc;
    fc.epochs = cfg.integer("epochs");
    fc.batch_size = cfg.integer("batch-size");
    fc.learning_rate = cfg.real("learning-rate");
    fc.seed = derive_seed(cfg.u64("seed"), kFinetuneStream);
    fc.freeze_encoder = cfg.flag("freeze-encoder");
    return fc;
}

int cmd_finetune(const RunConfig& cfg) {
    const MlpAutoencoder ae = load_autoencoder(cfg.path("checkpoint"));
    const auto samples = load_class_samples(cfg, true);
    if (static_cast<int>(samples.front().image.size()) != ae.input_dim()) {
        throw Error("checkpoint expects " + std::to_string(ae.input_dim()) + " pixels, data has " +
                    std::to_string(samples.front().image.size()));
    }
    const ClassifierHead head =
        head_init(ae.hidden_dim(), cfg.integer("classes"), derive_seed(cfg.u64("seed"), kHeadStream));
    const FinetuneResult r = finetune_classify(ae.encoder, head, samples, finetune_config(cfg));
    ensure_parent(cfg.path("out"));
    save_classifier(r.encoder, r.head, cfg.path("out"));
    write_text(cfg.path("log"), loss_csv(r.loss_history, &r.train_accuracy));
    std::cout << "classifier " << cfg.str("out") << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    const auto [enc, head] = load_classifier(cfg.path("classifier"));
    const auto samples = load_class_samples(cfg, true);
    if (static_cast<int>(samples.front().image.size()) != enc.input_dim()) {
        throw Error("classifier expects " + std::to_string(enc.input_dim()) + " pixels, data has " +
                    std::to_string(samples.front().image.size()));
    }
    std::cout << "accuracy " << fmt12(eval_accuracy(enc, head, samples)) << "\n";
    return 0;
}

const char* kGenerators = "equal-mse-pair, anomaly-benchmark, digits";

int cmd_gen(const RunConfig& cfg) {
    const std::string name = cfg.str("generator");
    const fs::path out_dir = cfg.path("out-dir");
    const std::uint64_t seed = cfg.u64("seed");
    if (name == "equal-mse-pair") {
        const EqualMsePair p = gen_equal_mse_pair(cfg.integer("size"), cfg.integer("patch"),
                                                  cfg.real("magnitude"), seed, cfg.real("sigma-max"));
        fs::create_directories(out_dir);
        save_pgm(p.base, out_dir / "base.pgm");
        save_pgm(p.block, out_dir / "block.pgm");
        save_pgm(p.scatter, out_dir / "scatter.pgm");
        std::cout << out_dir.string() << "\n";
        return 0;
    }
    if (name == "anomaly-benchmark") {
        AnomalyBenchmarkConfig bc;
        bc.n_normal = cfg.integer("n-normal");
        bc.n_anomalous = cfg.integer("n-anomalous");
        bc.size = cfg.integer("size");
        bc.seed = seed;
        bc.noise_amplitude = cfg.real("noise-amplitude");
        bc.patch_min = cfg.integer("patch-min");
        bc.patch_max = cfg.integer("patch-max");
        bc.min_shift = cfg.real("min-shift");
        bc.impulse_p = cfg.real("impulse-p");
        gen_anomaly_benchmark(bc, out_dir);
        std::cout << (out_dir / "manifest.csv").string() << "\n";
        return 0;
    }
    if (name == "digits") {
        DigitSetConfig dc;
        dc.count = cfg.integer("count");
        dc.size = cfg.has("size") && cfg.str("size") != "64" ? cfg.integer("size") : 28;
        dc.num_classes = cfg.integer("classes");
        dc.jitter = cfg.integer("jitter");
        dc.noise_p = cfg.real("noise-p");
        dc.seed = seed;
        fs::create_directories(out_dir);
        Manifest m;
        m.root = out_dir;
        const auto samples = make_digit_set(dc);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            char name_buf[32];
            std::snprintf(name_buf, sizeof name_buf, "digit_%05zu.pgm", i);
            save_pgm(samples[i].image, out_dir / name_buf);
            m.entries.push_back({out_dir / name_buf, samples[i].label});
        }
        write_manifest(m, out_dir / "manifest.csv");
        std::cout << (out_dir / "manifest.csv").string() << "\n";
        return 0;
    }
    throw Error("unknown generator '" + name + "'; valid generators: " + kGenerators);
}

int cmd_sweep(const RunConfig& cfg) {
    const std::uint64_t seed = cfg.u64("seed");
    std::vector<ClassSample> train, test;
    if (cfg.has("data")) {
        if (!cfg.has("test-data")) throw Error("--test-data is required with --data");
        train = load_class_samples(cfg, true);
        for (const auto& e : load_manifest(cfg.path("test-data")).entries) {
            test.push_back({maybe_resize(load_image(e.path), cfg.integer("size")), e.label});
        }
    } else {
        DigitSetConfig dc;
        dc.count = cfg.integer("train-count");
        dc.noise_p = cfg.real("noise-p");
        dc.seed = derive_seed(seed, kTrainSetStream);
        train = make_digit_set(dc);
        dc.count = cfg.integer("test-count");
        dc.seed = derive_seed(seed, kTestSetStream);
        test = make_digit_set(dc);
    }
    const auto images = images_of(train);
    const int classes = cfg.integer("classes");
    std::string csv = "bottleneck,loss,seed,accuracy\n";
    for (int h : cfg.integers("bottlenecks")) {
        for (const std::string loss : {"mse", "pse"}) {
            double total = 0.0;
            const int runs = cfg.integer("runs");
            for (int run = 0; run < runs; ++run) {
                const std::uint64_t run_seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(run));
                TrainConfig tc;
                tc.loss = parse_loss(loss);
                tc.sigma = cfg.real("sigma");
                tc.epochs = cfg.integer("epochs");
                tc.batch_size = cfg.integer("batch-size");
                tc.learning_rate = cfg.real("learning-rate");
                tc.seed = derive_seed(run_seed, kShuffleStream);
                const auto ae = ae_train(ae_init(static_cast<int>(images.front().size()), h,
                                                 derive_seed(run_seed, kInitStream)),
                                         images, tc);
                FinetuneConfig fc;
                fc.epochs = cfg.integer("finetune-epochs");
                fc.batch_size = cfg.integer("batch-size");
                fc.learning_rate = cfg.real("finetune-learning-rate");
                fc.seed = derive_seed(run_seed, kFinetuneStream);
                fc.freeze_encoder = cfg.flag("freeze-encoder");
                const auto ft = finetune_classify(ae.model.encoder,
                                                  head_init(h, classes, derive_seed(run_seed, kHeadStream)),
                                                  train, fc);
                const double acc = eval_accuracy(ft.encoder, ft.head, test);
                total += acc;
                csv += std::to_string(h) + "," + loss + "," + std::to_string(run) + "," + fmt17(acc) + "\n";
            }
            std::cout << "bottleneck " << h << " " << loss << " mean_accuracy " << fmt12(total / runs) << "\n";
        }
    }
    write_text(cfg.path("out"), csv);
    return 0;
}

const KeySpec kSeed{"seed", "0", "master seed; all randomness derives from it"};

std::vector<KeySpec> train_keys() {
    return {{"bottleneck", "16", "autoencoder hidden size"},
            {"loss", "pse", "reconstruction loss: pse or mse"},
            {"sigma", "0.5", "PSE kernel σ"},
            {"epochs", "50", "training epochs"},
            {"batch-size", "32", "minibatch size"},
            {"learning-rate", "0.1", "gradient descent step"},
            kSeed};
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Proximally sensitive error toolkit"};
    app.require_subcommand(1);
    std::vector<std::pair<CLI::App*, Command>> commands;
    const auto add = [&](CLI::App* parent, const std::string& name, const std::string& desc,
                         std::vector<KeySpec> keys, Action action) {
        CLI::App* sub = parent->add_subcommand(name, desc);
        auto cfg = std::make_unique<RunConfig>(*sub, std::move(keys));
        commands.push_back({sub, Command{std::move(cfg), std::move(action)}});
    };

    add(&app, "metric", "print MSE and PSE between two images",
        {{"image-a", "", "first image (PNG or PGM)"},
         {"image-b", "", "second image"},
         {"sigma", "1", "PSE kernel σ"}},
        cmd_metric);
    add(&app, "heatmap", "write the PSE heatmap of two images as PNG",
        {{"image-a", "", "first image"},
         {"image-b", "", "second image"},
         {"sigma", "1", "PSE kernel σ"},
         {"out", "heatmap.png", "output PNG (values scaled by 1/max)"}},
        cmd_heatmap);

    CLI::App* anomaly = app.add_subcommand("anomaly", "PCA reconstruction anomaly detection");
    anomaly->require_subcommand(1);
    const KeySpec size_key{"size", "0", "resize images to size×size (0 keeps them)"};
    const KeySpec mode_key{"score-mode", "max", "max (heatmap maximum) or scalar-mse"};
    const KeySpec sigma_grid{"sigma-grid", "0,0.5,1,2,4,8", "comma-separated σ grid"};
    const KeySpec comp_grid{"comp-grid", "", "comma-separated component grid (default 0,1,2,4,...,min(rank,64))"};
    add(anomaly, "train", "fit PCA on the normal images of a manifest",
        {{"train", "", "manifest of training images (label 0 rows are used)"},
         {"max-components", "64", "largest component count kept"},
         {"model", "pca.bin", "output model file"},
         size_key},
        cmd_anomaly_train);
    add(anomaly, "score", "score one image",
        {{"model", "pca.bin", "PCA model file"},
         {"image", "", "image to score"},
         {"sigma", "1", "PSE kernel σ"},
         {"components", "", "components used (default: full rank)"},
         {"heatmap", "", "optional heatmap PNG output"},
         mode_key, size_key},
        cmd_anomaly_score);
    add(anomaly, "grid-search", "tune σ and component count on a few-shot manifest",
        {{"model", "pca.bin", "PCA model file"},
         {"few-shot", "", "labeled few-shot manifest"},
         {"out", "grid.json", "JSON result"},
         sigma_grid, comp_grid, mode_key, size_key},
        cmd_anomaly_grid);
    add(anomaly, "eval", "score a labeled test manifest and report average precision",
        {{"model", "pca.bin", "PCA model file"},
         {"test", "", "labeled test manifest"},
         {"few-shot", "", "tune hyperparameters on this manifest first"},
         {"hparams", "", "JSON with sigma and n_components (e.g. grid-search output)"},
         {"sigma", "1", "PSE kernel σ when no tuning source is given"},
         {"components", "", "components when no tuning source is given (default: full rank)"},
         {"out-dir", "anomaly_eval", "directory for scores.csv, summary.json, heatmaps/"},
         {"heatmaps", "true", "export per-sample heatmap PNGs"},
         sigma_grid, comp_grid, mode_key, size_key},
        cmd_anomaly_eval);

    add(&app, "pretrain", "train the autoencoder on unlabeled images",
        with(with(kDataKeys, train_keys()),
             {{"checkpoint", "autoencoder.bin", "output checkpoint"},
              {"log", "pretrain.csv", "per-epoch loss CSV"}}),
        cmd_pretrain);
    add(&app, "finetune", "train encoder + softmax head on labeled images",
        with(kDataKeys,
             {{"checkpoint", "autoencoder.bin", "pre-trained autoencoder"},
              {"classes", "10", "number of classes"},
              {"epochs", "50", "training epochs"},
              {"batch-size", "32", "minibatch size"},
              {"learning-rate", "0.1", "gradient descent step"},
              {"freeze-encoder", "false", "train only the head"},
              {"out", "classifier.bin", "output classifier checkpoint"},
              {"log", "finetune.csv", "per-epoch loss/accuracy CSV"},
              kSeed}),
        cmd_finetune);
    add(&app, "eval", "print classification accuracy",
        with(kDataKeys, {{"classifier", "classifier.bin", "classifier checkpoint"}, kSeed}), cmd_eval);
    add(&app, "sweep", "pretrain + finetune + eval over bottleneck sizes for both losses",
        with(with(kDataKeys, train_keys()),
             {{"test-data", "", "test manifest (required with --data)"},
              {"train-count", "400", "synthetic digits for training when --data is unset"},
              {"test-count", "100", "synthetic digits for testing when --data is unset"},
              {"classes", "10", "number of classes"},
              {"bottlenecks", "16,32,64,128", "comma-separated bottleneck sizes"},
              {"runs", "5", "seeds per configuration"},
              {"finetune-epochs", "30", "fine-tuning epochs"},
              {"finetune-learning-rate", "0.1", "fine-tuning step"},
              {"freeze-encoder", "false", "train only the head"},
              {"out", "sweep.csv", "accuracy CSV"}}),
        cmd_sweep);
    add(&app, "gen", "generate synthetic data",
        {{"generator", "", std::string("one of: ") + kGenerators},
         {"out-dir", "generated", "output directory"},
         kSeed,
         {"size", "64", "image side"},
         {"patch", "8", "equal-mse-pair: block side"},
         {"magnitude", "0.5", "equal-mse-pair: residual value"},
         {"sigma-max", "2", "equal-mse-pair: largest σ the scatter spacing must isolate"},
         {"n-normal", "100", "anomaly-benchmark: normal images"},
         {"n-anomalous", "20", "anomaly-benchmark: anomalous images"},
         {"noise-amplitude", "0.02", "anomaly-benchmark: uniform noise amplitude"},
         {"patch-min", "8", "anomaly-benchmark: smallest patch side"},
         {"patch-max", "16", "anomaly-benchmark: largest patch side"},
         {"min-shift", "0.3", "anomaly-benchmark: minimum patch contrast"},
         {"impulse-p", "0.002", "anomaly-benchmark: isolated 0/1 pixel probability"},
         {"count", "500", "digits: number of images"},
         {"classes", "10", "digits: number of classes"},
         {"jitter", "3", "digits: max glyph offset"},
         {"noise-p", "0.05", "digits: salt-and-pepper probability"}},
        cmd_gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        for (auto& [sub, command] : commands) {
            if (sub->parsed()) {
                command.cfg->resolve();
                return command.action(*command.cfg);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace pse::cli

int main(int argc, char** argv) { return pse::cli::run(argc, argv); }
