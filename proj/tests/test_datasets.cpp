#include <pse/datasets.h>
#include <pse/metrics.h>

#include "oracles.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace pse {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pse_ds_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& bytes) {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << bytes;
        return p;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }

    fs::path dir_;
};

TEST(EqualMsePair, ZeroMagnitudeGivesIdenticalImages) {
    const auto p = gen_equal_mse_pair(64, 8, 0.0, 1);
    EXPECT_EQ(p.base, p.block);
    EXPECT_EQ(p.base, p.scatter);
}

TEST(EqualMsePair, EqualMseAndSameResidualMultiset) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto p = gen_equal_mse_pair(64, 8, 0.4, seed);
        EXPECT_NEAR(mse(p.block, p.base), mse(p.scatter, p.base), 1e-12);
        auto rb = residual(p.block, p.base).values();
        auto rs = residual(p.scatter, p.base).values();
        std::sort(rb.begin(), rb.end());
        std::sort(rs.begin(), rs.end());
        for (std::size_t i = 0; i < rb.size(); ++i) EXPECT_NEAR(rb[i], rs[i], 1e-15);
        const auto nonzero = std::count_if(rb.begin(), rb.end(), [](double v) { return v > 1e-9; });
        EXPECT_EQ(nonzero, 64);
        for (double v : p.block.data()) EXPECT_LE(v, 1.0);
    }
}

TEST(EqualMsePair, BlockBeatsScatterUnderPse) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto p = gen_equal_mse_pair(64, 8, 0.5, seed);
        for (double sigma : {0.5, 1.0, 2.0}) {
            const double block = oracle::pse_direct(p.block, p.base, sigma);
            const double scatter = oracle::pse_direct(p.scatter, p.base, sigma);
            EXPECT_GT(block, scatter);
            EXPECT_NEAR(pse(p.block, p.base, sigma), block, 1e-14);
        }
    }
}

TEST(EqualMsePair, ImpossibleGeometry) {
    EXPECT_THROW(gen_equal_mse_pair(32, 8, 0.5, 1), Error);  // lattice needs 64 px
    EXPECT_THROW(gen_equal_mse_pair(4, 8, 0.5, 1), Error);
    EXPECT_THROW(gen_equal_mse_pair(64, 8, 1.5, 1), Error);
}

TEST(AnomalyBenchmark, LabelsAndPatchContrast) {
    AnomalyBenchmarkConfig cfg;
    cfg.n_normal = 5;
    cfg.n_anomalous = 0;
    const auto only_normal = make_anomaly_benchmark(cfg);
    EXPECT_TRUE(std::all_of(only_normal.labels.begin(), only_normal.labels.end(), [](int l) { return l == 0; }));

    cfg.n_anomalous = 3;
    const auto data = make_anomaly_benchmark(cfg);
    ASSERT_EQ(data.images.size(), 8u);
    EXPECT_EQ(std::count(data.labels.begin(), data.labels.end(), 1), 3);
    // Each anomaly has at least 64 pixels far from the normal range [0.33, 0.67].
    for (std::size_t i = 5; i < 8; ++i) {
        const auto far = std::count_if(data.images[i].data().begin(), data.images[i].data().end(),
                                       [](double v) { return v < 0.06 || v > 0.94; });
        EXPECT_GE(far, 64);
    }
    // Normal pixels stay in range except for isolated 0/1 impulses.
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& img = data.images[i];
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                const double v = img(x, y);
                if (v == 0.0 || v == 1.0) continue;
                EXPECT_GE(v, 0.33 - 1e-12);
                EXPECT_LE(v, 0.67 + 1e-12);
            }
        }
    }

    cfg.impulse_p = 0.0;
    const auto clean = make_anomaly_benchmark(cfg);
    for (std::size_t i = 0; i < 5; ++i) {
        for (double v : clean.images[i].data()) {
            EXPECT_GE(v, 0.33 - 1e-12);
            EXPECT_LE(v, 0.67 + 1e-12);
        }
    }
    cfg.impulse_p = 0.5;
    const auto noisy = make_anomaly_benchmark(cfg);
    const auto impulses = std::count_if(noisy.images[0].data().begin(), noisy.images[0].data().end(),
                                        [](double v) { return v == 0.0 || v == 1.0; });
    EXPECT_GT(impulses, 64 * 64 / 4);
    cfg.impulse_p = 1.5;
    EXPECT_THROW(make_anomaly_benchmark(cfg), Error);
}

TEST_F(TempDir, AnomalyBenchmarkOnDiskIsDeterministic) {
    AnomalyBenchmarkConfig cfg;
    cfg.n_normal = 4;
    cfg.n_anomalous = 2;
    cfg.size = 16;
    cfg.patch_min = 4;
    cfg.patch_max = 6;
    const auto m1 = gen_anomaly_benchmark(cfg, dir_ / "a");
    const auto m2 = gen_anomaly_benchmark(cfg, dir_ / "b");
    ASSERT_EQ(m1.entries.size(), 6u);
    EXPECT_EQ(slurp(dir_ / "a" / "manifest.csv"), slurp(dir_ / "b" / "manifest.csv"));
    for (std::size_t i = 0; i < m1.entries.size(); ++i) {
        EXPECT_EQ(slurp(m1.entries[i].path), slurp(m2.entries[i].path));
    }
    const Manifest back = load_manifest(dir_ / "a" / "manifest.csv");
    ASSERT_EQ(back.entries.size(), 6u);
    EXPECT_EQ(back.entries[5].label, 1);
    EXPECT_TRUE(fs::equivalent(back.entries[0].path, m1.entries[0].path));
}

TEST(Mnistx, PaddingAndNoise) {
    Rng rng(1);
    const Image digit = oracle::random_image(28, 28, rng);
    const Image padded = mnistx_transform(digit, 0.0, 3);
    ASSERT_EQ(padded.width(), 84);
    ASSERT_EQ(padded.height(), 84);
    for (int y = 0; y < 84; ++y) {
        for (int x = 0; x < 84; ++x) {
            const bool inside = x >= 28 && x < 56 && y >= 28 && y < 56;
            EXPECT_EQ(padded(x, y), inside ? digit(x - 28, y - 28) : 0.0);
        }
    }
    const Image noisy = mnistx_transform(digit, 1.0, 3);
    for (double v : noisy.data()) EXPECT_TRUE(v == 0.0 || v == 1.0);
    EXPECT_EQ(mnistx_transform(digit, 0.05, 9), mnistx_transform(digit, 0.05, 9));
    EXPECT_THROW(mnistx_transform(Image(3, 4), 0.0, 1), Error);
    EXPECT_THROW(mnistx_transform(digit, 1.5, 1), Error);
}

TEST_F(TempDir, IdxImagesAndLabels) {
    const std::string images("\x00\x00\x08\x03\x00\x00\x00\x01\x00\x00\x00\x02\x00\x00\x00\x02"
                             "\x00\xff\x80\x00", 20);
    const auto imgs = read_idx_images(write("img.idx", images));
    ASSERT_EQ(imgs.size(), 1u);
    EXPECT_EQ(imgs[0].width(), 2);
    EXPECT_EQ(imgs[0][0], 0.0);
    EXPECT_EQ(imgs[0][1], 1.0);
    EXPECT_NEAR(imgs[0][2], 0.5019607843137255, 1e-15);
    EXPECT_EQ(imgs[0][3], 0.0);

    const std::string labels("\x00\x00\x08\x01\x00\x00\x00\x02\x03\x07", 10);
    EXPECT_EQ(read_idx_labels(write("lbl.idx", labels)), (std::vector<int>{3, 7}));

    try {
        read_idx_images(write("wrong.idx", labels));
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
    }
    EXPECT_THROW(read_idx_images(write("short.idx", images.substr(0, 18))), Error);
    EXPECT_THROW(read_idx_labels(write("short2.idx", labels.substr(0, 9))), Error);
    const std::string huge("\x00\x00\x08\x03\x00\x00\x00\x01\xff\xff\xff\xff\xff\xff\xff\xff", 16);
    EXPECT_THROW(read_idx_images(write("huge.idx", huge)), Error);
}

TEST_F(TempDir, ManifestParsing) {
    write("a.pgm", std::string("P5\n1 1\n255\n") + '\x10');
    EXPECT_TRUE(load_manifest(write("empty.csv", "path,label\n")).entries.empty());
    const auto one = load_manifest(write("one.csv", "path,label\na.pgm,1\n"));
    ASSERT_EQ(one.entries.size(), 1u);
    EXPECT_EQ(one.entries[0].label, 1);
    EXPECT_EQ(one.entries[0].path, dir_ / "a.pgm");

    try {
        load_manifest(write("missing.csv", "path,label\na.pgm,0\nghost.pgm,1\n"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("ghost.pgm"), std::string::npos);
    }
    EXPECT_THROW(load_manifest(write("nohdr.csv", "a.pgm,1\n")), Error);
    EXPECT_THROW(load_manifest(write("badlabel.csv", "path,label\na.pgm,x\n")), Error);
    EXPECT_THROW(load_manifest(write("neg.csv", "path,label\na.pgm,-1\n")), Error);
    EXPECT_THROW(load_manifest(dir_ / "nothing.csv"), Error);
}

TEST(DigitSet, BalancedDeterministicAndDistinct) {
    DigitSetConfig cfg;
    cfg.count = 100;
    const auto a = make_digit_set(cfg);
    const auto b = make_digit_set(cfg);
    ASSERT_EQ(a.size(), 100u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].label, static_cast<int>(i % 10));
        EXPECT_EQ(a[i].image, b[i].image);
    }
    cfg.noise_p = 0.0;
    cfg.jitter = 0;
    const auto clean = make_digit_set(cfg);
    // Glyph "8" lights every segment, so it covers every other digit's support.
    for (int d = 0; d < 10; ++d) {
        if (d == 8) continue;
        for (std::size_t i = 0; i < clean[8].image.size(); ++i) {
            if (clean[static_cast<std::size_t>(d)].image[i] > 0.0) EXPECT_GT(clean[8].image[i], 0.0);
        }
    }
}

}  // namespace
}  // namespace pse
