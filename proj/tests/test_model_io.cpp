#include <gtest/gtest.h>

#include <fstream>

#include "qtsc/model_io.hpp"
#include "tmpdir.hpp"

using namespace qtsc::model;
using qtsc::quant::Precision;
using qtsc::testing::TempDir;

namespace {

NetworkConfig small_config() {
    NetworkConfig c;
    c.window = 5;
    c.steps = 2;
    c.channels = 2;
    c.hidden = 7;
    c.classes = 3;
    c.cnn_layers = {{3, 3}, {2, 2}};
    return c;
}

void expect_same(const NetworkParams& a, const NetworkParams& b) {
    EXPECT_EQ(a.cfg, b.cfg);
    EXPECT_EQ(a.precision, b.precision);
    std::vector<std::vector<double>> av;
    a.for_each_tensor([&](const TensorView& t) { av.emplace_back(t.flat().begin(), t.flat().end()); });
    std::size_t i = 0;
    b.for_each_tensor([&](const TensorView& t) {
        EXPECT_EQ(std::vector<double>(t.flat().begin(), t.flat().end()), av[i++]) << t.name;
    });
}

}  // namespace

TEST(ModelIo, Float64RoundTripIsExact) {
    TempDir dir;
    NetworkParams p = init_params(small_config(), Precision::full, 3, 0.7);
    p.lstm.bi.setConstant(0.125);
    save_model(dir.path(), p);
    expect_same(p, load_model(dir.path()));
}

TEST(ModelIo, PackedModelStoresCodes) {
    TempDir dir;
    const NetworkParams p = init_params(small_config(), Precision::ternary, 4, 1.0);
    save_model(dir.path(), p, true);
    const NetworkParams back = load_model(dir.path());
    expect_same(effective_params(p), back);
    EXPECT_FALSE(std::filesystem::exists(dir / "lstm.bf.bin"));
    // 4 codes per byte
    EXPECT_EQ(std::filesystem::file_size(dir / "lstm.wf.bin"), static_cast<std::uintmax_t>((7 + 10) * 7 + 3) / 4);
    EXPECT_EQ(std::filesystem::file_size(dir / "fc.weight.bin"), 10u * 10 * sizeof(double));
}

TEST(ModelIo, RowMajorFileLayout) {
    TempDir dir;
    NetworkConfig c;
    c.use_cnn = false;
    c.window = 1;
    c.hidden = 1;
    c.classes = 2;
    NetworkParams p = zero_params(c);
    p.lstm.wy(0, 0) = 1.5;
    p.lstm.wy(0, 1) = -2.5;
    save_model(dir.path(), p);
    std::ifstream in(dir / "out.wy.bin", std::ios::binary);
    double v[2];
    in.read(reinterpret_cast<char*>(v), sizeof v);
    EXPECT_EQ(v[0], 1.5);
    EXPECT_EQ(v[1], -2.5);
}

TEST(ModelIo, RejectsShapeMismatchAndCorruption) {
    TempDir dir;
    const NetworkParams p = init_params(small_config(), Precision::ternary, 4, 1.0);
    save_model(dir.path(), p, true);
    {
        std::ofstream trunc(dir / "lstm.wo.bin", std::ios::binary | std::ios::trunc);
        trunc << 'x';
    }
    EXPECT_THROW(load_model(dir.path()), qtsc::DataError);

    TempDir dir2;
    save_model(dir2.path(), p);
    qtsc::KeyValues kv = qtsc::KeyValues::load((dir2 / "manifest.txt").string());
    kv.set("hidden", 8);
    kv.save((dir2 / "manifest.txt").string());
    EXPECT_THROW(load_model(dir2.path()), qtsc::DataError);
    EXPECT_THROW(load_model(dir2 / "missing"), qtsc::DataError);
    EXPECT_THROW(save_model(dir2 / "x", init_params(small_config(), Precision::full, 1), true), std::invalid_argument);
}
