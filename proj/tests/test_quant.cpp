#include <gtest/gtest.h>

#include <vector>

#include "property.hpp"
#include "qtsc/quant.hpp"

using namespace qtsc::quant;
using qtsc::testing::for_all;
using qtsc::testing::Gen;

TEST(Binary, Examples) {
    EXPECT_EQ(quantize_binary(0.3), 1);
    EXPECT_EQ(quantize_binary(-0.2), -1);
    EXPECT_EQ(quantize_binary(0.0), 1);
    EXPECT_EQ(quantize_binary(-0.0), 1);
    EXPECT_EQ(quantize_code(0.0, Precision::binary), 1);
}

TEST(Ternary, Examples) {
    EXPECT_EQ(quantize_ternary(0.4), 0);
    EXPECT_EQ(quantize_ternary(0.6), 1);
    EXPECT_EQ(quantize_ternary(-0.6), -1);
    EXPECT_EQ(quantize_ternary(0.5), 1);
    EXPECT_EQ(quantize_ternary(-0.5), -1);
    EXPECT_EQ(quantize_ternary(-0.49), 0);
}

TEST(Ste, Examples) {
    EXPECT_EQ(ste_backward(2.0, 0.5), 2.0);
    EXPECT_EQ(ste_backward(2.0, 1.5), 0.0);
    EXPECT_EQ(ste_backward(-3.1, -1.0), -3.1);
    EXPECT_EQ(ste_backward(-3.1, 1.0), -3.1);
}

TEST(Precision, Names) {
    for (Precision p : {Precision::full, Precision::binary, Precision::ternary})
        EXPECT_EQ(precision_from_string(to_string(p)), p);
    EXPECT_THROW(precision_from_string("int8"), std::invalid_argument);
    EXPECT_FALSE(is_quantized(Precision::full));
    EXPECT_TRUE(is_quantized(Precision::ternary));
}

TEST(QuantProperty, Idempotence) {
    for_all(300, 11, [](Gen& g) {
        const double r = g.uniform(-3.0, 3.0);
        for (Precision p : {Precision::binary, Precision::ternary}) {
            const std::int8_t c = quantize_code(r, p);
            ASSERT_EQ(quantize_code(static_cast<double>(c), p), c);
        }
    });
}

TEST(QuantProperty, SteZeroSet) {
    for_all(300, 12, [](Gen& g) {
        const double mag = g.uniform(1.0 + 1e-12, 100.0);
        const double r = g.coin() ? mag : -mag;
        ASSERT_EQ(ste_backward(g.uniform(-1e6, 1e6), r), 0.0);
        const double inside = g.uniform(-1.0, 1.0);
        const double gq = g.uniform(-10, 10);
        ASSERT_EQ(ste_backward(gq, inside), gq);
    });
}

TEST(QuantProperty, ShadowClamp) {
    for_all(100, 13, [](Gen& g) {
        std::vector<double> w = g.vec(50, -1.0, 1.0);
        for (int step = 0; step < 20; ++step) {
            for (double& v : w) v += g.uniform(-0.8, 0.8);
            clamp_shadow(w);
            for (double v : w) ASSERT_LE(std::abs(v), 1.0);
        }
    });
}

TEST(Packing, KnownLayout) {
    const std::vector<std::int8_t> codes{1, -1, 0, 1, -1};
    const auto bytes = pack_codes(codes);
    ASSERT_EQ(bytes.size(), 2u);
    EXPECT_EQ(bytes[0], 0b01'00'11'01);
    EXPECT_EQ(bytes[1], 0b11);
    EXPECT_THROW(pack_codes(std::vector<std::int8_t>{2}), std::invalid_argument);
    EXPECT_THROW(decode_code(0b10), qtsc::DataError);
    EXPECT_THROW(unpack_codes(bytes, 9), qtsc::DataError);
}

TEST(PackingProperty, RoundTrip) {
    for_all(200, 14, [](Gen& g) {
        std::vector<std::int8_t> codes(static_cast<std::size_t>(g.integer(0, 40)));
        for (auto& c : codes) c = static_cast<std::int8_t>(g.integer(-1, 1));
        ASSERT_EQ(unpack_codes(pack_codes(codes), codes.size()), codes);
    });
}

TEST(QuantizeAll, MatchesScalar) {
    const std::vector<double> w{-0.7, -0.2, 0.0, 0.5, 0.9};
    EXPECT_EQ(quantize_all(w, Precision::ternary), (std::vector<std::int8_t>{-1, 0, 0, 1, 1}));
    EXPECT_EQ(quantize_all(w, Precision::binary), (std::vector<std::int8_t>{-1, -1, 1, 1, 1}));
}
