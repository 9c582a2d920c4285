#pragma once

// Binary/ternary weight quantizers, the saturating straight-through
// estimator, and 2-bit code packing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qtsc/error.hpp"

namespace qtsc::quant {

enum class Precision { full, binary, ternary };

inline const char* to_string(Precision p) noexcept {
    switch (p) {
        case Precision::binary: return "binary";
        case Precision::ternary: return "ternary";
        default: return "full";
    }
}

inline Precision precision_from_string(const std::string& s) {
    if (s == "full") return Precision::full;
    if (s == "binary") return Precision::binary;
    if (s == "ternary") return Precision::ternary;
    throw std::invalid_argument("unknown precision '" + s + "' (expected full|binary|ternary)");
}

inline bool is_quantized(Precision p) noexcept { return p != Precision::full; }

/// sign(r) with sign(0) = +1.
inline constexpr std::int8_t quantize_binary(double r) noexcept { return r >= 0.0 ? 1 : -1; }

/// round(r), half away from zero, saturated to {-1, 0, +1}.
inline constexpr std::int8_t quantize_ternary(double r) noexcept {
    if (r >= 0.5) return 1;
    if (r <= -0.5) return -1;
    return 0;
}

inline constexpr std::int8_t quantize_code(double r, Precision p) noexcept {
    return p == Precision::binary ? quantize_binary(r) : quantize_ternary(r);
}

/// Value the forward pass sees for a shadow weight `r`.
inline constexpr double effective_weight(double r, Precision p) noexcept {
    return p == Precision::full ? r : static_cast<double>(quantize_code(r, p));
}

/// Gradient w.r.t. the shadow weight given the gradient w.r.t. its code.
inline constexpr double ste_backward(double g_q, double r) noexcept { return std::abs(r) <= 1.0 ? g_q : 0.0; }

inline void clamp_shadow(std::span<double> w) noexcept {
    for (double& v : w) v = std::clamp(v, -1.0, 1.0);
}

inline std::vector<std::int8_t> quantize_all(std::span<const double> w, Precision p) {
    std::vector<std::int8_t> out(w.size());
    std::transform(w.begin(), w.end(), out.begin(), [p](double r) { return quantize_code(r, p); });
    return out;
}

// 2-bit two's complement codes, four per byte, element k of a byte in bits
// [2k, 2k+1]: 00 = 0, 01 = +1, 11 = -1. Pattern 10 is invalid.

inline std::vector<std::uint8_t> pack_codes(std::span<const std::int8_t> codes) {
    std::vector<std::uint8_t> out((codes.size() + 3) / 4, 0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const std::int8_t c = codes[i];
        if (c < -1 || c > 1) throw std::invalid_argument("pack_codes: code outside {-1,0,1}");
        const auto bits = static_cast<std::uint8_t>(c & 0x3);
        out[i / 4] = static_cast<std::uint8_t>(out[i / 4] | (bits << (2 * (i % 4))));
    }
    return out;
}

inline std::int8_t decode_code(std::uint8_t bits) {
    switch (bits & 0x3) {
        case 0: return 0;
        case 1: return 1;
        case 3: return -1;
        default: throw DataError("invalid 2-bit weight code 0b10");
    }
}

inline std::vector<std::int8_t> unpack_codes(std::span<const std::uint8_t> packed, std::size_t n) {
    if (packed.size() < (n + 3) / 4) throw DataError("unpack_codes: buffer too short");
    std::vector<std::int8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = decode_code(static_cast<std::uint8_t>(packed[i / 4] >> (2 * (i % 4))));
    return out;
}

}  // namespace qtsc::quant
