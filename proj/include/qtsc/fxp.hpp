#pragma once

// Saturating two's-complement fixed-point arithmetic and the look-up-table
// nonlinearities used by the bit-accurate inference path.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtsc/error.hpp"

namespace qtsc::fxp {

/// Signed Q-format: `total_bits` including sign, `frac_bits` after the point.
struct QFormat {
    int total_bits = 12;
    int frac_bits = 8;

    constexpr bool valid() const noexcept {
        return total_bits >= 2 && total_bits <= 32 && frac_bits >= 0 && frac_bits < total_bits;
    }
    void validate() const {
        if (!valid())
            throw std::invalid_argument("invalid Q-format Q" + std::to_string(total_bits) + "." +
                                        std::to_string(frac_bits));
    }
    constexpr std::int64_t raw_max() const noexcept { return (std::int64_t{1} << (total_bits - 1)) - 1; }
    constexpr std::int64_t raw_min() const noexcept { return -(std::int64_t{1} << (total_bits - 1)); }
    double lsb() const noexcept { return std::ldexp(1.0, -frac_bits); }
    double max_value() const noexcept { return static_cast<double>(raw_max()) * lsb(); }
    double min_value() const noexcept { return static_cast<double>(raw_min()) * lsb(); }

    friend constexpr bool operator==(const QFormat&, const QFormat&) = default;
};

/// Activation/state format of the datapath (12 bits, 8 fractional).
inline constexpr QFormat kQ4_8{12, 8};
/// Storage format of the full-precision FC and output-layer weights (12 bits, 10 fractional).
inline constexpr QFormat kQ2_10{12, 10};

struct Fixed {
    std::int32_t raw = 0;
    QFormat fmt = kQ4_8;

    double value() const noexcept { return static_cast<double>(raw) * fmt.lsb(); }
    friend bool operator==(const Fixed&, const Fixed&) = default;
};

inline std::int32_t saturate(std::int64_t raw, QFormat fmt) noexcept {
    return static_cast<std::int32_t>(std::clamp(raw, fmt.raw_min(), fmt.raw_max()));
}

/// Arithmetic shift right by `shift` with round-half-away-from-zero; a
/// negative shift is an exact left shift.
inline std::int64_t round_shift(std::int64_t v, int shift) noexcept {
    if (shift <= 0) return v * (std::int64_t{1} << (-shift));
    const std::int64_t half = std::int64_t{1} << (shift - 1);
    return v >= 0 ? (v + half) >> shift : -((-v + half) >> shift);
}

inline Fixed from_raw(std::int64_t raw, QFormat fmt) noexcept { return {saturate(raw, fmt), fmt}; }

inline Fixed to_fixed(double x, QFormat fmt = kQ4_8) {
    fmt.validate();
    if (std::isnan(x)) return {0, fmt};
    const double scaled = std::ldexp(x, fmt.frac_bits);
    if (scaled >= static_cast<double>(fmt.raw_max())) return {static_cast<std::int32_t>(fmt.raw_max()), fmt};
    if (scaled <= static_cast<double>(fmt.raw_min())) return {static_cast<std::int32_t>(fmt.raw_min()), fmt};
    return from_raw(static_cast<std::int64_t>(std::round(scaled)), fmt);
}

/// Rounds a wide accumulator holding `acc_frac` fractional bits into `out`.
inline Fixed requantize(std::int64_t acc, int acc_frac, QFormat out) noexcept {
    return from_raw(round_shift(acc, acc_frac - out.frac_bits), out);
}

inline Fixed convert(Fixed a, QFormat out) noexcept { return requantize(a.raw, a.fmt.frac_bits, out); }

inline Fixed add(Fixed a, Fixed b) {
    if (!(a.fmt == b.fmt)) throw std::invalid_argument("fxp::add: mixed formats");
    return from_raw(std::int64_t{a.raw} + b.raw, a.fmt);
}

inline Fixed mul(Fixed a, Fixed b, QFormat out) noexcept {
    return requantize(std::int64_t{a.raw} * b.raw, a.fmt.frac_bits + b.fmt.frac_bits, out);
}

inline Fixed relu(Fixed a) noexcept { return {std::max(a.raw, 0), a.fmt}; }

// ---------------------------------------------------------------------------
// Look-up tables

enum class LutKind { sigmoid, tanh };

inline const char* to_string(LutKind k) noexcept { return k == LutKind::sigmoid ? "sigmoid" : "tanh"; }

inline LutKind lut_kind_from_string(const std::string& s) {
    if (s == "sigmoid") return LutKind::sigmoid;
    if (s == "tanh") return LutKind::tanh;
    throw DataError("unknown LUT kind '" + s + "'");
}

/// 10 stored bits per entry. Sigmoid outputs are non-negative, so the sign
/// bit of its 11-bit container is never set.
inline constexpr QFormat lut_entry_format(LutKind k) noexcept {
    return k == LutKind::sigmoid ? QFormat{11, 10} : QFormat{10, 9};
}

struct LutTable {
    LutKind kind = LutKind::sigmoid;
    double u_min = -8.0;
    double u_max = 8.0;
    QFormat entry_format = lut_entry_format(LutKind::sigmoid);
    std::vector<Fixed> entries;

    std::size_t size() const noexcept { return entries.size(); }
    double cell_width() const noexcept { return (u_max - u_min) / static_cast<double>(entries.size()); }
};

inline double lut_function(LutKind k, double u) { return k == LutKind::sigmoid ? 1.0 / (1.0 + std::exp(-u)) : std::tanh(u); }

namespace detail {
inline bool is_pow2(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
    int e = 0;
    return std::frexp(v, &e) == 0.5;
}
inline int log2_exact(double v) {
    int e = 0;
    std::frexp(v, &e);
    return e - 1;
}
}  // namespace detail

inline void validate_lut_geometry(double u_min, double u_max, std::size_t n) {
    if (n == 0 || !std::has_single_bit(n)) throw std::invalid_argument("LUT size must be a power of two");
    if (!(u_max > u_min) || !detail::is_pow2(u_max - u_min))
        throw std::invalid_argument("LUT input span must be a positive power of two");
}

/// Samples the exact function at each cell midpoint.
inline LutTable make_lut(LutKind kind, double u_min, double u_max, std::size_t n = 64) {
    validate_lut_geometry(u_min, u_max, n);
    LutTable t{kind, u_min, u_max, lut_entry_format(kind), {}};
    t.entries.reserve(n);
    const double du = (u_max - u_min) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mid = u_min + (static_cast<double>(i) + 0.5) * du;
        t.entries.push_back(to_fixed(lut_function(kind, mid), t.entry_format));
    }
    return t;
}

inline LutTable sigmoid_lut(std::size_t n = 64) { return make_lut(LutKind::sigmoid, -8.0, 8.0, n); }
inline LutTable tanh_lut(std::size_t n = 64) { return make_lut(LutKind::tanh, -4.0, 4.0, n); }

/// Address of the cell containing `u`, clamped to the table. The divide by
/// the cell width is an arithmetic shift of the raw offset.
inline int lut_index(Fixed u, const LutTable& table) {
    const auto n = static_cast<std::int64_t>(table.size());
    const double origin = std::ldexp(table.u_min, u.fmt.frac_bits);
    if (origin != std::floor(origin)) throw std::invalid_argument("LUT u_min not representable in input format");
    const std::int64_t offset = std::int64_t{u.raw} - static_cast<std::int64_t>(origin);
    const int shift = u.fmt.frac_bits + detail::log2_exact(table.cell_width());
    const std::int64_t idx = shift >= 0 ? (offset >> shift) : offset * (std::int64_t{1} << (-shift));
    return static_cast<int>(std::clamp<std::int64_t>(idx, 0, n - 1));
}

inline Fixed lut_eval(Fixed u, const LutTable& table) {
    return table.entries[static_cast<std::size_t>(lut_index(u, table))];
}

// ---------------------------------------------------------------------------
// Text form: header `#kind u_min u_max N total_bits frac_bits`, then
// `index<TAB>raw` per entry.

inline void write_lut(std::ostream& os, const LutTable& t) {
    os << '#' << to_string(t.kind) << ' ' << t.u_min << ' ' << t.u_max << ' ' << t.size() << ' '
       << t.entry_format.total_bits << ' ' << t.entry_format.frac_bits << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) os << i << '\t' << t.entries[i].raw << '\n';
}

inline LutTable read_lut(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.empty() || line[0] != '#') throw DataError("LUT file: missing header");
    std::istringstream hs(line.substr(1));
    std::string kind;
    LutTable t;
    std::size_t n = 0;
    if (!(hs >> kind >> t.u_min >> t.u_max >> n >> t.entry_format.total_bits >> t.entry_format.frac_bits))
        throw DataError("LUT file: malformed header");
    t.kind = lut_kind_from_string(kind);
    if (!t.entry_format.valid()) throw DataError("LUT file: invalid entry format");
    try {
        validate_lut_geometry(t.u_min, t.u_max, n);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("LUT file: ") + e.what());
    }
    t.entries.assign(n, Fixed{0, t.entry_format});
    std::vector<bool> seen(n, false);
    std::size_t count = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t idx = 0;
        std::int64_t raw = 0;
        if (!(ls >> idx >> raw) || idx >= n || seen[idx]) throw DataError("LUT file: bad entry line '" + line + "'");
        if (raw < t.entry_format.raw_min() || raw > t.entry_format.raw_max())
            throw DataError("LUT file: entry out of range");
        t.entries[idx].raw = static_cast<std::int32_t>(raw);
        seen[idx] = true;
        ++count;
    }
    if (count != n) throw DataError("LUT file: expected " + std::to_string(n) + " entries");
    return t;
}

}  // namespace qtsc::fxp
