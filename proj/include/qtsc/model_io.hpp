#pragma once

// Model directory layout:
//
//   manifest.txt      key = value: format, precision, network config, and one
//                     `tensor = NAME DTYPE ROWS COLS FILE` line per tensor
//   NAME.bin          row-major element order (element (r, c) at r * COLS + c)
//                       float64: little-endian IEEE-754 doubles
//                       int2:    2-bit codes, four per byte, see quant::pack_codes
//
// A trained model stores every tensor as float64 (the shadow weights). A
// packed model stores the quantizable tensors as int2 codes; FC and output
// weights stay float64 and biases are omitted (they are zero).

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qtsc/error.hpp"
#include "qtsc/kv.hpp"
#include "qtsc/model.hpp"
#include "qtsc/quant.hpp"

namespace qtsc::model {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

inline constexpr const char* kModelFormat = "qtsc-model-1";

namespace detail {

inline void write_bytes(const std::filesystem::path& path, const void* data, std::size_t n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline std::vector<char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<double> row_major(const TensorView& t) {
    std::vector<double> out(static_cast<std::size_t>(t.rows * t.cols));
    for (Eigen::Index r = 0; r < t.rows; ++r)
        for (Eigen::Index c = 0; c < t.cols; ++c) out[static_cast<std::size_t>(r * t.cols + c)] = t.at(r, c);
    return out;
}

}  // namespace detail

/// Writes `p`. With `packed`, quantizable tensors go out as int2 codes
/// (requires a binary/ternary model).
inline void save_model(const std::filesystem::path& dir, const NetworkParams& p, bool packed = false) {
    if (packed && !quant::is_quantized(p.precision))
        throw std::invalid_argument("save_model: packing needs a binary or ternary model");
    std::filesystem::create_directories(dir);
    KeyValues kv;
    kv.set("format", std::string(kModelFormat));
    kv.set("precision", std::string(quant::to_string(p.precision)));
    kv.set("packed", packed ? 1 : 0);
    write_network_config(kv, p.cfg);
    p.for_each_tensor([&](const TensorView& t) {
        const std::vector<double> values = detail::row_major(t);
        const std::string file = t.name + ".bin";
        std::string dtype = "float64";
        if (packed && t.role == TensorRole::bias) return;
        if (packed && t.role == TensorRole::quantizable) {
            dtype = "int2";
            const auto bytes = quant::pack_codes(quant::quantize_all(values, p.precision));
            detail::write_bytes(dir / file, bytes.data(), bytes.size());
        } else {
            detail::write_bytes(dir / file, values.data(), values.size() * sizeof(double));
        }
        kv.add("tensor", t.name + " " + dtype + " " + std::to_string(t.rows) + " " + std::to_string(t.cols) + " " + file);
    });
    kv.save((dir / "manifest.txt").string(), "qtsc model");
}

/// Loads either layout. int2 tensors come back as their code values, which
/// are fixed points of the quantizer, so forward passes are unchanged.
inline NetworkParams load_model(const std::filesystem::path& dir) {
    const KeyValues kv = KeyValues::load((dir / "manifest.txt").string());
    if (kv.get_or<std::string>("format", "") != kModelFormat) throw DataError("model manifest: unknown format");
    NetworkConfig cfg = network_config_from(kv);
    NetworkParams p = zero_params(cfg, quant::precision_from_string(kv.get<std::string>("precision")));

    struct Entry {
        std::string dtype, file;
        Eigen::Index rows = 0, cols = 0;
    };
    std::map<std::string, Entry> entries;
    for (const std::string& line : kv.all("tensor")) {
        std::istringstream ls(line);
        std::string name;
        Entry e;
        if (!(ls >> name >> e.dtype >> e.rows >> e.cols >> e.file)) throw DataError("model manifest: bad tensor line '" + line + "'");
        entries[name] = e;
    }

    p.for_each_tensor([&](const TensorView& t) {
        auto it = entries.find(t.name);
        if (it == entries.end()) {
            if (t.role == TensorRole::bias) return;  // omitted in packed models
            throw DataError("model: missing tensor '" + t.name + "'");
        }
        const Entry& e = it->second;
        if (e.rows != t.rows || e.cols != t.cols)
            throw DataError("model: tensor '" + t.name + "' has shape " + std::to_string(e.rows) + "x" +
                            std::to_string(e.cols) + ", config implies " + std::to_string(t.rows) + "x" +
                            std::to_string(t.cols));
        const auto n = static_cast<std::size_t>(t.rows * t.cols);
        const std::vector<char> bytes = detail::read_bytes(dir / e.file);
        std::vector<double> values(n);
        if (e.dtype == "float64") {
            if (bytes.size() != n * sizeof(double)) throw DataError("model: '" + e.file + "' has wrong size");
            std::memcpy(values.data(), bytes.data(), bytes.size());
        } else if (e.dtype == "int2") {
            if (!quant::is_quantized(p.precision)) throw DataError("model: int2 tensor in a full-precision model");
            if (bytes.size() != (n + 3) / 4) throw DataError("model: '" + e.file + "' has wrong size");
            const auto codes = quant::unpack_codes(
                std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()), n);
            for (std::size_t k = 0; k < n; ++k) values[k] = codes[k];
        } else {
            throw DataError("model: unknown dtype '" + e.dtype + "'");
        }
        for (Eigen::Index r = 0; r < t.rows; ++r)
            for (Eigen::Index c = 0; c < t.cols; ++c) t.at(r, c) = values[static_cast<std::size_t>(r * t.cols + c)];
    });
    return p;
}

}  // namespace qtsc::model
