#pragma once

// UCR-style text files, dataset directories, Hilbert envelope,
// z-normalization and stratified splitting.
//
// Dataset directory layout:
//   manifest.txt     name, sample_rate_hz, channels, labels (+ generator keys)
//   data.tsv         one record per row: label then samples (single channel)
//   data_ch{k}.tsv   the same per channel when channels > 1; rows align
// or a public UCR pair NAME_TRAIN.tsv / NAME_TEST.tsv, used as a fixed split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtsc/dataset.hpp"
#include "qtsc/error.hpp"
#include "qtsc/kv.hpp"
#include "qtsc/spectral.hpp"

namespace qtsc::ingest {

/// One parsed row: label token and values.
struct UcrRow {
    std::string label;
    std::vector<double> values;
};

inline std::vector<UcrRow> parse_ucr(std::istream& in, const std::string& origin) {
    std::vector<UcrRow> rows;
    std::string line;
    int lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
        std::stringstream ss(line);
        std::string tok;
        UcrRow row;
        bool first = true;
        while (std::getline(ss, tok, sep)) {
            tok = trim(tok);
            if (first) {
                if (tok.empty()) throw DataError(origin + ":" + std::to_string(lineno) + ": missing label");
                // UCR labels are often written as floats ("1.0000000e+00")
                try {
                    std::size_t pos = 0;
                    const double v = std::stod(tok, &pos);
                    if (pos == tok.size() && v == std::floor(v)) tok = std::to_string(static_cast<long long>(v));
                } catch (const std::exception&) {
                }
                row.label = tok;
                first = false;
                continue;
            }
            double v = 0.0;
            try {
                std::size_t pos = 0;
                v = std::stod(tok, &pos);
                if (pos != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw DataError(origin + ":" + std::to_string(lineno) + ": non-numeric value '" + tok + "'");
            }
            if (!std::isfinite(v)) throw DataError(origin + ":" + std::to_string(lineno) + ": missing or non-finite value");
            row.values.push_back(v);
        }
        if (row.values.empty()) throw DataError(origin + ":" + std::to_string(lineno) + ": row has no samples");
        if (width == 0) width = row.values.size();
        if (row.values.size() != width)
            throw DataError(origin + ":" + std::to_string(lineno) + ": row has " + std::to_string(row.values.size()) +
                            " values, expected " + std::to_string(width));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(origin + ": no records");
    return rows;
}

inline std::vector<UcrRow> read_ucr_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return parse_ucr(in, path.string());
}

/// Builds records from aligned per-channel row sets with a given label order.
inline std::vector<Record> assemble(const std::vector<std::vector<UcrRow>>& channels,
                                    const std::vector<std::string>& labels, const std::string& origin) {
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < labels.size(); ++k) index[labels[k]] = static_cast<int>(k);
    const std::size_t n = channels.front().size();
    for (const auto& ch : channels)
        if (ch.size() != n) throw DataError(origin + ": channel files differ in row count");
    std::vector<Record> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::string& lab = channels.front()[r].label;
        auto it = index.find(lab);
        if (it == index.end()) throw DataError(origin + ": unknown label '" + lab + "'");
        out[r].label = it->second;
        for (const auto& ch : channels) {
            if (ch[r].label != lab) throw DataError(origin + ": channel files disagree on the label of row " + std::to_string(r + 1));
            out[r].channels.push_back(ch[r].values);
        }
    }
    return out;
}

inline std::vector<std::string> labels_of(const std::vector<const std::vector<UcrRow>*>& sets) {
    std::vector<std::string> tokens;
    for (const auto* s : sets)
        for (const auto& r : *s) tokens.push_back(r.label);
    return sorted_label_tokens(std::move(tokens));
}

/// One univariate series per row; labels remapped to 0..K-1 in sorted order.
inline RawDataset load_ucr(const std::filesystem::path& path) {
    const auto rows = read_ucr_rows(path);
    RawDataset ds;
    ds.name = path.stem().string();
    ds.label_names = labels_of({&rows});
    ds.records = assemble({rows}, ds.label_names, path.string());
    return ds;
}

/// Writes channel `channel` of every record; values at full precision so a
/// reload is bit-exact.
inline void save_ucr(const std::filesystem::path& path, const RawDataset& ds, std::size_t channel = 0) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    char buf[32];
    for (const auto& r : ds.records) {
        out << ds.label_names.at(static_cast<std::size_t>(r.label));
        for (double v : r.channels.at(channel)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << '\t' << buf;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Dataset directories

struct LoadedDataset {
    RawDataset all;                   // every record (train then test for a fixed split)
    std::optional<RawDataset> train;  // set when the source defines the split
    std::optional<RawDataset> test;
    KeyValues manifest;
};

inline std::optional<std::pair<std::filesystem::path, std::filesystem::path>> find_ucr_pair(const std::filesystem::path& dir) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const std::string f = e.path().filename().string();
        for (const std::string ext : {".tsv", ".txt", ".csv"}) {
            const std::string suffix = "_TRAIN" + ext;
            if (f.size() > suffix.size() && f.compare(f.size() - suffix.size(), suffix.size(), suffix) == 0) {
                const auto test = dir / (f.substr(0, f.size() - suffix.size()) + "_TEST" + ext);
                if (std::filesystem::exists(test)) return std::make_pair(e.path(), test);
            }
        }
    }
    return std::nullopt;
}

inline LoadedDataset load_dataset_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw DataError("dataset directory '" + dir.string() + "' not found");
    LoadedDataset out;
    const auto manifest_path = dir / "manifest.txt";
    if (std::filesystem::exists(manifest_path)) out.manifest = KeyValues::load(manifest_path.string());
    const double rate = out.manifest.get_or("sample_rate_hz", 1.0);

    if (auto pair = find_ucr_pair(dir)) {
        const auto tr = read_ucr_rows(pair->first);
        const auto te = read_ucr_rows(pair->second);
        if (tr.front().values.size() != te.front().values.size()) throw DataError(dir.string() + ": train/test lengths differ");
        const auto labels = labels_of({&tr, &te});
        RawDataset base;
        const std::string stem = pair->first.filename().string();
        base.name = out.manifest.get_or<std::string>("name", stem.substr(0, stem.rfind("_TRAIN")));
        base.sample_rate_hz = rate;
        base.label_names = labels;
        RawDataset train = base, test = base;
        train.records = assemble({tr}, labels, pair->first.string());
        test.records = assemble({te}, labels, pair->second.string());
        out.all = base;
        out.all.records = train.records;
        out.all.records.insert(out.all.records.end(), test.records.begin(), test.records.end());
        out.train = std::move(train);
        out.test = std::move(test);
        return out;
    }

    const int channels = out.manifest.get_or("channels", 1);
    if (channels < 1) throw DataError(dir.string() + ": channels must be positive");
    std::vector<std::vector<UcrRow>> per_channel;
    if (channels == 1 && std::filesystem::exists(dir / "data.tsv")) {
        per_channel.push_back(read_ucr_rows(dir / "data.tsv"));
    } else {
        for (int k = 0; k < channels; ++k) per_channel.push_back(read_ucr_rows(dir / ("data_ch" + std::to_string(k) + ".tsv")));
    }
    std::vector<const std::vector<UcrRow>*> sets;
    for (const auto& c : per_channel) sets.push_back(&c);
    out.all.name = out.manifest.get_or<std::string>("name", dir.filename().string());
    out.all.sample_rate_hz = rate;
    out.all.label_names = labels_of(sets);
    out.all.records = assemble(per_channel, out.all.label_names, dir.string());
    out.all.validate();
    return out;
}

/// Writes manifest.txt (with `extra` appended) and the data file(s).
inline void save_dataset_dir(const std::filesystem::path& dir, const RawDataset& ds, const KeyValues& extra = {}) {
    ds.validate();
    std::filesystem::create_directories(dir);
    KeyValues kv;
    kv.set("name", ds.name);
    kv.set("sample_rate_hz", ds.sample_rate_hz);
    kv.set("channels", ds.num_channels());
    std::string labels;
    for (const auto& l : ds.label_names) labels += (labels.empty() ? "" : ",") + l;
    kv.set("labels", labels);
    for (const auto& [k, v] : extra.entries()) kv.set(k, v);
    kv.save((dir / "manifest.txt").string(), "qtsc dataset");
    if (ds.num_channels() == 1) {
        save_ucr(dir / "data.tsv", ds, 0);
    } else {
        for (int k = 0; k < ds.num_channels(); ++k) save_ucr(dir / ("data_ch" + std::to_string(k) + ".tsv"), ds, static_cast<std::size_t>(k));
    }
}

// ---------------------------------------------------------------------------
// Preprocessing

/// |analytic signal| via the FFT method: zero negative frequencies, double
/// positive ones, keep DC (and Nyquist for even N).
inline std::vector<double> hilbert_envelope(const std::vector<double>& x) {
    if (x.size() < 4) throw std::invalid_argument("hilbert_envelope: need at least 4 samples");
    const std::size_t n = x.size();
    auto X = spectral::fft_real(x);
    for (std::size_t k = 1; k < n; ++k) {
        if (2 * k < n)
            X[k] *= 2.0;
        else if (2 * k > n)
            X[k] = 0.0;
    }
    const auto z = spectral::ifft(X);
    std::vector<double> env(n);
    for (std::size_t k = 0; k < n; ++k) env[k] = std::abs(z[k]);
    return env;
}

inline void apply_envelope(RawDataset& ds) {
    for (auto& r : ds.records)
        for (auto& ch : r.channels) ch = hilbert_envelope(ch);
}

struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Per-channel mean and (population) standard deviation over every sample
/// of every record. A zero deviation is reported as 1.
inline ChannelStats channel_stats(const RawDataset& ds) {
    const auto m = static_cast<std::size_t>(ds.num_channels());
    ChannelStats s{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t c = 0; c < m; ++c) {
        double sum = 0, n = 0;
        for (const auto& r : ds.records)
            for (double v : r.channels[c]) {
                sum += v;
                n += 1;
            }
        const double mu = n > 0 ? sum / n : 0.0;
        double ss = 0;
        for (const auto& r : ds.records)
            for (double v : r.channels[c]) ss += (v - mu) * (v - mu);
        const double sd = n > 0 ? std::sqrt(ss / n) : 0.0;
        s.mean[c] = mu;
        s.stddev[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

inline void apply_stats(RawDataset& ds, const ChannelStats& s) {
    for (auto& r : ds.records)
        for (std::size_t c = 0; c < r.channels.size(); ++c)
            for (double& v : r.channels[c]) v = (v - s.mean[c]) / s.stddev[c];
}

struct Split {
    RawDataset train;
    RawDataset test;
    ChannelStats stats;                  // fitted on the training split
    std::vector<std::size_t> train_index;  // source record positions (empty for a fixed split)
    std::vector<std::size_t> test_index;
};

/// z-normalizes both splits with training statistics.
inline Split normalize(RawDataset train, RawDataset test) {
    Split s;
    s.stats = channel_stats(train);
    apply_stats(train, s.stats);
    apply_stats(test, s.stats);
    s.train = std::move(train);
    s.test = std::move(test);
    return s;
}

/// Stratified shuffle split (round(fraction * n_c) training records per
/// class), then train-only z-normalization.
inline Split normalize_and_split(const RawDataset& ds, double train_fraction = 0.7, std::uint64_t seed = 1) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train_fraction must lie in (0, 1)");
    ds.validate();
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.num_classes()));
    for (std::size_t k = 0; k < ds.records.size(); ++k) by_class[static_cast<std::size_t>(ds.records[k].label)].push_back(k);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> tr_idx, te_idx;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
        if (n_train == 0 || n_train >= idx.size())
            throw DataError("class '" + ds.label_names[c] + "' would be absent from one split (" + std::to_string(idx.size()) +
                            " records)");
        tr_idx.insert(tr_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        te_idx.insert(te_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(tr_idx.begin(), tr_idx.end());
    std::sort(te_idx.begin(), te_idx.end());
    RawDataset train = ds, test = ds;
    train.records.clear();
    test.records.clear();
    for (std::size_t k : tr_idx) train.records.push_back(ds.records[k]);
    for (std::size_t k : te_idx) test.records.push_back(ds.records[k]);
    Split s = normalize(std::move(train), std::move(test));
    s.train_index = std::move(tr_idx);
    s.test_index = std::move(te_idx);
    return s;
}

/// Predefined split when the source has one, else a stratified split of
/// everything; optional envelope first.
inline Split prepare(const LoadedDataset& ld, double train_fraction, std::uint64_t seed, bool envelope = false) {
    if (ld.train && ld.test) {
        RawDataset tr = *ld.train, te = *ld.test;
        if (envelope) {
            apply_envelope(tr);
            apply_envelope(te);
        }
        return normalize(std::move(tr), std::move(te));
    }
    RawDataset all = ld.all;
    if (envelope) apply_envelope(all);
    return normalize_and_split(all, train_fraction, seed);
}

}  // namespace qtsc::ingest
