#pragma once

// In-memory labelled signal collection shared by the generators and the
// file loaders.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "qtsc/error.hpp"
#include "qtsc/sequence.hpp"

namespace qtsc {

struct Record {
    int label = 0;
    std::vector<std::vector<double>> channels;  // M x T

    std::size_t length() const noexcept { return channels.empty() ? 0 : channels.front().size(); }
};

struct RawDataset {
    std::string name;
    double sample_rate_hz = 1.0;
    std::vector<Record> records;
    std::vector<std::string> label_names;  // original label token per class index

    int num_classes() const noexcept { return static_cast<int>(label_names.size()); }
    int num_channels() const noexcept { return records.empty() ? 0 : static_cast<int>(records.front().channels.size()); }

    void validate() const {
        const int m = num_channels();
        for (const auto& r : records) {
            if (static_cast<int>(r.channels.size()) != m) throw DataError(name + ": records differ in channel count");
            for (const auto& ch : r.channels)
                if (ch.size() != r.length()) throw DataError(name + ": channels of one record differ in length");
            if (r.label < 0 || r.label >= num_classes()) throw DataError(name + ": label outside 0..classes-1");
        }
    }
};

/// Maps arbitrary label tokens to contiguous indices ordered by first
/// appearance after sorting (numeric tokens sort numerically).
inline std::vector<std::string> sorted_label_tokens(std::vector<std::string> tokens) {
    auto numeric = [](const std::string& s, double& v) {
        try {
            std::size_t pos = 0;
            v = std::stod(s, &pos);
            return pos == s.size();
        } catch (const std::exception&) {
            return false;
        }
    };
    std::sort(tokens.begin(), tokens.end(), [&](const std::string& a, const std::string& b) {
        double x = 0, y = 0;
        const bool na = numeric(a, x), nb = numeric(b, y);
        if (na && nb && x != y) return x < y;
        if (na != nb) return na;
        return a < b;
    });
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

/// First steps*window samples of every channel, window k holding channel d
/// at d * window + t.
inline WindowedSequence cut_windows(const Record& r, int window, int steps) {
    if (window < 1 || steps < 1) throw std::invalid_argument("cut_windows: window and steps must be positive");
    const auto need = static_cast<std::size_t>(window) * static_cast<std::size_t>(steps);
    if (r.length() < need)
        throw DataError("record of length " + std::to_string(r.length()) + " is shorter than steps*window = " +
                        std::to_string(need));
    WindowedSequence s;
    s.label = r.label;
    const auto w = static_cast<std::size_t>(window);
    for (std::size_t k = 0; k < static_cast<std::size_t>(steps); ++k) {
        std::vector<double> win;
        win.reserve(w * r.channels.size());
        for (const auto& ch : r.channels) win.insert(win.end(), ch.begin() + static_cast<std::ptrdiff_t>(k * w),
                                                     ch.begin() + static_cast<std::ptrdiff_t>((k + 1) * w));
        s.windows.push_back(std::move(win));
    }
    return s;
}

inline std::vector<WindowedSequence> cut_all(const std::vector<Record>& records, int window, int steps) {
    std::vector<WindowedSequence> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(cut_windows(r, window, steps));
    return out;
}

}  // namespace qtsc
