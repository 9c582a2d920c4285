#pragma once

// Fourier-domain distance between realizations and a stochastic 2-D
// embedding of the resulting distance matrix.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "qtsc/error.hpp"
#include "qtsc/spectral.hpp"

namespace qtsc::analysis {

struct DistanceMatrix {
    Eigen::MatrixXd d;
    std::vector<int> realization_class;

    Eigen::Index size() const noexcept { return d.rows(); }
};

/// D(i,j) = sum_k (|P_i(k)| - |P_j(k)|)^2 / N over the one-sided bins, with
/// P the log power spectrum.
inline DistanceMatrix fourier_distance(const std::vector<std::vector<double>>& signals, std::vector<int> classes = {},
                                       double eps = 1e-12) {
    if (signals.empty()) throw std::invalid_argument("fourier_distance: no signals");
    const std::size_t n = signals.front().size();
    if (n < 8) throw std::invalid_argument("fourier_distance: signals need at least 8 samples");
    for (const auto& s : signals)
        if (s.size() != n) throw std::invalid_argument("fourier_distance: signals differ in length");
    if (!classes.empty() && classes.size() != signals.size())
        throw std::invalid_argument("fourier_distance: one class per signal expected");

    const auto count = static_cast<Eigen::Index>(signals.size());
    std::vector<std::vector<double>> mag(signals.size());
    for (std::size_t i = 0; i < signals.size(); ++i) {
        mag[i] = spectral::log_power_one_sided(signals[i], eps);
        for (double& v : mag[i]) v = std::abs(v);
    }
    const double bin = 1.0 / static_cast<double>(n);
    DistanceMatrix out;
    out.d = Eigen::MatrixXd::Zero(count, count);
    out.realization_class = classes.empty() ? std::vector<int>(signals.size(), 0) : std::move(classes);
    for (Eigen::Index i = 0; i < count; ++i)
        for (Eigen::Index j = i + 1; j < count; ++j) {
            double s = 0.0;
            const auto& a = mag[static_cast<std::size_t>(i)];
            const auto& b = mag[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
            out.d(i, j) = out.d(j, i) = s * bin;
        }
    return out;
}

enum class EmbeddingMetric { as_printed, euclidean };

inline EmbeddingMetric metric_from_string(const std::string& s) {
    if (s == "as_printed") return EmbeddingMetric::as_printed;
    if (s == "euclidean") return EmbeddingMetric::euclidean;
    throw std::invalid_argument("unknown embedding metric '" + s + "' (expected as_printed|euclidean)");
}

inline const char* to_string(EmbeddingMetric m) noexcept { return m == EmbeddingMetric::euclidean ? "euclidean" : "as_printed"; }

/// as_printed: (dx)^2 - (dy)^2. euclidean: (dx)^2 + (dy)^2.
inline double embedded_distance(const Eigen::MatrixX2d& pts, Eigen::Index i, Eigen::Index j, EmbeddingMetric m) noexcept {
    const double dx = pts(i, 0) - pts(j, 0);
    const double dy = pts(i, 1) - pts(j, 1);
    return m == EmbeddingMetric::euclidean ? dx * dx + dy * dy : dx * dx - dy * dy;
}

/// E = sum over i != j of (Dhat(i,j) - D(i,j))^2.
inline double embedding_energy(const Eigen::MatrixXd& d, const Eigen::MatrixX2d& pts, EmbeddingMetric m) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.rows(); ++j) {
            const double r = embedded_distance(pts, i, j, m) - d(i, j);
            e += r * r;
        }
    return 2.0 * e;
}

struct Embedding2D {
    Eigen::MatrixX2d points;
    double energy = 0.0;
    std::vector<double> history;  // energy at initialization and after every accepted move
    std::vector<long> accepted_at;
    EmbeddingMetric metric = EmbeddingMetric::as_printed;
};

struct EmbedOptions {
    double eta = 1e-3;
    long iters = 100000;
    std::uint64_t seed = 1;
    EmbeddingMetric metric = EmbeddingMetric::as_printed;
};

/// Points start uniform on [0,1]^2; each iteration moves every point by
/// N(0, eta) noise and keeps the move only if the energy drops.
inline Embedding2D embed_2d(const DistanceMatrix& dm, const EmbedOptions& opt = {}) {
    if (opt.iters < 0) throw std::invalid_argument("embed_2d: iters must be non-negative");
    if (!(opt.eta > 0.0)) throw std::invalid_argument("embed_2d: eta must be positive");
    const Eigen::Index n = dm.size();
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, opt.eta);
    Embedding2D e;
    e.metric = opt.metric;
    e.points.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        e.points(i, 0) = u(rng);
        e.points(i, 1) = u(rng);
    }
    e.energy = embedding_energy(dm.d, e.points, opt.metric);
    e.history.push_back(e.energy);
    e.accepted_at.push_back(0);
    Eigen::MatrixX2d trial(n, 2);
    for (long it = 1; it <= opt.iters; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) {
            trial(i, 0) = e.points(i, 0) + g(rng);
            trial(i, 1) = e.points(i, 1) + g(rng);
        }
        const double en = embedding_energy(dm.d, trial, opt.metric);
        if (en < e.energy) {
            e.points = trial;
            e.energy = en;
            e.history.push_back(en);
            e.accepted_at.push_back(it);
        }
    }
    return e;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: need two equal-length samples");
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw std::domain_error("pearson: zero variance");
    return sab / std::sqrt(saa * sbb);
}

/// Pearson correlation of the off-diagonal Dhat and D entries.
inline double embedding_correlation(const DistanceMatrix& dm, const Embedding2D& emb) {
    if (emb.points.rows() != dm.size()) throw std::invalid_argument("embedding_correlation: size mismatch");
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < dm.size(); ++i)
        for (Eigen::Index j = i + 1; j < dm.size(); ++j) {
            a.push_back(embedded_distance(emb.points, i, j, emb.metric));
            b.push_back(dm.d(i, j));
        }
    return pearson(a, b);
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_distance_csv(const std::string& path, const DistanceMatrix& dm) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    for (Eigen::Index i = 0; i < dm.size(); ++i) {
        for (Eigen::Index j = 0; j < dm.size(); ++j) out << (j ? "," : "") << dm.d(i, j);
        out << '\n';
    }
}

inline void write_embedding_csv(const std::string& path, const DistanceMatrix& dm, const Embedding2D& e) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    out << "index,class,x,y\n";
    for (Eigen::Index i = 0; i < e.points.rows(); ++i)
        out << i << ',' << dm.realization_class[static_cast<std::size_t>(i)] << ',' << e.points(i, 0) << ','
            << e.points(i, 1) << '\n';
}

inline void write_energy_csv(const std::string& path, const Embedding2D& e) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    out << "iteration,energy\n";
    for (std::size_t k = 0; k < e.history.size(); ++k) out << e.accepted_at[k] << ',' << e.history[k] << '\n';
}

}  // namespace qtsc::analysis
