#pragma once

// Synthetic class datasets: logistic map, Lorenz system and a bank of
// sinusoids, one parameter value per class.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qtsc/dataset.hpp"
#include "qtsc/error.hpp"
#include "qtsc/kv.hpp"
#include "qtsc/sequence.hpp"

namespace qtsc::datagen {

struct LogisticParams {
    double r = 3.9;
    double x0 = 0.3;
    int n_samples = 1000;
    int transient = 0;

    void validate() const {
        if (!(x0 > 0.0 && x0 < 1.0)) throw std::invalid_argument("logistic: x0 must lie in (0, 1)");
        if (!(r > 0.0 && r <= 4.0)) throw std::invalid_argument("logistic: r must lie in (0, 4]");
        if (n_samples < 0 || transient < 0) throw std::invalid_argument("logistic: counts must be non-negative");
    }
};

/// x_{n+1} = r x_n (1 - x_n); returns the n_samples iterates after the
/// transient (the first returned value is x_{transient+1}).
inline std::vector<double> logistic_series(const LogisticParams& p) {
    p.validate();
    double x = p.x0;
    for (int k = 0; k < p.transient; ++k) x = p.r * x * (1.0 - x);
    std::vector<double> out(static_cast<std::size_t>(p.n_samples));
    for (double& v : out) {
        x = p.r * x * (1.0 - x);
        v = x;
    }
    return out;
}

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 5.0 / 3.0;
    std::array<double, 3> initial{1.0, 1.0, 1.0};
    double dt = 0.01;
    int n_samples = 1000;
    int transient = 1000;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("lorenz: dt must be positive");
        if (transient < 0 || n_samples < 0) throw std::invalid_argument("lorenz: counts must be non-negative");
    }
};

inline std::array<double, 3> lorenz_derivative(const LorenzParams& p, const std::array<double, 3>& s) noexcept {
    return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2]};
}

inline std::array<double, 3> rk4_step(const LorenzParams& p, const std::array<double, 3>& s, double dt) noexcept {
    auto axpy = [](const std::array<double, 3>& a, double h, const std::array<double, 3>& b) {
        return std::array<double, 3>{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]};
    };
    const auto k1 = lorenz_derivative(p, s);
    const auto k2 = lorenz_derivative(p, axpy(s, dt / 2, k1));
    const auto k3 = lorenz_derivative(p, axpy(s, dt / 2, k2));
    const auto k4 = lorenz_derivative(p, axpy(s, dt, k3));
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) out[i] = s[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return out;
}

/// x(t) / scale sampled every `stride` RK4 steps after the transient.
inline std::vector<double> lorenz_series(const LorenzParams& p, double scale = 40.0, int stride = 1) {
    p.validate();
    if (!(scale > 0.0)) throw std::invalid_argument("lorenz: scale must be positive");
    if (stride < 1) throw std::invalid_argument("lorenz: stride must be positive");
    std::array<double, 3> s = p.initial;
    for (int k = 0; k < p.transient; ++k) s = rk4_step(p, s, p.dt);
    std::vector<double> out(static_cast<std::size_t>(p.n_samples));
    for (std::size_t n = 0; n < out.size(); ++n) {
        if (n > 0)
            for (int k = 0; k < stride; ++k) s = rk4_step(p, s, p.dt);
        const double v = s[0] / scale;
        if (!(std::abs(v) <= 1.0))
            throw DataError("lorenz: scaled sample " + std::to_string(v) + " leaves [-1, 1]; increase the scale");
        out[n] = v;
    }
    return out;
}

/// sin(t (alpha + j beta)) on `t_grid`.
inline std::vector<double> sine_bank_series(int j, double alpha, double beta, const std::vector<double>& t_grid) {
    std::vector<double> out(t_grid.size());
    const double w = alpha + j * beta;
    for (std::size_t k = 0; k < t_grid.size(); ++k) out[k] = std::sin(t_grid[k] * w);
    return out;
}

inline std::vector<double> time_grid(double t0, double dt, int n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = t0 + dt * k;
    return t;
}

/// q consecutive non-overlapping windows of the M x T signal with uniform
/// noise in [-noise_amplitude, noise_amplitude].
inline WindowedSequence make_windows(const std::vector<std::vector<double>>& signal, int label, int window, int steps,
                                     double noise_amplitude, std::uint64_t seed) {
    if (signal.empty()) throw std::invalid_argument("make_windows: empty signal");
    Record r{label, signal};
    for (const auto& ch : signal)
        if (ch.size() != r.length()) throw std::invalid_argument("make_windows: channels differ in length");
    if (r.length() < static_cast<std::size_t>(window) * static_cast<std::size_t>(steps))
        throw std::invalid_argument("make_windows: signal shorter than steps * window");
    WindowedSequence s = cut_windows(r, window, steps);
    if (noise_amplitude > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-noise_amplitude, noise_amplitude);
        for (auto& w : s.windows)
            for (double& v : w) v += u(rng);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Class datasets

enum class System { logistic, lorenz, sine };

inline const char* to_string(System s) noexcept {
    switch (s) {
        case System::logistic: return "logistic";
        case System::lorenz: return "lorenz";
        default: return "sine";
    }
}

inline System system_from_string(const std::string& s) {
    if (s == "logistic") return System::logistic;
    if (s == "lorenz") return System::lorenz;
    if (s == "sine") return System::sine;
    throw std::invalid_argument("unknown system '" + s + "' (expected logistic|lorenz|sine)");
}

struct GeneratorConfig {
    System system = System::sine;
    int classes = 5;
    int per_class = 20;
    int length = 1000;           // samples per realization
    double noise = 0.01;         // uniform noise amplitude
    std::uint64_t seed = 1;
    std::vector<double> class_params;  // empty: defaults for the system
    // logistic
    int logistic_transient = 100;
    // lorenz
    double lorenz_rho = 28.0;
    double lorenz_beta = 5.0 / 3.0;
    double lorenz_dt = 0.01;
    int lorenz_transient = 1000;
    int lorenz_stride = 1;
    double lorenz_scale = 40.0;
    double lorenz_ball = 0.5;  // radius of the initial-condition ball around (1, 1, 1)
    // sine bank
    double sine_alpha = 3.0;
    double sine_beta = 0.1;
    double sine_dt = 0.1;
    double sine_phase_span = 100.0;  // start time drawn from [0, span)

    void validate() const {
        if (classes < 1 || per_class < 1 || length < 1)
            throw std::invalid_argument("generator: classes, per_class and length must be positive");
        if (!class_params.empty() && static_cast<int>(class_params.size()) != classes)
            throw std::invalid_argument("generator: class_params must list one value per class");
        if (noise < 0.0) throw std::invalid_argument("generator: noise must be non-negative");
    }
};

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
    return v;
}

/// Logistic r in [3.6, 4.0], Lorenz sigma in [8, 18], sine bank j = 0..K-1.
inline std::vector<double> default_class_params(System s, int classes) {
    switch (s) {
        case System::logistic: return linspace(3.6, 4.0, classes);
        case System::lorenz: return linspace(8.0, 18.0, classes);
        default: return linspace(0.0, classes - 1.0, classes);
    }
}

struct SyntheticDataset {
    RawDataset data;
    std::vector<double> class_params;
    double noise_amplitude = 0.0;
};

inline std::mt19937_64 realization_rng(std::uint64_t seed, int cls, int index) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(cls), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(ss);
}

inline std::vector<double> generate_realization(const GeneratorConfig& cfg, double param, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (cfg.system) {
        case System::logistic: {
            LogisticParams p;
            p.r = param;
            p.x0 = 0.05 + 0.9 * unit(rng);
            p.n_samples = cfg.length;
            p.transient = cfg.logistic_transient;
            return logistic_series(p);
        }
        case System::lorenz: {
            LorenzParams p;
            p.sigma = param;
            p.rho = cfg.lorenz_rho;
            p.beta = cfg.lorenz_beta;
            p.dt = cfg.lorenz_dt;
            p.transient = cfg.lorenz_transient;
            p.n_samples = cfg.length;
            // uniform in a ball: rejection sample the cube
            std::array<double, 3> d{};
            do {
                for (double& v : d) v = 2.0 * unit(rng) - 1.0;
            } while (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] > 1.0);
            for (int i = 0; i < 3; ++i) p.initial[static_cast<std::size_t>(i)] = 1.0 + cfg.lorenz_ball * d[static_cast<std::size_t>(i)];
            return lorenz_series(p, cfg.lorenz_scale, cfg.lorenz_stride);
        }
        default: {
            const double t0 = cfg.sine_phase_span * unit(rng);
            return sine_bank_series(0, cfg.sine_alpha + param * cfg.sine_beta, 0.0, time_grid(t0, cfg.sine_dt, cfg.length));
        }
    }
}

/// per_class noisy realizations per class, ordered by class then index.
/// Every realization draws from its own (seed, class, index) stream.
inline SyntheticDataset generate(const GeneratorConfig& cfg) {
    cfg.validate();
    SyntheticDataset ds;
    ds.class_params = cfg.class_params.empty() ? default_class_params(cfg.system, cfg.classes) : cfg.class_params;
    ds.noise_amplitude = cfg.noise;
    ds.data.name = to_string(cfg.system);
    ds.data.sample_rate_hz = 1.0;
    for (int c = 0; c < cfg.classes; ++c) ds.data.label_names.push_back(std::to_string(c));
    std::uniform_real_distribution<double> u(-cfg.noise, cfg.noise);
    for (int c = 0; c < cfg.classes; ++c) {
        for (int i = 0; i < cfg.per_class; ++i) {
            std::mt19937_64 rng = realization_rng(cfg.seed, c, i);
            std::vector<double> sig = generate_realization(cfg, ds.class_params[static_cast<std::size_t>(c)], rng);
            if (cfg.noise > 0.0)
                for (double& v : sig) v += u(rng);
            ds.data.records.push_back(Record{c, {std::move(sig)}});
        }
    }
    return ds;
}

/// Generator settings for the dataset manifest.
inline void write_generator_config(KeyValues& kv, const GeneratorConfig& cfg, const std::vector<double>& params) {
    kv.set("system", std::string(to_string(cfg.system)));
    kv.set("classes", cfg.classes);
    kv.set("per_class", cfg.per_class);
    kv.set("length", cfg.length);
    kv.set("noise", cfg.noise);
    kv.set("seed", cfg.seed);
    for (std::size_t c = 0; c < params.size(); ++c) kv.set("class." + std::to_string(c), params[c]);
    switch (cfg.system) {
        case System::logistic: kv.set("logistic_transient", cfg.logistic_transient); break;
        case System::lorenz:
            kv.set("lorenz_rho", cfg.lorenz_rho);
            kv.set("lorenz_beta", cfg.lorenz_beta);
            kv.set("lorenz_dt", cfg.lorenz_dt);
            kv.set("lorenz_transient", cfg.lorenz_transient);
            kv.set("lorenz_stride", cfg.lorenz_stride);
            kv.set("lorenz_scale", cfg.lorenz_scale);
            kv.set("lorenz_ball", cfg.lorenz_ball);
            break;
        case System::sine:
            kv.set("sine_alpha", cfg.sine_alpha);
            kv.set("sine_beta", cfg.sine_beta);
            kv.set("sine_dt", cfg.sine_dt);
            kv.set("sine_phase_span", cfg.sine_phase_span);
            break;
    }
}

inline GeneratorConfig generator_config_from(const KeyValues& kv, GeneratorConfig g = {}) {
    if (kv.has("system")) g.system = system_from_string(kv.get<std::string>("system"));
    g.classes = kv.get_or("classes", g.classes);
    g.per_class = kv.get_or("per_class", g.per_class);
    g.length = kv.get_or("length", g.length);
    g.noise = kv.get_or("noise", g.noise);
    g.seed = kv.get_or("seed", g.seed);
    g.logistic_transient = kv.get_or("logistic_transient", g.logistic_transient);
    g.lorenz_rho = kv.get_or("lorenz_rho", g.lorenz_rho);
    g.lorenz_beta = kv.get_or("lorenz_beta", g.lorenz_beta);
    g.lorenz_dt = kv.get_or("lorenz_dt", g.lorenz_dt);
    g.lorenz_transient = kv.get_or("lorenz_transient", g.lorenz_transient);
    g.lorenz_stride = kv.get_or("lorenz_stride", g.lorenz_stride);
    g.lorenz_scale = kv.get_or("lorenz_scale", g.lorenz_scale);
    g.lorenz_ball = kv.get_or("lorenz_ball", g.lorenz_ball);
    g.sine_alpha = kv.get_or("sine_alpha", g.sine_alpha);
    g.sine_beta = kv.get_or("sine_beta", g.sine_beta);
    g.sine_dt = kv.get_or("sine_dt", g.sine_dt);
    g.sine_phase_span = kv.get_or("sine_phase_span", g.sine_phase_span);
    if (kv.has("class.0")) {
        g.class_params.clear();
        for (int c = 0; c < g.classes; ++c) g.class_params.push_back(kv.get<double>("class." + std::to_string(c)));
    }
    return g;
}

}  // namespace qtsc::datagen
