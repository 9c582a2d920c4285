#pragma once

// The `qtsc` command line: gen, embed, train, quantize, eval, simulate,
// estimate. Exit codes: 0 success, 1 usage error, 2 data error.
//
// Every command writes `run_manifest.txt` into its output directory:
// --out when given, else $QTSC_OUTPUT_ROOT/<command>, else
// ./qtsc_runs/<command>.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qtsc/analysis.hpp"
#include "qtsc/datagen.hpp"
#include "qtsc/dataset.hpp"
#include "qtsc/error.hpp"
#include "qtsc/estimate.hpp"
#include "qtsc/fsm.hpp"
#include "qtsc/ingest.hpp"
#include "qtsc/kv.hpp"
#include "qtsc/model.hpp"
#include "qtsc/model_fixed.hpp"
#include "qtsc/model_io.hpp"
#include "qtsc/train.hpp"

#ifndef QTSC_GIT_DESCRIBE
#define QTSC_GIT_DESCRIBE "unknown"
#endif

namespace qtsc::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string timestamp;
    std::string git_describe = QTSC_GIT_DESCRIBE;
    fs::path output_dir;
    std::vector<std::string> argv;
    KeyValues extra;

    void save() const {
        KeyValues kv;
        kv.set("command", command);
        kv.set("config", config_path);
        kv.set("seed", seed);
        kv.set("timestamp", timestamp);
        kv.set("git_describe", git_describe);
        kv.set("output_dir", output_dir.string());
        std::string args;
        for (const auto& a : argv) args += (args.empty() ? "" : " ") + a;
        kv.set("argv", args);
        for (const auto& [k, v] : extra.entries()) kv.set(k, v);
        kv.save((output_dir / "run_manifest.txt").string(), "qtsc run");
    }
};

inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline fs::path default_output(const std::string& command) {
    const char* root = std::getenv("QTSC_OUTPUT_ROOT");
    return fs::path(root && *root ? root : "qtsc_runs") / command;
}

/// Settings that turn a dataset directory into the exact split a model was
/// trained on. Stored next to the model as `preprocess.txt`.
struct Preprocess {
    double train_fraction = 0.7;
    std::uint64_t split_seed = 1;
    bool envelope = false;

    void save(const fs::path& dir) const {
        KeyValues kv;
        kv.set("train_fraction", train_fraction);
        kv.set("split_seed", split_seed);
        kv.set("envelope", envelope ? 1 : 0);
        kv.save((dir / "preprocess.txt").string(), "qtsc preprocessing");
    }
    static Preprocess load(const fs::path& dir) {
        Preprocess p;
        const fs::path f = dir / "preprocess.txt";
        if (!fs::exists(f)) return p;
        const KeyValues kv = KeyValues::load(f.string());
        p.train_fraction = kv.get_or("train_fraction", p.train_fraction);
        p.split_seed = kv.get_or("split_seed", p.split_seed);
        p.envelope = kv.get_or("envelope", p.envelope);
        return p;
    }
};

inline std::vector<WindowedSequence> test_sequences(const fs::path& data, const model::NetworkConfig& cfg,
                                                    const Preprocess& pp) {
    const ingest::Split split = ingest::prepare(ingest::load_dataset_dir(data), pp.train_fraction, pp.split_seed, pp.envelope);
    if (split.test.num_channels() != cfg.channels)
        throw ShapeError("dataset has " + std::to_string(split.test.num_channels()) + " channels, model expects " +
                         std::to_string(cfg.channels));
    if (split.test.num_classes() != cfg.classes)
        throw ShapeError("dataset has " + std::to_string(split.test.num_classes()) + " classes, model expects " +
                         std::to_string(cfg.classes));
    return cut_all(split.test.records, cfg.window, cfg.steps);
}

inline void copy_if_exists(const fs::path& from, const fs::path& to) {
    if (fs::exists(from)) fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

// ---------------------------------------------------------------------------

class App {
public:
    App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(int argc, const char* const* argv) {
        for (int k = 0; k < argc; ++k) argv_.emplace_back(argv[k]);
        CLI::App app{"Quantized CNN-LSTM time-series classifier toolkit", "qtsc"};
        app.require_subcommand(1, 1);
        app.set_help_all_flag("--help-all", "Show help for every subcommand");
        setup_gen(app);
        setup_embed(app);
        setup_train(app);
        setup_quantize(app);
        setup_eval(app);
        setup_simulate(app);
        setup_estimate(app);

        if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
            err_ << "qtsc: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
            return kExitUsage;
        }
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            out_ << app.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp& e) {
            out_ << app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err_ << "qtsc: " << (argc <= 1 ? "a subcommand is required" : e.what()) << "\n\n" << app.help();
            return kExitUsage;
        }

        try {
            action_();
            return kExitOk;
        } catch (const UsageError& e) {
            err_ << "qtsc: " << e.what() << '\n';
            return kExitUsage;
        } catch (const DataError& e) {
            err_ << "qtsc: data error: " << e.what() << '\n';
            return kExitData;
        } catch (const ShapeError& e) {
            err_ << "qtsc: data error: " << e.what() << '\n';
            return kExitData;
        } catch (const CapacityError& e) {
            err_ << "qtsc: data error: " << e.what() << '\n';
            return kExitData;
        } catch (const fs::filesystem_error& e) {
            err_ << "qtsc: data error: " << e.what() << '\n';
            return kExitData;
        } catch (const std::invalid_argument& e) {
            err_ << "qtsc: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::exception& e) {
            err_ << "qtsc: error: " << e.what() << '\n';
            return kExitData;
        }
    }

private:
    RunManifest begin(const std::string& command, const std::string& config, std::uint64_t seed) {
        RunManifest m;
        m.command = command;
        m.config_path = config;
        m.seed = seed;
        m.timestamp = utc_timestamp();
        m.output_dir = out_dir_.empty() ? default_output(command) : fs::path(out_dir_);
        m.argv = argv_;
        fs::create_directories(m.output_dir);
        return m;
    }

    void add_out(CLI::App* sub) { sub->add_option("--out", out_dir_, "Output directory"); }

    // gen ---------------------------------------------------------------
    void setup_gen(CLI::App& app) {
        auto* sub = app.add_subcommand("gen", "Generate a synthetic dataset (logistic, lorenz or sine bank)");
        sub->add_option("--system", gen_system_, "logistic | lorenz | sine")->required()
            ->check(CLI::IsMember({"logistic", "lorenz", "sine"}));
        sub->add_option("--config", config_, "Generator key-value file (flags override it)")->check(CLI::ExistingFile);
        sub->add_option("--classes", gen_.classes, "Number of classes");
        sub->add_option("--per-class", gen_.per_class, "Realizations per class");
        sub->add_option("--length", gen_.length, "Samples per realization");
        sub->add_option("--noise", gen_.noise, "Uniform noise amplitude");
        sub->add_option("--alpha", gen_.sine_alpha, "Sine bank base frequency");
        sub->add_option("--beta", gen_.sine_beta, "Sine bank frequency step between classes");
        sub->add_option("--seed", seed_, "Random seed");
        add_out(sub);
        sub->callback([this, sub] { action_ = [this, sub] { cmd_gen(sub); }; });
    }

    void cmd_gen(CLI::App* sub) {
        datagen::GeneratorConfig g;
        if (!config_.empty()) g = datagen::generator_config_from(KeyValues::load(config_));
        g.system = datagen::system_from_string(gen_system_);
        const auto given = [&](const char* name) { return sub->count(name) > 0; };
        if (given("--classes")) g.classes = gen_.classes;
        if (given("--per-class")) g.per_class = gen_.per_class;
        if (given("--length")) g.length = gen_.length;
        if (given("--noise")) g.noise = gen_.noise;
        if (given("--alpha")) g.sine_alpha = gen_.sine_alpha;
        if (given("--beta")) g.sine_beta = gen_.sine_beta;
        if (given("--seed")) g.seed = seed_;
        if (!given("--classes") && !g.class_params.empty()) g.classes = static_cast<int>(g.class_params.size());
        try {
            g.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        RunManifest m = begin("gen", config_, g.seed);
        const datagen::SyntheticDataset ds = datagen::generate(g);
        KeyValues extra;
        datagen::write_generator_config(extra, g, ds.class_params);
        ingest::save_dataset_dir(m.output_dir, ds.data, extra);
        m.save();
        out_ << "wrote " << ds.data.records.size() << " " << datagen::to_string(g.system) << " realizations ("
             << g.classes << " classes) to " << m.output_dir.string() << '\n';
    }

    // embed -------------------------------------------------------------
    void setup_embed(CLI::App& app) {
        auto* sub = app.add_subcommand("embed", "Fourier distance matrix and 2-D embedding of a dataset");
        sub->add_option("--data", data_, "Dataset directory")->required();
        sub->add_option("--iters", embed_.iters, "Optimizer iterations");
        sub->add_option("--eta", embed_.eta, "Perturbation standard deviation");
        sub->add_option("--metric", embed_metric_, "as_printed | euclidean")
            ->check(CLI::IsMember({"as_printed", "euclidean"}));
        sub->add_option("--seed", seed_, "Random seed");
        add_out(sub);
        sub->callback([this] { action_ = [this] { cmd_embed(); }; });
    }

    void cmd_embed() {
        const ingest::LoadedDataset ld = ingest::load_dataset_dir(data_);
        std::vector<std::vector<double>> signals;
        std::vector<int> classes;
        for (const auto& r : ld.all.records) {
            signals.push_back(r.channels.front());
            classes.push_back(r.label);
        }
        analysis::EmbedOptions opt = embed_;
        opt.seed = seed_;
        opt.metric = analysis::metric_from_string(embed_metric_);
        RunManifest m = begin("embed", "", opt.seed);
        const analysis::DistanceMatrix dm = analysis::fourier_distance(signals, classes);
        const analysis::Embedding2D e = analysis::embed_2d(dm, opt);
        const double rho = analysis::embedding_correlation(dm, e);
        analysis::write_distance_csv((m.output_dir / "distance.csv").string(), dm);
        analysis::write_embedding_csv((m.output_dir / "embedding.csv").string(), dm, e);
        analysis::write_energy_csv((m.output_dir / "energy.csv").string(), e);
        m.extra.set("data", data_);
        m.extra.set("iters", opt.iters);
        m.extra.set("eta", opt.eta);
        m.extra.set("metric", std::string(analysis::to_string(opt.metric)));
        m.extra.set("final_energy", e.energy);
        m.extra.set("correlation", rho);
        m.save();
        out_ << "realizations " << signals.size() << "\nfinal energy " << e.energy << "\ncorrelation " << rho << '\n';
    }

    // train -------------------------------------------------------------
    void setup_train(CLI::App& app) {
        auto* sub = app.add_subcommand("train", "Train a CNN-LSTM on a dataset directory");
        sub->add_option("--data", data_, "Dataset directory")->required();
        sub->add_option("--config", config_, "Network/training key-value file")->check(CLI::ExistingFile);
        sub->add_option("--precision", precision_, "full | ternary | binary")
            ->check(CLI::IsMember({"full", "ternary", "binary"}));
        sub->add_option("--epochs", epochs_, "Override the configured epoch count");
        sub->add_option("--seed", seed_, "Override the configured seed");
        sub->add_option("--lr", lr_, "Override the learning rate");
        add_out(sub);
        sub->callback([this, sub] { action_ = [this, sub] { cmd_train(sub); }; });
    }

    void cmd_train(CLI::App* sub) {
        const KeyValues kv = config_.empty() ? KeyValues{} : KeyValues::load(config_);
        model::NetworkConfig net;
        try {
            net = model::network_config_from(kv);
        } catch (const ShapeError& e) {
            throw UsageError(std::string("config: ") + e.what());
        }
        const quant::Precision prec = quant::precision_from_string(
            sub->count("--precision") ? precision_ : kv.get_or<std::string>("precision", "full"));
        train::TrainConfig tc;
        tc.learning_rate = kv.get_or("learning_rate", train::default_learning_rate(prec));
        tc.clip = kv.get_or("clip", tc.clip);
        tc.epochs = kv.get_or("epochs", tc.epochs);
        tc.batch_size = kv.get_or("batch_size", tc.batch_size);
        tc.init_range = kv.get_or("init_range", tc.init_range);
        tc.seed = kv.get_or("seed", tc.seed);
        tc.replication = kv.get_or("replication", tc.replication);
        if (sub->count("--epochs")) tc.epochs = epochs_;
        if (sub->count("--seed")) tc.seed = seed_;
        if (sub->count("--lr")) tc.learning_rate = lr_;
        try {
            tc.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        Preprocess pp;
        pp.train_fraction = kv.get_or("train_fraction", pp.train_fraction);
        pp.split_seed = kv.get_or("split_seed", tc.seed);
        pp.envelope = kv.get_or("envelope", pp.envelope);

        const ingest::Split split = ingest::prepare(ingest::load_dataset_dir(data_), pp.train_fraction, pp.split_seed, pp.envelope);
        if (split.train.num_channels() != net.channels)
            throw ShapeError("dataset has " + std::to_string(split.train.num_channels()) + " channels, config says " +
                             std::to_string(net.channels));
        if (split.train.num_classes() != net.classes)
            throw ShapeError("dataset has " + std::to_string(split.train.num_classes()) + " classes, config says " +
                             std::to_string(net.classes));
        const auto train_set = cut_all(split.train.records, net.window, net.steps);
        const auto test_set = cut_all(split.test.records, net.window, net.steps);

        RunManifest m = begin("train", config_, tc.seed);
        std::ofstream trace(m.output_dir / "trace.csv");
        trace << "epoch,loss,test_accuracy\n" << std::setprecision(17);
        const train::TrainResult res = train::train(train_set, test_set, net, prec, tc, [&](int ep, double loss, double acc) {
            trace << ep << ',' << loss << ',' << acc << '\n';
        });
        const fs::path model_dir = m.output_dir / "model";
        model::save_model(model_dir, res.params);
        pp.save(model_dir);
        const train::EvalReport rep = train::evaluate(res.params, test_set);

        write_network_config(m.extra, net);
        m.extra.set("data", data_);
        m.extra.set("precision", std::string(quant::to_string(prec)));
        m.extra.set("learning_rate", tc.learning_rate);
        m.extra.set("clip", tc.clip);
        m.extra.set("epochs", tc.epochs);
        m.extra.set("batch_size", tc.batch_size);
        m.extra.set("init_range", tc.init_range);
        m.extra.set("replication", tc.replication ? 1 : 0);
        m.extra.set("train_fraction", pp.train_fraction);
        m.extra.set("split_seed", pp.split_seed);
        m.extra.set("envelope", pp.envelope ? 1 : 0);
        m.extra.set("train_sequences", train_set.size());
        m.extra.set("test_sequences", test_set.size());
        m.extra.set("test_accuracy", rep.accuracy);
        m.extra.set("test_macro_auc", rep.macro_auc);
        m.save();
        out_ << "trained " << quant::to_string(prec) << " model on " << train_set.size() << " sequences\n"
             << "test accuracy " << rep.accuracy << "\nmodel " << model_dir.string() << '\n';
    }

    // quantize ----------------------------------------------------------
    void setup_quantize(CLI::App& app) {
        auto* sub = app.add_subcommand("quantize", "Pack a trained binary/ternary model into 2-bit codes");
        sub->add_option("--model", model_, "Trained model directory")->required();
        add_out(sub);
        sub->callback([this] { action_ = [this] { cmd_quantize(); }; });
    }

    void cmd_quantize() {
        const model::NetworkParams p = model::load_model(model_);
        if (!quant::is_quantized(p.precision))
            throw UsageError("quantize: model '" + model_ + "' is full precision; train with --precision ternary or binary");
        RunManifest m = begin("quantize", "", 0);
        model::save_model(m.output_dir, p, true);
        copy_if_exists(fs::path(model_) / "preprocess.txt", m.output_dir / "preprocess.txt");
        m.extra.set("model", model_);
        m.save();
        out_ << "packed " << quant::to_string(p.precision) << " model to " << m.output_dir.string() << '\n';
    }

    // eval --------------------------------------------------------------
    void setup_eval(CLI::App& app) {
        auto* sub = app.add_subcommand("eval", "Evaluate a model on the test split of a dataset");
        sub->add_option("--model", model_, "Model directory")->required();
        sub->add_option("--data", data_, "Dataset directory")->required();
        sub->add_option("--report", report_, "accuracy | auc | confusion")
            ->check(CLI::IsMember({"accuracy", "auc", "confusion"}));
        add_out(sub);
        sub->callback([this] { action_ = [this] { cmd_eval(); }; });
    }

    void cmd_eval() {
        const model::NetworkParams p = model::load_model(model_);
        const auto test = test_sequences(data_, p.cfg, Preprocess::load(model_));
        const train::EvalReport rep = train::evaluate(p, test);
        RunManifest m = begin("eval", "", 0);
        std::ostringstream text;
        text << std::setprecision(6);
        if (report_ == "accuracy") {
            text << "accuracy " << rep.accuracy << '\n';
        } else if (report_ == "auc") {
            text << "macro_auc " << rep.macro_auc << '\n';
        } else {
            text << "target\\predicted";
            for (std::size_t k = 0; k < rep.confusion.size(); ++k) text << ',' << k;
            text << '\n';
            for (std::size_t t = 0; t < rep.confusion.size(); ++t) {
                text << t;
                for (int v : rep.confusion[t]) text << ',' << v;
                text << '\n';
            }
        }
        std::ofstream(m.output_dir / ("report_" + report_ + ".txt")) << text.str();
        m.extra.set("model", model_);
        m.extra.set("data", data_);
        m.extra.set("report", report_);
        m.extra.set("accuracy", rep.accuracy);
        m.extra.set("macro_auc", rep.macro_auc);
        m.extra.set("test_sequences", test.size());
        m.save();
        out_ << text.str();
    }

    // simulate ----------------------------------------------------------
    void setup_simulate(CLI::App& app) {
        auto* sub = app.add_subcommand("simulate", "Run the cycle-level hardware simulator on the test split");
        sub->add_option("--model", model_, "Binary/ternary model directory")->required();
        sub->add_option("--data", data_, "Dataset directory")->required();
        sub->add_option("--machine", machine_, "Machine key-value file")->check(CLI::ExistingFile);
        sub->add_flag("--trace", trace_, "Write a cycle trace of the first sequence");
        sub->add_option("--limit", limit_, "Simulate at most this many sequences (0 = all)");
        sub->add_option("--sample-rate", sample_rate_, "Sampling rate for the real-time budget (default: dataset manifest)");
        add_out(sub);
        sub->callback([this] { action_ = [this] { cmd_simulate(); }; });
    }

    void cmd_simulate() {
        const model::NetworkParams p = model::load_model(model_);
        if (!quant::is_quantized(p.precision)) throw UsageError("simulate: the machine runs binary or ternary models only");
        const fsm::MachineConfig mc = machine_.empty() ? fsm::MachineConfig{} : fsm::load_machine_config(machine_);
        const model::HardwareModel hw = model::to_hardware(p, mc.activation, mc.dense_weight, static_cast<std::size_t>(mc.lut_size));
        const fsm::MemoryBanks banks = fsm::load_banks(hw, mc);
        auto test = test_sequences(data_, p.cfg, Preprocess::load(model_));
        if (limit_ > 0 && test.size() > limit_) test.resize(limit_);
        double rate = sample_rate_;
        if (!(rate > 0.0)) rate = ingest::load_dataset_dir(data_).all.sample_rate_hz;

        RunManifest m = begin("simulate", machine_, 0);
        std::ofstream csv(m.output_dir / "report.csv");
        csv << std::setprecision(12);
        fsm::write_report_csv_header(csv);
        std::ofstream trace;
        if (trace_) trace.open(m.output_dir / "trace.csv");
        std::size_t correct = 0, agree = 0;
        fsm::CycleReport first;
        for (std::size_t k = 0; k < test.size(); ++k) {
            const auto r = fsm::run_inference(test[k], banks, mc, trace_ && k == 0 ? &trace : nullptr);
            const auto gold = model::network_forward_fixed(test[k], hw);
            correct += r.label == test[k].label;
            agree += r.logits == gold.logits;
            fsm::write_report_csv_row(csv, k, test[k].label, r.label, r.report);
            if (k == 0) first = r.report;
        }
        const double budget = fsm::window_budget_seconds(p.cfg.window, rate);
        const fsm::LatencyReport lat = fsm::latency_report(first, budget);
        std::ostringstream text;
        text << "sequences           " << test.size() << '\n'
             << "hardware_accuracy   " << (test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size())) << '\n'
             << "golden_agreement    " << agree << '/' << test.size() << '\n';
        fsm::write_report_text(text, first);
        text << "window_budget_s     " << budget << '\n'
             << "budget_margin       " << lat.margin << '\n'
             << "realtime            " << (lat.pass ? "PASS" : "FAIL") << '\n';
        std::ofstream(m.output_dir / "report.txt") << text.str();
        m.extra.set("model", model_);
        m.extra.set("data", data_);
        write_machine_config(m.extra, mc);
        m.save();
        out_ << text.str();
    }

    // estimate ----------------------------------------------------------
    void setup_estimate(CLI::App& app) {
        auto* sub = app.add_subcommand("estimate", "Memory and MAC estimates for a network config");
        sub->add_option("--config", config_, "Network key-value file")->required()->check(CLI::ExistingFile);
        sub->add_option("--gops", gops_, "Throughput for the response-time line");
        add_out(sub);
        sub->callback([this] { action_ = [this] { cmd_estimate(); }; });
    }

    void cmd_estimate() {
        const KeyValues kv = KeyValues::load(config_);
        model::NetworkConfig net;
        try {
            net = model::network_config_from(kv);
        } catch (const ShapeError& e) {
            throw UsageError(std::string("config: ") + e.what());
        }
        const int t_hidden = kv.get_or("ternary_hidden", net.hidden);
        const std::string name = kv.get_or<std::string>("name", fs::path(config_).stem().string());
        const auto rows = estimate::table_rows(net, t_hidden);
        const auto paper = estimate::mac_count(net, estimate::MacVariant::paper, estimate::MacScope::window);
        const auto truth = estimate::mac_count(net, estimate::MacVariant::true_count, estimate::MacScope::window);
        std::ostringstream text;
        estimate::print_table(text, name, rows);
        text << "paper MACs per window   " << paper << '\n'
             << "true MACs per window    " << truth << '\n'
             << "response time (paper MACs at " << gops_ << " GOPs) " << std::setprecision(4)
             << estimate::response_time(static_cast<double>(paper), gops_) * 1e6 << " us\n";
        RunManifest m = begin("estimate", config_, 0);
        std::ofstream(m.output_dir / "estimate.txt") << text.str();
        write_network_config(m.extra, net);
        m.extra.set("ternary_hidden", t_hidden);
        m.extra.set("gops", gops_);
        m.save();
        out_ << text.str();
    }

    std::ostream& out_;
    std::ostream& err_;
    std::vector<std::string> argv_;
    std::function<void()> action_;

    std::string out_dir_, config_, data_, model_, machine_;
    std::uint64_t seed_ = 1;
    std::string gen_system_;
    datagen::GeneratorConfig gen_;
    analysis::EmbedOptions embed_;
    std::string embed_metric_ = "as_printed";
    std::string precision_ = "full";
    int epochs_ = 0;
    double lr_ = 0.0;
    std::string report_ = "accuracy";
    bool trace_ = false;
    std::size_t limit_ = 0;
    double sample_rate_ = 0.0;
    double gops_ = 6.3;
};

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return App(out, err).run(argc, argv);
}

}  // namespace qtsc::cli
