/*
 * SPDX-FileCopyrightText: <text>Copyright 2026 The scforge authors</text>
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * This file is part of scforge, a side-channel analysis workbench.
 */
#include "scf/cli.hpp"

#include "scf/cpa.hpp"
#include "scf/errors.hpp"
#include "scf/leakage.hpp"
#include "scf/metrics.hpp"
#include "scf/rng.hpp"
#include "scf/trace_store.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

namespace scf::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

leakage::Model parse_model(const std::string &s) {
    if (s == "hw" || s == "hamming_weight")
        return leakage::Model::HammingWeight;
    if (s == "hd" || s == "hamming_distance")
        return leakage::Model::HammingDistance;
    throw ConfigError("unknown model: " + s +
                      " (expected hw|hd|hamming_weight|hamming_distance)");
}

leakage::Reselect parse_reselect(const std::string &s) {
    if (s == "per-trace" || s == "per_trace")
        return leakage::Reselect::PerTrace;
    if (s == "per-op" || s == "per_op")
        return leakage::Reselect::PerOp;
    throw ConfigError("unknown reselect granularity: " + s);
}

bool parse_fit(const std::string &s) {
    if (s == "center")
        return false;
    if (s == "span")
        return true;
    throw ConfigError("unknown fit: " + s + " (expected center|span)");
}

std::uint8_t parse_u8(const std::string &s, const char *what) {
    int v = -1;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0 ||
        v > 255)
        throw ConfigError(std::string("expected a byte value for ") + what +
                          ", got: " + s);
    return static_cast<std::uint8_t>(v);
}

// Options shared by simulate and evaluate for the leakage model and bank.
struct ModelOpts {
    std::string model = "hw";
    std::string hd_ref = "0";
    double noise = 0.0;
    int samples_per_op = 4;
    int trace_length = 200;
    std::string reselect = "per-trace";
    int variants = 3;
    std::vector<double> ladder = {0.0, 10.0, 20.0, 30.0, 40.0};
    double data_gain = 0.1;
    std::string fit = "center";
};

void add_model_options(CLI::App *cmd, ModelOpts &m, double default_noise) {
    m.noise = default_noise;
    cmd->add_option("--model", m.model,
                    "power model: hw (Hamming weight) or hd (distance)")
        ->capture_default_str();
    cmd->add_option("--hd-ref", m.hd_ref,
                    "reference byte for the hd model (0 reduces hd to hw)")
        ->capture_default_str();
    cmd->add_option("--noise", m.noise, "Gaussian noise std, power units")
        ->capture_default_str();
    cmd->add_option("--samples-per-op", m.samples_per_op,
                    "samples per op slot (the attack slot always gets 16)")
        ->capture_default_str();
    cmd->add_option("--trace-length", m.trace_length, "samples per trace")
        ->capture_default_str();
    cmd->add_option("--reselect", m.reselect,
                    "variant reselection: per-trace or per-op")
        ->capture_default_str();
    cmd->add_option("--variants", m.variants, "swapper variants per op")
        ->capture_default_str();
    cmd->add_option("--ladder", m.ladder,
                    "power range rungs p1<p2<...; variant j spans rungs "
                    "j..j+2")
        ->delimiter(',')
        ->expected(1, 64);
    cmd->add_option("--data-gain", m.data_gain,
                    "power units per Hamming-weight unit under the swapper")
        ->capture_default_str();
    cmd->add_option("--fit", m.fit,
                    "variant affine fit inside its range: center or span")
        ->capture_default_str();
}

leakage::LeakageConfig make_config(const ModelOpts &m, std::uint64_t seed,
                                   const std::string &defense,
                                   bool log_variants) {
    leakage::LeakageConfig config;
    config.model = parse_model(m.model);
    config.hd_reference = parse_u8(m.hd_ref, "--hd-ref");
    config.noise_sigma = m.noise;
    config.samples_per_op = m.samples_per_op;
    config.trace_length = m.trace_length;
    config.reselect = parse_reselect(m.reselect);
    config.seed = seed;
    config.log_variants = log_variants;
    config.ladder = m.ladder;
    config.variants_per_op = m.variants;
    config.data_gain = m.data_gain;
    config.span_fit = parse_fit(m.fit);
    if (defense == "none")
        config.defense = leakage::Defense::None;
    else if (defense == "swapper")
        config.defense = leakage::Defense::Swapper;
    else
        throw ConfigError("unknown defense: " + defense +
                          " (expected none|swapper)");
    leakage::validate_config(config);
    return config;
}

// ---- simulate ----------------------------------------------------------

struct SimulateOpts {
    ModelOpts model;
    std::uint64_t traces = 0;
    std::string key_hex;
    std::string out_path;
    std::uint64_t seed = 1;
    std::string defense = "none";
    std::string enumerate_byte; // empty, "all", or a position
    std::string pt_file;
    bool log_variants = false;
};

int cmd_simulate(const SimulateOpts &o, std::ostream &out) {
    if (o.traces < 1)
        throw ConfigError("--traces must be >= 1");
    if (!o.enumerate_byte.empty() && !o.pt_file.empty())
        throw ConfigError(
            "--enumerate-pt-byte and --pt-file are mutually exclusive");
    const aes::Key128 key = aes::parse_hex_block(o.key_hex);
    const leakage::LeakageConfig config =
        make_config(o.model, o.seed, o.defense, o.log_variants);

    leakage::PtSource source;
    if (!o.pt_file.empty()) {
        source.kind = leakage::PtSource::Kind::File;
        source.file = o.pt_file;
    } else if (!o.enumerate_byte.empty()) {
        source.kind = leakage::PtSource::Kind::Enumerate;
        source.enumerate_byte =
            o.enumerate_byte == "all"
                ? -1
                : static_cast<int>(parse_u8(o.enumerate_byte,
                                            "--enumerate-pt-byte"));
        if (source.enumerate_byte > 15)
            throw ConfigError("--enumerate-pt-byte position must be 0..15 "
                              "or 'all'");
    }

    leakage::generate_campaign(o.out_path, o.traces, key, config, source);
    out << "wrote " << o.traces << " traces x " << config.trace_length
        << " samples to " << o.out_path << " (defense=" << o.defense
        << ", noise=" << fmt_double(config.noise_sigma)
        << ", seed=" << config.seed << ")\n";
    return kExitOk;
}

// ---- attack ------------------------------------------------------------

struct AttackOpts {
    std::string in_path;
    std::string out_path;
    std::string truth_hex;
    std::string window; // "LO:HI"
    std::string model = "hw";
    std::string hd_ref = "0";
    int jobs = 1;
    bool color = false;
};

int cmd_attack(const AttackOpts &o, std::ostream &out) {
    cpa::AttackConfig config;
    config.model.model = parse_model(o.model);
    config.model.hd_reference = parse_u8(o.hd_ref, "--hd-ref");
    config.jobs = o.jobs;
    if (!o.window.empty()) {
        const std::size_t colon = o.window.find(':');
        if (colon == std::string::npos)
            throw ConfigError("--window expects LO:HI, got: " + o.window);
        try {
            config.window_lo = std::stoi(o.window.substr(0, colon));
            config.window_hi = std::stoi(o.window.substr(colon + 1));
        } catch (const std::exception &) {
            throw ConfigError("--window expects LO:HI, got: " + o.window);
        }
    }
    if (!o.truth_hex.empty())
        config.truth = aes::parse_hex_block(o.truth_hex);

    const cpa::KeyRecoveryReport report = cpa::recover_key(o.in_path, config);
    const std::string json = cpa::to_json(report);
    if (o.out_path.empty()) {
        out << json;
        return kExitOk;
    }
    std::ofstream f(o.out_path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << json) || !f.flush())
        throw IoError("cannot write report: " + o.out_path);
    out << "recovered key " << aes::to_hex(report.recovered_key) << " from "
        << report.n_traces << " traces\n";
    if (report.truth) {
        const metrics::KeyErrorMap diff =
            metrics::key_error_map(report.recovered_key, *report.truth);
        if (diff.empty()) {
            out << "recovery exact: all 16 bytes rank 0\n";
        } else {
            out << diff.byte_diffs.size() << " wrong bytes, "
                << diff.nibble_diffs.size() << " wrong nibbles\n"
                << diff.render(o.color);
        }
    }
    out << "report written to " << o.out_path << "\n";
    return kExitOk;
}

// ---- evaluate ----------------------------------------------------------

struct EvaluateOpts {
    ModelOpts model;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> traces = {5000};
    int trials = 20;
    std::string defense = "both";
    int threshold_rank = 0;
    int jobs = 1;
    bool keep_traces = false;
    bool color = false;
};

struct EvalTask {
    std::size_t cell;
    std::size_t arm;
    int trial;
};

int cmd_evaluate(const EvaluateOpts &o, std::ostream &out) {
    if (o.traces.empty() || o.trials < 1)
        throw ConfigError("evaluation grid is empty: need --traces values "
                          "and --trials >= 1");
    for (const std::uint64_t n : o.traces)
        if (n < 2)
            throw ConfigError("every --traces value must be >= 2");
    if (o.jobs < 1)
        throw ConfigError("--jobs must be >= 1");

    std::vector<std::string> arms;
    if (o.defense == "both")
        arms = {"none", "swapper"};
    else if (o.defense == "none" || o.defense == "swapper")
        arms = {o.defense};
    else
        throw ConfigError("unknown defense arm: " + o.defense +
                          " (expected none|swapper|both)");

    // Validate model options once up front so usage errors beat I/O.
    make_config(o.model, o.seed, arms[0], false);

    const fs::path out_dir(o.out_dir);
    const fs::path trace_dir = out_dir / "traces";
    std::error_code ec;
    fs::create_directories(trace_dir, ec);
    if (ec)
        throw IoError("cannot create output directory: " +
                      trace_dir.string() + " (" + ec.message() + ")");

    // outcomes[cell][arm][trial]; keys[cell][trial] shared between arms.
    std::vector<std::vector<std::vector<metrics::TrialOutcome>>> outcomes(
        o.traces.size());
    std::vector<std::vector<aes::Key128>> keys(o.traces.size());
    for (std::size_t c = 0; c < o.traces.size(); ++c) {
        outcomes[c].assign(arms.size(), std::vector<metrics::TrialOutcome>(
                                            static_cast<std::size_t>(
                                                o.trials)));
        keys[c].resize(static_cast<std::size_t>(o.trials));
        for (int t = 0; t < o.trials; ++t) {
            const std::uint64_t ts = rng::trial_seed(
                o.seed, static_cast<std::uint64_t>(c),
                static_cast<std::uint64_t>(t));
            keys[c][static_cast<std::size_t>(t)] =
                rng::bytes16(rng::derive(ts, rng::kTagKey), 0);
        }
    }

    std::vector<EvalTask> tasks;
    for (std::size_t c = 0; c < o.traces.size(); ++c)
        for (std::size_t a = 0; a < arms.size(); ++a)
            for (int t = 0; t < o.trials; ++t)
                tasks.push_back(EvalTask{c, a, t});

    auto config_for = [&](std::size_t cell, std::size_t arm,
                          int trial) -> leakage::LeakageConfig {
        const std::uint64_t ts =
            rng::trial_seed(o.seed, static_cast<std::uint64_t>(cell),
                            static_cast<std::uint64_t>(trial));
        return make_config(o.model, ts, arms[arm], false);
    };

    auto run_task = [&](const EvalTask &task) {
        const std::uint64_t n = o.traces[task.cell];
        const leakage::LeakageConfig config =
            config_for(task.cell, task.arm, task.trial);
        const aes::Key128 &key =
            keys[task.cell][static_cast<std::size_t>(task.trial)];
        const fs::path trace_path =
            trace_dir / (arms[task.arm] + "_n" + std::to_string(n) + "_t" +
                         std::to_string(task.trial) + ".scf");

        leakage::generate_campaign(trace_path.string(), n, key, config, {});
        cpa::AttackConfig attack;
        attack.model.model = config.model;
        attack.model.hd_reference = config.hd_reference;
        attack.truth = key;
        const cpa::KeyRecoveryReport report =
            cpa::recover_key(trace_path.string(), attack);

        metrics::TrialOutcome outcome;
        outcome.seed = config.seed;
        outcome.ranks = report.true_ranks;
        outcome.recovered = report.recovered_key;
        outcome.traces_used = n;
        outcomes[task.cell][task.arm][static_cast<std::size_t>(task.trial)] =
            outcome;
        if (!o.keep_traces)
            fs::remove(trace_path);
    };

    if (o.jobs == 1 || tasks.size() <= 1) {
        for (const EvalTask &task : tasks)
            run_task(task);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(tasks.size());
        const int workers =
            std::min<std::size_t>(static_cast<std::size_t>(o.jobs),
                                  tasks.size());
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i =
                        next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= tasks.size())
                        return;
                    try {
                        run_task(tasks[i]);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto &t : pool)
            t.join();
        for (const auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    // outcomes.csv: one row per trial.
    {
        std::ofstream f(out_dir / "outcomes.csv",
                        std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot write: " +
                          (out_dir / "outcomes.csv").string());
        f << "defense,n_traces,trial,seed,recovered_key,true_key,"
             "wrong_bytes,success";
        for (int b = 0; b < 16; ++b)
            f << ",rank_" << (b < 10 ? "0" : "") << b;
        f << "\n";
        for (std::size_t c = 0; c < o.traces.size(); ++c)
            for (std::size_t a = 0; a < arms.size(); ++a)
                for (int t = 0; t < o.trials; ++t) {
                    const metrics::TrialOutcome &tr =
                        outcomes[c][a][static_cast<std::size_t>(t)];
                    f << arms[a] << ',' << o.traces[c] << ',' << t << ','
                      << tr.seed << ',' << aes::to_hex(tr.recovered) << ','
                      << aes::to_hex(
                             keys[c][static_cast<std::size_t>(t)])
                      << ',' << metrics::wrong_bytes(tr) << ','
                      << (metrics::full_recovery(tr, o.threshold_rank) ? 1
                                                                       : 0);
                    for (const int r : tr.ranks)
                        f << ',' << r;
                    f << "\n";
                }
    }

    // summary.csv: one row per (defense, n_traces).
    {
        std::ofstream f(out_dir / "summary.csv",
                        std::ios::binary | std::ios::trunc);
        f << "defense,n_traces,trials,success_rate,mean_guessing_entropy,"
             "mean_wrong_bytes\n";
        for (std::size_t c = 0; c < o.traces.size(); ++c)
            for (std::size_t a = 0; a < arms.size(); ++a) {
                const auto &arm = outcomes[c][a];
                double wrong = 0.0;
                for (const auto &tr : arm)
                    wrong += metrics::wrong_bytes(tr);
                f << arms[a] << ',' << o.traces[c] << ',' << o.trials << ','
                  << fmt_double(
                         metrics::success_rate(arm, o.threshold_rank))
                  << ',' << fmt_double(metrics::mean_guessing_entropy(arm))
                  << ','
                  << fmt_double(wrong / static_cast<double>(o.trials))
                  << "\n";
            }
    }

    // distribution.csv: wrong-byte histogram rows.
    {
        std::ofstream f(out_dir / "distribution.csv",
                        std::ios::binary | std::ios::trunc);
        f << "defense,n_traces,wrong_bytes,count\n";
        for (std::size_t c = 0; c < o.traces.size(); ++c)
            for (std::size_t a = 0; a < arms.size(); ++a) {
                std::array<std::uint64_t, 17> hist{};
                for (const auto &tr : outcomes[c][a])
                    hist[static_cast<std::size_t>(
                        metrics::wrong_bytes(tr))] += 1;
                for (int w = 0; w <= 16; ++w)
                    f << arms[a] << ',' << o.traces[c] << ',' << w << ','
                      << hist[static_cast<std::size_t>(w)] << "\n";
            }
    }

    std::vector<metrics::DefenseComparison> comparisons;
    if (arms.size() == 2) {
        std::ofstream f(out_dir / "comparison.csv",
                        std::ios::binary | std::ios::trunc);
        f << "n_traces,trials,ge_none,ge_swapper,sr_none,sr_swapper,"
             "ge_wins,sr_wins\n";
        for (std::size_t c = 0; c < o.traces.size(); ++c) {
            const metrics::DefenseComparison cmp =
                metrics::DefenseComparison::make(
                    config_for(c, 0, 0), outcomes[c][0], config_for(c, 1, 0),
                    outcomes[c][1], o.traces[c], o.threshold_rank);
            f << cmp.n_traces << ',' << cmp.trials << ','
              << fmt_double(cmp.baseline.mean_ge) << ','
              << fmt_double(cmp.swapper.mean_ge) << ','
              << fmt_double(cmp.baseline.success) << ','
              << fmt_double(cmp.swapper.success) << ',' << cmp.ge_wins << ','
              << cmp.sr_wins << "\n";
            comparisons.push_back(cmp);
        }
    }

    // spec.json: the fully resolved run parameters.
    {
        nlohmann::json spec;
        spec["command"] = "evaluate";
        spec["seed"] = o.seed;
        spec["traces"] = o.traces;
        spec["trials"] = o.trials;
        spec["arms"] = arms;
        spec["threshold_rank"] = o.threshold_rank;
        spec["jobs"] = o.jobs;
        spec["keep_traces"] = o.keep_traces;
        spec["model"] = {{"model", o.model.model},
                         {"hd_reference", o.model.hd_ref},
                         {"noise_sigma", o.model.noise},
                         {"samples_per_op", o.model.samples_per_op},
                         {"trace_length", o.model.trace_length},
                         {"reselect", o.model.reselect},
                         {"variants_per_op", o.model.variants},
                         {"ladder", o.model.ladder},
                         {"data_gain", o.model.data_gain},
                         {"fit", o.model.fit}};
        std::ofstream f(out_dir / "spec.json",
                        std::ios::binary | std::ios::trunc);
        f << spec.dump(2) << "\n";
    }

    for (std::size_t c = 0; c < o.traces.size(); ++c)
        for (std::size_t a = 0; a < arms.size(); ++a) {
            const auto &arm = outcomes[c][a];
            out << "n=" << o.traces[c] << " defense=" << arms[a]
                << " success_rate="
                << fmt_double(metrics::success_rate(arm, o.threshold_rank))
                << " mean_ge="
                << fmt_double(metrics::mean_guessing_entropy(arm)) << "\n";
        }
    for (const metrics::DefenseComparison &cmp : comparisons) {
        out << "paired n=" << cmp.n_traces << ": swapper ge > none in "
            << cmp.ge_wins << "/" << cmp.trials
            << " trials; baseline-only full recovery in " << cmp.sr_wins
            << "/" << cmp.trials << " trials\n";
    }
    if (arms.size() == 2) {
        // Show the highlighted diff of the first swapper miss, the
        // per-trial analog of the corrupted-key tables.
        bool shown = false;
        for (std::size_t c = 0; c < o.traces.size() && !shown; ++c)
            for (int t = 0; t < o.trials && !shown; ++t) {
                const metrics::TrialOutcome &tr =
                    outcomes[c][1][static_cast<std::size_t>(t)];
                if (metrics::wrong_bytes(tr) > 0) {
                    out << "swapper miss at n=" << o.traces[c] << " trial "
                        << t << ":\n"
                        << metrics::key_error_map(
                               tr.recovered,
                               keys[c][static_cast<std::size_t>(t)])
                               .render(o.color);
                    shown = true;
                }
            }
    }

    if (!o.keep_traces) {
        std::error_code rm;
        fs::remove_all(trace_dir, rm);
    }
    out << "results in " << out_dir.string() << "\n";
    return kExitOk;
}

// ---- info --------------------------------------------------------------

struct InfoOpts {
    std::string path;
    bool confusion = false;
    std::uint64_t max_traces = 256;
    std::size_t show = 4;
    std::string key_hex;
};

int cmd_info(const InfoOpts &o, std::ostream &out) {
    store::TraceSetReader reader(o.path);
    const store::TraceSetHeader &h = reader.header();
    out << "file:        " << o.path << "\n"
        << "n_traces:    " << h.n_traces << "\n"
        << "n_samples:   " << h.n_samples << "\n"
        << "dtype:       f32le\n"
        << "variant_log: " << (h.has_variant_log() ? "yes" : "no") << "\n"
        << "record_size: " << h.record_size() << " bytes\n"
        << "metadata:\n";
    for (const auto &[k, v] : h.metadata)
        out << "  " << k << "=" << v << "\n";
    if (!o.confusion)
        return kExitOk;

    std::optional<aes::Key128> key;
    if (!o.key_hex.empty())
        key = aes::parse_hex_block(o.key_hex);
    const metrics::ConfusionReport report =
        metrics::op_confusion_report(reader, o.max_traces, key);
    out << report.render(o.show);
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
    CLI::App app{"synthesizes AES-128 power-trace campaigns, runs CPA key "
                 "recovery against them, and scores the swap defense",
                 "scforge"};
    app.require_subcommand(1);

    SimulateOpts sim;
    CLI::App *simulate =
        app.add_subcommand("simulate", "synthesize a trace campaign");
    add_model_options(simulate, sim.model, 0.0);
    simulate->add_option("--traces", sim.traces, "number of traces")
        ->required();
    simulate->add_option("--key", sim.key_hex, "cipher key, 32 hex chars")
        ->required();
    simulate->add_option("--out", sim.out_path, "output trace file")
        ->required();
    simulate->add_option("--seed", sim.seed, "master seed")
        ->capture_default_str();
    simulate->add_option("--defense", sim.defense, "none or swapper")
        ->capture_default_str();
    simulate->add_option(
        "--enumerate-pt-byte", sim.enumerate_byte,
        "enumerate plaintext values at one position (0..15) or 'all'");
    simulate->add_option("--pt-file", sim.pt_file,
                         "raw 16-byte plaintext records instead of random");
    simulate->add_flag("--log-variants", sim.log_variants,
                       "record per-op variant indices in each trace");

    AttackOpts atk;
    CLI::App *attack = app.add_subcommand(
        "attack", "recover the key from a trace campaign");
    attack->add_option("--in", atk.in_path, "trace file")->required();
    attack->add_option("--out", atk.out_path,
                       "report JSON path (default: stdout)");
    attack->add_option("--truth", atk.truth_hex,
                       "true key for rank evaluation, 32 hex chars");
    attack->add_option("--window", atk.window,
                       "restrict correlation to samples [LO, HI)");
    attack->add_option("--model", atk.model, "hypothesis model: hw or hd")
        ->capture_default_str();
    attack->add_option("--hd-ref", atk.hd_ref, "hd reference byte")
        ->capture_default_str();
    attack->add_option("--jobs", atk.jobs,
                       "trace partitions accumulated in parallel")
        ->capture_default_str();
    attack->add_flag("--color", atk.color, "ANSI-highlight key diffs");

    EvaluateOpts ev;
    CLI::App *evaluate = app.add_subcommand(
        "evaluate", "paired defense trials with derived per-trial seeds");
    add_model_options(evaluate, ev.model, 2.0);
    evaluate->add_option("--out-dir", ev.out_dir, "output directory")
        ->required();
    evaluate->add_option("--seed", ev.seed, "master seed")
        ->capture_default_str();
    evaluate
        ->add_option("--traces", ev.traces,
                     "campaign sizes, comma separated")
        ->delimiter(',')
        ->expected(1, 64);
    evaluate->add_option("--trials", ev.trials, "trials per cell")
        ->capture_default_str();
    evaluate->add_option("--defense", ev.defense, "none, swapper, or both")
        ->capture_default_str();
    evaluate
        ->add_option("--threshold-rank", ev.threshold_rank,
                     "success means every byte ranks at or below this")
        ->capture_default_str();
    evaluate->add_option("--jobs", ev.jobs, "trials run in parallel")
        ->capture_default_str();
    evaluate->add_flag("--keep-traces", ev.keep_traces,
                       "keep per-trial trace files under out-dir/traces");
    evaluate->add_flag("--color", ev.color, "ANSI-highlight key diffs");

    InfoOpts info;
    CLI::App *info_cmd =
        app.add_subcommand("info", "dump a trace file's header");
    info_cmd->add_option("file", info.path, "trace file")->required();
    info_cmd->add_flag("--confusion", info.confusion,
                       "classify per-op magnitudes against the baseline "
                       "levels and report executed vs inferred ops");
    info_cmd
        ->add_option("--max-traces", info.max_traces,
                     "traces scanned for the confusion report")
        ->capture_default_str();
    info_cmd
        ->add_option("--show", info.show,
                     "per-trace sequences printed in the confusion report")
        ->capture_default_str();
    info_cmd->add_option("--key", info.key_hex,
                         "verify ciphertexts against this key");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(simulate))
            return cmd_simulate(sim, out);
        if (app.got_subcommand(attack))
            return cmd_attack(atk, out);
        if (app.got_subcommand(evaluate))
            return cmd_evaluate(ev, out);
        if (app.got_subcommand(info_cmd))
            return cmd_info(info, out);
        err << "error: no subcommand\n";
        return kExitUsage;
    } catch (const ConfigError &e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitFault;
    }
}

int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run(args, out, err);
}

} // namespace scf::cli
