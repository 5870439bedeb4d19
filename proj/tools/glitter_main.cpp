#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glitter/augment.hpp"
#include "glitter/bench.hpp"
#include "glitter/config.hpp"
#include "glitter/data.hpp"
#include "glitter/errors.hpp"
#include "glitter/filtering.hpp"
#include "glitter/glitter.hpp"
#include "glitter/kernels.hpp"
#include "glitter/model.hpp"
#include "glitter/synth.hpp"
#include "glitter/training.hpp"

namespace fs = std::filesystem;
using namespace glitter;

namespace {

std::vector<std::pair<int, int>> parse_glitter_points(const std::vector<std::string>& specs) {
    std::vector<std::pair<int, int>> points;
    for (const auto& s : specs) {
        size_t colon = s.find(':');
        if (colon == std::string::npos)
            throw ConfigError("glitter point must be K:k1, got " + s);
        points.emplace_back(std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1)));
    }
    return points;
}

int run(int argc, char** argv) {
    CLI::App app{"glitter: sample-efficient data augmentation training harness"};
    app.require_subcommand(1);

    std::string kernel_backend = "auto";
    app.add_option("--kernels", kernel_backend, "kernel backend: auto|scalar|avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    // ---- augment ----
    auto* cmd_augment = app.add_subcommand("augment", "build an augmentation pool offline");
    std::string aug_dataset, aug_lexicon, aug_out = "pool.jsonl", aug_method = "eda";
    AugmentConfig acfg;
    cmd_augment->add_option("--dataset", aug_dataset)->required();
    cmd_augment->add_option("--method", aug_method)->check(CLI::IsMember({"eda", "perturb"}));
    cmd_augment->add_option("--lexicon", aug_lexicon, "required for eda");
    cmd_augment->add_option("--K", acfg.K);
    cmd_augment->add_option("--synonym-rate", acfg.synonym_rate);
    cmd_augment->add_option("--deletion-rate-max", acfg.deletion_rate_max);
    cmd_augment->add_option("--noise-scale", acfg.noise_scale);
    cmd_augment->add_option("--seed", acfg.seed);
    cmd_augment->add_option("--out", aug_out);

    // ---- validate ----
    auto* cmd_validate = app.add_subcommand("validate", "load and validate dataset and pool files");
    std::string val_dataset, val_pool;
    int val_K = 0;
    bool val_relaxed = false;
    cmd_validate->add_option("--dataset", val_dataset)->required();
    cmd_validate->add_option("--pool", val_pool);
    cmd_validate->add_option("--K", val_K, "expected pool size per example");
    cmd_validate->add_flag("--relaxed", val_relaxed, "allow ragged per-example pool counts");

    // ---- train ----
    auto* cmd_train = app.add_subcommand("train", "run a training regime");
    std::string tr_dataset, tr_pool, tr_dev, tr_teacher, tr_config, tr_out = ".";
    std::vector<std::string> tr_sets;
    int tr_K = 0;
    std::optional<uint64_t> tr_seed;
    cmd_train->add_option("--dataset", tr_dataset)->required();
    cmd_train->add_option("--pool", tr_pool);
    cmd_train->add_option("--K", tr_K, "expected pool size per example");
    cmd_train->add_option("--dev", tr_dev);
    cmd_train->add_option("--teacher", tr_teacher, "teacher checkpoint for the kd regime");
    cmd_train->add_option("--config", tr_config);
    cmd_train->add_option("--set", tr_sets, "dot-keyed config override, repeatable");
    cmd_train->add_option("--seed", tr_seed, "shorthand for --set seed=<n>");
    cmd_train->add_option("--out", tr_out, "output directory");

    // ---- eval ----
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ev_model, ev_dataset, ev_out;
    cmd_eval->add_option("--model", ev_model)->required();
    cmd_eval->add_option("--dataset", ev_dataset)->required();
    cmd_eval->add_option("--out", ev_out, "optional metrics CSV path");

    // ---- filter ----
    auto* cmd_filter = app.add_subcommand("filter", "pre-process a pool offline");
    std::string fl_dataset, fl_pool, fl_model, fl_kind = "confidence", fl_out = "filtered_pool.jsonl";
    int fl_K = 0;
    double fl_beta = 0.7;
    cmd_filter->add_option("--dataset", fl_dataset)->required();
    cmd_filter->add_option("--pool", fl_pool)->required();
    cmd_filter->add_option("--K", fl_K)->required();
    cmd_filter->add_option("--model", fl_model)->required();
    cmd_filter->add_option("--kind", fl_kind)->check(CLI::IsMember({"confidence", "label_preserving"}));
    cmd_filter->add_option("--beta", fl_beta);
    cmd_filter->add_option("--out", fl_out);

    // ---- bench ----
    auto* cmd_bench = app.add_subcommand("bench", "accuracy-vs-wall-time sweep");
    std::string bn_dataset, bn_pool, bn_dev, bn_config, bn_out = "sweep.csv";
    std::vector<std::string> bn_sets, bn_glitter;
    std::vector<int> bn_sizes;
    std::vector<uint64_t> bn_seeds;
    int bn_K = 0;
    cmd_bench->add_option("--dataset", bn_dataset)->required();
    cmd_bench->add_option("--pool", bn_pool)->required();
    cmd_bench->add_option("--K", bn_K)->required();
    cmd_bench->add_option("--dev", bn_dev);
    cmd_bench->add_option("--sizes", bn_sizes, "Vanilla-DA augmentation sizes");
    cmd_bench->add_option("--glitter", bn_glitter, "Glitter points K:k1, repeatable");
    cmd_bench->add_option("--seeds", bn_seeds)->required();
    cmd_bench->add_option("--config", bn_config);
    cmd_bench->add_option("--set", bn_sets);
    cmd_bench->add_option("--out", bn_out);

    // ---- synth ----
    auto* cmd_synth = app.add_subcommand("synth", "generate a reference synthetic task");
    SynthSpec spec;
    std::string sy_out = "synth";
    cmd_synth->add_option("--preset", spec.preset)
        ->check(CLI::IsMember({"separable", "noisy-aug", "text-toy"}));
    cmd_synth->add_option("--n", spec.n);
    cmd_synth->add_option("--n-dev", spec.n_dev);
    cmd_synth->add_option("--K", spec.K);
    cmd_synth->add_option("--corrupt-fraction", spec.corrupt_fraction);
    cmd_synth->add_option("--seed", spec.seed);
    cmd_synth->add_option("--out", sy_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    }

    if (kernel_backend == "scalar") kernels::set_backend(kernels::Backend::Scalar);
    if (kernel_backend == "avx2") kernels::set_backend(kernels::Backend::Avx2);

    if (cmd_augment->parsed()) {
        Dataset ds = load_dataset(aug_dataset);
        acfg.method = aug_method == "eda" ? AugmentMethod::Eda : AugmentMethod::Perturb;
        AugmentPool pool;
        if (acfg.method == AugmentMethod::Eda) {
            if (aug_lexicon.empty()) throw ConfigError("augment: --lexicon required for eda");
            Lexicon lex = load_lexicon(aug_lexicon);
            pool = build_pool(ds, acfg, &lex);
        } else {
            pool = build_pool(ds, acfg);
        }
        save_pool(pool, aug_out);
        std::cout << "wrote " << pool.total_entries() << " pool entries to " << aug_out << "\n";
        return 0;
    }

    if (cmd_validate->parsed()) {
        Dataset ds = load_dataset(val_dataset);
        std::cout << "dataset ok: " << ds.size() << " examples, " << ds.num_classes << " classes\n";
        if (!val_pool.empty()) {
            if (val_K <= 0 && !val_relaxed) throw ConfigError("validate: --K required with --pool");
            AugmentPool pool = load_pool(val_pool, ds, val_K, !val_relaxed);
            std::cout << "pool ok: " << pool.total_entries() << " entries\n";
        }
        return 0;
    }

    if (cmd_train->parsed()) {
        TrainConfig cfg = tr_config.empty() ? parse_train_config("{}", tr_sets)
                                            : load_train_config(tr_config, tr_sets);
        if (tr_seed) cfg.seed = *tr_seed;

        Dataset ds = load_dataset(tr_dataset);
        std::optional<Dataset> dev;
        if (!tr_dev.empty()) dev = load_dataset(tr_dev);

        std::optional<AugmentPool> pool;
        if (!tr_pool.empty()) {
            if (tr_K <= 0) throw ConfigError("train: --K required with --pool");
            pool = load_pool(tr_pool, ds, tr_K);
        }

        fs::create_directories(tr_out);
        TrainResult result;
        if (cfg.regime == Regime::SelfKd) {
            if (!pool) throw ConfigError("train: self_kd requires --pool");
            result = train_self_kd(ds, *pool, cfg, dev ? &*dev : nullptr);
        } else if (cfg.regime == Regime::Kd) {
            if (tr_teacher.empty()) throw ConfigError("train: kd requires --teacher");
            if (!pool) throw ConfigError("train: kd requires --pool");
            Teacher teacher = freeze(load_model(tr_teacher));
            LogitCache cache = cache_teacher_logits(teacher, ds, *pool);
            result = train(ds, &*pool, &teacher, &cache, cfg, dev ? &*dev : nullptr);
        } else {
            result = train(ds, pool ? &*pool : nullptr, nullptr, nullptr, cfg,
                           dev ? &*dev : nullptr);
        }

        save_model(result.model, tr_out + "/checkpoint.json");
        write_metrics_csv(result.history, tr_out + "/metrics.csv");
        std::cout << "trained " << regime_name(cfg.regime) << " for "
                  << result.history.size() << " epochs; checkpoint and metrics in " << tr_out << "\n";
        return 0;
    }

    if (cmd_eval->parsed()) {
        ModelParams m = load_model(ev_model);
        Dataset ds = load_dataset(ev_dataset);
        Metrics metrics = evaluate(m, ds);
        std::cout << "accuracy=" << metrics.accuracy << " macro_f1=" << metrics.macro_f1 << "\n";
        if (!ev_out.empty()) {
            std::ofstream f(ev_out);
            if (!f) throw IoError("cannot write metrics: " + ev_out);
            f << "accuracy,macro_f1\n" << metrics.accuracy << "," << metrics.macro_f1 << "\n";
        }
        return 0;
    }

    if (cmd_filter->parsed()) {
        Dataset ds = load_dataset(fl_dataset);
        AugmentPool pool = load_pool(fl_pool, ds, fl_K);
        ModelParams m = load_model(fl_model);
        FilterResult result = fl_kind == "confidence"
                                  ? confidence_filter(pool, m, ds, fl_beta)
                                  : label_preserving_filter(pool, m, ds);
        save_pool(result.pool, fl_out);
        write_retention_report(result.report, fl_out + ".retention.csv");
        std::cout << "retained " << result.total_after() << "/" << result.total_before()
                  << " entries; wrote " << fl_out << "\n";
        return 0;
    }

    if (cmd_bench->parsed()) {
        Dataset ds = load_dataset(bn_dataset);
        AugmentPool pool = load_pool(bn_pool, ds, bn_K);
        std::optional<Dataset> dev;
        if (!bn_dev.empty()) dev = load_dataset(bn_dev);

        SweepSpec sweep;
        sweep.vanilla_sizes = bn_sizes;
        sweep.glitter_points = parse_glitter_points(bn_glitter);
        sweep.seeds = bn_seeds;
        sweep.base = bn_config.empty() ? parse_train_config("{}", bn_sets)
                                       : load_train_config(bn_config, bn_sets);
        SweepReport report = run_sweep(ds, pool, dev ? &*dev : nullptr, sweep);
        emit_report(report, bn_out);
        std::cout << "wrote " << report.rows.size() << " sweep rows to " << bn_out << "\n";
        return 0;
    }

    if (cmd_synth->parsed()) {
        SynthOutput out = make_synth(spec);
        write_synth(out, sy_out);
        std::cout << "wrote " << spec.preset << " (n=" << out.train.size()
                  << ", K=" << out.pool.K << ") to " << sy_out << "\n";
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "ERROR " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ERROR INTERNAL: " << e.what() << "\n";
        return 1;
    }
}
