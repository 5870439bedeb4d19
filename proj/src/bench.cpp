#include "glitter/bench.hpp"

#include <algorithm>
#include <fstream>

#include "glitter/errors.hpp"

namespace glitter {

void SweepSpec::validate(int max_K) const {
    if (seeds.empty()) throw ConfigError("sweep: at least one seed required");
    for (int K : vanilla_sizes) {
        if (K < 1 || K > max_K) throw ConfigError("sweep: vanilla size out of range");
    }
    for (auto [K, k1] : glitter_points) {
        if (K < 1 || K > max_K) throw ConfigError("sweep: glitter K out of range");
        if (k1 < 1 || k1 > K) throw ConfigError("sweep: glitter k1 out of range");
    }
}

namespace {

double median_epoch_time(const std::vector<EpochMetrics>& history) {
    // epoch 1 excluded as warm-up when there is more than one epoch
    std::vector<double> times;
    for (size_t e = history.size() > 1 ? 1 : 0; e < history.size(); ++e) {
        times.push_back(history[e].epoch_wall_seconds);
    }
    std::sort(times.begin(), times.end());
    size_t n = times.size();
    return n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

SweepRow run_point(const Dataset& ds, const AugmentPool& pool, const Dataset* dev,
                   const TrainConfig& base, Regime regime, int K, int k1, uint64_t seed) {
    SweepRow row;
    row.regime = regime_name(regime);
    row.K = K;
    row.k1 = k1;
    row.seed = seed;
    try {
        AugmentPool sub = truncate_pool(pool, K);
        TrainConfig cfg = base;
        cfg.regime = regime;
        cfg.k1 = k1;
        cfg.seed = seed;
        TrainResult res = train(ds, &sub, nullptr, nullptr, cfg, dev);
        row.median_epoch_seconds = median_epoch_time(res.history);
        row.final_dev_accuracy = res.history.back().dev_accuracy;
        row.grad_passes_per_epoch = res.history.front().grad_passes;
        row.score_passes_per_epoch = res.history.front().score_passes;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

SweepReport run_sweep(const Dataset& ds, const AugmentPool& pool, const Dataset* dev,
                      const SweepSpec& spec) {
    spec.validate(pool.K);
    SweepReport report;
    // sequential on purpose: concurrent points would contaminate the timing
    for (uint64_t seed : spec.seeds) {
        for (int K : spec.vanilla_sizes) {
            report.rows.push_back(
                run_point(ds, pool, dev, spec.base, Regime::VanillaDa, K, K, seed));
        }
        for (auto [K, k1] : spec.glitter_points) {
            report.rows.push_back(
                run_point(ds, pool, dev, spec.base, Regime::Glitter, K, k1, seed));
        }
    }
    return report;
}

void emit_report(const SweepReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write sweep report: " + path);
    f << "regime,K,k1,seed,median_epoch_seconds,final_dev_accuracy,"
         "grad_passes_per_epoch,score_passes_per_epoch,error\n";
    f.precision(17);
    for (const auto& r : report.rows) {
        f << r.regime << "," << r.K << "," << r.k1 << "," << r.seed << ","
          << r.median_epoch_seconds << "," << r.final_dev_accuracy << ","
          << r.grad_passes_per_epoch << "," << r.score_passes_per_epoch << "," << r.error << "\n";
    }
}

}  // namespace glitter
