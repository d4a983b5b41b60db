#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "driftlab/ande.hpp"
#include "driftlab/driftgen.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/forgetting.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/schema.hpp"

namespace driftlab {

// Per-step 0-1 losses of one prequential pass, a bucketed curve, and the
// overall mean error.
struct PrequentialResult {
    std::vector<std::uint8_t> losses;
    std::vector<double> bucketed;  // means over consecutive buckets
    double mean_error = 0.0;
    int bucket_size = 50;
    std::uint64_t run_seed = 0;

    void finish(int bucket) {
        bucket_size = bucket;
        bucketed.clear();
        std::int64_t errors = 0;
        for (std::size_t start = 0; start < losses.size();
             start += static_cast<std::size_t>(bucket)) {
            const std::size_t end =
                std::min(losses.size(), start + static_cast<std::size_t>(bucket));
            std::int64_t bucket_errors = 0;
            for (std::size_t i = start; i < end; ++i) bucket_errors += losses[i];
            errors += bucket_errors;
            bucketed.push_back(static_cast<double>(bucket_errors) /
                               static_cast<double>(end - start));
        }
        mean_error = losses.empty()
                         ? 0.0
                         : static_cast<double>(errors) / static_cast<double>(losses.size());
    }
};

// Test-then-train pass over a pull-based instance source. The model must be
// fresh; each instance is classified before it is learned.
template <class Source>
PrequentialResult prequential_stream(AndeModel& model, Source&& next_instance,
                                     int bucket_size = 50) {
    if (bucket_size < 1) throw ConfigError("bucket size must be >= 1");
    if (model.instances_seen() != 0)
        throw ConfigError("prequential evaluation requires an untrained model");
    PrequentialResult result;
    Instance x;
    while (next_instance(x)) {
        const int predicted = model.predict(x.values, x.step);
        result.losses.push_back(predicted == x.class_label ? 0 : 1);
        model.learn(x);
    }
    result.finish(bucket_size);
    return result;
}

inline PrequentialResult prequential(AndeModel& model, std::span<const Instance> stream,
                                     int bucket_size = 50) {
    std::size_t i = 0;
    return prequential_stream(
        model,
        [&](Instance& out) {
            if (i >= stream.size()) return false;
            out = stream[i++];
            return true;
        },
        bucket_size);
}

struct AggregateResult {
    std::vector<double> mean_curve;
    double mean_error = 0.0;
    double std_error = 0.0;  // standard error of the per-run mean errors
    int runs = 0;
};

inline AggregateResult aggregate(std::span<const PrequentialResult> results) {
    if (results.empty()) throw ConfigError("nothing to aggregate");
    AggregateResult out;
    out.runs = static_cast<int>(results.size());
    out.mean_curve.assign(results.front().bucketed.size(), 0.0);
    for (const PrequentialResult& r : results) {
        if (r.bucketed.size() != out.mean_curve.size())
            throw ConfigError("aggregate requires equal-length runs");
        for (std::size_t i = 0; i < r.bucketed.size(); ++i)
            out.mean_curve[i] += r.bucketed[i];
        out.mean_error += r.mean_error;
    }
    for (double& v : out.mean_curve) v /= out.runs;
    out.mean_error /= out.runs;
    if (out.runs > 1) {
        double ss = 0.0;
        for (const PrequentialResult& r : results) {
            const double d = r.mean_error - out.mean_error;
            ss += d * d;
        }
        out.std_error = std::sqrt(ss / (out.runs - 1)) / std::sqrt(out.runs);
    }
    return out;
}

// Experiment grid: drift magnitudes x model orders x forgetting policies,
// each cell evaluated over runs_per_cell independently seeded streams.
struct GridSpec {
    std::vector<double> deltas;
    std::vector<int> orders;
    std::vector<ForgetPolicy> policies;
    int runs_per_cell = 30;
    int stream_length = 5000;
    int bucket_size = 50;
    GeneratorConfig generator;
    DriftConfig drift;  // delta overridden per cell
    double smoothing_m = 1.0;
    double delta_tau = 0.0;
    std::uint64_t master_seed = 1;
    int jobs = 1;  // <= 1: sequential

    void validate() const {
        if (deltas.empty() || orders.empty() || policies.empty())
            throw ConfigError("grid axes must be non-empty");
        if (runs_per_cell < 1) throw ConfigError("runs_per_cell must be >= 1");
        if (stream_length < 1) throw ConfigError("stream length must be positive");
        generator.validate();
        for (double delta : deltas) {
            DriftConfig d = drift;
            d.delta = delta;
            d.validate(generator);
        }
    }
};

struct CellResult {
    double delta = 0.0;
    int order = 0;
    ForgetPolicy policy = ForgetPolicy::none();
    double mean_error = 0.0;
    double std_error = 0.0;
    int runs = 0;
    std::vector<double> mean_curve;
    std::vector<double> run_errors;  // indexed by run; paired across cells
};

namespace detail {

// Stream seeds depend on (master, delta, run) only, so every cell within one
// drift setting replays the same streams and per-run comparisons between
// models/policies are paired.
inline std::uint64_t stream_seed(std::uint64_t master, std::size_t delta_index,
                                 int run) {
    return split_seed(master, 0xd21f7a11ull, delta_index, static_cast<std::uint64_t>(run));
}

}  // namespace detail

inline std::vector<CellResult> run_grid(const GridSpec& spec) {
    spec.validate();
    struct Cell {
        std::size_t delta_index;
        double delta;
        int order;
        ForgetPolicy policy;
    };
    std::vector<Cell> cells;
    for (std::size_t di = 0; di < spec.deltas.size(); ++di)
        for (int order : spec.orders)
            for (const ForgetPolicy& policy : spec.policies)
                cells.push_back({di, spec.deltas[di], order, policy});

    const std::size_t runs = static_cast<std::size_t>(spec.runs_per_cell);
    std::vector<std::vector<PrequentialResult>> slots(cells.size());
    for (auto& v : slots) v.resize(runs);

    const std::size_t total_tasks = cells.size() * runs;
    std::atomic<std::size_t> next_task{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t task = next_task.fetch_add(1);
            if (task >= total_tasks || failed.load()) return;
            const std::size_t cell_index = task / runs;
            const int run = static_cast<int>(task % runs);
            const Cell& cell = cells[cell_index];
            try {
                DriftConfig drift = spec.drift;
                drift.delta = cell.delta;
                const std::uint64_t seed =
                    detail::stream_seed(spec.master_seed, cell.delta_index, run);
                const StreamResult stream =
                    generate_stream(seed, spec.generator, drift, spec.stream_length);
                AndeOptions options;
                options.order = cell.order;
                options.smoothing_m = spec.smoothing_m;
                options.delta_tau = spec.delta_tau;
                options.policy = cell.policy;
                AndeModel model(stream.schema(), options);
                PrequentialResult result =
                    prequential(model, stream.instances, spec.bucket_size);
                result.run_seed = seed;
                slots[cell_index][static_cast<std::size_t>(run)] = std::move(result);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    const std::size_t thread_count =
        std::min<std::size_t>(std::max(1, spec.jobs), total_tasks);
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(thread_count);
        for (std::size_t i = 0; i < thread_count; ++i) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<CellResult> out;
    out.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const AggregateResult agg = aggregate(slots[c]);
        CellResult cell;
        cell.delta = cells[c].delta;
        cell.order = cells[c].order;
        cell.policy = cells[c].policy;
        cell.mean_error = agg.mean_error;
        cell.std_error = agg.std_error;
        cell.runs = agg.runs;
        cell.mean_curve = agg.mean_curve;
        cell.run_errors.reserve(runs);
        for (const PrequentialResult& r : slots[c]) cell.run_errors.push_back(r.mean_error);
        out.push_back(std::move(cell));
    }
    return out;
}

// delta,n,policy,param,mean_error,stderr,runs
inline void write_results_csv(std::ostream& out, std::span<const CellResult> cells) {
    out << "delta,n,policy,param,mean_error,stderr,runs\n";
    char buf[160];
    for (const CellResult& cell : cells) {
        std::string policy;
        std::string param;
        switch (cell.policy.kind()) {
            case ForgetPolicy::Kind::None:
                policy = "none";
                break;
            case ForgetPolicy::Kind::Window: {
                policy = "window";
                param = std::to_string(cell.policy.window_capacity());
                break;
            }
            case ForgetPolicy::Kind::Decay: {
                char p[32];
                std::snprintf(p, sizeof(p), "%g", cell.policy.decay_rate());
                policy = "decay";
                param = p;
                break;
            }
        }
        std::snprintf(buf, sizeof(buf), "%g,%d,%s,%s,%.17g,%.17g,%d\n", cell.delta,
                      cell.order, policy.c_str(), param.c_str(), cell.mean_error,
                      cell.std_error, cell.runs);
        out << buf;
    }
}

// bucket_start_step,mean_loss
inline void write_curve_csv(std::ostream& out, std::span<const double> curve,
                            int bucket_size) {
    out << "bucket_start_step,mean_loss\n";
    char buf[48];
    for (std::size_t i = 0; i < curve.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n",
                      i * static_cast<std::size_t>(bucket_size), curve[i]);
        out << buf;
    }
}

}  // namespace driftlab
