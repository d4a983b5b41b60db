#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "driftlab/errors.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/schema.hpp"

namespace driftlab {

// Size of the generated superparent network. The first half of the attributes
// form the signal block (one node with the class as its only parent, one with
// class + first attribute, then a two-parent block and a three-parent block);
// the second half are parentless noise nodes.
struct GeneratorConfig {
    int num_attributes = 200;

    void validate() const {
        if (num_attributes < 8 || num_attributes % 2 != 0)
            throw ConfigError("generator needs an even attribute count >= 8");
    }

    int signal_attributes() const { return num_attributes / 2; }
    int two_parent_end() const { return signal_attributes() / 2; }
};

struct DriftConfig {
    double delta = 0.05;        // CPT shift magnitude per drift event
    int period = 10;            // steps between drift events
    double fraction = 50.0;     // percent of the pool drifted per event
    bool drift_noise = true;    // include parentless noise nodes in the pool
    std::vector<int> pool;      // explicit pool (0-based attrs); empty = derived

    void validate(const GeneratorConfig& gen) const {
        if (!(delta > 0.0)) throw ConfigError("drift delta must be > 0");
        if (delta >= 1.0) throw ConfigError("drift delta must be < 1");
        if (period < 1) throw ConfigError("drift period must be >= 1");
        if (!(fraction > 0.0) || fraction > 100.0)
            throw ConfigError("drift fraction must be in (0, 100]");
        for (int node : pool)
            if (node < 2 || node >= gen.num_attributes)
                throw ConfigError("drift pool may not contain parent attributes");
    }
};

struct DriftLogRow {
    std::int64_t step;  // step after which the event fired
    int node;           // 1-based attribute index, matching stream column names
    int row;            // CPT row index
    double tvd;
};

struct DriftMagnitude {
    std::vector<double> per_node;  // mean row TVD per attribute
    double mean = 0.0;             // mean over all attributes
};

// Superparent k-DB network over binary attributes with a uniform binary
// class. CPT rows store P(X_i = 0 | parents); drift shifts that value by
// +-delta with clamping, so rows always remain valid distributions.
class KdbNetwork {
  public:
    static KdbNetwork build(std::uint64_t seed, const GeneratorConfig& cfg = {}) {
        Rng rng(seed);
        return KdbNetwork(rng, cfg);
    }

    KdbNetwork(Rng& rng, const GeneratorConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        const int n = cfg_.num_attributes;
        const int signal = cfg_.signal_attributes();
        nodes_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            Node& node = nodes_[static_cast<std::size_t>(i)];
            if (i == 0) {
                node.class_parent = true;
            } else if (i == 1) {
                node.class_parent = true;
                node.parent_attrs = {0};
            } else if (i < cfg_.two_parent_end()) {
                node.class_parent = true;
                node.parent_attrs = {static_cast<int>(rng.next_below(2))};
            } else if (i < signal) {
                node.class_parent = true;
                node.parent_attrs = {0, 1};
            }
            node.p0.resize(std::size_t{1} << (node.parent_count()));
            for (double& p : node.p0) p = rng.next_open_unit();
        }
    }

    int num_attributes() const { return cfg_.num_attributes; }
    const GeneratorConfig& config() const { return cfg_; }
    double class_prior0() const { return 0.5; }

    Schema schema() const {
        return Schema(std::vector<int>(static_cast<std::size_t>(cfg_.num_attributes), 2), 2);
    }

    bool class_parent(int attr) const { return node(attr).class_parent; }
    const std::vector<int>& parent_attrs(int attr) const { return node(attr).parent_attrs; }
    std::size_t row_count(int attr) const { return node(attr).p0.size(); }
    double row_p0(int attr, std::size_t row) const { return node(attr).p0[row]; }

    // attributes eligible to drift; the class and the two superparents never are
    std::vector<int> default_pool(bool include_noise) const {
        std::vector<int> pool;
        const int end = include_noise ? cfg_.num_attributes : cfg_.signal_attributes();
        for (int i = 2; i < end; ++i) pool.push_back(i);
        return pool;
    }

    // Ancestral sampling: the class first, then attributes in index order, so
    // every parent is sampled before its children.
    Instance sample(Rng& rng, std::int64_t step) const {
        Instance out;
        out.step = step;
        out.class_label = static_cast<int>(rng.next_below(2));
        out.values.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& node = nodes_[i];
            const double p0 = node.p0[row_index(node, out)];
            out.values[i] = rng.next_unit() < p0 ? 0 : 1;
        }
        return out;
    }

    // One drift event: a random ceil(fraction%) subset of the pool is
    // selected, and every CPT row of each selected node moves by +-delta
    // (sign drawn per row), clamped to keep the row a valid distribution.
    void drift_step(const DriftConfig& cfg, Rng& rng,
                    std::vector<DriftLogRow>* log = nullptr, std::int64_t step = 0) {
        cfg.validate(cfg_);
        std::vector<int> pool = cfg.pool.empty() ? default_pool(cfg.drift_noise) : cfg.pool;
        const auto select = static_cast<std::size_t>(
            std::ceil(cfg.fraction / 100.0 * static_cast<double>(pool.size())));
        for (std::size_t i = 0; i < select; ++i) {
            const std::size_t j =
                i + rng.next_below(static_cast<std::uint32_t>(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        const std::size_t log_start = log == nullptr ? 0 : log->size();
        for (std::size_t i = 0; i < select; ++i) {
            Node& node = nodes_[static_cast<std::size_t>(pool[i])];
            for (std::size_t row = 0; row < node.p0.size(); ++row) {
                const double sign = rng.next_bool() ? 1.0 : -1.0;
                const double before = node.p0[row];
                node.p0[row] = std::clamp(before + sign * cfg.delta, 0.0, 1.0);
                if (log != nullptr)
                    log->push_back({step, pool[i] + 1, static_cast<int>(row),
                                    std::abs(node.p0[row] - before)});
            }
        }
        if (log != nullptr)
            std::sort(log->begin() + static_cast<std::ptrdiff_t>(log_start), log->end(),
                      [](const DriftLogRow& a, const DriftLogRow& b) {
                          return a.node != b.node ? a.node < b.node : a.row < b.row;
                      });
    }

    bool same_structure(const KdbNetwork& other) const {
        if (cfg_.num_attributes != other.cfg_.num_attributes) return false;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].class_parent != other.nodes_[i].class_parent) return false;
            if (nodes_[i].parent_attrs != other.nodes_[i].parent_attrs) return false;
        }
        return true;
    }

    bool operator==(const KdbNetwork& other) const {
        if (!same_structure(other)) return false;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].p0 != other.nodes_[i].p0) return false;
        return true;
    }

  private:
    struct Node {
        bool class_parent = false;
        std::vector<int> parent_attrs;
        std::vector<double> p0;  // P(value = 0) per parent-value row

        unsigned parent_count() const {
            return (class_parent ? 1u : 0u) + static_cast<unsigned>(parent_attrs.size());
        }
    };

    static std::size_t row_index(const Node& node, const Instance& sampled) {
        std::size_t row = node.class_parent ? static_cast<std::size_t>(sampled.class_label) : 0;
        for (int parent : node.parent_attrs)
            row = row * 2 + sampled.values[static_cast<std::size_t>(parent)];
        return row;
    }

    const Node& node(int attr) const { return nodes_[static_cast<std::size_t>(attr)]; }

    GeneratorConfig cfg_;
    std::vector<Node> nodes_;

    friend DriftMagnitude drift_magnitude(const KdbNetwork&, const KdbNetwork&);
};

// Per-row total variation distance (|p - q| for binary rows), averaged over
// rows within a node and over nodes.
inline DriftMagnitude drift_magnitude(const KdbNetwork& before, const KdbNetwork& after) {
    if (!before.same_structure(after))
        throw StructureMismatchError("networks have different structure");
    DriftMagnitude out;
    out.per_node.resize(before.nodes_.size());
    for (std::size_t i = 0; i < before.nodes_.size(); ++i) {
        double sum = 0.0;
        const auto& rows_b = before.nodes_[i].p0;
        const auto& rows_a = after.nodes_[i].p0;
        for (std::size_t r = 0; r < rows_b.size(); ++r)
            sum += std::abs(rows_b[r] - rows_a[r]);
        out.per_node[i] = sum / static_cast<double>(rows_b.size());
        out.mean += out.per_node[i];
    }
    out.mean /= static_cast<double>(before.nodes_.size());
    return out;
}

// Discrete surrogate of an instantaneous drift rate: magnitude per elapsed step.
inline double drift_rate(const DriftMagnitude& magnitude, std::int64_t elapsed_steps) {
    if (elapsed_steps <= 0) throw ConfigError("elapsed steps must be positive");
    return magnitude.mean / static_cast<double>(elapsed_steps);
}

// Monte-Carlo estimate of drift in the attribute marginals: sample both
// networks and compare Laplace-smoothed empirical P(X_i = 0), averaged over
// attributes. A tractable stand-in for TVD of the full joint.
inline double mc_marginal_tvd(const KdbNetwork& a, const KdbNetwork& b, int samples,
                              std::uint64_t seed) {
    if (!a.same_structure(b))
        throw StructureMismatchError("networks have different structure");
    if (samples < 1) throw ConfigError("sample count must be positive");
    const int n = a.num_attributes();
    std::vector<std::int64_t> zeros_a(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> zeros_b(static_cast<std::size_t>(n), 0);
    Rng rng_a(split_seed(seed, 1));
    Rng rng_b(split_seed(seed, 2));
    for (int s = 0; s < samples; ++s) {
        const Instance xa = a.sample(rng_a, s);
        const Instance xb = b.sample(rng_b, s);
        for (int i = 0; i < n; ++i) {
            zeros_a[static_cast<std::size_t>(i)] += xa.values[static_cast<std::size_t>(i)] == 0;
            zeros_b[static_cast<std::size_t>(i)] += xb.values[static_cast<std::size_t>(i)] == 0;
        }
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double pa = (static_cast<double>(zeros_a[static_cast<std::size_t>(i)]) + 1.0) /
                          (static_cast<double>(samples) + 2.0);
        const double pb = (static_cast<double>(zeros_b[static_cast<std::size_t>(i)]) + 1.0) /
                          (static_cast<double>(samples) + 2.0);
        sum += std::abs(pa - pb);
    }
    return sum / static_cast<double>(n);
}

struct StreamResult {
    std::vector<Instance> instances;
    std::vector<DriftLogRow> drift_log;  // filled only when requested
    int drift_events = 0;
    int num_attributes = 0;

    Schema schema() const {
        return Schema(std::vector<int>(static_cast<std::size_t>(num_attributes), 2), 2);
    }
};

// Deterministic drifting stream: one instance per step, a drift event after
// every period-th step. (seed, config) fully determine the output.
inline StreamResult generate_stream(std::uint64_t seed, const GeneratorConfig& gen,
                                    const DriftConfig& drift, int length,
                                    bool with_drift_log = false) {
    gen.validate();
    drift.validate(gen);
    if (length < 1) throw ConfigError("stream length must be positive");
    KdbNetwork net = KdbNetwork::build(split_seed(seed, 1), gen);
    Rng rng(split_seed(seed, 2));
    StreamResult out;
    out.num_attributes = gen.num_attributes;
    out.instances.reserve(static_cast<std::size_t>(length));
    for (int step = 0; step < length; ++step) {
        out.instances.push_back(net.sample(rng, step));
        if ((step + 1) % drift.period == 0) {
            net.drift_step(drift, rng, with_drift_log ? &out.drift_log : nullptr,
                           step + 1);
            ++out.drift_events;
        }
    }
    return out;
}

// step,x1,...,xa,y
inline void write_stream_csv(std::ostream& out, const StreamResult& stream) {
    out << "step";
    for (int i = 1; i <= stream.num_attributes; ++i) out << ",x" << i;
    out << ",y\n";
    for (const Instance& inst : stream.instances) {
        out << inst.step;
        for (std::uint16_t v : inst.values) out << ',' << v;
        out << ',' << inst.class_label << '\n';
    }
}

// step,node,row,tvd
inline void write_drift_log_csv(std::ostream& out, const StreamResult& stream) {
    out << "step,node,row,tvd\n";
    char buf[32];
    for (const DriftLogRow& row : stream.drift_log) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.tvd);
        out << row.step << ',' << row.node << ',' << row.row << ',' << buf << '\n';
    }
}

}  // namespace driftlab
