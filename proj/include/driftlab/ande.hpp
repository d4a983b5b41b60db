#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "driftlab/counts.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/forgetting.hpp"
#include "driftlab/schema.hpp"

namespace driftlab {

struct ClassDistribution {
    std::vector<double> probabilities;
    // set when every class score was zero (possible only with smoothing 0 and
    // empty stores); a uniform distribution is returned in that case
    bool degenerate = false;
};

struct AndeOptions {
    int order = 1;              // 0: naive Bayes, 1: A1DE, 2: A2DE
    double smoothing_m = 1.0;   // m-estimate strength
    double delta_tau = 0.0;     // subset counts as seen when evidence > tau
    ForgetPolicy policy = ForgetPolicy::none();
};

// Averaged n-dependence estimator over weighted count stores. The model keeps
// one store per order 0..n so that prediction can fall back to order n-1 when
// no size-n subset of the test instance has been observed.
class AndeModel {
  public:
    AndeModel(Schema schema, AndeOptions options)
        : schema_(std::move(schema)), options_(options) {
        if (options_.order < 0 || options_.order > 2)
            throw ConfigError("model order must be 0, 1, or 2");
        if (options_.smoothing_m < 0.0) throw ConfigError("negative smoothing");
        const double decay = options_.policy.kind() == ForgetPolicy::Kind::Decay
                                 ? options_.policy.decay_rate()
                                 : 0.0;
        for (int k = 0; k <= options_.order; ++k)
            chain_.emplace_back(schema_, k, decay);
        if (options_.policy.kind() == ForgetPolicy::Kind::Window)
            queue_.emplace(options_.policy.window_capacity());
        m_over_arity_.resize(static_cast<std::size_t>(schema_.num_attributes()));
        for (int i = 0; i < schema_.num_attributes(); ++i)
            m_over_arity_[static_cast<std::size_t>(i)] =
                options_.smoothing_m / schema_.arity(i);
    }

    const Schema& schema() const { return schema_; }
    int order() const { return options_.order; }
    const AndeOptions& options() const { return options_; }
    const CountStore& store(int order) const {
        return chain_[static_cast<std::size_t>(order)];
    }
    std::int64_t instances_seen() const { return seen_; }

    // Test-then-train contract: callers must predict an instance before
    // learning from it. Window eviction decrements at the incoming step.
    void learn(const Instance& x) {
        for (CountStore& store : chain_) store.update(x, +1, x.step);
        if (queue_) {
            if (auto evicted = queue_->admit(x))
                for (CountStore& store : chain_) store.update(*evicted, -1, x.step);
        }
        ++seen_;
    }

    // Estimate of the joint P(y, x) at the given order, recursing to lower
    // orders while no subset of that size has been seen.
    double joint_score(std::span<const std::uint16_t> x, int cls, int at_order,
                       std::int64_t now) const {
        if (at_order < 0 || at_order > options_.order)
            throw ConfigError("query order outside model chain");
        if (cls < 0 || cls >= schema_.num_classes()) throw SchemaError("class out of range");
        return std::exp(log_joint(x, at_order, now)[static_cast<std::size_t>(cls)]);
    }

    ClassDistribution posterior(std::span<const std::uint16_t> x, std::int64_t now) const {
        const std::vector<double> logs = log_joint(x, options_.order, now);
        ClassDistribution dist;
        dist.probabilities.resize(logs.size());
        double mx = -std::numeric_limits<double>::infinity();
        for (double l : logs) mx = std::max(mx, l);
        if (mx == -std::numeric_limits<double>::infinity()) {
            const double uniform = 1.0 / static_cast<double>(logs.size());
            for (double& p : dist.probabilities) p = uniform;
            dist.degenerate = true;
            return dist;
        }
        double sum = 0.0;
        for (std::size_t y = 0; y < logs.size(); ++y) {
            dist.probabilities[y] = std::exp(logs[y] - mx);
            sum += dist.probabilities[y];
        }
        for (double& p : dist.probabilities) p /= sum;
        return dist;
    }

    // smallest class index among posterior maximizers
    int predict(std::span<const std::uint16_t> x, std::int64_t now) const {
        const ClassDistribution dist = posterior(x, now);
        int best = 0;
        for (std::size_t y = 1; y < dist.probabilities.size(); ++y)
            if (dist.probabilities[y] > dist.probabilities[static_cast<std::size_t>(best)])
                best = static_cast<int>(y);
        return best;
    }

    int predict(const Instance& x) const { return predict(x.values, x.step); }

  private:
    static constexpr double kRescaleThreshold = 1e-270;
    static constexpr double kRescale = 1e270;

    struct LogSumExp {
        double max_log = -std::numeric_limits<double>::infinity();
        double sum = 0.0;

        void add(double term) {
            if (term == -std::numeric_limits<double>::infinity()) return;
            if (term <= max_log) {
                sum += std::exp(term - max_log);
            } else {
                sum = sum * std::exp(max_log - term) + 1.0;
                max_log = term;
            }
        }

        double value() const {
            if (sum == 0.0) return -std::numeric_limits<double>::infinity();
            return max_log + std::log(sum);
        }
    };

    std::vector<double> log_joint(std::span<const std::uint16_t> x, int at_order,
                                  std::int64_t now) const {
        if (static_cast<int>(x.size()) != schema_.num_attributes())
            throw SchemaError("attribute vector does not match schema");
        for (int i = 0; i < schema_.num_attributes(); ++i)
            if (x[static_cast<std::size_t>(i)] >= schema_.arity(i))
                throw SchemaError("attribute value out of arity range");
        std::vector<int> slot_of(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            slot_of[i] = schema_.value_offset(static_cast<int>(i)) + x[i];

        std::vector<double> logs(static_cast<std::size_t>(schema_.num_classes()));
        for (int k = at_order; k >= 1; --k)
            if (eval_order(x, slot_of, k, now, logs)) return logs;
        eval_order0(x, slot_of, now, logs);
        return logs;
    }

    // Returns false when no size-k subset of x has been seen, in which case
    // the caller falls through to order k-1.
    bool eval_order(std::span<const std::uint16_t> x, const std::vector<int>& slot_of,
                    int k, std::int64_t now, std::vector<double>& out) const {
        const CountStore& store = chain_[static_cast<std::size_t>(k)];
        const int nc = schema_.num_classes();
        const int na = schema_.num_attributes();
        const double m = options_.smoothing_m;
        const double total = store.effective_total(now);

        std::vector<LogSumExp> acc(static_cast<std::size_t>(nc));
        std::vector<double> roots(static_cast<std::size_t>(nc));
        std::vector<const detail::CountEntry*> blocks(static_cast<std::size_t>(nc));
        int subsets_seen = 0;

        auto visit_subset = [&](int a0, int a1) {
            double root_sum = 0.0;
            for (int cls = 0; cls < nc; ++cls) {
                const auto* slot =
                    k == 1 ? store.find_root(detail::pack_root1(
                                 cls, a0, x[static_cast<std::size_t>(a0)]))
                           : store.find_root(detail::pack_root2(
                                 cls, a0, x[static_cast<std::size_t>(a0)], a1,
                                 x[static_cast<std::size_t>(a1)]));
                roots[static_cast<std::size_t>(cls)] =
                    slot == nullptr ? 0.0 : store.entry_value(slot->entry, now);
                blocks[static_cast<std::size_t>(cls)] = store.block_of(slot);
                root_sum += roots[static_cast<std::size_t>(cls)];
            }
            if (!(root_sum > options_.delta_tau)) return;
            ++subsets_seen;
            const double arity_prod =
                k == 1 ? schema_.arity(a0)
                       : static_cast<double>(schema_.arity(a0)) * schema_.arity(a1);
            const double root_prior = m / (nc * arity_prod);
            for (int cls = 0; cls < nc; ++cls) {
                const double root_c = roots[static_cast<std::size_t>(cls)];
                const double denom = root_c + m;
                double term;
                if (denom == 0.0) {
                    term = -std::numeric_limits<double>::infinity();
                } else {
                    term = child_product_log(blocks[static_cast<std::size_t>(cls)],
                                             slot_of, a0, a1, denom, now, store,
                                             (root_c + root_prior) / (total + m));
                }
                acc[static_cast<std::size_t>(cls)].add(term);
            }
        };

        if (k == 1) {
            for (int j = 0; j < na; ++j) visit_subset(j, -1);
        } else {
            for (int j = 0; j < na; ++j)
                for (int l = j + 1; l < na; ++l) visit_subset(j, l);
        }
        if (subsets_seen == 0) return false;
        const double log_seen = std::log(static_cast<double>(subsets_seen));
        for (int cls = 0; cls < nc; ++cls)
            out[static_cast<std::size_t>(cls)] =
                acc[static_cast<std::size_t>(cls)].value() - log_seen;
        return true;
    }

    // naive Bayes: smoothed class prior times per-attribute conditionals
    void eval_order0(std::span<const std::uint16_t> x, const std::vector<int>& slot_of,
                     std::int64_t now, std::vector<double>& out) const {
        const CountStore& store = chain_[0];
        const int nc = schema_.num_classes();
        const double m = options_.smoothing_m;
        const double total = store.effective_total(now);
        const double prior_m = m / nc;
        for (int cls = 0; cls < nc; ++cls) {
            const auto* slot = store.find_root(detail::pack_root0(cls));
            const double root_c = slot == nullptr ? 0.0 : store.entry_value(slot->entry, now);
            const double denom = root_c + m;
            if (denom == 0.0) {
                out[static_cast<std::size_t>(cls)] =
                    -std::numeric_limits<double>::infinity();
                continue;
            }
            out[static_cast<std::size_t>(cls)] =
                child_product_log(store.block_of(slot), slot_of, -1, -1, denom, now,
                                  store, (root_c + prior_m) / (total + m));
        }
    }

    // log of base * prod_i (c(x_i | block) + m/arity_i) / denom over children
    // outside the subset, with rescaling against underflow
    double child_product_log(const detail::CountEntry* block,
                             const std::vector<int>& slot_of, int skip_a, int skip_b,
                             double denom, std::int64_t now, const CountStore& store,
                             double base) const {
        double acc = base;
        if (acc == 0.0) return -std::numeric_limits<double>::infinity();
        int shifts = 0;
        const double inv_denom = 1.0 / denom;
        const int na = schema_.num_attributes();
        for (int i = 0; i < na; ++i) {
            if (i == skip_a || i == skip_b) continue;
            const double child_c =
                block == nullptr
                    ? 0.0
                    : store.entry_value(block[static_cast<std::size_t>(slot_of[static_cast<std::size_t>(i)])],
                                        now);
            acc *= (child_c + m_over_arity_[static_cast<std::size_t>(i)]) * inv_denom;
            if (acc < kRescaleThreshold) {
                if (acc == 0.0) return -std::numeric_limits<double>::infinity();
                acc *= kRescale;
                ++shifts;
            }
        }
        return std::log(acc) - shifts * kLogRescale();
    }

    static double kLogRescale() {
        static const double v = std::log(kRescale);
        return v;
    }

    Schema schema_;
    AndeOptions options_;
    std::vector<CountStore> chain_;
    std::optional<WindowQueue> queue_;
    std::vector<double> m_over_arity_;
    std::int64_t seen_ = 0;
};

}  // namespace driftlab
