#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "driftlab/errors.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/schema.hpp"

namespace driftlab {

// Addresses one weighted count: a size-n attribute subset with its values,
// a class label, and optionally one child (attribute, value) outside the
// subset. child_attr < 0 means the subset root count.
struct SubsetKey {
    std::vector<int> subset_attrs;  // strictly increasing
    std::vector<int> subset_vals;
    int class_label = 0;
    int child_attr = -1;
    int child_val = -1;
};

namespace detail {

struct CountEntry {
    double weight = 0.0;
    std::int64_t last_step = 0;
};

constexpr unsigned kFieldBits = 10;
constexpr std::uint64_t kFieldNone = (1ull << kFieldBits) - 1;  // 1023

inline std::uint64_t pack_root_key(int cls, std::span<const int> attrs,
                                   std::span<const int> vals) {
    std::uint64_t key = static_cast<std::uint64_t>(cls);
    unsigned shift = kFieldBits;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        key |= static_cast<std::uint64_t>(attrs[i]) << shift;
        key |= static_cast<std::uint64_t>(vals[i]) << (shift + kFieldBits);
        shift += 2 * kFieldBits;
    }
    for (std::size_t i = attrs.size(); i < 2; ++i) {
        key |= kFieldNone << shift;
        key |= kFieldNone << (shift + kFieldBits);
        shift += 2 * kFieldBits;
    }
    return key;
}

inline std::uint64_t pack_root0(int cls) { return pack_root_key(cls, {}, {}); }

inline std::uint64_t pack_root1(int cls, int attr, int val) {
    const int attrs[1] = {attr};
    const int vals[1] = {val};
    return pack_root_key(cls, attrs, vals);
}

inline std::uint64_t pack_root2(int cls, int a0, int v0, int a1, int v1) {
    const int attrs[2] = {a0, a1};
    const int vals[2] = {v0, v1};
    return pack_root_key(cls, attrs, vals);
}

// Open-addressing table from packed root key to (root count, child block id).
// Entries are never removed: window eviction decrements weights toward zero
// but keeps the slot, so memory is bounded by distinct observed combinations.
class RootTable {
  public:
    static constexpr std::uint64_t kEmptyKey = ~0ull;
    static constexpr std::uint32_t kNoBlock = ~0u;

    struct Slot {
        std::uint64_t key = kEmptyKey;
        CountEntry entry;
        std::uint32_t block = kNoBlock;
    };

    RootTable() { slots_.resize(64); }

    Slot& find_or_insert(std::uint64_t key) {
        if ((count_ + 1) * 10 >= slots_.size() * 7) grow();
        std::size_t i = probe_start(key);
        for (;;) {
            Slot& s = slots_[i];
            if (s.key == key) return s;
            if (s.key == kEmptyKey) {
                s.key = key;
                ++count_;
                return s;
            }
            i = (i + 1) & (slots_.size() - 1);
        }
    }

    const Slot* find(std::uint64_t key) const {
        std::size_t i = probe_start(key);
        for (;;) {
            const Slot& s = slots_[i];
            if (s.key == key) return &s;
            if (s.key == kEmptyKey) return nullptr;
            i = (i + 1) & (slots_.size() - 1);
        }
    }

    std::size_t size() const { return count_; }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (const Slot& s : slots_)
            if (s.key != kEmptyKey) fn(s);
    }

  private:
    std::size_t probe_start(std::uint64_t key) const {
        return static_cast<std::size_t>(mix64(key)) & (slots_.size() - 1);
    }

    void grow() {
        std::vector<Slot> old;
        old.swap(slots_);
        slots_.resize(old.size() * 2);
        for (Slot& s : old) {
            if (s.key == kEmptyKey) continue;
            std::size_t i = static_cast<std::size_t>(mix64(s.key)) & (slots_.size() - 1);
            while (slots_[i].key != kEmptyKey) i = (i + 1) & (slots_.size() - 1);
            slots_[i] = s;
        }
    }

    std::vector<Slot> slots_;
    std::size_t count_ = 0;
};

}  // namespace detail

// Weighted class-conditional frequency tables over all attribute subsets of
// one size (the order), each with per-child counts. Supports increment,
// decrement (window eviction) and lazy exponential decay: entries carry the
// step of their last update and are discounted by exp(-D * elapsed) on read,
// which matches an eager per-step sweep exactly because decay is
// multiplicative.
//
// Storage is a hash table keyed by the packed (class, subset, values) root,
// each root owning a dense child block indexed by (attribute, value). Without
// decay the blocks hold bare weights; with decay every child carries its own
// timestamp and child rows in the diagnostic dump report their own last step
// (undecayed stores report the root's).
class CountStore {
  public:
    static constexpr double kNegativeTolerance = -1e-9;

    CountStore(Schema schema, int order, double decay_rate)
        : schema_(std::move(schema)), order_(order), decay_rate_(decay_rate) {
        if (order_ < 0 || order_ > 2)
            throw ConfigError("count store order must be 0, 1, or 2");
        if (order_ > schema_.num_attributes())
            throw ConfigError("count store order exceeds attribute count");
        if (decay_rate_ < 0.0) throw ConfigError("negative decay rate");
        block_size_ = static_cast<std::size_t>(schema_.total_value_slots());
        decay_pow_.push_back(1.0);
        slot_of_.resize(static_cast<std::size_t>(schema_.num_attributes()));
    }

    int order() const { return order_; }
    double decay_rate() const { return decay_rate_; }
    bool decayed() const { return decay_rate_ != 0.0; }
    const Schema& schema() const { return schema_; }
    std::size_t root_count() const { return roots_.size(); }

    void update(const Instance& x, int sign) { update(x, sign, x.step); }

    // Applies sign*1 to every subset/child count the instance touches, after
    // decay-synchronizing each entry to `now`. Eviction decrements pass the
    // eviction-time step as `now`.
    void update(const Instance& x, int sign, std::int64_t now) {
        schema_.check_instance(x);
        if (now < total_.last_step)
            throw TimeTravelError("update at step " + std::to_string(now) +
                                  " precedes store clock " +
                                  std::to_string(total_.last_step));
        ensure_decay_pow(now);
        bump_entry(total_, sign, now);

        const int n = schema_.num_attributes();
        for (int i = 0; i < n; ++i)
            slot_of_[static_cast<std::size_t>(i)] =
                schema_.value_offset(i) + x.values[static_cast<std::size_t>(i)];

        const int cls = x.class_label;
        const auto& v = x.values;
        switch (order_) {
            case 0:
                update_root(detail::pack_root0(cls), sign, now, -1, -1);
                break;
            case 1:
                for (int j = 0; j < n; ++j)
                    update_root(detail::pack_root1(cls, j, v[static_cast<std::size_t>(j)]),
                                sign, now, j, -1);
                break;
            case 2:
                for (int j = 0; j < n; ++j)
                    for (int k = j + 1; k < n; ++k)
                        update_root(
                            detail::pack_root2(cls, j, v[static_cast<std::size_t>(j)], k,
                                               v[static_cast<std::size_t>(k)]),
                            sign, now, j, k);
                break;
        }
    }

    double effective_count(const SubsetKey& key, std::int64_t now) const {
        validate_key(key);
        const detail::RootTable::Slot* slot =
            roots_.find(detail::pack_root_key(key.class_label, key.subset_attrs,
                                              key.subset_vals));
        if (slot == nullptr) return 0.0;
        if (key.child_attr < 0) return entry_value(slot->entry, now);
        if (slot->block == detail::RootTable::kNoBlock) return 0.0;
        const std::size_t at = static_cast<std::size_t>(
            schema_.value_offset(key.child_attr) + key.child_val);
        if (!decayed()) {
            check_clock(slot->entry.last_step, now);
            return plain_block(slot->block)[at];
        }
        return entry_value(entry_block(slot->block)[at], now);
    }

    double effective_total(std::int64_t now) const { return entry_value(total_, now); }

    // delta function: true iff the (decayed) evidence for this subset-value
    // combination, summed over classes, exceeds tau.
    bool exists(std::span<const int> attrs, std::span<const int> vals, std::int64_t now,
                double tau = 0.0) const {
        if (static_cast<int>(attrs.size()) != order_)
            throw SchemaError("subset size does not match store order");
        double sum = 0.0;
        for (int cls = 0; cls < schema_.num_classes(); ++cls) {
            const detail::RootTable::Slot* slot =
                roots_.find(detail::pack_root_key(cls, attrs, vals));
            if (slot != nullptr) sum += entry_value(slot->entry, now);
        }
        return sum > tau;
    }

    // --- fast paths used by the classifier ---

    const detail::RootTable::Slot* find_root(std::uint64_t packed) const {
        return roots_.find(packed);
    }

    const double* plain_block(std::uint32_t block) const {
        return &plain_pool_[block * block_size_];
    }

    const detail::CountEntry* entry_block(std::uint32_t block) const {
        return &entry_pool_[block * block_size_];
    }

    double entry_value(const detail::CountEntry& e, std::int64_t now) const {
        check_clock(e.last_step, now);
        if (decay_rate_ == 0.0 || e.weight == 0.0) return e.weight;
        return e.weight * decay_factor(now - e.last_step);
    }

    double decay_factor(std::int64_t elapsed) const {
        const auto k = static_cast<std::size_t>(elapsed);
        if (k < decay_pow_.size()) return decay_pow_[k];
        return std::exp(-decay_rate_ * static_cast<double>(elapsed));
    }

    // Diagnostic dump, sorted by key; zero-weight entries are omitted.
    // Columns: class,subset_attrs,subset_vals,child_attr,child_val,weight,last_step
    void dump_csv(std::ostream& out) const {
        out << "class,subset_attrs,subset_vals,child_attr,child_val,weight,last_step\n";
        std::vector<const detail::RootTable::Slot*> slots;
        slots.reserve(roots_.size());
        roots_.for_each([&](const detail::RootTable::Slot& s) { slots.push_back(&s); });
        std::sort(slots.begin(), slots.end(),
                  [](const auto* a, const auto* b) { return a->key < b->key; });
        char buf[64];
        for (const auto* slot : slots) {
            SubsetKey key = unpack(slot->key);
            const std::string prefix = std::to_string(key.class_label) + "," +
                                       join(key.subset_attrs) + "," +
                                       join(key.subset_vals) + ",";
            if (slot->entry.weight != 0.0) {
                std::snprintf(buf, sizeof(buf), "%.17g", slot->entry.weight);
                out << prefix << ",," << buf << "," << slot->entry.last_step << "\n";
            }
            if (slot->block == detail::RootTable::kNoBlock) continue;
            for (int attr = 0; attr < schema_.num_attributes(); ++attr) {
                for (int val = 0; val < schema_.arity(attr); ++val) {
                    const auto at =
                        static_cast<std::size_t>(schema_.value_offset(attr) + val);
                    double weight;
                    std::int64_t last;
                    if (!decayed()) {
                        weight = plain_block(slot->block)[at];
                        last = slot->entry.last_step;
                    } else {
                        weight = entry_block(slot->block)[at].weight;
                        last = entry_block(slot->block)[at].last_step;
                    }
                    if (weight == 0.0) continue;
                    std::snprintf(buf, sizeof(buf), "%.17g", weight);
                    out << prefix << attr << "," << val << "," << buf << "," << last
                        << "\n";
                }
            }
        }
    }

    static SubsetKey unpack(std::uint64_t key) {
        SubsetKey out;
        out.class_label = static_cast<int>(key & detail::kFieldNone);
        unsigned shift = detail::kFieldBits;
        for (int i = 0; i < 2; ++i) {
            const auto attr = (key >> shift) & detail::kFieldNone;
            const auto val = (key >> (shift + detail::kFieldBits)) & detail::kFieldNone;
            if (attr != detail::kFieldNone) {
                out.subset_attrs.push_back(static_cast<int>(attr));
                out.subset_vals.push_back(static_cast<int>(val));
            }
            shift += 2 * detail::kFieldBits;
        }
        return out;
    }

  private:
    void update_root(std::uint64_t key, int sign, std::int64_t now, int skip_a,
                     int skip_b) {
        detail::RootTable::Slot& slot = roots_.find_or_insert(key);
        bump_entry(slot.entry, sign, now);
        if (slot.block == detail::RootTable::kNoBlock) {
            if (!decayed()) {
                slot.block = static_cast<std::uint32_t>(plain_pool_.size() / block_size_);
                plain_pool_.resize(plain_pool_.size() + block_size_);
            } else {
                slot.block = static_cast<std::uint32_t>(entry_pool_.size() / block_size_);
                entry_pool_.resize(entry_pool_.size() + block_size_);
            }
        }
        const int n = schema_.num_attributes();
        const int* slots = slot_of_.data();
        if (!decayed()) {
            double* blk = &plain_pool_[slot.block * block_size_];
            for (int i = 0; i < n; ++i) {
                if (i == skip_a || i == skip_b) continue;
                double& w = blk[slots[i]];
                w += sign;
                if (w < kNegativeTolerance) throw_discipline(w);
            }
        } else {
            detail::CountEntry* blk = &entry_pool_[slot.block * block_size_];
            for (int i = 0; i < n; ++i) {
                if (i == skip_a || i == skip_b) continue;
                bump_entry(blk[slots[i]], sign, now);
            }
        }
    }

    void bump_entry(detail::CountEntry& e, int sign, std::int64_t now) {
        if (decay_rate_ != 0.0 && e.weight != 0.0 && now != e.last_step)
            e.weight *= decay_factor(now - e.last_step);
        e.last_step = now;
        e.weight += sign;
        if (e.weight < kNegativeTolerance) throw_discipline(e.weight);
    }

    [[noreturn]] static void throw_discipline(double weight) {
        throw WindowDisciplineError(
            "decrement of evidence not present in store (weight " +
            std::to_string(weight) + ")");
    }

    static void check_clock(std::int64_t last, std::int64_t now) {
        if (now < last)
            throw TimeTravelError("read at step " + std::to_string(now) +
                                  " precedes entry update at " + std::to_string(last));
    }

    // Memoized exp(-D*k); grown only inside update(), which holds exclusive
    // access per the single-writer contract, so concurrent read-only
    // prediction never observes a mutation.
    void ensure_decay_pow(std::int64_t now) {
        if (decay_rate_ == 0.0) return;
        while (decay_pow_.size() <= static_cast<std::size_t>(now) + 1)
            decay_pow_.push_back(
                std::exp(-decay_rate_ * static_cast<double>(decay_pow_.size())));
    }

    void validate_key(const SubsetKey& key) const {
        if (static_cast<int>(key.subset_attrs.size()) != order_ ||
            key.subset_vals.size() != key.subset_attrs.size())
            throw SchemaError("subset key size does not match store order");
        for (std::size_t i = 0; i < key.subset_attrs.size(); ++i) {
            const int attr = key.subset_attrs[i];
            if (attr < 0 || attr >= schema_.num_attributes())
                throw SchemaError("subset attribute out of range");
            if (i > 0 && key.subset_attrs[i - 1] >= attr)
                throw SchemaError("subset attributes must be strictly increasing");
            if (key.subset_vals[i] < 0 || key.subset_vals[i] >= schema_.arity(attr))
                throw SchemaError("subset value out of arity range");
        }
        if (key.class_label < 0 || key.class_label >= schema_.num_classes())
            throw SchemaError("class label out of range");
        if (key.child_attr >= 0) {
            if (key.child_attr >= schema_.num_attributes())
                throw SchemaError("child attribute out of range");
            for (int attr : key.subset_attrs)
                if (attr == key.child_attr)
                    throw SchemaError("child attribute inside subset");
            if (key.child_val < 0 || key.child_val >= schema_.arity(key.child_attr))
                throw SchemaError("child value out of arity range");
        }
    }

    static std::string join(const std::vector<int>& xs) {
        std::string out;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i > 0) out += ';';
            out += std::to_string(xs[i]);
        }
        return out;
    }

    Schema schema_;
    int order_;
    double decay_rate_;
    std::size_t block_size_;
    detail::RootTable roots_;
    std::vector<double> plain_pool_;             // child weights, decay off
    std::vector<detail::CountEntry> entry_pool_; // child entries, decay on
    detail::CountEntry total_;
    std::vector<double> decay_pow_;
    std::vector<int> slot_of_;  // update scratch: value slot per attribute
};

}  // namespace driftlab
