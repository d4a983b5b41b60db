#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "driftlab/errors.hpp"

namespace driftlab {

// One discretized, labeled example at a time step.
struct Instance {
    std::vector<std::uint16_t> values;
    int class_label = 0;
    std::int64_t step = 0;
};

// Attribute arities and class arity for a stream; the contract between
// generator, ingestion, and model. Arities are capped at what the packed
// 64-bit count keys can address.
class Schema {
  public:
    static constexpr int kMaxArity = 1023;
    static constexpr int kMaxAttributes = 1022;
    static constexpr int kMaxClasses = 1023;

    Schema(std::vector<int> arities, int num_classes)
        : arities_(std::move(arities)), num_classes_(num_classes) {
        if (arities_.empty())
            throw SchemaError("schema needs at least one attribute");
        if (arities_.size() > static_cast<std::size_t>(kMaxAttributes))
            throw SchemaError("too many attributes for packed keys: " +
                              std::to_string(arities_.size()));
        if (num_classes_ < 2 || num_classes_ > kMaxClasses)
            throw SchemaError("class arity out of range: " + std::to_string(num_classes_));
        offsets_.resize(arities_.size());
        int running = 0;
        for (std::size_t i = 0; i < arities_.size(); ++i) {
            if (arities_[i] < 2 || arities_[i] > kMaxArity)
                throw SchemaError("attribute " + std::to_string(i) +
                                  " arity out of range: " + std::to_string(arities_[i]));
            offsets_[i] = running;
            running += arities_[i];
        }
        total_slots_ = running;
    }

    int num_attributes() const { return static_cast<int>(arities_.size()); }
    int num_classes() const { return num_classes_; }
    int arity(int attr) const { return arities_[static_cast<std::size_t>(attr)]; }
    const std::vector<int>& arities() const { return arities_; }

    // dense addressing of (attribute, value) pairs inside a child block
    int value_offset(int attr) const { return offsets_[static_cast<std::size_t>(attr)]; }
    int total_value_slots() const { return total_slots_; }

    bool operator==(const Schema& other) const {
        return arities_ == other.arities_ && num_classes_ == other.num_classes_;
    }

    void check_instance(const Instance& x) const {
        if (static_cast<int>(x.values.size()) != num_attributes())
            throw SchemaError("instance has " + std::to_string(x.values.size()) +
                              " values, schema expects " + std::to_string(num_attributes()));
        for (int i = 0; i < num_attributes(); ++i)
            if (x.values[static_cast<std::size_t>(i)] >= arities_[static_cast<std::size_t>(i)])
                throw SchemaError("attribute " + std::to_string(i) + " value " +
                                  std::to_string(x.values[static_cast<std::size_t>(i)]) +
                                  " exceeds arity " +
                                  std::to_string(arities_[static_cast<std::size_t>(i)]));
        if (x.class_label < 0 || x.class_label >= num_classes_)
            throw SchemaError("class label " + std::to_string(x.class_label) +
                              " exceeds class arity " + std::to_string(num_classes_));
        if (x.step < 0) throw SchemaError("negative step");
    }

  private:
    std::vector<int> arities_;
    std::vector<int> offsets_;
    int num_classes_;
    int total_slots_ = 0;
};

}  // namespace driftlab
