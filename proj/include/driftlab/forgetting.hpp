#pragma once

#include <cmath>
#include <cstdio>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "driftlab/errors.hpp"
#include "driftlab/schema.hpp"

namespace driftlab {

// Forgetting policy: keep everything, keep a sliding window of the W most
// recent examples, or discount all counts by exp(-D) per step.
class ForgetPolicy {
  public:
    enum class Kind { None, Window, Decay };

    static ForgetPolicy none() { return ForgetPolicy(Kind::None, 0, 0.0); }

    static ForgetPolicy window(int capacity) {
        if (capacity < 1) throw ConfigError("window capacity must be >= 1");
        return ForgetPolicy(Kind::Window, capacity, 0.0);
    }

    static ForgetPolicy decay(double rate) {
        if (!(rate > 0.0)) throw ConfigError("decay rate must be > 0");
        return ForgetPolicy(Kind::Decay, 0, rate);
    }

    // "none" | "w<capacity>" | "d<rate>"
    static ForgetPolicy parse(const std::string& text) {
        if (text == "none") return none();
        try {
            if (text.size() > 1 && text[0] == 'w') return window(std::stoi(text.substr(1)));
            if (text.size() > 1 && text[0] == 'd') return decay(std::stod(text.substr(1)));
        } catch (const std::logic_error&) {
        }
        throw ConfigError("cannot parse forgetting policy '" + text + "'");
    }

    Kind kind() const { return kind_; }
    int window_capacity() const { return window_; }
    double decay_rate() const { return decay_; }

    // per-step multiplicative factor exp(-D) consumed by lazy decay
    double step_factor() const {
        if (kind_ != Kind::Decay)
            throw std::logic_error("step_factor is defined for decay policies only");
        return std::exp(-decay_);
    }

    std::string to_string() const {
        switch (kind_) {
            case Kind::None:
                return "none";
            case Kind::Window:
                return "w" + std::to_string(window_);
            case Kind::Decay: {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "d%g", decay_);
                return buf;
            }
        }
        return "none";
    }

    bool operator==(const ForgetPolicy& o) const {
        return kind_ == o.kind_ && window_ == o.window_ && decay_ == o.decay_;
    }

  private:
    ForgetPolicy(Kind kind, int window, double decay)
        : kind_(kind), window_(window), decay_(decay) {}

    Kind kind_;
    int window_;
    double decay_;
};

// FIFO queue bounded at W; admitting the W+1-th instance returns the oldest
// one so its counts can be decremented.
class WindowQueue {
  public:
    explicit WindowQueue(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {
        if (capacity < 1) throw ConfigError("window capacity must be >= 1");
    }

    std::optional<Instance> admit(Instance x) {
        buffer_.push_back(std::move(x));
        if (buffer_.size() <= capacity_) return std::nullopt;
        Instance evicted = std::move(buffer_.front());
        buffer_.pop_front();
        return evicted;
    }

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<Instance>& contents() const { return buffer_; }

  private:
    std::deque<Instance> buffer_;
    std::size_t capacity_;
};

}  // namespace driftlab
