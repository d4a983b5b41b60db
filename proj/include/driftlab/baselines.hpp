#pragma once

#include <span>
#include <string>
#include <string_view>

#include "driftlab/errors.hpp"
#include "driftlab/ingest.hpp"

namespace driftlab {

// Published prequential 0-1 losses of twelve standard concept-drift learners
// on the four benchmark streams; embedded so comparisons need no network and
// no re-runs of external toolkits.
struct BaselineEntry {
    std::string_view technique;
    double power_supply;
    double airlines;
    double electric_norm;
    double sensor;
};

inline std::span<const BaselineEntry> baseline_table() {
    static const BaselineEntry table[] = {
        {"AccUpdatedEns", 0.8599, 0.3335, 0.2219, 0.3102},
        {"OzaBagAdwin", 0.8692, 0.3448, 0.1670, 0.2874},
        {"DriftDetClassifier", 0.8634, 0.3534, 0.1984, 0.3206},
        {"DriftDetClassifierEDDM", 0.8615, 0.3511, 0.1490, 0.3159},
        {"ASHoeffdingTree", 0.8640, 0.3552, 0.2007, 0.7153},
        {"HoeffdingTree", 0.8640, 0.3552, 0.2007, 0.7153},
        {"OzaBag", 0.8655, 0.3575, 0.1982, 0.7067},
        {"HoeffdingAdaptiveTree", 0.8661, 0.3632, 0.1759, 0.3718},
        {"OzaBoost", 0.9583, 0.3719, 0.1781, 0.9514},
        {"AccWeightedEns", 0.8579, 0.3751, 0.2471, 0.3596},
        {"LeveragingBag", 0.8717, 0.3769, 0.1303, 0.2395},
        {"OzaBoostAdwin", 0.9584, 0.3888, 0.1430, 0.4070},
    };
    return table;
}

inline double baseline_loss(const BaselineEntry& entry, std::string_view dataset) {
    const std::string lower = detail::to_lower(dataset);
    if (lower == "powersupply") return entry.power_supply;
    if (lower == "airlines") return entry.airlines;
    if (lower == "electricnorm") return entry.electric_norm;
    if (lower == "sensor") return entry.sensor;
    throw ConfigError("unknown benchmark dataset: " + std::string(dataset));
}

struct BestBaseline {
    std::string technique;
    double loss;
};

inline BestBaseline best_baseline(std::string_view dataset) {
    BestBaseline best{"", 2.0};
    for (const BaselineEntry& entry : baseline_table()) {
        const double loss = baseline_loss(entry, dataset);
        if (loss < best.loss) best = {std::string(entry.technique), loss};
    }
    return best;
}

}  // namespace driftlab
