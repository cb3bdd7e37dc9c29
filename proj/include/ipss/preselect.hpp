#pragma once

#include <cstdint>
#include <vector>

#include "ipss/backend.hpp"
#include "ipss/dataio.hpp"

namespace ipss {

struct PreselectionResult {
    bool active = false;
    std::vector<std::size_t> kept;        // ascending original indices
    std::vector<double> mean_importance;  // per original feature; empty when inactive
};

// Number of features kept when preselection runs: max(200, ceil(p / 20)).
std::size_t preselect_target(std::size_t p);

// With more than 200 features, fits the backend three times on the full
// data, averages the importances, and keeps the top preselect_target(p)
// features (ties go to the lower index). Identity otherwise.
PreselectionResult preselect(const Dataset& d, const Backend& backend, std::uint64_t seed,
                             int threads = 0);

}  // namespace ipss
