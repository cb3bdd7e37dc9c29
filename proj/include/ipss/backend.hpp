#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ipss/dataio.hpp"

namespace ipss {

enum class BackendKind { gb, rf, custom };

// An importance backend maps a dataset and a seed to one nonnegative score
// per feature. The built-in backends wrap the tree ensembles; anything with
// the same shape can be plugged in.
struct Backend {
    std::string name;
    std::function<std::vector<double>(const Dataset& d, std::uint64_t seed)> importance;
};

// Gradient-boosted stumps (ipssgb): 100 depth-1 rounds, learning rate 0.3,
// L2 leaf regularization 1, a third of the features tried per split.
Backend make_gb_backend();

// Random forest (ipssrf): 100 fully grown trees on bootstrap resamples, a
// third of the features tried per split.
Backend make_rf_backend();

// Throws for BackendKind::custom; supply your own Backend instead.
Backend make_backend(BackendKind kind);

// Subsample pair count used when the caller does not set one: 100 for gb,
// 50 for rf.
std::size_t default_subsample_pairs(BackendKind kind);

}  // namespace ipss
