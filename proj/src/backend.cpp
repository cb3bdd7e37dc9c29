#include "ipss/backend.hpp"

#include <stdexcept>

#include "ipss/trees.hpp"

namespace ipss {

Backend make_gb_backend() {
    Backend b;
    b.name = "ipssgb";
    b.importance = [](const Dataset& d, std::uint64_t seed) {
        TreeConfig cfg = TreeConfig::boosting_defaults();
        cfg.seed = seed;
        return mdi_importance(fit_boosting(d, cfg), d.p());
    };
    return b;
}

Backend make_rf_backend() {
    Backend b;
    b.name = "ipssrf";
    b.importance = [](const Dataset& d, std::uint64_t seed) {
        TreeConfig cfg = TreeConfig::forest_defaults();
        cfg.seed = seed;
        return mdi_importance(fit_forest(d, cfg, 1), d.p());
    };
    return b;
}

Backend make_backend(BackendKind kind) {
    switch (kind) {
        case BackendKind::gb:
            return make_gb_backend();
        case BackendKind::rf:
            return make_rf_backend();
        default:
            throw std::invalid_argument("make_backend: custom backends must be supplied directly");
    }
}

std::size_t default_subsample_pairs(BackendKind kind) {
    switch (kind) {
        case BackendKind::gb:
            return 100;
        case BackendKind::rf:
            return 50;
        default:
            throw std::invalid_argument("default_subsample_pairs: no default for custom backends");
    }
}

}  // namespace ipss
