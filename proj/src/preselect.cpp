#include "ipss/preselect.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ipss/parallel.hpp"
#include "ipss/rng.hpp"

namespace ipss {

std::size_t preselect_target(std::size_t p) {
    return std::max<std::size_t>(200, (p + 19) / 20);
}

PreselectionResult preselect(const Dataset& d, const Backend& backend, std::uint64_t seed,
                             int threads) {
    const std::size_t p = d.p();
    PreselectionResult res;
    if (p <= 200) {
        res.kept.resize(p);
        std::iota(res.kept.begin(), res.kept.end(), std::size_t{0});
        return res;
    }
    if (!backend.importance)
        throw std::invalid_argument("preselect: backend has no importance function");

    res.active = true;
    constexpr std::size_t kFits = 3;
    std::vector<std::vector<double>> fits(kFits);
    parallel_for(kFits, threads,
                 [&](std::size_t r) { fits[r] = backend.importance(d, derive_seed(seed, r)); });

    res.mean_importance.assign(p, 0.0);
    for (const auto& f : fits) {
        if (f.size() != p) throw std::runtime_error("preselect: backend returned wrong length");
        for (std::size_t j = 0; j < p; ++j) res.mean_importance[j] += f[j];
    }
    for (double& v : res.mean_importance) v /= static_cast<double>(kFits);

    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (res.mean_importance[a] != res.mean_importance[b])
            return res.mean_importance[a] > res.mean_importance[b];
        return a < b;
    });
    idx.resize(std::min(preselect_target(p), p));
    std::sort(idx.begin(), idx.end());
    res.kept = std::move(idx);
    return res;
}

}  // namespace ipss
