#include "ipss/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ipss {

namespace {

void check_efp(const std::vector<double>& efp) {
    for (double v : efp)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("efp scores must be nonnegative and finite");
}

// Distinct efp values ascending, with the selection size at each one.
// Sizes are strictly increasing across breakpoints.
struct Breakpoints {
    std::vector<double> value;
    std::vector<std::size_t> size;
};

Breakpoints breakpoints_of(const std::vector<double>& efp) {
    std::vector<double> sorted(efp);
    std::sort(sorted.begin(), sorted.end());
    Breakpoints bp;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        bp.value.push_back(sorted[i]);
        bp.size.push_back(i + 1);
    }
    return bp;
}

}  // namespace

SelectionOutcome select_at_efp(const std::vector<double>& efp, double target) {
    if (!(target >= 0.0)) throw std::invalid_argument("select_at_efp: target must be nonnegative");
    check_efp(efp);
    SelectionOutcome out;
    out.threshold = target;
    for (std::size_t j = 0; j < efp.size(); ++j)
        if (efp[j] <= target) out.selected.push_back(j);
    if (!out.selected.empty()) out.fdr_estimate = target / static_cast<double>(out.selected.size());
    return out;
}

SelectionOutcome select_at_fdr(const std::vector<double>& efp, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("select_at_fdr: alpha must be positive");
    check_efp(efp);
    const Breakpoints bp = breakpoints_of(efp);

    // The last feasible breakpoint has the largest selection.
    SelectionOutcome out;
    std::size_t chosen = bp.value.size();
    for (std::size_t k = 0; k < bp.value.size(); ++k)
        if (bp.value[k] / static_cast<double>(bp.size[k]) <= alpha) chosen = k;
    if (chosen == bp.value.size()) return out;

    out.threshold = bp.value[chosen];
    out.fdr_estimate = bp.value[chosen] / static_cast<double>(bp.size[chosen]);
    for (std::size_t j = 0; j < efp.size(); ++j)
        if (efp[j] <= out.threshold) out.selected.push_back(j);
    return out;
}

std::vector<double> q_values(const std::vector<double>& efp) {
    check_efp(efp);
    const Breakpoints bp = breakpoints_of(efp);
    const std::size_t m = bp.value.size();

    // Smallest estimated FDR over this and all later breakpoints.
    std::vector<double> best(m);
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t k = m; k-- > 0;) {
        running = std::min(running, bp.value[k] / static_cast<double>(bp.size[k]));
        best[k] = running;
    }

    std::vector<double> q(efp.size());
    for (std::size_t j = 0; j < efp.size(); ++j) {
        const auto it = std::lower_bound(bp.value.begin(), bp.value.end(), efp[j]);
        q[j] = std::min(best[static_cast<std::size_t>(it - bp.value.begin())], 1.0);
    }
    return q;
}

}  // namespace ipss
