#pragma once

#include <cstddef>
#include <vector>

namespace ipss {

struct SelectionOutcome {
    std::vector<std::size_t> selected;  // ascending feature indices
    double threshold = 0.0;             // efp level actually applied
    double fdr_estimate = 0.0;          // threshold / |selected|, 0 when empty
};

// Features with efp at or below the target expected false positive count.
SelectionOutcome select_at_efp(const std::vector<double>& efp, double target);

// Largest selection whose estimated false discovery rate t/|S(t)| is at or
// below alpha, with t scanned over the distinct efp values.
SelectionOutcome select_at_fdr(const std::vector<double>& efp, double alpha);

// Per feature, the smallest estimated FDR over thresholds that admit it,
// capped at 1. Monotone in efp.
std::vector<double> q_values(const std::vector<double>& efp);

}  // namespace ipss
