#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace gradcheck {

struct Result {
    double max_rel = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

/// Central finite-difference oracle: re-evaluates the forward closure at
/// perturbed inputs and compares with the analytic gradient. Independent of
/// the tape backward path by construction. The denominator floor keeps
/// roundoff on near-zero components from dominating the ratio.
inline Result compare(const std::function<double(const std::vector<double>&)>& forward,
                      const std::vector<double>& x0, const std::vector<double>& analytic,
                      double h = 1e-5, double denom_floor = 1e-3) {
    Result result;
    std::vector<double> x = x0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = forward(x);
        x[i] = keep - h;
        const double down = forward(x);
        x[i] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), denom_floor});
        const double rel = std::abs(numeric - analytic[i]) / denom;
        if (rel > result.max_rel) {
            result.max_rel = rel;
            result.worst_index = i;
            result.analytic_at_worst = analytic[i];
            result.numeric_at_worst = numeric;
        }
    }
    return result;
}

}  // namespace gradcheck
