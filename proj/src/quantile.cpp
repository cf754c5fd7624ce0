#include "gdglmm/quantile.hpp"

#include "gdglmm/error.hpp"

#include <algorithm>
#include <cmath>

namespace gdglmm {

double interpolated_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error("diagnostics", "empty-sequence", "quantile of an empty sequence");
    p = std::clamp(p, 0.0, 1.0);
    const double position = static_cast<double>(sorted.size() - 1) * p;  // 0-based
    const auto below = static_cast<std::size_t>(std::floor(position));
    const std::size_t above = std::min(below + 1, sorted.size() - 1);
    const double frac = position - static_cast<double>(below);
    return sorted[below] + frac * (sorted[above] - sorted[below]);
}

}  // namespace gdglmm
