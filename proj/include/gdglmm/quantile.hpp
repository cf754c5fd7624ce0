#pragma once

#include <span>

namespace gdglmm {

/// Quantile of an ascending sequence by linear interpolation at the
/// 1-based position 1 + (u - 1) p. Used for knot placement and for every
/// posterior quantile the library reports.
double interpolated_quantile(std::span<const double> sorted, double p);

}  // namespace gdglmm
