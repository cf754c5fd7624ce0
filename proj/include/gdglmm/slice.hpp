#pragma once

#include "gdglmm/error.hpp"
#include "gdglmm/random.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace gdglmm {

inline constexpr int kMaxDoublings = 100;

/// Univariate slice sampling: vertical level, bracket expansion by doubling
/// from a randomly placed initial interval of width `width`, then shrinkage
/// with the doubling acceptance test so the move stays reversible. Throws
/// Error{"sampler", "divergent-target"} when the bracket is still inside the
/// slice after `max_doublings` doublings.
template <typename LogDensity>
double slice_sample(LogDensity&& logdens, double x0, double width, RandomStream& rng,
                    int max_doublings = kMaxDoublings) {
    const double f0 = logdens(x0);
    if (!std::isfinite(f0)) {
        throw Error("sampler", "non-finite-start",
                    "slice sampler started where the log density is not finite (x0 = " +
                        std::to_string(x0) + ")");
    }
    const double level = f0 - rng.exponential();

    double left = x0 - width * rng.uniform();
    double right = left + width;
    double f_left = logdens(left);
    double f_right = logdens(right);
    int doublings = 0;
    while (f_left > level || f_right > level) {
        if (++doublings > max_doublings) {
            throw Error("sampler", "divergent-target",
                        "slice bracket still inside the slice after " + std::to_string(max_doublings) + " doublings");
        }
        const double span = right - left;
        if (rng.uniform() < 0.5) {
            left -= span;
            f_left = logdens(left);
        } else {
            right += span;
            f_right = logdens(right);
        }
    }

    // Would the doubling from x1 have produced a bracket containing x0?
    auto acceptable = [&](double x1) {
        if (doublings == 0) return true;
        double lo = left, hi = right;
        double f_lo = f_left, f_hi = f_right;
        bool split = false;
        while (hi - lo > 1.1 * width) {
            const double mid = 0.5 * (lo + hi);
            if ((x0 < mid) != (x1 < mid)) split = true;
            if (x1 < mid) {
                hi = mid;
                f_hi = logdens(hi);
            } else {
                lo = mid;
                f_lo = logdens(lo);
            }
            if (split && level >= f_lo && level >= f_hi) return false;
        }
        return true;
    };

    double lo = left, hi = right;
    for (;;) {
        const double x1 = lo + rng.uniform() * (hi - lo);
        const double f1 = logdens(x1);
        if (f1 > level && acceptable(x1)) {
            assert(f1 > level);
            return x1;
        }
        if (x1 < x0) {
            lo = x1;
        } else {
            hi = x1;
        }
        if (hi - lo < 1e-300) return x0;
    }
}

}  // namespace gdglmm
