// SPDX-License-Identifier: Apache-2.0
//
// Internal: compensated summation shared by the moment and sweep code.
#pragma once

#include <cmath>

namespace poolcorr::detail {

// Neumaier variant of compensated summation; the error bound is independent
// of term count, which the K^2 L^2 grid sum (up to ~10^8 terms) relies on.
struct Accum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

} // namespace poolcorr::detail
