// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace poolcorr {

// Argument outside its mathematical domain (NaN, PD not in (0,1), |rho|>1, ...).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Quantile requested exactly at 0 or 1; the threshold would be infinite and
// callers are expected to treat those as exact-default / never-default cases.
struct boundary_error : domain_error {
    using domain_error::domain_error;
};

// A requested correlation or variance target lies outside its attainable
// interval. Carries the interval so callers can report how far off it was.
struct unattainable_error : std::runtime_error {
    double lower;
    double upper;
    double requested;
    unattainable_error(const std::string& what, double lower_, double upper_,
                       double requested_)
        : std::runtime_error(what), lower(lower_), upper(upper_), requested(requested_) {}
};

// (mean, spread) pair not representable by the requested marginal family,
// or a dependence target beyond what the discretized marginals can attain.
struct infeasibility_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace poolcorr
