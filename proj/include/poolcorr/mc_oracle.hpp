// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo oracle for the default-rate variance under the one-factor
// model.  Deliberately independent of the analytic code paths: normals come
// from inverse-CDF sampling, never from the Phi2 machinery.

#pragma once

#include <cstdint>
#include <string>

#include "poolcorr/poolvar.hpp"

namespace poolcorr {

enum class SimulationMode {
    auto_select, // exposure-level when n <= 1e6, conditional otherwise
    exposure,    // draw every default indicator (binomials per cell)
    conditional  // exact conditional moments given the common factor draw
};

struct SimulationSpec {
    ExposureConstellation constellation;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    SimulationMode mode = SimulationMode::auto_select;
    int threads = 1; // trial partitions; the estimate is thread-count invariant
};

struct SimulationResult {
    double variance_estimate = 0.0;
    double standard_error = 0.0;
    // Set when the trial budget is too small for a stable standard error;
    // never a failure.
    std::string warning;
};

// Estimate Var(DR) for the pool.  Exposure mode simulates each cell's
// default count; conditional mode evaluates the exact conditional mean and
// variance given the factor draw, so its estimator is unbiased at every n
// (the idiosyncratic 1/n term enters through the conditional variance, not
// through sampling noise).  The standard error comes from batch means over
// 100 fixed batches.  Identical (spec, seed) give identical results.
SimulationResult simulate_variance(const SimulationSpec& spec);

} // namespace poolcorr
