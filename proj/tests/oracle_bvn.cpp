// SPDX-License-Identifier: Apache-2.0

#include "oracle_bvn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_randist.h>

namespace poolcorr_test {

namespace {

struct IntegrandParams {
    double k;
    double rho;
    double denom; // sqrt(1 - rho^2)
};

double integrand(double x, void* raw) {
    const IntegrandParams* p = static_cast<const IntegrandParams*>(raw);
    return gsl_ran_ugaussian_pdf(x) *
           gsl_cdf_ugaussian_P((p->k - p->rho * x) / p->denom);
}

} // namespace

double oracle_phi2(double h, double k, double rho) {
    if (std::isnan(h) || std::isnan(k) || std::isnan(rho) || std::fabs(rho) > 1.0)
        throw std::invalid_argument("oracle_phi2: bad arguments");

    // Infinite thresholds and degenerate correlations in closed form.
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    const double ph = h == INFINITY ? 1.0 : gsl_cdf_ugaussian_P(h);
    const double pk = k == INFINITY ? 1.0 : gsl_cdf_ugaussian_P(k);
    if (h == INFINITY) return pk;
    if (k == INFINITY) return ph;
    if (rho == 0.0) return ph * pk;
    if (rho == 1.0) return std::min(ph, pk);
    if (rho == -1.0) return std::max(0.0, ph + pk - 1.0);

    IntegrandParams params{k, rho, std::sqrt((1.0 - rho) * (1.0 + rho))};
    gsl_function f;
    f.function = &integrand;
    f.params = &params;

    // The integrand is smooth but develops a sharp shoulder near x = k/rho
    // as |rho| -> 1; a deep workspace lets QAGIL subdivide through it.
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4000);
    if (!ws) throw std::bad_alloc();
    double result = 0.0, abserr = 0.0;
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    const int rc =
        gsl_integration_qagil(&f, h, 1e-13, 1e-12, 4000, ws, &result, &abserr);
    gsl_set_error_handler(old);
    gsl_integration_workspace_free(ws);
    if (rc != GSL_SUCCESS && rc != GSL_EROUND)
        throw std::runtime_error("oracle_phi2: quadrature failed");
    return std::clamp(result, 0.0, 1.0);
}

} // namespace poolcorr_test
