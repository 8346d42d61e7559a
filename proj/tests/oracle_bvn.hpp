// SPDX-License-Identifier: Apache-2.0
//
// Independent reference for the bivariate normal CDF, used to cross-check
// the production Gauss-Legendre implementation.  Computes
//
//   Phi2(h, k, rho) = int_{-inf}^{h} phi(x) Phi((k - rho x)/sqrt(1-rho^2)) dx
//
// by GSL adaptive quadrature on the semi-infinite interval, with the
// univariate pieces taken from GSL as well, so no code is shared with
// poolcorr::bivariate_normal_cdf.  Absolute accuracy is ~1e-13 for
// |rho| <= 0.9995; degenerate correlations fall back to the closed forms.
#pragma once

namespace poolcorr_test {

double oracle_phi2(double h, double k, double rho);

} // namespace poolcorr_test
