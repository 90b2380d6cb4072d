#pragma once

#include <functional>

namespace dpkde {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // error estimate (Kronrod vs. Gauss difference based)
};

// One Gauss-Kronrod 7-15 panel on [a,b].
QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b);

// The 15 GK abscissae on [a,b] in ascending order, for callers that batch
// integrand evaluations themselves.
void gk15_nodes(double a, double b, double* xs);

// Combines integrand values at gk15_nodes(a,b) into the panel result.
QuadResult gk15_combine(const double* f_values, double a, double b);

// Adaptive bisection with GK15 panels until the summed error estimate is
// below max(abs_tol, rel_tol*|value|) or max_depth is reached.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-10, double rel_tol = 1e-10,
                     int max_depth = 48);

}  // namespace dpkde
