#pragma once

#include <utility>
#include <vector>

#include "dpkde/kernel.hpp"
#include "dpkde/sample.hpp"

namespace dpkde {

struct LscvGrid {
    double lo = 0.0;     // 0 => default range/n
    double hi = 0.0;     // 0 => default range
    int points = 60;     // geometric grid size
    // With the default grid, extend it geometrically when the argmin lands on
    // a boundary (down to half the smallest positive gap, up to 64x the
    // range). Explicit grids are never extended.
    bool auto_extend = true;
};

struct LscvResult {
    double bandwidth = 0.0;
    std::vector<std::pair<double, double>> criterion_curve;  // filled on request
    bool grid_extended = false;
};

// Leave-one-out least-squares cross-validation score
//   integral of fhat^2  -  (2/n) sum_i fhat_{-i}(X_i),
// with the first term through the exact kernel self-convolution
//   (1/(n^2 h)) sum_{i,j} (K*K)((X_i - X_j)/h).
// For the Epanechnikov kernel K*K(t) = (3/160)(2-|t|)^3(t^2+6|t|+4) on
// [-2,2]; for the Gaussian it is the N(0,2) density. Pair sums are windowed
// to the convolution support by a sorted two-pointer sweep.
double lscv_score(const Sample& s, const Kernel& k, double h);

// Geometric-grid argmin of the score with golden-section refinement inside
// the bracketing cell to 1e-3 relative tolerance. Grid ties resolve to the
// smaller h. Throws std::runtime_error when the argmin stays pinned to a
// grid boundary after extension.
LscvResult lscv_select(const Sample& s, const Kernel& k, const LscvGrid& grid = {},
                       bool emit_curve = false);

}  // namespace dpkde
