#pragma once

#include <cmath>

namespace dpkde {

inline double normal_pdf(double x) {
    return 0.39894228040143267793994605993438 * std::exp(-0.5 * x * x);
}

// Phi through erfc; accurate to a few ulp across the double range.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

}  // namespace dpkde
