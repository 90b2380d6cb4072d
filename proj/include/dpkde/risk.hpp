#pragma once

#include <optional>

#include "dpkde/kernel.hpp"
#include "dpkde/sample.hpp"
#include "dpkde/testbed.hpp"

namespace dpkde {

struct RiskValue {
    double l1 = 0.0;                   // integral of |fhat - f|
    std::optional<double> l2sq;        // integral of (fhat - f)^2; absent outside L2
    double quadrature_error_bound = 0.0;
};

// Distance between the kernel density estimate with bandwidth h and the true
// density, by composite Gauss-Kronrod quadrature with panels aligned to the
// estimate's breakpoints (data +- support*h), log-spaced refinement toward
// pdf poles, and analytic cdf tails for the L1 part. For unbounded-support
// kernels the estimate is truncated 8h beyond the sample range and the tail
// mass is added to the error bound. l2sq is only computed when the model is
// square-integrable.
RiskValue evaluate_risk(const Sample& s, const Kernel& k, double h,
                        const DensityModel& model);

}  // namespace dpkde
