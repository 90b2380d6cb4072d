#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace dpkde {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// A smoothing kernel of order ell together with its distribution function
/// and the derived constants the selectors and rate formulas need:
/// the ell-th moment k_ell, the L1 norm, the squared L2 norm, and
/// kappa0 = sup_x |Kcdf(x) - 1(x >= 0)|.
///
/// Instances are immutable after construction and cheap to copy; they may be
/// shared freely across threads.
class Kernel {
public:
    enum class Family { epanechnikov, gaussian, custom };

    // K(x) = (3/4)(1-x^2) on [-1,1]; Kcdf has the exact cubic closed form.
    // k_2 = 1/5, |K|_1 = 1, |K|_2^2 = 3/5, kappa0 = 1/2.
    static Kernel epanechnikov();

    // Standard normal density; Kcdf is Phi evaluated through erfc, which is
    // accurate to a few ulp over the full double range.
    // k_2 = 1, |K|_1 = 1, |K|_2^2 = 1/(2*sqrt(pi)), kappa0 = 1/2.
    static Kernel gaussian();

    // User-supplied kernel. `density` and `cdf` must be consistent; the
    // constants are computed once by adaptive quadrature (tolerance 1e-10).
    // `order` is the kernel order ell (>= 1); `is_density` declares K >= 0
    // with monotone cdf.
    static Kernel custom(std::string name, int order,
                         std::function<double(double)> density,
                         std::function<double(double)> cdf,
                         std::optional<Interval> support, bool is_density);

    const std::string& name() const;
    Family family() const;
    int order() const;

    double eval(double u) const;  // K(u)
    double cdf(double u) const;   // Kcdf(u) = integral of K over (-inf, u]

    // Kcdf(x/h); throws std::domain_error for h <= 0.
    double scaled_cdf(double h, double x) const;

    double moment_ell() const;  // k_ell
    double l1_norm() const;     // |K|_1
    double l2_norm_sq() const;  // |K|_2^2
    double kappa0() const;

    bool is_density() const;
    const std::optional<Interval>& support() const;

    // Radius beyond which Kcdf equals 0/1 to double precision. Equals the
    // support edge for compact kernels; 9 for the Gaussian.
    double effective_radius() const;

private:
    struct Impl;
    explicit Kernel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// K_sigma(u) = K(u/sigma)/sigma as a custom kernel (constants recomputed).
Kernel rescale(const Kernel& k, double sigma);

}  // namespace dpkde
