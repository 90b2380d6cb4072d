#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpkde/kernel.hpp"
#include "dpkde/rng.hpp"

namespace dpkde {

/// A benchmark density: pdf, cdf, an exact sampler (inverse CDF or
/// transformation of uniforms), and the metadata the risk and study code
/// needs. pdf may return +infinity at isolated poles; those points are
/// listed in `singularities` so quadrature can split around them.
struct DensityModel {
    std::string id;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::function<double(SplitMix64&)> sampler;
    bool in_l2 = true;
    std::optional<double> holder_exponent;  // F in C^{0,alpha}, sharp where known
    Interval tail_interval;                 // carries >= 1 - 1e-9 of the mass
    std::vector<double> singularities;
};

// Benchmark density 11: the standard normal.
DensityModel standard_normal();

// Benchmark density 6: the standard Cauchy; sampled as tan(pi(U - 1/2)).
DensityModel cauchy();

// The peaked family f(x) = eps x^(eps-1) on (0,1], F(x) = x^eps, sampled as
// U^(1/eps); eps in (0,1]. eps = 1/2 is benchmark density 8 (the law of U^2);
// eps = 1 degenerates to the uniform. F is Hoelder-eps exactly; the density
// is square-integrable iff eps > 1/2.
DensityModel peaked_family(double eps);

// Benchmark density 19: the law of N^3 for a standard normal N.
// cdf(x) = Phi(cbrt(x)); the density has a pole at 0 and is not in L2.
DensityModel normal_cubed();

// Closed-form constant c(eps) = 1 - 3*2^(eps+1)/(eps^2 + 5 eps + 6) with
// |F(h) - (F * K_h)(h)| = c(eps) h^eps exactly for the peaked family and the
// Epanechnikov kernel, h <= 1/2. Defined here for eps in (0, 1/2).
double example1_bias_constant(double eps);

// Registration checks, also used by the test-suite.
void check_pdf_cdf_consistency(const DensityModel& m, double tol = 1e-7);
void check_sampler(const DensityModel& m, std::size_t n = 100000,
                   std::uint64_t seed = 0x5eedU);

/// Catalog of registered models. The four built-ins above are preregistered
/// under ids "11", "6", "8", "19". register_model is the extension point for
/// further testbed densities; it enforces pdf/cdf consistency and a KS check
/// of the sampler against the cdf before accepting the model.
class DensityRegistry {
public:
    DensityRegistry();

    void register_model(DensityModel m);
    const DensityModel& get(const std::string& id) const;
    bool contains(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, DensityModel> models_;
};

}  // namespace dpkde
