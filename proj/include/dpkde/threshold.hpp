#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dpkde/distance.hpp"
#include "dpkde/kernel.hpp"

namespace dpkde {

struct PowerLawForm {
    double c;      // > 0
    double gamma;  // in (0, 1/2]
};

struct LilForm {
    double epsilon;    // > 0
    double kernel_l1;  // |K|_1
    int c_d;
};

/// Threshold function s(n), either the power law c*n^-gamma or the
/// iterated-logarithm form c_d(|K|_1 + 1 + eps) * sqrt(log log n / (2n)).
/// The LIL form is defined for n >= 3 (log log n > 0).
class ThresholdSpec {
public:
    static ThresholdSpec power_law(double c, double gamma, std::string label = "custom");
    static ThresholdSpec lil(double epsilon, const Kernel& k, const DistanceSpec& d);

    double operator()(std::int64_t n) const;  // s(n)

    bool is_power_law() const { return power_.has_value(); }
    const std::optional<PowerLawForm>& power_law_form() const { return power_; }
    const std::optional<LilForm>& lil_form() const { return lil_; }
    const std::string& label() const { return label_; }

private:
    ThresholdSpec() = default;
    std::optional<PowerLawForm> power_;
    std::optional<LilForm> lil_;
    std::string label_;
};

// Named thresholds of the simulation study:
//   V      0.60 n^-1/2        ELR    0.35 n^-2/5
//   KS50   0.83 n^-1/2        KS95   1.36 n^-1/2
//   KUIP50 1.22 n^-1/2        KUIP95 1.75 n^-1/2
// Labels are case-insensitive; "E-LR" is accepted for ELR. The L2NR
// threshold is kernel-specific; build it with l2nr_spec.
ThresholdSpec preset(std::string_view label);

// The distance each preset is conventionally paired with (Kolmogorov for
// V/ELR/KS*/L2NR, Kuiper-1 for KUIP*).
DistanceSpec preset_distance(std::string_view label);

struct L2nrConstant {
    double c;
    double gamma;  // ell / (2 ell + 1)
};

// Normal-reference constant: the power-law threshold that asymptotically
// reproduces the L2-optimal bandwidth when the true density is standard
// normal.  c = (|K|_2^(2l) k_l / ((2l)^l l!))^(1/(2l+1))
//              * d(f^(l-1), 0) / |f^(l)|_2^(2l/(2l+1)).
// The first factor is invariant under kernel rescaling. d(f^(l-1), 0) is
// evaluated under the chosen distance; for l = 2 this is phi(1) for the
// Kolmogorov distance and 2 phi(1) for Kuiper-1.
L2nrConstant l2nr_constant(const Kernel& k, const DistanceSpec& d);

ThresholdSpec l2nr_spec(const Kernel& k, const DistanceSpec& d);

// s(n) = c_d (|K|_1 + 1 + eps) sqrt(log log n / 2n); natural logarithms.
ThresholdSpec lil_threshold(const Kernel& k, const DistanceSpec& d, double epsilon);

// Smallest n with c_d*kappa0/n < s(n) < kappa0, from which a root of the
// discrepancy equation is guaranteed for a probability-density kernel.
// Throws no_finite_existence_n if no such n <= 2^40 exists.
std::int64_t existence_min_n(const ThresholdSpec& s, const Kernel& k,
                             const DistanceSpec& d);

struct ThresholdDiagnostics {
    bool vanishes = false;             // s(n) -> 0
    bool dominates_one_over_n = false; // 1/n = o(s(n))
    bool dominates_lil = false;        // sqrt(log log n / n) = o(s(n))
    // With a Hoelder exponent alpha of F: n^alpha s(n) -> inf, which together
    // with dominates_lil gives a.s. L1 consistency for density kernels.
    std::optional<bool> consistent_for_alpha;
};

// Numeric ratio-decay checks of the consistency hypotheses over
// n = 10^2 .. 10^9.
ThresholdDiagnostics threshold_diagnostics(const ThresholdSpec& s,
                                           std::optional<double> holder_alpha = {});

}  // namespace dpkde
