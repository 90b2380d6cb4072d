#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "dpkde/distance.hpp"
#include "dpkde/kernel.hpp"
#include "dpkde/sample.hpp"
#include "dpkde/threshold.hpp"

namespace dpkde {

class no_root_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RootRule { first, smallest, largest };

enum class MultiplicityHint { unique_in_bracket, multiple_suspected };

struct SelectionResult {
    double bandwidth = 0.0;
    double threshold_value = 0.0;   // s(n) that was solved for
    double achieved_distance = 0.0; // d(F_n, Fhat^h) at the returned h
    int iterations = 0;             // total distance evaluations
    double bracket_lo = 0.0;        // final root bracket
    double bracket_hi = 0.0;
    MultiplicityHint multiplicity = MultiplicityHint::unique_in_bracket;
};

/// Solve d(F_n, Fhat_n^h) = s(n) for h.
///
/// Bracketing: h_lo starts at 0.1x the smallest positive gap and is halved
/// until d(h_lo) < s(n); h_hi starts at the sample range and is doubled until
/// d(h_hi) > s(n) (at most 200 steps each; failure raises no_root_error).
/// rule = first runs Illinois-damped regula falsi inside that bracket.
/// rule = smallest/largest first scans a 64-point geometric grid to locate
/// the extreme sign-change cell; the scan also sets multiplicity back to
/// multiple_suspected when it sees two or more sign changes.
///
/// The returned bandwidth satisfies |d - s(n)| <= 1e-6 in distance units.
/// Throws std::domain_error for degenerate (all-equal) samples and when
/// s(n) lies outside (c_d kappa0 / n, kappa0) for a density kernel.
SelectionResult select_bandwidth(const Sample& sample, const Kernel& kernel,
                                 const DistanceSpec& dist, const ThresholdSpec& thr,
                                 RootRule rule = RootRule::first);

// d(F_n, Fhat_n^h) over an ascending grid of bandwidths.
std::vector<double> distance_profile(const Sample& sample, const Kernel& kernel,
                                     const DistanceSpec& dist,
                                     std::span<const double> h_grid);

}  // namespace dpkde
