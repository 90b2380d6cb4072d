#include "dpkde/selector.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace dpkde {

namespace {

struct RootResult {
    double h;
    double f_at_h;  // d(h) - s
    double lo, hi;
};

// Illinois-damped regula falsi on a sign-change bracket. Iterates until the
// residual is below `f_tol` and the bracket has collapsed to ~1e-9 relative
// width, which pins the returned root against evaluation noise. Every eighth
// step falls back to bisection so the bracket cannot stall.
RootResult illinois(const std::function<double(double)>& f, double a, double fa,
                    double b, double fb, double f_tol, int max_iter) {
    double c = 0.5 * (a + b);
    double fc = fa;
    int side = 0;
    for (int it = 0; it < max_iter; ++it) {
        c = (a * fb - b * fa) / (fb - fa);
        if (!(c > a && c < b) || it % 8 == 7) c = 0.5 * (a + b);
        if (c <= a || c >= b) break;  // bracket exhausted in doubles
        fc = f(c);
        if (fc == 0.0) return {c, 0.0, a, b};
        const bool same_as_a = (fc < 0.0) == (fa < 0.0);
        if (same_as_a) {
            a = c;
            fa = fc;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            b = c;
            fb = fc;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
        if (std::abs(fc) <= f_tol && b - a <= 1e-9 * std::max(std::abs(c), 1e-300))
            return {c, fc, a, b};
    }
    return {c, fc, a, b};
}

}  // namespace

SelectionResult select_bandwidth(const Sample& sample, const Kernel& kernel,
                                 const DistanceSpec& dist, const ThresholdSpec& thr,
                                 RootRule rule) {
    const auto pts = sample.points();
    const auto n = static_cast<std::int64_t>(sample.size());
    const double s = thr(n);
    const double min_gap = sample.min_positive_gap();  // rejects degenerate samples

    if (kernel.is_density()) {
        const double lower = dist.c_d() * kernel.kappa0() / static_cast<double>(n);
        if (!(s > lower && s < kernel.kappa0()))
            throw std::domain_error(
                "threshold s(n)=" + std::to_string(s) +
                " outside the achievable range (c_d*kappa0/n, kappa0); "
                "n is below the existence threshold for this preset");
    }

    int evals = 0;
    auto f = [&](double h) {
        ++evals;
        return detail::distance_fast(dist, pts, kernel, h) - s;
    };

    // Bracket per the existence lemma: d(h) falls to ~c_d*kappa0/n as h -> 0
    // and rises toward kappa0 as h -> inf.
    double h_lo = 0.1 * min_gap;
    double f_lo = f(h_lo);
    for (int i = 0; f_lo >= 0.0 && i < 200; ++i) {
        h_lo *= 0.5;
        f_lo = f(h_lo);
    }
    if (f_lo >= 0.0)
        throw no_root_error("no bandwidth with d(F_n, Fhat) below the threshold");

    double h_hi = sample.range();
    double f_hi = f(h_hi);
    for (int i = 0; f_hi <= 0.0 && i < 200; ++i) {
        h_hi *= 2.0;
        f_hi = f(h_hi);
    }
    if (f_hi <= 0.0)
        throw no_root_error("no bandwidth with d(F_n, Fhat) above the threshold");

    MultiplicityHint hint = MultiplicityHint::unique_in_bracket;
    double a = h_lo, fa = f_lo, b = h_hi, fb = f_hi;

    if (rule != RootRule::first) {
        // Geometric scan to locate the extreme sign-change cell.
        constexpr int kScan = 64;
        double gh[kScan], gf[kScan];
        const double ratio = std::pow(h_hi / h_lo, 1.0 / (kScan - 1));
        gh[0] = h_lo;
        gf[0] = f_lo;
        gh[kScan - 1] = h_hi;
        gf[kScan - 1] = f_hi;
        for (int i = 1; i < kScan - 1; ++i) {
            gh[i] = gh[i - 1] * ratio;
            gf[i] = f(gh[i]);
        }
        int first_cell = -1, last_cell = -1, changes = 0;
        for (int i = 0; i + 1 < kScan; ++i) {
            if ((gf[i] < 0.0) != (gf[i + 1] < 0.0)) {
                ++changes;
                if (first_cell < 0) first_cell = i;
                last_cell = i;
            }
        }
        if (changes >= 2) hint = MultiplicityHint::multiple_suspected;
        const int cell = (rule == RootRule::smallest) ? first_cell : last_cell;
        a = gh[cell];
        fa = gf[cell];
        b = gh[cell + 1];
        fb = gf[cell + 1];
    }

    const RootResult r = illinois(f, a, fa, b, fb, 1e-8, 200);
    if (std::abs(r.f_at_h) > 1e-6)
        throw no_root_error("root refinement did not reach the 1e-6 tolerance");

    SelectionResult out;
    out.bandwidth = r.h;
    out.threshold_value = s;
    out.achieved_distance = r.f_at_h + s;
    out.iterations = evals;
    out.bracket_lo = r.lo;
    out.bracket_hi = r.hi;
    out.multiplicity = hint;
    return out;
}

std::vector<double> distance_profile(const Sample& sample, const Kernel& kernel,
                                     const DistanceSpec& dist,
                                     std::span<const double> h_grid) {
    std::vector<double> out;
    out.reserve(h_grid.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        const double h = h_grid[i];
        if (!(h > 0.0)) throw std::domain_error("profile grid must be positive");
        if (i > 0 && h < prev) throw std::invalid_argument("profile grid must ascend");
        prev = h;
        out.push_back(detail::distance_fast(dist, sample.points(), kernel, h));
    }
    return out;
}

}  // namespace dpkde
