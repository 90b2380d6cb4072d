#include "dpkde/lscv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpkde/quadrature.hpp"

namespace dpkde {

namespace {

constexpr double kInvSqrt4Pi = 0.28209479177387814347403972578039;

// Self-convolution (K*K)(t) of the built-in kernels. Epanechnikov:
// (3/160)(2-|t|)^3(t^2+6|t|+4) on [-2,2]; Gaussian: the N(0,2) density.
double self_convolution(const Kernel& k, double t) {
    switch (k.family()) {
        case Kernel::Family::epanechnikov: {
            const double a = std::abs(t);
            if (a >= 2.0) return 0.0;
            const double w = 2.0 - a;
            return (3.0 / 160.0) * w * w * w * (t * t + 6.0 * a + 4.0);
        }
        case Kernel::Family::gaussian:
            return kInvSqrt4Pi * std::exp(-0.25 * t * t);
        case Kernel::Family::custom:
            break;
    }
    // Custom kernels: numeric convolution over the overlap of the supports.
    const double r = k.effective_radius();
    const double lo = std::max(-r, t - r), hi = std::min(r, t + r);
    if (hi <= lo) return 0.0;
    return integrate([&](double u) { return k.eval(u) * k.eval(t - u); }, lo, hi,
                     1e-10, 1e-10).value;
}

// Pair radius beyond which both K and K*K vanish (or are negligible).
double pair_radius(const Kernel& k) {
    if (k.support())
        return 2.0 * std::max(std::abs(k.support()->lo), std::abs(k.support()->hi));
    return 2.0 * k.effective_radius();
}

}  // namespace

double lscv_score(const Sample& s, const Kernel& k, double h) {
    if (!(h > 0.0)) throw std::domain_error("bandwidth must be positive");
    const auto n = s.size();
    if (n < 2) throw std::domain_error("cross-validation needs n >= 2");
    const auto pts = s.points();
    const double nn = static_cast<double>(n);

    const double radius = pair_radius(k) * h;
    double conv_sum = nn * self_convolution(k, 0.0);  // diagonal terms
    double loo_sum = 0.0;

    // Ascending two-pointer sweep over pairs with X_j - X_i <= radius;
    // symmetric terms are counted twice.
    std::size_t j0 = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (j0 <= i) j0 = i + 1;
        while (j0 < n && pts[j0] - pts[i] <= radius) ++j0;
        for (std::size_t j = i + 1; j < j0; ++j) {
            const double u = (pts[j] - pts[i]) / h;
            conv_sum += 2.0 * self_convolution(k, u);
            loo_sum += 2.0 * k.eval(u);
        }
    }

    return conv_sum / (nn * nn * h) - 2.0 * loo_sum / (nn * (nn - 1.0) * h);
}

LscvResult lscv_select(const Sample& s, const Kernel& k, const LscvGrid& grid,
                       bool emit_curve) {
    if (s.size() < 2) throw std::domain_error("cross-validation needs n >= 2");
    const double range = s.range();
    if (!(range > 0.0)) throw std::domain_error("degenerate sample");

    const bool default_grid = grid.lo <= 0.0 && grid.hi <= 0.0;
    double lo = grid.lo > 0.0 ? grid.lo : range / static_cast<double>(s.size());
    double hi = grid.hi > 0.0 ? grid.hi : range;
    const int m = std::max(grid.points, 8);
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("bad cross-validation grid");

    const double floor_h = 0.5 * s.min_positive_gap();
    const double cap_h = 64.0 * range;
    const bool may_extend = grid.auto_extend && default_grid;

    LscvResult result;
    std::vector<double> hs, scores;
    auto evaluate_grid = [&]() {
        const double ratio = std::pow(hi / lo, 1.0 / (m - 1));
        hs.clear();
        scores.clear();
        double h = lo;
        for (int i = 0; i < m; ++i, h *= ratio) {
            if (i == m - 1) h = hi;
            hs.push_back(h);
            scores.push_back(lscv_score(s, k, h));
        }
    };

    evaluate_grid();
    int argmin = 0;
    for (int ext = 0;; ++ext) {
        argmin = 0;
        for (int i = 1; i < m; ++i)
            if (scores[i] < scores[argmin]) argmin = i;  // ties keep the smaller h
        const bool at_lo = argmin == 0, at_hi = argmin == m - 1;
        if (!at_lo && !at_hi) break;
        if (!may_extend || ext >= 12)
            throw std::runtime_error("cross-validation argmin pinned to the grid boundary");
        const double ratio = std::pow(hi / lo, 1.0 / (m - 1));
        const double stretch = std::pow(ratio, m / 2);
        if (at_lo) lo = std::max(lo / stretch, floor_h);
        if (at_hi) hi = std::min(hi * stretch, cap_h);
        if (at_lo && lo <= floor_h && hs[0] <= floor_h * 1.0000001)
            throw std::runtime_error("cross-validation argmin pinned at the gap floor");
        if (at_hi && hi >= cap_h && hs[m - 1] >= cap_h * 0.9999999)
            throw std::runtime_error("cross-validation argmin pinned at the range cap");
        result.grid_extended = true;
        evaluate_grid();
    }

    // Golden-section refinement inside the bracketing cell.
    double a = hs[std::max(argmin - 1, 0)];
    double b = hs[std::min(argmin + 1, m - 1)];
    const double rho = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - rho * (b - a), d = a + rho * (b - a);
    double fc = lscv_score(s, k, c), fd = lscv_score(s, k, d);
    while (b - a > 1e-3 * a) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - rho * (b - a);
            fc = lscv_score(s, k, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + rho * (b - a);
            fd = lscv_score(s, k, d);
        }
    }
    result.bandwidth = 0.5 * (a + b);
    if (emit_curve) {
        result.criterion_curve.reserve(hs.size());
        for (int i = 0; i < m; ++i) result.criterion_curve.emplace_back(hs[i], scores[i]);
    }
    return result;
}

}  // namespace dpkde
