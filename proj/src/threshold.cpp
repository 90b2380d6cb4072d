#include "dpkde/threshold.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpkde/normal.hpp"
#include "dpkde/quadrature.hpp"

namespace dpkde {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// m-th derivative of the standard normal density via probabilists' Hermite
// polynomials: f^(m)(x) = (-1)^m He_m(x) phi(x).
double normal_density_derivative(int m, double x) {
    double h0 = 1.0, h1 = x;
    if (m == 0) return normal_pdf(x);
    for (int j = 1; j < m; ++j) {
        const double h2 = x * h1 - j * h0;
        h0 = h1;
        h1 = h2;
    }
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign * h1 * normal_pdf(x);
}

// d(f^(l-1), 0) under the chosen distance for f the standard normal.
double normal_derivative_distance(int ell, const DistanceSpec& d) {
    const double phi1 = normal_pdf(1.0);
    if (ell == 2) {
        // f' = -x phi(x): sup norm phi(1); total range 2 phi(1).
        if (d.kind() == DistanceSpec::Kind::kolmogorov) return phi1;
        if (d.kuiper_order() == 1) return 2.0 * phi1;
    }
    // Dense grid + the interval dynamic program; f^(l-1) vanishes at +-inf,
    // so 0-sentinels bound the sequence.
    const int m = 1 << 15;
    std::vector<double> vals(m + 3);
    vals.front() = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double x = -12.0 + 24.0 * i / m;
        vals[static_cast<std::size_t>(i) + 1] = normal_density_derivative(ell - 1, x);
    }
    vals.back() = 0.0;
    if (d.kind() == DistanceSpec::Kind::kolmogorov) {
        double best = 0.0;
        for (double v : vals) best = std::max(best, std::abs(v));
        return best;
    }
    return detail::max_k_interval_sum(vals, d.kuiper_order());
}

}  // namespace

ThresholdSpec ThresholdSpec::power_law(double c, double gamma, std::string label) {
    if (!(c > 0.0)) throw std::invalid_argument("threshold constant c must be positive");
    if (!(gamma > 0.0 && gamma <= 0.5))
        throw std::invalid_argument("threshold exponent gamma must lie in (0, 1/2]");
    ThresholdSpec t;
    t.power_ = PowerLawForm{c, gamma};
    t.label_ = std::move(label);
    return t;
}

ThresholdSpec ThresholdSpec::lil(double epsilon, const Kernel& k, const DistanceSpec& d) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("LIL epsilon must be positive");
    ThresholdSpec t;
    t.lil_ = LilForm{epsilon, k.l1_norm(), d.c_d()};
    t.label_ = "LIL";
    return t;
}

double ThresholdSpec::operator()(std::int64_t n) const {
    if (n < 1) throw std::domain_error("sample size must be >= 1");
    if (power_)
        return power_->c * std::pow(static_cast<double>(n), -power_->gamma);
    if (n < 3) throw std::domain_error("the LIL threshold needs n >= 3");
    const double ll = std::log(std::log(static_cast<double>(n)));
    return lil_->c_d * (lil_->kernel_l1 + 1.0 + lil_->epsilon) *
           std::sqrt(ll / (2.0 * static_cast<double>(n)));
}

ThresholdSpec preset(std::string_view label) {
    const std::string l = lower(label);
    if (l == "v") return ThresholdSpec::power_law(0.60, 0.5, "V");
    if (l == "elr" || l == "e-lr") return ThresholdSpec::power_law(0.35, 0.4, "ELR");
    if (l == "ks50" || l == "ks.5") return ThresholdSpec::power_law(0.83, 0.5, "KS50");
    if (l == "ks95" || l == "ks.95") return ThresholdSpec::power_law(1.36, 0.5, "KS95");
    if (l == "kuip50" || l == "kuip.5") return ThresholdSpec::power_law(1.22, 0.5, "KUIP50");
    if (l == "kuip95" || l == "kuip.95") return ThresholdSpec::power_law(1.75, 0.5, "KUIP95");
    throw std::invalid_argument("unknown threshold preset: " + std::string(label));
}

DistanceSpec preset_distance(std::string_view label) {
    const std::string l = lower(label);
    if (l == "kuip50" || l == "kuip.5" || l == "kuip95" || l == "kuip.95")
        return DistanceSpec::kuiper(1);
    if (l == "v" || l == "elr" || l == "e-lr" || l == "ks50" || l == "ks.5" ||
        l == "ks95" || l == "ks.95" || l == "l2nr")
        return DistanceSpec::kolmogorov();
    throw std::invalid_argument("unknown threshold preset: " + std::string(label));
}

L2nrConstant l2nr_constant(const Kernel& k, const DistanceSpec& d) {
    const int ell = k.order();
    if (ell < 2) throw std::domain_error("normal-reference constant needs kernel order >= 2");
    if (k.moment_ell() == 0.0)
        throw std::domain_error("normal-reference constant needs k_ell != 0");

    const double gamma = static_cast<double>(ell) / (2.0 * ell + 1.0);
    const double arg = std::pow(k.l2_norm_sq(), ell) * k.moment_ell() /
                       (std::pow(2.0 * ell, ell) * factorial(ell));
    if (!(arg > 0.0))
        throw std::domain_error("normal-reference constant undefined for k_ell < 0");
    const double kernel_factor = std::pow(arg, 1.0 / (2.0 * ell + 1.0));

    const double dval = normal_derivative_distance(ell, d);
    const double deriv_norm_sq =
        integrate([ell](double x) {
            const double v = normal_density_derivative(ell, x);
            return v * v;
        }, -16.0, 16.0, 1e-12, 1e-12).value;
    const double c =
        kernel_factor * dval / std::pow(deriv_norm_sq, ell / (2.0 * ell + 1.0));
    return {c, gamma};
}

ThresholdSpec l2nr_spec(const Kernel& k, const DistanceSpec& d) {
    const L2nrConstant c = l2nr_constant(k, d);
    return ThresholdSpec::power_law(c.c, c.gamma, "L2NR");
}

ThresholdSpec lil_threshold(const Kernel& k, const DistanceSpec& d, double epsilon) {
    return ThresholdSpec::lil(epsilon, k, d);
}

std::int64_t existence_min_n(const ThresholdSpec& s, const Kernel& k,
                             const DistanceSpec& d) {
    const double kappa0 = k.kappa0();
    const int cd = d.c_d();
    auto ok = [&](std::int64_t n) {
        if (s.lil_form() && n < 3) return false;
        const double sn = s(n);
        return cd * kappa0 / static_cast<double>(n) < sn && sn < kappa0;
    };
    for (std::int64_t n = 2; n <= 65536; ++n)
        if (ok(n)) return n;
    // Both bounds are upward-closed from here on; locate the boundary by
    // doubling and bisection.
    std::int64_t hi = 65536;
    while (!ok(hi)) {
        if (hi > (std::int64_t{1} << 40))
            throw std::runtime_error("no finite n satisfies the existence bounds");
        hi *= 2;
    }
    std::int64_t lo = hi / 2;
    while (lo + 1 < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

ThresholdDiagnostics threshold_diagnostics(const ThresholdSpec& s,
                                           std::optional<double> holder_alpha) {
    ThresholdDiagnostics diag;
    std::vector<std::int64_t> grid;
    for (std::int64_t n = 100; n <= 1000000000; n *= 10) grid.push_back(n);

    diag.vanishes = true;
    diag.dominates_one_over_n = true;
    diag.dominates_lil = true;
    bool alpha_ok = holder_alpha.has_value();
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double s0 = s(grid[i - 1]), s1 = s(grid[i]);
        const auto n0 = static_cast<double>(grid[i - 1]);
        const auto n1 = static_cast<double>(grid[i]);
        if (!(s1 < s0)) diag.vanishes = false;
        if (!((1.0 / n1) / s1 < (1.0 / n0) / s0)) diag.dominates_one_over_n = false;
        const double lil0 = std::sqrt(std::log(std::log(n0)) / n0);
        const double lil1 = std::sqrt(std::log(std::log(n1)) / n1);
        if (!(lil1 / s1 < lil0 / s0)) diag.dominates_lil = false;
        if (holder_alpha &&
            !(std::pow(n1, *holder_alpha) * s1 > std::pow(n0, *holder_alpha) * s0))
            alpha_ok = false;
    }
    if (holder_alpha) diag.consistent_for_alpha = alpha_ok && diag.dominates_lil;
    return diag;
}

}  // namespace dpkde
