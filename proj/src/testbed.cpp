#include "dpkde/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dpkde/normal.hpp"
#include "dpkde/quadrature.hpp"

namespace dpkde {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTailMassPerSide = 5e-10;  // each side of the 1 - 1e-9 interval

// Symmetric point T with cdf(-T) <= tail and 1 - cdf(T) <= tail.
double symmetric_tail_point(const std::function<double(double)>& cdf, double start) {
    double t = start;
    while (cdf(-t) > kTailMassPerSide || 1.0 - cdf(t) > kTailMassPerSide) {
        t *= 2.0;
        if (t > 1e300) throw std::runtime_error("tail interval search diverged");
    }
    double lo = t / 2.0, hi = t;
    for (int i = 0; i < 200 && hi - lo > 1e-6 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(-mid) <= kTailMassPerSide && 1.0 - cdf(mid) <= kTailMassPerSide)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// Integral of pdf over [a,b] with log-spaced splitting toward any poles; the
// sliver around a pole is charged via the cdf increment (<= 1e-12), far below
// the consistency tolerance.
double pdf_integral(const DensityModel& m, double a, double b) {
    for (double s : m.singularities) {
        if (s > a && s < b)
            return pdf_integral(m, a, s) + pdf_integral(m, s, b);
    }
    auto near_pole = [&](double x) {
        for (double s : m.singularities)
            if (x == s) return true;
        return false;
    };
    if (near_pole(a) && near_pole(b)) {
        const double mid = 0.5 * (a + b);
        return pdf_integral(m, a, mid) + pdf_integral(m, mid, b);
    }
    double total = 0.0;
    double lo = a, hi = b;
    if (near_pole(a)) {
        double w = (b - a);
        while (w > 0.0 && std::abs(m.cdf(a + w) - m.cdf(a)) > 1e-12 && w > 1e-300)
            w *= 0.25;
        total += m.cdf(a + w) - m.cdf(a);
        lo = a + w;
        double seg = w;
        while (seg * 4.0 < b - a) {
            total += integrate(m.pdf, lo, a + seg * 4.0, 1e-11, 1e-11).value;
            lo = a + seg * 4.0;
            seg *= 4.0;
        }
    }
    if (near_pole(b)) {
        double w = (b - lo);
        while (w > 0.0 && std::abs(m.cdf(b) - m.cdf(b - w)) > 1e-12 && w > 1e-300)
            w *= 0.25;
        total += m.cdf(b) - m.cdf(b - w);
        hi = b - w;
        double seg = w;
        while (seg * 4.0 < b - lo) {
            total += integrate(m.pdf, b - seg * 4.0, hi, 1e-11, 1e-11).value;
            hi = b - seg * 4.0;
            seg *= 4.0;
        }
    }
    if (hi > lo) total += integrate(m.pdf, lo, hi, 1e-10, 1e-10).value;
    return total;
}

}  // namespace

DensityModel standard_normal() {
    DensityModel m;
    m.id = "11";
    m.pdf = [](double x) { return normal_pdf(x); };
    m.cdf = [](double x) { return normal_cdf(x); };
    m.sampler = [](SplitMix64& rng) { return rng.normal(); };
    m.in_l2 = true;
    m.holder_exponent = 1.0;
    const double t = symmetric_tail_point(m.cdf, 4.0);
    m.tail_interval = {-t, t};
    return m;
}

DensityModel cauchy() {
    DensityModel m;
    m.id = "6";
    m.pdf = [](double x) { return 1.0 / (kPi * (1.0 + x * x)); };
    m.cdf = [](double x) { return 0.5 + std::atan(x) / kPi; };
    m.sampler = [](SplitMix64& rng) { return std::tan(kPi * (rng.uniform() - 0.5)); };
    m.in_l2 = true;
    m.holder_exponent = 1.0;
    m.tail_interval = {-3.2e9, 3.2e9};
    return m;
}

DensityModel peaked_family(double eps) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::domain_error("peaked family needs eps in (0, 1]");
    DensityModel m;
    if (eps == 0.5) {
        m.id = "8";
    } else {
        std::ostringstream id;
        id << "peaked:" << eps;
        m.id = id.str();
    }
    m.pdf = [eps](double x) {
        if (x <= 0.0 || x > 1.0)
            return x == 0.0 && eps < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
        return eps * std::pow(x, eps - 1.0);
    };
    m.cdf = [eps](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return std::pow(x, eps);
    };
    m.sampler = [eps](SplitMix64& rng) { return std::pow(rng.uniform(), 1.0 / eps); };
    m.in_l2 = eps > 0.5;
    m.holder_exponent = eps;  // F(x) = x^eps is Hoelder-eps with constant 1, sharply
    m.tail_interval = {0.0, 1.0};
    if (eps < 1.0) m.singularities = {0.0};
    return m;
}

DensityModel normal_cubed() {
    DensityModel m;
    m.id = "19";
    m.pdf = [](double x) {
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        const double t = std::cbrt(std::abs(x));
        return normal_pdf(t) / (3.0 * t * t);
    };
    m.cdf = [](double x) { return normal_cdf(std::cbrt(x)); };
    m.sampler = [](SplitMix64& rng) {
        const double z = rng.normal();
        return z * z * z;
    };
    m.in_l2 = false;
    m.holder_exponent = 1.0 / 3.0;
    const double t = symmetric_tail_point(m.cdf, 64.0);
    m.tail_interval = {-t, t};
    m.singularities = {0.0};
    return m;
}

double example1_bias_constant(double eps) {
    if (!(eps > 0.0 && eps < 0.5))
        throw std::domain_error("bias constant defined for eps in (0, 1/2)");
    return 1.0 - 3.0 * std::exp2(eps + 1.0) / ((eps + 2.0) * (eps + 3.0));
}

void check_pdf_cdf_consistency(const DensityModel& m, double tol) {
    const double a = m.tail_interval.lo, b = m.tail_interval.hi;
    if (!(b > a)) throw std::invalid_argument(m.id + ": empty tail interval");
    const int panels = 512;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + (b - a) * i / panels;
        const double x1 = a + (b - a) * (i + 1) / panels;
        const double mass = m.cdf(x1) - m.cdf(x0);
        const double quad = pdf_integral(m, x0, x1);
        if (std::abs(mass - quad) > tol)
            throw std::invalid_argument(m.id + ": pdf and cdf disagree near x=" +
                                        std::to_string(x0));
    }
}

void check_sampler(const DensityModel& m, std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> draws(n);
    for (double& x : draws) x = m.sampler(rng);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = m.cdf(draws[i]);
        ks = std::max(ks, std::max(f - static_cast<double>(i) / n,
                                   static_cast<double>(i + 1) / n - f));
    }
    // 99% asymptotic Kolmogorov band.
    const double band = 1.63 / std::sqrt(static_cast<double>(n));
    if (ks > band)
        throw std::invalid_argument(m.id + ": sampler failed the KS check, D=" +
                                    std::to_string(ks));
}

DensityRegistry::DensityRegistry() {
    // Built-ins ship pre-validated (see the testbed test-suite).
    for (DensityModel m : {standard_normal(), cauchy(), peaked_family(0.5), normal_cubed()})
        models_.emplace(m.id, std::move(m));
}

void DensityRegistry::register_model(DensityModel m) {
    if (m.id.empty()) throw std::invalid_argument("density id must be nonempty");
    if (!m.pdf || !m.cdf || !m.sampler)
        throw std::invalid_argument(m.id + ": pdf, cdf and sampler are required");
    check_pdf_cdf_consistency(m);
    check_sampler(m);
    models_[m.id] = std::move(m);
}

const DensityModel& DensityRegistry::get(const std::string& id) const {
    const auto it = models_.find(id);
    if (it == models_.end())
        throw std::out_of_range("density '" + id + "' is not registered");
    return it->second;
}

bool DensityRegistry::contains(const std::string& id) const {
    return models_.count(id) != 0;
}

std::vector<std::string> DensityRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(models_.size());
    for (const auto& [id, _] : models_) out.push_back(id);
    return out;
}

}  // namespace dpkde
