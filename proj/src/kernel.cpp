#include "dpkde/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "dpkde/normal.hpp"
#include "dpkde/quadrature.hpp"

namespace dpkde {

namespace {

// Locate sup_x |cdf(x) - 1(x>=0)| by grid scan plus golden-section polish.
double compute_kappa0(const std::function<double(double)>& cdf, double lo, double hi) {
    auto gap = [&](double x) {
        return std::abs(cdf(x) - (x >= 0.0 ? 1.0 : 0.0));
    };
    const int grid = 4096;
    double best_x = 0.0, best = gap(0.0);
    for (int i = 0; i <= grid; ++i) {
        const double x = lo + (hi - lo) * i / grid;
        const double g = gap(x);
        if (g > best) {
            best = g;
            best_x = x;
        }
    }
    double a = best_x - (hi - lo) / grid;
    double b = best_x + (hi - lo) / grid;
    const double rho = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - rho * (b - a), d = a + rho * (b - a);
    double fc = gap(c), fd = gap(d);
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - rho * (b - a);
            fc = gap(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + rho * (b - a);
            fd = gap(d);
        }
    }
    return std::max(best, std::max(fc, fd));
}

}  // namespace

struct Kernel::Impl {
    std::string name;
    Kernel::Family family = Kernel::Family::custom;
    int order = 2;
    std::function<double(double)> eval;
    std::function<double(double)> cdf;
    std::optional<Interval> support;
    bool is_density = true;
    double moment_ell = 0.0;
    double l1_norm = 0.0;
    double l2_norm_sq = 0.0;
    double kappa0 = 0.0;
    double effective_radius = 0.0;
};

Kernel Kernel::epanechnikov() {
    auto impl = std::make_shared<Impl>();
    impl->name = "epanechnikov";
    impl->family = Family::epanechnikov;
    impl->order = 2;
    impl->eval = [](double u) {
        return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    };
    impl->cdf = [](double u) {
        if (u <= -1.0) return 0.0;
        if (u >= 1.0) return 1.0;
        return 0.5 + 0.75 * (u - u * u * u / 3.0);
    };
    impl->support = Interval{-1.0, 1.0};
    impl->is_density = true;
    impl->moment_ell = 0.2;   // k_2 = 1/5
    impl->l1_norm = 1.0;
    impl->l2_norm_sq = 0.6;   // 3/5
    impl->kappa0 = 0.5;
    impl->effective_radius = 1.0;
    return Kernel(std::move(impl));
}

Kernel Kernel::gaussian() {
    auto impl = std::make_shared<Impl>();
    impl->name = "gaussian";
    impl->family = Family::gaussian;
    impl->order = 2;
    impl->eval = [](double u) { return normal_pdf(u); };
    impl->cdf = [](double u) { return normal_cdf(u); };
    impl->support = std::nullopt;
    impl->is_density = true;
    impl->moment_ell = 1.0;
    impl->l1_norm = 1.0;
    impl->l2_norm_sq = 0.28209479177387814347403972578039;  // 1/(2 sqrt(pi))
    impl->kappa0 = 0.5;
    // |Phi(u) - 1(u>=0)| < 1.2e-19 beyond |u| = 9.
    impl->effective_radius = 9.0;
    return Kernel(std::move(impl));
}

Kernel Kernel::custom(std::string name, int order,
                      std::function<double(double)> density,
                      std::function<double(double)> cdf,
                      std::optional<Interval> support, bool is_density) {
    if (order < 1) throw std::invalid_argument("kernel order must be >= 1");
    if (!density || !cdf) throw std::invalid_argument("kernel needs eval and cdf");

    auto impl = std::make_shared<Impl>();
    impl->name = std::move(name);
    impl->family = Family::custom;
    impl->order = order;
    impl->eval = std::move(density);
    impl->cdf = std::move(cdf);
    impl->support = support;
    impl->is_density = is_density;

    double lo, hi;
    if (support) {
        lo = support->lo;
        hi = support->hi;
        impl->effective_radius = std::max(std::abs(lo), std::abs(hi));
    } else {
        // Expand until the cdf is 0/1 to double precision at both ends.
        double r = 1.0;
        while (r < 1e6 &&
               (std::abs(impl->cdf(-r)) > 1e-16 || std::abs(1.0 - impl->cdf(r)) > 1e-16))
            r *= 1.5;
        lo = -r;
        hi = r;
        impl->effective_radius = r;
    }

    const double tol = 1e-10;
    const double mass = integrate(impl->eval, lo, hi, tol, tol).value;
    if (std::abs(mass - 1.0) > 1e-6)
        throw std::invalid_argument("kernel does not integrate to 1");
    impl->l1_norm = integrate([&](double u) { return std::abs(impl->eval(u)); },
                              lo, hi, tol, tol).value;
    impl->l2_norm_sq = integrate([&](double u) {
                           const double v = impl->eval(u);
                           return v * v;
                       }, lo, hi, tol, tol).value;
    impl->moment_ell = integrate([&, order](double u) {
                           return std::pow(u, order) * impl->eval(u);
                       }, lo, hi, tol, tol).value;
    impl->kappa0 = compute_kappa0(impl->cdf, lo, hi);
    return Kernel(std::move(impl));
}

const std::string& Kernel::name() const { return impl_->name; }
Kernel::Family Kernel::family() const { return impl_->family; }
int Kernel::order() const { return impl_->order; }
double Kernel::eval(double u) const { return impl_->eval(u); }
double Kernel::cdf(double u) const { return impl_->cdf(u); }

double Kernel::scaled_cdf(double h, double x) const {
    if (!(h > 0.0)) throw std::domain_error("bandwidth must be positive");
    return impl_->cdf(x / h);
}

double Kernel::moment_ell() const { return impl_->moment_ell; }
double Kernel::l1_norm() const { return impl_->l1_norm; }
double Kernel::l2_norm_sq() const { return impl_->l2_norm_sq; }
double Kernel::kappa0() const { return impl_->kappa0; }
bool Kernel::is_density() const { return impl_->is_density; }
const std::optional<Interval>& Kernel::support() const { return impl_->support; }
double Kernel::effective_radius() const { return impl_->effective_radius; }

Kernel rescale(const Kernel& k, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("rescale needs sigma > 0");
    std::optional<Interval> support;
    if (k.support())
        support = Interval{k.support()->lo * sigma, k.support()->hi * sigma};
    return Kernel::custom(
        k.name() + "*" + std::to_string(sigma), k.order(),
        [k, sigma](double u) { return k.eval(u / sigma) / sigma; },
        [k, sigma](double u) { return k.cdf(u / sigma); }, support, k.is_density());
}

}  // namespace dpkde
