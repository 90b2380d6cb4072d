#pragma once

#include <span>
#include <string>
#include <vector>

#include "dpkde/kernel.hpp"
#include "dpkde/sample.hpp"

namespace dpkde {

/// Kolmogorov distance or k-th order Kuiper distance, with the equivalence
/// constant c_d (1 for Kolmogorov, 2k for Kuiper-k) from the chain
/// d_inf <= d_kuip,k <= 2k d_inf.
class DistanceSpec {
public:
    enum class Kind { kolmogorov, kuiper };

    static DistanceSpec kolmogorov() { return DistanceSpec(Kind::kolmogorov, 0); }
    static DistanceSpec kuiper(int k);  // k >= 1

    Kind kind() const { return kind_; }
    int kuiper_order() const { return k_; }  // 0 for Kolmogorov
    int c_d() const { return kind_ == Kind::kolmogorov ? 1 : 2 * k_; }
    std::string label() const;

private:
    DistanceSpec(Kind kind, int k) : kind_(kind), k_(k) {}
    Kind kind_;
    int k_;
};

/// The kernel CDF estimate Fhat_n^h(x) = (1/n) sum Kcdf((x - X_i)/h),
/// i.e. the empirical CDF convolved with the scaled kernel.
class SmoothedCdf {
public:
    SmoothedCdf(Sample sample, Kernel kernel, double h);  // h > 0

    double operator()(double x) const;

    // Values at an ascending query vector. O(n + m) for the Epanechnikov
    // kernel (sliding-window moment updates); windowed direct summation
    // otherwise.
    std::vector<double> evaluate_sorted(std::span<const double> sorted_queries) const;

    const Sample& sample() const { return sample_; }
    const Kernel& kernel() const { return kernel_; }
    double bandwidth() const { return h_; }

private:
    Sample sample_;
    Kernel kernel_;
    double h_;
};

// Exact sup distance between the empirical CDF of `s` and `g`. For monotone
// g (order-2 density kernels) the candidate set of both one-sided values at
// every data point is exact; for kernels of order > 2 the candidates are
// augmented with a refinement grid and support-edge offsets.
double kolmogorov_distance(const Sample& s, const SmoothedCdf& g);

// Largest sum over k ordered disjoint intervals of |Delta Fn - Delta g|,
// computed by dynamic programming over the candidate values of Fn - g.
// For k = 1 this is the classical Kuiper statistic sup(Fn-g) + sup(g-Fn).
double kuiper_distance(const Sample& s, const SmoothedCdf& g, int k);

double distance(const DistanceSpec& spec, const Sample& s, const SmoothedCdf& g);

namespace detail {

// Fhat values at ascending queries, writing into out (same length).
void smoothed_cdf_sorted(std::span<const double> sorted_data, const Kernel& k,
                         double h, std::span<const double> sorted_queries,
                         std::span<double> out);

// Kernel density estimate values at ascending queries.
void kde_sorted(std::span<const double> sorted_data, const Kernel& k, double h,
                std::span<const double> sorted_queries, std::span<double> out);

// Single-point evaluations via binary search: O(log n + window).
double smoothed_cdf_at(std::span<const double> sorted_data, const Kernel& k,
                       double h, double x);
double kde_at(std::span<const double> sorted_data, const Kernel& k, double h,
              double x);

// d(F_n, Fhat_n^h) without constructing Sample/SmoothedCdf wrappers.
double distance_fast(const DistanceSpec& spec, std::span<const double> sorted_data,
                     const Kernel& k, double h);

// Maximum over t <= k disjoint ordered index intervals of sum |v[b]-v[a]|.
double max_k_interval_sum(std::span<const double> values, int k);

}  // namespace detail

}  // namespace dpkde
