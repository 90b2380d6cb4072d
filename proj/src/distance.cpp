#include "dpkde/distance.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpkde {

DistanceSpec DistanceSpec::kuiper(int k) {
    if (k < 1) throw std::domain_error("Kuiper order k must be >= 1");
    return DistanceSpec(Kind::kuiper, k);
}

std::string DistanceSpec::label() const {
    if (kind_ == Kind::kolmogorov) return "kolmogorov";
    return "kuiper:" + std::to_string(k_);
}

namespace detail {

namespace {

// Sliding-window evaluation for the Epanechnikov kernel. For ascending
// query points the window W(t) = {j : t-h < X_j < t+h} moves right; the
// centered moments S_m = sum_{j in W} u_j^m with u_j = (t - X_j)/h are
// shifted by d = dt/h via the binomial identity and edited at the window
// edges. |u| < 1 inside the window, so the moment magnitudes stay <= |W| and
// rounding drift stays orders of magnitude below the 1e-6 solver tolerance;
// a periodic rebuild bounds it regardless of query count.
class EpanechnikovSweep {
public:
    EpanechnikovSweep(std::span<const double> data, double h) : data_(data), h_(h) {}

    void advance(double t) {
        if (!init_ || t - t_ >= 2.0 * h_) {
            reposition(t);
        } else {
            const double d = (t - t_) / h_;
            t_ = t;
            if (d != 0.0) {
                s3_ += d * (3.0 * s2_ + d * (3.0 * s1_ + d * s0_));
                s2_ += d * (2.0 * s1_ + d * s0_);
                s1_ += d * s0_;
            }
            while (lo_ < hi_ && data_[lo_] <= t - h_) {
                const double u = (t - data_[lo_]) / h_;
                s1_ -= u;
                s2_ -= u * u;
                s3_ -= u * u * u;
                s0_ -= 1.0;
                ++lo_;
            }
            while (hi_ < data_.size() && data_[hi_] < t + h_) {
                const double u = (t - data_[hi_]) / h_;
                s1_ += u;
                s2_ += u * u;
                s3_ += u * u * u;
                s0_ += 1.0;
                ++hi_;
            }
            if (lo_ == hi_) s0_ = s1_ = s2_ = s3_ = 0.0;
            if (++steps_ >= 65536) reposition(t);
        }
    }

    // Kcdf(u) = 1/2 + (3/4)u - (1/4)u^3 summed over the window, plus one for
    // every point at or below t - h.
    double cdf_value() const {
        const double window = 0.5 * s0_ + 0.75 * s1_ - 0.25 * s3_;
        return (static_cast<double>(lo_) + window) / static_cast<double>(data_.size());
    }

    double pdf_value() const {
        return 0.75 * (s0_ - s2_) / (static_cast<double>(data_.size()) * h_);
    }

private:
    void reposition(double t) {
        t_ = t;
        init_ = true;
        steps_ = 0;
        while (lo_ < data_.size() && data_[lo_] <= t - h_) ++lo_;
        if (hi_ < lo_) hi_ = lo_;
        while (hi_ < data_.size() && data_[hi_] < t + h_) ++hi_;
        s0_ = s1_ = s2_ = s3_ = 0.0;
        for (std::size_t j = lo_; j < hi_; ++j) {
            const double u = (t - data_[j]) / h_;
            s0_ += 1.0;
            s1_ += u;
            s2_ += u * u;
            s3_ += u * u * u;
        }
    }

    std::span<const double> data_;
    double h_;
    std::size_t lo_ = 0, hi_ = 0;
    double t_ = 0.0;
    double s0_ = 0.0, s1_ = 0.0, s2_ = 0.0, s3_ = 0.0;
    bool init_ = false;
    int steps_ = 0;
};

// Direct windowed evaluation for other kernels: O(window) per query with a
// two-pointer sweep over the effective support.
class GenericSweep {
public:
    GenericSweep(std::span<const double> data, const Kernel& k, double h)
        : data_(data), kernel_(k), h_(h) {
        if (k.support()) {
            lo_edge_ = k.support()->lo;
            hi_edge_ = k.support()->hi;
        } else {
            hi_edge_ = k.effective_radius();
            lo_edge_ = -hi_edge_;
        }
    }

    double cdf_at(double t) {
        // ones: u >= hi_edge  <=>  X_j <= t - h*hi_edge
        while (ones_ < data_.size() && data_[ones_] <= t - h_ * hi_edge_) ++ones_;
        if (win_ < ones_) win_ = ones_;
        // window end: u > lo_edge  <=>  X_j < t - h*lo_edge
        while (win_ < data_.size() && data_[win_] < t - h_ * lo_edge_) ++win_;
        double sum = 0.0;
        for (std::size_t j = ones_; j < win_; ++j)
            sum += kernel_.cdf((t - data_[j]) / h_);
        return (static_cast<double>(ones_) + sum) / static_cast<double>(data_.size());
    }

    double pdf_at(double t) {
        while (ones_ < data_.size() && data_[ones_] <= t - h_ * hi_edge_) ++ones_;
        if (win_ < ones_) win_ = ones_;
        while (win_ < data_.size() && data_[win_] < t - h_ * lo_edge_) ++win_;
        double sum = 0.0;
        for (std::size_t j = ones_; j < win_; ++j)
            sum += kernel_.eval((t - data_[j]) / h_);
        return sum / (static_cast<double>(data_.size()) * h_);
    }

private:
    std::span<const double> data_;
    const Kernel& kernel_;
    double h_;
    double lo_edge_, hi_edge_;
    std::size_t ones_ = 0, win_ = 0;
};

}  // namespace

void smoothed_cdf_sorted(std::span<const double> sorted_data, const Kernel& k,
                         double h, std::span<const double> sorted_queries,
                         std::span<double> out) {
    assert(out.size() == sorted_queries.size());
    if (!(h > 0.0)) throw std::domain_error("bandwidth must be positive");
    if (k.family() == Kernel::Family::epanechnikov) {
        EpanechnikovSweep sweep(sorted_data, h);
        for (std::size_t i = 0; i < sorted_queries.size(); ++i) {
            sweep.advance(sorted_queries[i]);
            out[i] = sweep.cdf_value();
        }
    } else {
        GenericSweep sweep(sorted_data, k, h);
        for (std::size_t i = 0; i < sorted_queries.size(); ++i)
            out[i] = sweep.cdf_at(sorted_queries[i]);
    }
}

void kde_sorted(std::span<const double> sorted_data, const Kernel& k, double h,
                std::span<const double> sorted_queries, std::span<double> out) {
    assert(out.size() == sorted_queries.size());
    if (!(h > 0.0)) throw std::domain_error("bandwidth must be positive");
    if (k.family() == Kernel::Family::epanechnikov) {
        EpanechnikovSweep sweep(sorted_data, h);
        for (std::size_t i = 0; i < sorted_queries.size(); ++i) {
            sweep.advance(sorted_queries[i]);
            out[i] = sweep.pdf_value();
        }
    } else {
        GenericSweep sweep(sorted_data, k, h);
        for (std::size_t i = 0; i < sorted_queries.size(); ++i)
            out[i] = sweep.pdf_at(sorted_queries[i]);
    }
}

namespace {

struct WindowEdges {
    double lo_edge, hi_edge;
};

WindowEdges kernel_edges(const Kernel& k) {
    if (k.support()) return {k.support()->lo, k.support()->hi};
    const double r = k.effective_radius();
    return {-r, r};
}

}  // namespace

double smoothed_cdf_at(std::span<const double> sorted_data, const Kernel& k,
                       double h, double x) {
    if (!(h > 0.0)) throw std::domain_error("bandwidth must be positive");
    const auto [lo_edge, hi_edge] = kernel_edges(k);
    // ones: X_j <= x - h*hi_edge; window: X_j < x - h*lo_edge.
    const auto ones = std::upper_bound(sorted_data.begin(), sorted_data.end(),
                                       x - h * hi_edge);
    const auto end = std::lower_bound(ones, sorted_data.end(), x - h * lo_edge);
    double sum = 0.0;
    for (auto it = ones; it != end; ++it) sum += k.cdf((x - *it) / h);
    return (static_cast<double>(ones - sorted_data.begin()) + sum) /
           static_cast<double>(sorted_data.size());
}

double kde_at(std::span<const double> sorted_data, const Kernel& k, double h,
              double x) {
    if (!(h > 0.0)) throw std::domain_error("bandwidth must be positive");
    const auto [lo_edge, hi_edge] = kernel_edges(k);
    const auto first = std::upper_bound(sorted_data.begin(), sorted_data.end(),
                                        x - h * hi_edge);
    const auto end = std::lower_bound(first, sorted_data.end(), x - h * lo_edge);
    double sum = 0.0;
    for (auto it = first; it != end; ++it) sum += k.eval((x - *it) / h);
    return sum / (static_cast<double>(sorted_data.size()) * h);
}

double max_k_interval_sum(std::span<const double> values, int k) {
    if (k < 1) throw std::domain_error("interval count k must be >= 1");
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    // closed[t]: best sum with t intervals closed so far (zero-length
    // intervals are allowed, so fewer effective intervals is included).
    // open_pos[t]/open_neg[t]: t-th interval open, oriented to gain
    // v(close)-v(open) resp. v(open)-v(close).
    std::vector<double> closed(static_cast<std::size_t>(k) + 1, 0.0);
    std::vector<double> open_pos(static_cast<std::size_t>(k) + 1, kNegInf);
    std::vector<double> open_neg(static_cast<std::size_t>(k) + 1, kNegInf);
    for (double v : values) {
        for (int t = k; t >= 1; --t) {
            const double close_pos = open_pos[t] + v;
            const double close_neg = open_neg[t] - v;
            if (close_pos > closed[t]) closed[t] = close_pos;
            if (close_neg > closed[t]) closed[t] = close_neg;
        }
        for (int t = 1; t <= k; ++t) {
            const double base = closed[t - 1];
            if (base - v > open_pos[t]) open_pos[t] = base - v;
            if (base + v > open_neg[t]) open_neg[t] = base + v;
        }
    }
    double best = 0.0;
    for (double c : closed) best = std::max(best, c);
    return best;
}

namespace {

// Candidate structure for the sup computations: the two one-sided values of
// D = F_n - g at every data point, plus single values at augmentation points
// for kernels whose smoothed cdf may be non-monotone (order > 2 or signed).
struct Candidates {
    std::vector<double> sequence;  // D values in x-order, 0-sentinels at both ends
    double max_abs = 0.0;
};

bool needs_augmentation(const Kernel& k) { return k.order() > 2 || !k.is_density(); }

Candidates build_candidates(std::span<const double> data, const Kernel& kernel,
                            double h, std::span<const double> g_source_data) {
    const std::size_t n = data.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    Candidates c;

    if (!needs_augmentation(kernel)) {
        std::vector<double> g(n);
        smoothed_cdf_sorted(g_source_data, kernel, h, data, g);
        c.sequence.reserve(2 * n + 2);
        c.sequence.push_back(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double left = static_cast<double>(i) * inv_n - g[i];
            const double right = static_cast<double>(i + 1) * inv_n - g[i];
            c.sequence.push_back(left);
            c.sequence.push_back(right);
            c.max_abs = std::max({c.max_abs, std::abs(left), std::abs(right)});
        }
        c.sequence.push_back(0.0);
        return c;
    }

    // Augmented candidate set: refinement grid of 8 points per inter-data
    // gap, plus kernel-support-edge offsets of the smoothing sample.
    std::vector<double> extra;
    extra.reserve(8 * n + 2 * g_source_data.size());
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = data[i], b = data[i + 1];
        if (b <= a) continue;
        for (int j = 1; j <= 8; ++j)
            extra.push_back(a + (b - a) * j / 9.0);
    }
    if (kernel.support()) {
        for (double x : g_source_data) {
            extra.push_back(x + h * kernel.support()->lo);
            extra.push_back(x + h * kernel.support()->hi);
        }
    }
    std::sort(extra.begin(), extra.end());

    // Merge data points and extras into one ascending query list, tagging
    // data points so both one-sided F_n values enter the sequence.
    std::vector<double> queries;
    std::vector<bool> is_data;
    queries.reserve(extra.size() + n);
    is_data.reserve(extra.size() + n);
    std::size_t ie = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (ie < extra.size() && extra[ie] < data[i]) {
            queries.push_back(extra[ie++]);
            is_data.push_back(false);
        }
        while (ie < extra.size() && extra[ie] == data[i]) ++ie;  // duplicate of a data point
        queries.push_back(data[i]);
        is_data.push_back(true);
    }
    while (ie < extra.size()) {
        queries.push_back(extra[ie++]);
        is_data.push_back(false);
    }

    std::vector<double> g(queries.size());
    smoothed_cdf_sorted(g_source_data, kernel, h, queries, g);

    c.sequence.reserve(queries.size() + n + 2);
    c.sequence.push_back(0.0);
    std::size_t rank = 0;  // number of data points <= current query
    for (std::size_t q = 0; q < queries.size(); ++q) {
        if (is_data[q]) {
            std::size_t count = 0;  // tied data points collapse to one query
            while (rank + count < n && data[rank + count] == queries[q]) ++count;
            const double left = static_cast<double>(rank) * inv_n - g[q];
            rank += count;
            const double right = static_cast<double>(rank) * inv_n - g[q];
            c.sequence.push_back(left);
            c.sequence.push_back(right);
            c.max_abs = std::max({c.max_abs, std::abs(left), std::abs(right)});
        } else {
            const double v = static_cast<double>(rank) * inv_n - g[q];
            c.sequence.push_back(v);
            c.max_abs = std::max(c.max_abs, std::abs(v));
        }
    }
    c.sequence.push_back(0.0);
    return c;
}

double distance_from_candidates(const DistanceSpec& spec, const Candidates& c) {
    if (spec.kind() == DistanceSpec::Kind::kolmogorov) return c.max_abs;
    return max_k_interval_sum(c.sequence, spec.kuiper_order());
}

}  // namespace

double distance_fast(const DistanceSpec& spec, std::span<const double> sorted_data,
                     const Kernel& k, double h) {
    const Candidates c = build_candidates(sorted_data, k, h, sorted_data);
    return distance_from_candidates(spec, c);
}

}  // namespace detail

SmoothedCdf::SmoothedCdf(Sample sample, Kernel kernel, double h)
    : sample_(std::move(sample)), kernel_(std::move(kernel)), h_(h) {
    if (!(h_ > 0.0)) throw std::domain_error("bandwidth must be positive");
}

double SmoothedCdf::operator()(double x) const {
    return detail::smoothed_cdf_at(sample_.points(), kernel_, h_, x);
}

std::vector<double> SmoothedCdf::evaluate_sorted(std::span<const double> sorted_queries) const {
    std::vector<double> out(sorted_queries.size());
    detail::smoothed_cdf_sorted(sample_.points(), kernel_, h_, sorted_queries, out);
    return out;
}

double kolmogorov_distance(const Sample& s, const SmoothedCdf& g) {
    const detail::Candidates c = detail::build_candidates(
        s.points(), g.kernel(), g.bandwidth(), g.sample().points());
    return detail::distance_from_candidates(DistanceSpec::kolmogorov(), c);
}

double kuiper_distance(const Sample& s, const SmoothedCdf& g, int k) {
    const detail::Candidates c = detail::build_candidates(
        s.points(), g.kernel(), g.bandwidth(), g.sample().points());
    return detail::distance_from_candidates(DistanceSpec::kuiper(k), c);
}

double distance(const DistanceSpec& spec, const Sample& s, const SmoothedCdf& g) {
    const detail::Candidates c = detail::build_candidates(
        s.points(), g.kernel(), g.bandwidth(), g.sample().points());
    return detail::distance_from_candidates(spec, c);
}

}  // namespace dpkde
