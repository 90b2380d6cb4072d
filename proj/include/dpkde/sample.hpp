#pragma once

#include <span>
#include <vector>

namespace dpkde {

/// Sorted data vector with its empirical CDF. Construction sorts the input
/// and rejects NaN/infinite values and empty inputs. Ties are allowed but
/// flagged (they occur with probability zero under a continuous law).
class Sample {
public:
    explicit Sample(std::vector<double> points);

    std::size_t size() const { return pts_.size(); }
    std::span<const double> points() const { return pts_; }
    bool has_ties() const { return ties_; }

    double min() const { return pts_.front(); }
    double max() const { return pts_.back(); }
    double range() const { return pts_.back() - pts_.front(); }

    // Smallest positive gap between consecutive order statistics.
    // Throws std::domain_error for a degenerate (all-equal) sample.
    double min_positive_gap() const;

    // (# points <= x) / n; right-continuous.
    double ecdf(double x) const;

private:
    std::vector<double> pts_;
    bool ties_ = false;
};

inline double ecdf(const Sample& s, double x) { return s.ecdf(x); }

}  // namespace dpkde
