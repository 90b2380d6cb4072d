#include "dpkde/sample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpkde {

Sample::Sample(std::vector<double> points) : pts_(std::move(points)) {
    if (pts_.empty()) throw std::invalid_argument("sample must be nonempty");
    for (double x : pts_)
        if (!std::isfinite(x))
            throw std::invalid_argument("sample contains NaN or infinite values");
    std::sort(pts_.begin(), pts_.end());
    ties_ = std::adjacent_find(pts_.begin(), pts_.end()) != pts_.end();
}

double Sample::min_positive_gap() const {
    double best = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
        const double gap = pts_[i] - pts_[i - 1];
        if (gap > 0.0 && (best == 0.0 || gap < best)) best = gap;
    }
    if (best == 0.0)
        throw std::domain_error("degenerate sample: all points are equal");
    return best;
}

double Sample::ecdf(double x) const {
    const auto it = std::upper_bound(pts_.begin(), pts_.end(), x);
    return static_cast<double>(it - pts_.begin()) / static_cast<double>(pts_.size());
}

}  // namespace dpkde
