#pragma once

#include <algorithm>
#include <vector>

namespace mdalab {

/// Endpoints closer than this are merged, so float noise does not leave micro-gaps.
inline constexpr double kMergeEps = 1e-15;

struct Interval {
    double lo;
    double hi;
};

/// Sorted, pairwise disjoint subintervals of [0, 1].
class IntervalUnion {
public:
    IntervalUnion() = default;

    /// Clips to [0, 1], drops empty pieces, sorts and merges.
    static IntervalUnion from_intervals(std::vector<Interval> pieces, double merge_eps = kMergeEps) {
        for (auto& iv : pieces) {
            iv.lo = std::max(iv.lo, 0.0);
            iv.hi = std::min(iv.hi, 1.0);
        }
        std::erase_if(pieces, [](const Interval& iv) { return !(iv.hi > iv.lo); });
        std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        IntervalUnion u;
        for (const auto& iv : pieces) {
            if (!u.parts_.empty() && iv.lo <= u.parts_.back().hi + merge_eps)
                u.parts_.back().hi = std::max(u.parts_.back().hi, iv.hi);
            else
                u.parts_.push_back(iv);
        }
        return u;
    }

    const std::vector<Interval>& intervals() const noexcept { return parts_; }
    bool empty() const noexcept { return parts_.empty(); }

    double measure() const {
        long double total = 0;
        for (const auto& iv : parts_) total += iv.hi - iv.lo;
        return double(total);
    }

    bool contains(double x) const {
        auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                                   [](double v, const Interval& iv) { return v < iv.lo; });
        return it != parts_.begin() && x <= std::prev(it)->hi;
    }

    IntervalUnion unite(const IntervalUnion& other) const {
        std::vector<Interval> all = parts_;
        all.insert(all.end(), other.parts_.begin(), other.parts_.end());
        return from_intervals(std::move(all));
    }

    /// Measure of the intersection, by a linear two-pointer sweep.
    static double intersection_measure(const IntervalUnion& a, const IntervalUnion& b) {
        long double total = 0;
        std::size_t i = 0, j = 0;
        const auto& x = a.parts_;
        const auto& y = b.parts_;
        while (i < x.size() && j < y.size()) {
            double lo = std::max(x[i].lo, y[j].lo);
            double hi = std::min(x[i].hi, y[j].hi);
            if (hi > lo) total += hi - lo;
            if (x[i].hi < y[j].hi)
                ++i;
            else
                ++j;
        }
        return double(total);
    }

private:
    std::vector<Interval> parts_;
};

}  // namespace mdalab
