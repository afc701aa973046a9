#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "chfis/dataset.hpp"
#include "chfis/errors.hpp"

namespace chfis {

/// Result of the invariance-of-ratio check between two axis families:
/// corresponding increments must be proportional with the common ratio of
/// the full spans. Residuals are per interval, x first then y.
struct RatioCheck {
    bool ok = false;
    std::vector<double> x_residuals;
    std::vector<double> y_residuals;

    double max_residual() const {
        double m = 0.0;
        for (double r : x_residuals) m = std::max(m, std::abs(r));
        for (double r : y_residuals) m = std::max(m, std::abs(r));
        return m;
    }
};

namespace detail {

inline std::vector<double> ratio_residuals(const std::vector<double>& a,
                                           const std::vector<double>& b) {
    const double ref = (a.front() - a.back()) / (b.front() - b.back());
    std::vector<double> res(a.size() - 1);
    for (std::size_t n = 1; n < a.size(); ++n)
        res[n - 1] = (a[n - 1] - a[n]) / (b[n - 1] - b[n]) - ref;
    return res;
}

}  // namespace detail

/// Checks that pert's axes are ratio-compatible with base's (equivalently:
/// each perturbed axis is an affine image of the original).
inline RatioCheck check_ratio_invariance(const GeneralizedDataset& base,
                                         const GeneralizedDataset& pert,
                                         double tol = 1e-9) {
    if (base.x.size() != pert.x.size() || base.y.size() != pert.y.size())
        raise(errc::shape_mismatch, "datasets have different grid sizes");
    RatioCheck check;
    check.x_residuals = detail::ratio_residuals(base.x, pert.x);
    check.y_residuals = detail::ratio_residuals(base.y, pert.y);
    check.ok = check.max_residual() <= tol;
    return check;
}

/// Piecewise-affine change of variables between two ratio-compatible
/// domains: cell S_{n,m} of the source maps onto cell S*_{n,m} of the
/// target, nodes to corresponding nodes exactly. inverse() realizes the
/// inverse map (target cells back onto source cells).
class RescaleMap {
  public:
    RescaleMap(std::vector<double> from_x, std::vector<double> from_y,
               std::vector<double> to_x, std::vector<double> to_y)
        : fx_(std::move(from_x)), fy_(std::move(from_y)), tx_(std::move(to_x)),
          ty_(std::move(to_y)) {}

    static RescaleMap identity(const GeneralizedDataset& d) {
        return RescaleMap(d.x, d.y, d.x, d.y);
    }

    Point2 forward(Point2 p) const {
        return {map_axis(fx_, tx_, p.x), map_axis(fy_, ty_, p.y)};
    }

    Point2 inverse(Point2 p) const {
        return {map_axis(tx_, fx_, p.x), map_axis(ty_, fy_, p.y)};
    }

    const std::vector<double>& target_x() const { return tx_; }
    const std::vector<double>& target_y() const { return ty_; }

  private:
    // Node coordinates map to their counterparts directly; anything else
    // goes through the containing interval's affine map.
    static double map_axis(const std::vector<double>& from,
                           const std::vector<double>& to, double u) {
        const auto it = std::lower_bound(from.begin(), from.end(), u);
        if (it != from.end() && *it == u)
            return to[static_cast<std::size_t>(it - from.begin())];
        std::size_t n = static_cast<std::size_t>(it - from.begin());
        n = std::clamp<std::size_t>(n, 1, from.size() - 1);
        const double scale = (to[n] - to[n - 1]) / (from[n] - from[n - 1]);
        return to[n - 1] + scale * (u - from[n - 1]);
    }

    std::vector<double> fx_, fy_, tx_, ty_;
};

/// Builds the rescale map from base's domain onto pert's after verifying the
/// ratio condition. A target domain that pokes outside the source is legal
/// for the map itself and only weakens the independent-variable bound.
inline RescaleMap build_rescale(const GeneralizedDataset& base,
                                const GeneralizedDataset& pert,
                                double tol = 1e-9) {
    const RatioCheck check = check_ratio_invariance(base, pert, tol);
    if (!check.ok)
        raise(errc::ratio_condition_violated,
              "axis increments are not proportional (max residual " +
                  std::to_string(check.max_residual()) + ")");
    return RescaleMap(base.x, base.y, pert.x, pert.y);
}

}  // namespace chfis
