#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "chfis/errors.hpp"

namespace chfis {

/// Dense row-major matrix of doubles. Row index follows the x axis,
/// column index the y axis, matching the node layout of a dataset.
struct Grid2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Grid2() = default;
    Grid2(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), v(r * c, fill) {}
    Grid2(std::size_t r, std::size_t c, std::vector<double> values)
        : rows(r), cols(c), v(std::move(values)) {
        if (v.size() != rows * cols)
            raise(errc::shape_mismatch,
                  "matrix expects " + std::to_string(rows * cols) +
                      " entries, got " + std::to_string(v.size()));
    }

    double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
    std::size_t size() const { return v.size(); }

    bool same_shape(const Grid2& o) const {
        return rows == o.rows && cols == o.cols;
    }
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// d_M(a, b) = |a.x - b.x| + |a.y - b.y|.
inline double manhattan_distance(Point2 a, Point2 b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

/// Interpolation nodes plus the dependent (z) and hidden (t) values.
/// Axes are strictly increasing; z and t are (N+1) x (M+1) with N,M >= 1.
/// Construct through validate(); instances are treated as immutable.
struct GeneralizedDataset {
    std::vector<double> x;  // abscissae x_0..x_N
    std::vector<double> y;  // ordinates y_0..y_M
    Grid2 z;                // dependent values, z.at(i,j) at (x_i, y_j)
    Grid2 t;                // hidden values

    std::size_t cells_x() const { return x.size() - 1; }  // N
    std::size_t cells_y() const { return y.size() - 1; }  // M

    double x0() const { return x.front(); }
    double xN() const { return x.back(); }
    double y0() const { return y.front(); }
    double yM() const { return y.back(); }

    static GeneralizedDataset validate(std::vector<double> xs,
                                       std::vector<double> ys, Grid2 zs,
                                       Grid2 ts) {
        check_axis(xs, "x");
        check_axis(ys, "y");
        check_values(zs, xs.size(), ys.size(), "z");
        check_values(ts, xs.size(), ys.size(), "t");
        return GeneralizedDataset{std::move(xs), std::move(ys), std::move(zs),
                                  std::move(ts)};
    }

  private:
    static void check_axis(const std::vector<double>& a,
                           const std::string& name) {
        if (a.size() < 2)
            raise(errc::shape_mismatch,
                  name + " axis needs at least 2 points, got " +
                      std::to_string(a.size()));
        for (double u : a)
            if (!std::isfinite(u))
                raise(errc::non_finite_value, name + " axis contains a non-finite value");
        for (std::size_t i = 1; i < a.size(); ++i)
            if (!(a[i - 1] < a[i]))
                raise(errc::non_monotone_axis,
                      name + " axis is not strictly increasing at index " +
                          std::to_string(i));
    }

    static void check_values(const Grid2& m, std::size_t nx, std::size_t ny,
                             const std::string& name) {
        if (m.rows != nx || m.cols != ny)
            raise(errc::shape_mismatch,
                  name + " matrix is " + std::to_string(m.rows) + "x" +
                      std::to_string(m.cols) + ", axes require " +
                      std::to_string(nx) + "x" + std::to_string(ny));
        for (double u : m.v)
            if (!std::isfinite(u))
                raise(errc::non_finite_value, name + " matrix contains a non-finite value");
    }
};

/// Constants of the Lipschitz-type bound on the coalescence surface used by
/// the independent-variable stability estimate. The theory guarantees their
/// existence without producing values; the defaults are calibrated against
/// the bundled sample data and exposed as configuration.
struct StabilityConfig {
    double m_bar = 1.3;
    double delta = 1.0;

    static StabilityConfig validate(double m_bar, double delta) {
        if (!(m_bar > 0.0) || !std::isfinite(m_bar))
            raise(errc::non_finite_value, "m_bar must be a positive real");
        if (!(delta > 0.0) || !(delta <= 1.0))
            raise(errc::non_finite_value, "delta must lie in (0, 1]");
        return StabilityConfig{m_bar, delta};
    }
};

}  // namespace chfis
