#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "chfis/dataset.hpp"
#include "chfis/errors.hpp"
#include "chfis/parameters.hpp"

namespace chfis {

/// One axis contraction u -> offset + scale * (u - origin).
struct AffineMap1D {
    double scale = 1.0;
    double offset = 0.0;
    double origin = 0.0;

    double operator()(double u) const { return offset + scale * (u - origin); }
    double invert(double v) const { return origin + (v - offset) / scale; }
};

/// The per-cell domain contractions: phi_n maps [x_0, x_N] onto [x_{n-1}, x_n]
/// and psi_m maps [y_0, y_M] onto [y_{m-1}, y_m]. phi_n(x_0) = x_{n-1} holds
/// bit-exactly; phi_n(x_N) = x_n up to 1 ulp.
struct DomainMaps {
    std::vector<AffineMap1D> phi;  // index n-1
    std::vector<AffineMap1D> psi;  // index m-1

    static DomainMaps build(const GeneralizedDataset& d) {
        DomainMaps maps;
        maps.phi = build_axis(d.x);
        maps.psi = build_axis(d.y);
        return maps;
    }

  private:
    static std::vector<AffineMap1D> build_axis(const std::vector<double>& a) {
        const double span = a.back() - a.front();
        if (!(span > 0.0))
            raise(errc::degenerate_grid, "axis spans zero length");
        std::vector<AffineMap1D> maps;
        maps.reserve(a.size() - 1);
        for (std::size_t n = 1; n < a.size(); ++n) {
            const double len = a[n] - a[n - 1];
            if (!(len > 0.0))
                raise(errc::degenerate_grid,
                      "zero-length interval before node " + std::to_string(n));
            maps.push_back(AffineMap1D{len / span, a[n - 1], a.front()});
        }
        return maps;
    }
};

/// The eight scalars that pin one cell map to the four corner conditions,
/// plus the corner second differences of the input matrices.
struct CellCoefficients {
    double e = 0, f = 0, g = 0, k = 0;      // first component (z recursion)
    double et = 0, ft = 0, gt = 0, kt = 0;  // second component (t recursion)
    double z_eva = 0, t_eva = 0;
};

namespace detail {

inline CellCoefficients cell_coefficients(const GeneralizedDataset& d,
                                          const IfsParameters& p,
                                          std::size_t n, std::size_t m) {
    // n, m are 0-based cell indices here; the data corners of the cell are
    // (n, m), (n+1, m), (n, m+1), (n+1, m+1).
    const std::size_t N = d.cells_x(), M = d.cells_y();
    const double x0 = d.x0(), xN = d.xN(), y0 = d.y0(), yM = d.yM();
    const double dx = x0 - xN, dy = y0 - yM;

    const double a = p.alpha.at(n, m);
    const double b = p.beta.at(n, m);
    const double c = p.gamma.at(n, m);

    const auto& z = d.z;
    const auto& t = d.t;
    const double z_eva = z.at(N, M) - z.at(N, 0) - z.at(0, M) + z.at(0, 0);
    const double t_eva = t.at(N, M) - t.at(N, 0) - t.at(0, M) + t.at(0, 0);

    CellCoefficients cc;
    cc.z_eva = z_eva;
    cc.t_eva = t_eva;

    cc.g = (z.at(n, m) - z.at(n, m + 1) - z.at(n + 1, m) + z.at(n + 1, m + 1) -
            a * z_eva - b * t_eva) /
           (dx * dy);
    cc.e = (z.at(n, m) - z.at(n + 1, m) - a * (z.at(0, 0) - z.at(N, 0)) -
            b * (t.at(0, 0) - t.at(N, 0)) - cc.g * dx * y0) /
           dx;
    cc.f = (z.at(n, m) - z.at(n, m + 1) - a * (z.at(0, 0) - z.at(0, M)) -
            b * (t.at(0, 0) - t.at(0, M)) - cc.g * dy * x0) /
           dy;
    cc.k = z.at(n + 1, m + 1) - cc.e * xN - cc.f * yM - a * z.at(N, M) -
           b * t.at(N, M) - cc.g * xN * yM;

    cc.gt = (t.at(n, m) - t.at(n, m + 1) - t.at(n + 1, m) + t.at(n + 1, m + 1) -
             c * t_eva) /
            (dx * dy);
    cc.et = (t.at(n, m) - t.at(n + 1, m) - c * (t.at(0, 0) - t.at(N, 0)) -
             cc.gt * dx * y0) /
            dx;
    cc.ft = (t.at(n, m) - t.at(n, m + 1) - c * (t.at(0, 0) - t.at(0, M)) -
             cc.gt * dy * x0) /
            dy;
    cc.kt = t.at(n + 1, m + 1) - cc.et * xN - cc.ft * yM - c * t.at(N, M) -
            cc.gt * xN * yM;

    return cc;
}

}  // namespace detail

/// A dataset joined with validated parameters, the domain contractions and
/// the solved per-cell coefficients. Immutable after build_model(); all
/// evaluation entry points are const and safe to call concurrently.
class IfsModel {
  public:
    IfsModel(GeneralizedDataset data, IfsParameters params)
        : data_(std::move(data)), params_(std::move(params)),
          maps_(DomainMaps::build(data_)) {
        const std::size_t N = data_.cells_x(), M = data_.cells_y();
        if (params_.cells_x() != N || params_.cells_y() != M)
            raise(errc::shape_mismatch,
                  "parameter matrices are " + std::to_string(params_.cells_x()) +
                      "x" + std::to_string(params_.cells_y()) + ", grid has " +
                      std::to_string(N) + "x" + std::to_string(M) + " cells");
        coeffs_.reserve(N * M);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t m = 0; m < M; ++m)
                coeffs_.push_back(detail::cell_coefficients(data_, params_, n, m));
    }

    const GeneralizedDataset& data() const { return data_; }
    const IfsParameters& params() const { return params_; }
    const DomainMaps& maps() const { return maps_; }

    std::size_t cells_x() const { return data_.cells_x(); }
    std::size_t cells_y() const { return data_.cells_y(); }

    /// Coefficients of cell (n, m), 1-based as in the public interface.
    const CellCoefficients& cell(std::size_t n, std::size_t m) const {
        check_cell(n, m);
        return coeffs_[(n - 1) * cells_y() + (m - 1)];
    }

    /// p_{n,m}(x, y) and q_{n,m}(x, y): the inhomogeneous parts of the two
    /// recursions, evaluated at pre-image coordinates.
    std::pair<double, double> eval_pq(std::size_t n, std::size_t m, double x,
                                      double y) const {
        const CellCoefficients& c = cell(n, m);
        return {c.e * x + c.f * y + c.g * x * y + c.k,
                c.et * x + c.ft * y + c.gt * x * y + c.kt};
    }

    /// Full cell map F_{n,m}(x, y, z, t) -> (F1, F2).
    std::pair<double, double> map_cell(std::size_t n, std::size_t m, double x,
                                       double y, double z, double t) const {
        const auto [p, q] = eval_pq(n, m, x, y);
        const double a = params_.alpha.at(n - 1, m - 1);
        const double b = params_.beta.at(n - 1, m - 1);
        const double c = params_.gamma.at(n - 1, m - 1);
        return {a * z + b * t + p, c * t + q};
    }

  private:
    void check_cell(std::size_t n, std::size_t m) const {
        if (n < 1 || n > cells_x() || m < 1 || m > cells_y())
            raise(errc::cell_out_of_range,
                  "cell (" + std::to_string(n) + "," + std::to_string(m) +
                      ") outside 1.." + std::to_string(cells_x()) + " x 1.." +
                      std::to_string(cells_y()));
    }

    GeneralizedDataset data_;
    IfsParameters params_;
    DomainMaps maps_;
    std::vector<CellCoefficients> coeffs_;
};

/// Componentwise residuals of the four corner conditions of one cell:
/// F_{n,m} applied to the domain corners minus the cell's data values.
struct CornerResidual {
    double dz = 0;
    double dt = 0;
};

inline std::array<CornerResidual, 4> verify_joinup(const IfsModel& model,
                                                   std::size_t n,
                                                   std::size_t m) {
    const GeneralizedDataset& d = model.data();
    const std::size_t N = d.cells_x(), M = d.cells_y();
    const double x0 = d.x0(), xN = d.xN(), y0 = d.y0(), yM = d.yM();

    struct Corner {
        double x, y;
        std::size_t zi, zj;   // argument data node
        std::size_t ti, tj;   // target data node (relative to cell)
    };
    const Corner corners[4] = {
        {x0, y0, 0, 0, n - 1, m - 1},
        {xN, y0, N, 0, n, m - 1},
        {x0, yM, 0, M, n - 1, m},
        {xN, yM, N, M, n, m},
    };

    std::array<CornerResidual, 4> res;
    for (int c = 0; c < 4; ++c) {
        const Corner& o = corners[c];
        const auto [f1, f2] = model.map_cell(n, m, o.x, o.y, d.z.at(o.zi, o.zj),
                                             d.t.at(o.zi, o.zj));
        res[c].dz = f1 - d.z.at(o.ti, o.tj);
        res[c].dt = f2 - d.t.at(o.ti, o.tj);
    }
    return res;
}

/// Builds the model and verifies that every cell reproduces its four corner
/// conditions. The residual tolerance scales with the data magnitude, so the
/// check stays meaningful away from O(1) inputs.
inline IfsModel build_model(GeneralizedDataset data, IfsParameters params) {
    IfsModel model(std::move(data), std::move(params));
    double scale = 1.0;
    for (double v : model.data().z.v) scale = std::max(scale, std::abs(v));
    for (double v : model.data().t.v) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;
    for (std::size_t n = 1; n <= model.cells_x(); ++n) {
        for (std::size_t m = 1; m <= model.cells_y(); ++m) {
            for (const CornerResidual& r : verify_joinup(model, n, m)) {
                if (std::abs(r.dz) > tol || std::abs(r.dt) > tol)
                    raise(errc::internal_error,
                          "corner conditions not met at cell (" +
                              std::to_string(n) + "," + std::to_string(m) + ")");
            }
        }
    }
    return model;
}

}  // namespace chfis
