#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "chfis/dataset.hpp"
#include "chfis/errors.hpp"

namespace chfis {

/// Per-cell vertical scaling factors of the system. alpha and gamma are the
/// free variables (|alpha| < 1, |gamma| < 1); beta is the constrained
/// coupling variable (|beta| + |gamma| < 1). All three are N x M over cells.
/// Construct through uniform() or validate().
struct IfsParameters {
    Grid2 alpha;
    Grid2 beta;
    Grid2 gamma;

    std::size_t cells_x() const { return alpha.rows; }
    std::size_t cells_y() const { return alpha.cols; }

    /// Broadcast one scalar triple to every cell.
    static IfsParameters uniform(double a, double b, double g, std::size_t n,
                                 std::size_t m) {
        return validate(Grid2(n, m, a), Grid2(n, m, b), Grid2(n, m, g));
    }

    static IfsParameters validate(Grid2 a, Grid2 b, Grid2 g) {
        if (!a.same_shape(b) || !a.same_shape(g))
            raise(errc::shape_mismatch, "alpha, beta, gamma shapes disagree");
        if (a.rows == 0 || a.cols == 0)
            raise(errc::shape_mismatch, "parameter matrices must be non-empty");
        for (std::size_t i = 0; i < a.rows; ++i) {
            for (std::size_t j = 0; j < a.cols; ++j) {
                const double av = a.at(i, j);
                const double bv = b.at(i, j);
                const double gv = g.at(i, j);
                if (!std::isfinite(av) || !std::isfinite(bv) || !std::isfinite(gv))
                    raise(errc::non_finite_value,
                          "non-finite parameter at cell " + cell_name(i, j));
                if (!(std::abs(av) < 1.0))
                    raise(errc::contraction_violated,
                          "|alpha| < 1 fails at cell " + cell_name(i, j) +
                              " (alpha=" + std::to_string(av) + ")");
                if (!(std::abs(gv) < 1.0))
                    raise(errc::contraction_violated,
                          "|gamma| < 1 fails at cell " + cell_name(i, j) +
                              " (gamma=" + std::to_string(gv) + ")");
                if (!(std::abs(bv) + std::abs(gv) < 1.0))
                    raise(errc::contraction_violated,
                          "|beta| + |gamma| < 1 fails at cell " + cell_name(i, j) +
                              " (beta=" + std::to_string(bv) +
                              ", gamma=" + std::to_string(gv) + ")");
            }
        }
        return IfsParameters{std::move(a), std::move(b), std::move(g)};
    }

    /// True when every cell carries the same (alpha, beta, gamma) triple.
    /// The closed-form stability bounds require this.
    bool is_uniform() const {
        for (double v : alpha.v)
            if (v != alpha.v.front()) return false;
        for (double v : beta.v)
            if (v != beta.v.front()) return false;
        for (double v : gamma.v)
            if (v != gamma.v.front()) return false;
        return true;
    }

    double max_abs_alpha() const { return max_abs(alpha); }
    double max_abs_beta() const { return max_abs(beta); }
    double max_abs_gamma() const { return max_abs(gamma); }

  private:
    static std::string cell_name(std::size_t i, std::size_t j) {
        // public cell indices are 1-based
        return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
    }

    static double max_abs(const Grid2& g) {
        double m = 0.0;
        for (double v : g.v) m = std::max(m, std::abs(v));
        return m;
    }
};

}  // namespace chfis
