#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "chfis/dataset.hpp"
#include "chfis/errors.hpp"
#include "chfis/model.hpp"
#include "chfis/random.hpp"

namespace chfis {

inline constexpr int kDefaultMaxDepth = 12;
inline constexpr int kDefaultEvalDepth = 30;

/// Surface samples on the depth-L address grid: the images of the original
/// nodes under all length-L compositions of the domain maps. xs/ys are
/// sorted and contain every original node; f1/f2 are indexed (xs, ys).
struct SurfaceGrid {
    int depth = 0;
    std::vector<double> xs;
    std::vector<double> ys;
    Grid2 f1;
    Grid2 f2;
};

namespace detail {

/// One pullback step along an axis: the cell whose map sends the returned
/// coordinate to u. A coordinate equal to an interior node belongs to the
/// lower cell, whose pullback lands on the axis endpoint; that evaluation is
/// delegated to the upper cell so shared-edge points take a single value.
/// Node hits are pinned to exact node coordinates instead of computed.
struct AxisPull {
    std::size_t cell;  // 1-based
    double pulled;
};

inline AxisPull pull_axis(const std::vector<double>& nodes,
                          const std::vector<AffineMap1D>& maps, double u) {
    const std::size_t N = nodes.size() - 1;
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), u);
    std::size_t i = static_cast<std::size_t>(it - nodes.begin());

    // Snap to a node within a few ulps of the axis scale: keeps the exact
    // expansion of finite-address points on track when inverse maps round.
    const double scale = std::max({std::abs(nodes.front()), std::abs(nodes.back()),
                                   nodes.back() - nodes.front()});
    const double snap = 8.0 * std::numeric_limits<double>::epsilon() * scale;
    std::size_t hit = nodes.size();
    if (i <= N && std::abs(nodes[i] - u) <= snap)
        hit = i;
    else if (i > 0 && std::abs(nodes[i - 1] - u) <= snap)
        hit = i - 1;
    if (hit != nodes.size()) {
        if (hit == 0) return {1, nodes.front()};
        if (hit == N) return {N, nodes.back()};
        return {hit + 1, nodes.front()};  // delegated to the upper cell
    }

    const std::size_t n = std::clamp<std::size_t>(i, 1, N);  // u in (x_{n-1}, x_n)
    double pulled = maps[n - 1].invert(u);
    pulled = std::clamp(pulled, nodes.front(), nodes.back());
    return {n, pulled};
}

/// Cell index containing u, lower cell on interior-node ties.
inline std::size_t locate_cell(const std::vector<double>& nodes, double u) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), u);
    std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    if (i == 0) i = 1;  // u == x_0
    return i;
}

/// Piecewise-bilinear interpolant of one tabulated matrix over an axis pair.
inline double bilinear1(const std::vector<double>& xs,
                        const std::vector<double>& ys, const Grid2& a,
                        double u, double v) {
    const std::size_t n = locate_cell(xs, u);
    const std::size_t m = locate_cell(ys, v);
    const double s = (u - xs[n - 1]) / (xs[n] - xs[n - 1]);
    const double w = (v - ys[m - 1]) / (ys[m] - ys[m - 1]);
    return (1 - s) * (1 - w) * a.at(n - 1, m - 1) +
           s * (1 - w) * a.at(n, m - 1) + (1 - s) * w * a.at(n - 1, m) +
           s * w * a.at(n, m);
}

/// Interpolates the two value matrices at once.
inline std::pair<double, double> bilinear(const std::vector<double>& xs,
                                          const std::vector<double>& ys,
                                          const Grid2& a, const Grid2& b,
                                          double u, double v) {
    return {bilinear1(xs, ys, a, u, v), bilinear1(xs, ys, b, u, v)};
}

/// Refine a level's sample coordinates through every axis map. For cells
/// below the last, the top source sample is skipped: its image is the shared
/// node that the next cell produces from the axis origin (the delegated
/// route), bit-exactly equal to the node coordinate. The domain endpoint is
/// a fixed point of the last map and is pinned rather than recomputed.
inline std::vector<double> refine_axis(const std::vector<double>& coords,
                                       const std::vector<AffineMap1D>& maps,
                                       double top_node) {
    const std::size_t cells = maps.size();
    const std::size_t stride = coords.size() - 1;
    std::vector<double> out(cells * stride + 1);
    for (std::size_t n = 0; n < cells; ++n) {
        const std::size_t top = (n + 1 < cells) ? stride : stride + 1;
        for (std::size_t i = 0; i < top; ++i)
            out[n * stride + i] = maps[n](coords[i]);
    }
    out.back() = top_node;
    return out;
}

inline void check_grid_budget(std::size_t px, std::size_t py) {
    // 2^27 samples ~ 1 GiB per value matrix; the deepest default-cap grid on
    // a 2x2-cell dataset stays well below this.
    if (px > (std::size_t{1} << 27) / py)
        raise(errc::depth_too_large,
              "address grid would exceed 2^27 samples (" + std::to_string(px) +
                  " x " + std::to_string(py) + ")");
}

}  // namespace detail

/// Evaluates the surface pair exactly on the depth-L address grid by forward
/// recursion. Depth 0 is the interpolation nodes (f1 = z, f2 = t); each
/// level maps every current sample through the cell maps, second component
/// first. No iteration tolerance is involved: the functional equation is
/// applied finitely.
inline SurfaceGrid solve_surface(const IfsModel& model, int depth,
                                 int max_depth = kDefaultMaxDepth) {
    if (depth < 0)
        raise(errc::depth_too_large, "depth must be nonnegative");
    if (depth > max_depth)
        raise(errc::depth_too_large,
              "depth " + std::to_string(depth) + " exceeds cap " +
                  std::to_string(max_depth));

    const std::size_t N = model.cells_x(), M = model.cells_y();
    SurfaceGrid grid;
    grid.depth = depth;
    grid.xs = model.data().x;
    grid.ys = model.data().y;
    grid.f1 = model.data().z;
    grid.f2 = model.data().t;

    for (int level = 0; level < depth; ++level) {
        const std::size_t px = grid.xs.size(), py = grid.ys.size();
        const std::size_t sx = px - 1, sy = py - 1;
        detail::check_grid_budget(N * sx + 1, M * sy + 1);

        std::vector<double> nxs =
            detail::refine_axis(grid.xs, model.maps().phi, model.data().xN());
        std::vector<double> nys =
            detail::refine_axis(grid.ys, model.maps().psi, model.data().yM());
        Grid2 nf1(nxs.size(), nys.size());
        Grid2 nf2(nxs.size(), nys.size());

        for (std::size_t n = 1; n <= N; ++n) {
            const std::size_t itop = (n < N) ? sx : sx + 1;
            for (std::size_t m = 1; m <= M; ++m) {
                const std::size_t jtop = (m < M) ? sy : sy + 1;
                const double a = model.params().alpha.at(n - 1, m - 1);
                const double b = model.params().beta.at(n - 1, m - 1);
                const double c = model.params().gamma.at(n - 1, m - 1);
                for (std::size_t i = 0; i < itop; ++i) {
                    const std::size_t gi = (n - 1) * sx + i;
                    for (std::size_t j = 0; j < jtop; ++j) {
                        const std::size_t gj = (m - 1) * sy + j;
                        const auto [p, q] =
                            model.eval_pq(n, m, grid.xs[i], grid.ys[j]);
                        nf2.at(gi, gj) = c * grid.f2.at(i, j) + q;
                        nf1.at(gi, gj) =
                            a * grid.f1.at(i, j) + b * grid.f2.at(i, j) + p;
                    }
                }
            }
        }

        grid.xs = std::move(nxs);
        grid.ys = std::move(nys);
        grid.f1 = std::move(nf1);
        grid.f2 = std::move(nf2);
    }
    return grid;
}

/// Point evaluation result with the heuristic propagation bounds on the
/// truncation error (data ranges contracted through the depth-D expansion).
struct PointEval {
    double f1 = 0;
    double f2 = 0;
    double f1_err = 0;
    double f2_err = 0;
};

/// Approximates the surface pair at an arbitrary domain point: expands the
/// point's address to depth D by inverse-map application, seeds the base of
/// the recursion with the piecewise-bilinear interpolant of the node data,
/// and applies the functional equation D times forward. At a finite-address
/// point of depth <= D the expansion bottoms out on exact node coordinates
/// and the result matches the address-grid value.
inline PointEval eval_point(const IfsModel& model, double x, double y,
                            int depth = kDefaultEvalDepth) {
    const GeneralizedDataset& d = model.data();
    if (!(x >= d.x0() && x <= d.xN() && y >= d.y0() && y <= d.yM()))
        raise(errc::out_of_domain,
              "(" + std::to_string(x) + "," + std::to_string(y) +
                  ") outside the interpolation domain");
    if (depth < 0) raise(errc::depth_too_large, "depth must be nonnegative");

    struct Step {
        std::size_t n, m;
        double px, py;
    };
    std::vector<Step> steps;
    steps.reserve(static_cast<std::size_t>(depth));
    double u = x, v = y;
    for (int k = 0; k < depth; ++k) {
        const auto ax = detail::pull_axis(d.x, model.maps().phi, u);
        const auto ay = detail::pull_axis(d.y, model.maps().psi, v);
        u = ax.pulled;
        v = ay.pulled;
        steps.push_back(Step{ax.cell, ay.cell, u, v});
    }

    auto [z, t] = detail::bilinear(d.x, d.y, d.z, d.t, u, v);
    for (std::size_t k = steps.size(); k-- > 0;) {
        const Step& s = steps[k];
        const auto [f1, f2] = model.map_cell(s.n, s.m, s.px, s.py, z, t);
        z = f1;
        t = f2;
    }

    PointEval out;
    out.f1 = z;
    out.f2 = t;
    const auto [zmin, zmax] = std::minmax_element(d.z.v.begin(), d.z.v.end());
    const auto [tmin, tmax] = std::minmax_element(d.t.v.begin(), d.t.v.end());
    double e1 = *zmax - *zmin, e2 = *tmax - *tmin;
    const double am = model.params().max_abs_alpha();
    const double bm = model.params().max_abs_beta();
    const double gm = model.params().max_abs_gamma();
    for (int k = 0; k < depth; ++k) {
        e1 = am * e1 + bm * e2;
        e2 = gm * e2;
    }
    out.f1_err = e1;
    out.f2_err = e2;
    return out;
}

/// Trace of the two-stage fixed-point iteration: sup distances between
/// successive iterates, second component first (it never depends on the
/// first), then the first component with the second frozen.
struct SweepTrace {
    SurfaceGrid grid;
    std::vector<double> f2_deltas;
    std::vector<double> f1_deltas;
};

/// Picard iteration of the functional equation on the depth-L address grid,
/// the sweep form of the solver behind eval_point. Pulled-back values are
/// read through bilinear interpolation on the same grid, which never
/// amplifies the sup norm, so stage-1 deltas shrink by at most max|gamma|
/// per sweep and stage-2 deltas by at most max|alpha|.
inline SweepTrace solve_surface_sweeps(const IfsModel& model, int depth,
                                       int f2_sweeps, int f1_sweeps,
                                       int max_depth = kDefaultMaxDepth) {
    if (depth < 0)
        raise(errc::depth_too_large, "depth must be nonnegative");
    if (depth > max_depth)
        raise(errc::depth_too_large,
              "depth " + std::to_string(depth) + " exceeds cap " +
                  std::to_string(max_depth));

    const GeneralizedDataset& d = model.data();
    SweepTrace trace;
    SurfaceGrid& grid = trace.grid;
    grid.depth = depth;
    grid.xs = d.x;
    grid.ys = d.y;
    for (int level = 0; level < depth; ++level) {
        detail::check_grid_budget(model.cells_x() * (grid.xs.size() - 1) + 1,
                                  model.cells_y() * (grid.ys.size() - 1) + 1);
        grid.xs = detail::refine_axis(grid.xs, model.maps().phi, d.xN());
        grid.ys = detail::refine_axis(grid.ys, model.maps().psi, d.yM());
    }
    const std::size_t px = grid.xs.size(), py = grid.ys.size();

    // One pullback step per grid point, shared by both stages.
    struct Pull {
        std::size_t n, m;
        double px, py;
    };
    std::vector<Pull> pulls(px * py);
    for (std::size_t i = 0; i < px; ++i) {
        const auto ax = detail::pull_axis(d.x, model.maps().phi, grid.xs[i]);
        for (std::size_t j = 0; j < py; ++j) {
            const auto ay = detail::pull_axis(d.y, model.maps().psi, grid.ys[j]);
            pulls[i * py + j] = Pull{ax.cell, ay.cell, ax.pulled, ay.pulled};
        }
    }

    // Seed both components with the bilinear interpolant of the node data.
    grid.f1 = Grid2(px, py);
    grid.f2 = Grid2(px, py);
    for (std::size_t i = 0; i < px; ++i)
        for (std::size_t j = 0; j < py; ++j) {
            const auto [zv, tv] =
                detail::bilinear(d.x, d.y, d.z, d.t, grid.xs[i], grid.ys[j]);
            grid.f1.at(i, j) = zv;
            grid.f2.at(i, j) = tv;
        }

    Grid2 next(px, py);
    for (int sweep = 0; sweep < f2_sweeps; ++sweep) {
        double delta = 0.0;
        for (std::size_t i = 0; i < px; ++i)
            for (std::size_t j = 0; j < py; ++j) {
                const Pull& pl = pulls[i * py + j];
                const double q = model.eval_pq(pl.n, pl.m, pl.px, pl.py).second;
                const double prev = detail::bilinear1(grid.xs, grid.ys,
                                                      grid.f2, pl.px, pl.py);
                const double val =
                    model.params().gamma.at(pl.n - 1, pl.m - 1) * prev + q;
                delta = std::max(delta, std::abs(val - grid.f2.at(i, j)));
                next.at(i, j) = val;
            }
        std::swap(grid.f2, next);
        trace.f2_deltas.push_back(delta);
    }

    // Stage 2: the coupling term reads the frozen second component, so it is
    // constant across sweeps.
    Grid2 frozen(px, py);
    for (std::size_t i = 0; i < px; ++i)
        for (std::size_t j = 0; j < py; ++j) {
            const Pull& pl = pulls[i * py + j];
            const double p = model.eval_pq(pl.n, pl.m, pl.px, pl.py).first;
            const double t_prev =
                detail::bilinear1(grid.xs, grid.ys, grid.f2, pl.px, pl.py);
            frozen.at(i, j) =
                model.params().beta.at(pl.n - 1, pl.m - 1) * t_prev + p;
        }
    for (int sweep = 0; sweep < f1_sweeps; ++sweep) {
        double delta = 0.0;
        for (std::size_t i = 0; i < px; ++i)
            for (std::size_t j = 0; j < py; ++j) {
                const Pull& pl = pulls[i * py + j];
                const double prev = detail::bilinear1(grid.xs, grid.ys,
                                                      grid.f1, pl.px, pl.py);
                const double val =
                    model.params().alpha.at(pl.n - 1, pl.m - 1) * prev +
                    frozen.at(i, j);
                delta = std::max(delta, std::abs(val - grid.f1.at(i, j)));
                next.at(i, j) = val;
            }
        std::swap(grid.f1, next);
        trace.f1_deltas.push_back(delta);
    }
    return trace;
}

/// Least-squares fit of log|f1(X) - f1(X')| against log d_M(X, X') over
/// seeded random grid-point pairs. Diagnostic: exponent close to 1 flags a
/// smooth surface, lower values rougher ones.
struct HolderEstimate {
    double exponent = 0;
    double prefactor = 0;
    std::size_t pairs_used = 0;
};

inline HolderEstimate estimate_holder(const SurfaceGrid& grid,
                                      std::size_t sample_pairs,
                                      std::uint64_t rng_seed) {
    if (grid.depth < 3)
        raise(errc::insufficient_samples, "grid depth must be at least 3");
    if (sample_pairs < 100)
        raise(errc::insufficient_samples, "need at least 100 sample pairs");

    std::mt19937_64 rng(rng_seed);
    const std::size_t px = grid.xs.size(), py = grid.ys.size();

    // Pairs are drawn at log-uniform grid offsets capped at an eighth of the
    // domain: the fit has to run in the scaling regime, where |dF| tracks
    // d_M, not in the large-separation regime where it saturates.
    const std::size_t max_off = std::max<std::size_t>(2, std::min(px, py) / 8);
    const double max_exp = std::log2(static_cast<double>(max_off));
    auto draw_offset = [&](std::size_t at, std::size_t size) {
        const double mag = std::exp2(uniform_double(rng, 0.0, max_exp));
        std::size_t off = static_cast<std::size_t>(std::llround(mag));
        if (rng() & 1u) return at >= off ? at - off : at + off;
        return at + off < size ? at + off : at - off;
    };

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < sample_pairs; ++k) {
        const std::size_t i1 = uniform_index(rng, px), j1 = uniform_index(rng, py);
        const std::size_t i2 = draw_offset(i1, px), j2 = draw_offset(j1, py);
        const double dist = std::abs(grid.xs[i1] - grid.xs[i2]) +
                            std::abs(grid.ys[j1] - grid.ys[j2]);
        const double diff = std::abs(grid.f1.at(i1, j1) - grid.f1.at(i2, j2));
        if (dist == 0.0 || diff == 0.0) continue;  // no slope information
        const double lx = std::log(dist), ly = std::log(diff);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++used;
    }
    if (used < 16)
        raise(errc::insufficient_samples,
              "only " + std::to_string(used) + " usable pairs after exclusions");

    const double n = static_cast<double>(used);
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0)
        raise(errc::insufficient_samples, "degenerate pair distances");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;

    HolderEstimate est;
    est.exponent = std::clamp(slope, 1e-6, 1.0);
    est.prefactor = std::exp(intercept);
    est.pairs_used = used;
    return est;
}

}  // namespace chfis
