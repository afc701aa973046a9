#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chfis/dataset.hpp"
#include "chfis/errors.hpp"
#include "chfis/model.hpp"
#include "chfis/parameters.hpp"
#include "chfis/random.hpp"
#include "chfis/rescale.hpp"
#include "chfis/solver.hpp"

namespace chfis {

namespace detail {

struct UniformTriple {
    double a, b, g;  // |alpha|, |beta|, |gamma|
};

inline UniformTriple require_uniform(const IfsParameters& p) {
    if (!p.is_uniform())
        raise(errc::non_uniform_parameters,
              "closed-form bounds require one (alpha, beta, gamma) triple for "
              "all cells");
    return {std::abs(p.alpha.v.front()), std::abs(p.beta.v.front()),
            std::abs(p.gamma.v.front())};
}

inline void require_same_grid(const GeneralizedDataset& base,
                              const GeneralizedDataset& pert) {
    if (base.x.size() != pert.x.size() || base.y.size() != pert.y.size())
        raise(errc::shape_mismatch, "datasets have different grid sizes");
}

inline void require_equal_axes(const GeneralizedDataset& base,
                               const GeneralizedDataset& pert) {
    require_same_grid(base, pert);
    if (base.x != pert.x || base.y != pert.y)
        raise(errc::axes_differ, "datasets must share identical axes");
}

inline double max_abs_diff(const Grid2& a, const Grid2& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i)
        m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

/// max over node pairs of |x_n - x*_n| + |y_m - y*_m|.
inline double max_node_manhattan(const GeneralizedDataset& base,
                                 const GeneralizedDataset& pert) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < base.x.size(); ++i)
        mx = std::max(mx, std::abs(base.x[i] - pert.x[i]));
    for (std::size_t j = 0; j < base.y.size(); ++j)
        my = std::max(my, std::abs(base.y[j] - pert.y[j]));
    return mx + my;
}

inline double term_independent(const UniformTriple& u,
                               const StabilityConfig& cfg, double manhattan) {
    const double factor =
        2.0 * u.b * u.g / ((1.0 - u.a) * (1.0 - u.g)) + (1.0 + u.a) / (1.0 - u.a);
    return cfg.m_bar * factor * std::pow(manhattan, cfg.delta);
}

inline double term_dependent(const UniformTriple& u, double max_dz) {
    return 4.0 * (1.0 + u.a) / (1.0 - u.a) * max_dz;
}

inline double term_hidden(const UniformTriple& u, double max_dt) {
    return 8.0 * u.b / ((1.0 - u.a) * (1.0 - u.g)) * max_dt;
}

inline double term_hidden_surface(const UniformTriple& u, double max_dt) {
    return 4.0 * (1.0 + u.g) / (1.0 - u.g) * max_dt;
}

}  // namespace detail

/// Closed-form bound on sup|F1 - G1| for a perturbation of the independent
/// variables (axes ratio-compatible, values unchanged).
inline double bound_independent(const GeneralizedDataset& base,
                                const GeneralizedDataset& pert,
                                const IfsParameters& params,
                                const StabilityConfig& cfg) {
    const auto u = detail::require_uniform(params);
    const RatioCheck check = check_ratio_invariance(base, pert);
    if (!check.ok)
        raise(errc::ratio_condition_violated,
              "axis perturbation violates the invariance-of-ratio condition");
    return detail::term_independent(u, cfg, detail::max_node_manhattan(base, pert));
}

/// Closed-form bound on sup|F1 - G1| for a perturbation of the dependent
/// values (axes and hidden values unchanged). Carries no free constant.
inline double bound_dependent(const GeneralizedDataset& base,
                              const GeneralizedDataset& pert,
                              const IfsParameters& params) {
    const auto u = detail::require_uniform(params);
    detail::require_equal_axes(base, pert);
    return detail::term_dependent(u, detail::max_abs_diff(base.z, pert.z));
}

/// Closed-form bound on sup|F1 - G1| for a perturbation of the hidden
/// values (axes and dependent values unchanged). Carries no free constant.
inline double bound_hidden(const GeneralizedDataset& base,
                           const GeneralizedDataset& pert,
                           const IfsParameters& params) {
    const auto u = detail::require_uniform(params);
    detail::require_equal_axes(base, pert);
    return detail::term_hidden(u, detail::max_abs_diff(base.t, pert.t));
}

/// Closed-form bound on sup|F2 - G2| (the self-affine hidden surface) for a
/// perturbation of the hidden values.
inline double bound_hidden_surface(const GeneralizedDataset& base,
                                   const GeneralizedDataset& pert,
                                   const IfsParameters& params) {
    const auto u = detail::require_uniform(params);
    detail::require_equal_axes(base, pert);
    return detail::term_hidden_surface(u, detail::max_abs_diff(base.t, pert.t));
}

/// Dataset metric: the three perturbation terms summed. Bounds sup|F1 - G1|
/// for simultaneous perturbation of all variables.
inline double perturbation_metric(const GeneralizedDataset& base,
                                  const GeneralizedDataset& pert,
                                  const IfsParameters& params,
                                  const StabilityConfig& cfg) {
    const auto u = detail::require_uniform(params);
    detail::require_same_grid(base, pert);
    const RatioCheck check = check_ratio_invariance(base, pert);
    if (!check.ok)
        raise(errc::ratio_condition_violated,
              "datasets violate the invariance-of-ratio condition");
    return detail::term_hidden(u, detail::max_abs_diff(base.t, pert.t)) +
           detail::term_dependent(u, detail::max_abs_diff(base.z, pert.z)) +
           detail::term_independent(u, cfg, detail::max_node_manhattan(base, pert));
}

struct SupDiff {
    double f1 = 0;
    double f2 = 0;
};

/// Measures sup|F1 - G1 o R| and sup|F2 - G2 o R| over modelF's depth-L
/// address grid. With a canonical rescale (or identity) the R-images are
/// modelG's own address-grid points index-for-index and values are read off
/// modelG's solved grid; images that miss it fall back to eval_point.
inline SupDiff empirical_sup_diff(const IfsModel& model_f,
                                  const IfsModel& model_g,
                                  const std::optional<RescaleMap>& rescale,
                                  int depth,
                                  int max_depth = kDefaultMaxDepth) {
    if (model_f.cells_x() != model_g.cells_x() ||
        model_f.cells_y() != model_g.cells_y())
        raise(errc::domain_mismatch, "models have different cell layouts");

    const SurfaceGrid gf = solve_surface(model_f, depth, max_depth);
    const SurfaceGrid gg = solve_surface(model_g, depth, max_depth);

    const double span = std::max({1.0, std::abs(gg.xs.back() - gg.xs.front()),
                                  std::abs(gg.ys.back() - gg.ys.front())});
    const double tol = 1e-9 * span;

    const GeneralizedDataset& dg = model_g.data();
    auto image_x = [&](double u) { return rescale ? rescale->forward({u, dg.y0()}).x : u; };
    auto image_y = [&](double v) { return rescale ? rescale->forward({dg.x0(), v}).y : v; };

    std::vector<double> ix(gf.xs.size()), iy(gf.ys.size());
    std::vector<bool> on_grid_x(gf.xs.size()), on_grid_y(gf.ys.size());
    for (std::size_t i = 0; i < gf.xs.size(); ++i) {
        ix[i] = image_x(gf.xs[i]);
        on_grid_x[i] = std::abs(ix[i] - gg.xs[i]) <= tol;
    }
    for (std::size_t j = 0; j < gf.ys.size(); ++j) {
        iy[j] = image_y(gf.ys[j]);
        on_grid_y[j] = std::abs(iy[j] - gg.ys[j]) <= tol;
    }

    SupDiff sup;
    for (std::size_t i = 0; i < gf.xs.size(); ++i) {
        for (std::size_t j = 0; j < gf.ys.size(); ++j) {
            double g1, g2;
            if (on_grid_x[i] && on_grid_y[j]) {
                g1 = gg.f1.at(i, j);
                g2 = gg.f2.at(i, j);
            } else {
                const double u = std::clamp(ix[i], dg.x0(), dg.xN());
                const double v = std::clamp(iy[j], dg.y0(), dg.yM());
                if (std::abs(u - ix[i]) > tol || std::abs(v - iy[j]) > tol)
                    raise(errc::domain_mismatch,
                          "rescale image leaves the target domain");
                const PointEval pe = eval_point(model_g, u, v);
                g1 = pe.f1;
                g2 = pe.f2;
            }
            sup.f1 = std::max(sup.f1, std::abs(gf.f1.at(i, j) - g1));
            sup.f2 = std::max(sup.f2, std::abs(gf.f2.at(i, j) - g2));
        }
    }
    return sup;
}

/// The closed-form bounds, the dataset metric, the measured deviations and
/// the violation flags for one base/perturbation pair.
struct StabilityReport {
    double bound_xy = 0;                // independent-variable term
    double bound_z = 0;                 // dependent-variable term
    double bound_t = 0;                 // hidden-variable term (first surface)
    double bound_t_hidden_surface = 0;  // hidden-variable term (second surface)
    double metric_d = 0;                // bound_t + bound_z + bound_xy
    double empirical_sup_f1 = 0;
    double empirical_sup_f2 = 0;
    double max_xy_manhattan = 0;
    double max_dz = 0;
    double max_dt = 0;
    // Hard violations break a bound with no free constant; the metric check
    // depends on the configured constants and is warning-level.
    bool hard_violation = false;
    bool metric_violation = false;
    std::string detail;
};

inline StabilityReport verify_stability(const GeneralizedDataset& base,
                                        const GeneralizedDataset& pert,
                                        const IfsParameters& params,
                                        const StabilityConfig& cfg, int depth,
                                        int max_depth = kDefaultMaxDepth) {
    const auto u = detail::require_uniform(params);
    detail::require_same_grid(base, pert);
    const RatioCheck check = check_ratio_invariance(base, pert);
    if (!check.ok)
        raise(errc::ratio_condition_violated,
              "datasets violate the invariance-of-ratio condition");

    StabilityReport rep;
    rep.max_xy_manhattan = detail::max_node_manhattan(base, pert);
    rep.max_dz = detail::max_abs_diff(base.z, pert.z);
    rep.max_dt = detail::max_abs_diff(base.t, pert.t);
    rep.bound_xy = detail::term_independent(u, cfg, rep.max_xy_manhattan);
    rep.bound_z = detail::term_dependent(u, rep.max_dz);
    rep.bound_t = detail::term_hidden(u, rep.max_dt);
    rep.bound_t_hidden_surface = detail::term_hidden_surface(u, rep.max_dt);
    rep.metric_d = rep.bound_t + rep.bound_z + rep.bound_xy;

    const IfsModel model_f = build_model(base, params);
    const IfsModel model_g = build_model(pert, params);
    const bool axes_eq = base.x == pert.x && base.y == pert.y;
    std::optional<RescaleMap> rescale;
    if (!axes_eq) rescale = build_rescale(base, pert);
    const SupDiff sup = empirical_sup_diff(model_f, model_g, rescale, depth, max_depth);
    rep.empirical_sup_f1 = sup.f1;
    rep.empirical_sup_f2 = sup.f2;

    constexpr double kSlack = 1e-9;
    const bool z_eq = base.z.v == pert.z.v;
    const bool t_eq = base.t.v == pert.t.v;
    if (axes_eq && t_eq && sup.f1 > rep.bound_z + kSlack) {
        rep.hard_violation = true;
        rep.detail += "sup|F1-G1| exceeds the dependent-variable bound; ";
    }
    if (axes_eq && z_eq && sup.f1 > rep.bound_t + kSlack) {
        rep.hard_violation = true;
        rep.detail += "sup|F1-G1| exceeds the hidden-variable bound; ";
    }
    if (axes_eq && sup.f2 > rep.bound_t_hidden_surface + kSlack) {
        rep.hard_violation = true;
        rep.detail += "sup|F2-G2| exceeds the hidden-surface bound; ";
    }
    if (sup.f1 > rep.metric_d + kSlack) {
        rep.metric_violation = true;
        rep.detail +=
            "sup|F1-G1| exceeds the dataset metric (check m_bar/delta calibration); ";
    }
    return rep;
}

enum class PerturbKind { x, y, z, t, all };

inline PerturbKind perturb_kind_from_string(const std::string& s) {
    if (s == "x") return PerturbKind::x;
    if (s == "y") return PerturbKind::y;
    if (s == "z") return PerturbKind::z;
    if (s == "t") return PerturbKind::t;
    if (s == "all") return PerturbKind::all;
    raise(errc::syntax_error, "unknown perturbation kind '" + s + "'");
}

namespace detail {

/// Random affine reparametrization with endpoint displacement <= magnitude.
/// Affine images are the only axis family that preserves the ratio
/// condition, so the output always passes check_ratio_invariance.
inline std::vector<double> perturb_axis_affine(const std::vector<double>& a,
                                               double magnitude,
                                               std::mt19937_64& rng,
                                               const std::string& name) {
    const double d0 = uniform_double(rng, -magnitude, magnitude);
    const double dN = uniform_double(rng, -magnitude, magnitude);
    const double lo = a.front() + d0;
    const double hi = a.back() + dN;
    if (!(hi > lo))
        raise(errc::magnitude_too_large,
              name + " axis would collapse under magnitude " +
                  std::to_string(magnitude));
    const double scale = (hi - lo) / (a.back() - a.front());
    std::vector<double> out(a.size());
    out.front() = lo;
    out.back() = hi;
    for (std::size_t i = 1; i + 1 < a.size(); ++i)
        out[i] = lo + (a[i] - a.front()) * scale;
    return out;
}

inline Grid2 perturb_values(const Grid2& g, double magnitude,
                            std::mt19937_64& rng) {
    Grid2 out = g;
    for (double& v : out.v) v += uniform_double(rng, -magnitude, magnitude);
    return out;
}

}  // namespace detail

/// Draws a ratio-preserving perturbation of the dataset: uniform node noise
/// for value kinds, a random affine axis reparametrization for coordinate
/// kinds. Deterministic for a fixed seed; draw order is x, y, z, t.
inline GeneralizedDataset generate_perturbation(const GeneralizedDataset& base,
                                                PerturbKind kind,
                                                double magnitude,
                                                std::uint64_t rng_seed) {
    if (!(magnitude > 0.0) || !std::isfinite(magnitude))
        raise(errc::magnitude_too_large, "magnitude must be a positive real");
    std::mt19937_64 rng(rng_seed);
    std::vector<double> xs = base.x;
    std::vector<double> ys = base.y;
    Grid2 zs = base.z;
    Grid2 ts = base.t;
    if (kind == PerturbKind::x || kind == PerturbKind::all)
        xs = detail::perturb_axis_affine(base.x, magnitude, rng, "x");
    if (kind == PerturbKind::y || kind == PerturbKind::all)
        ys = detail::perturb_axis_affine(base.y, magnitude, rng, "y");
    if (kind == PerturbKind::z || kind == PerturbKind::all)
        zs = detail::perturb_values(base.z, magnitude, rng);
    if (kind == PerturbKind::t || kind == PerturbKind::all)
        ts = detail::perturb_values(base.t, magnitude, rng);
    return GeneralizedDataset::validate(std::move(xs), std::move(ys),
                                        std::move(zs), std::move(ts));
}

}  // namespace chfis
