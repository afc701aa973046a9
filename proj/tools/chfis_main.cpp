// chfis: build coalescence hidden-variable fractal interpolation surfaces
// from dataset files, export sampled grids, and check the closed-form
// perturbation bounds against measured surface deviations.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "chfis/chfis.hpp"

namespace {

using nlohmann::json;

struct Reporter {
    std::ofstream out;
    bool enabled = false;

    void open(const std::string& path) {
        out.open(path, std::ios::binary | std::ios::trunc);
        if (!out) chfis::raise(chfis::errc::syntax_error, "cannot write '" + path + "'");
        enabled = true;
    }
    void emit(const json& j) {
        if (enabled) out << j.dump() << "\n";
    }
};

int depth_cap() {
    if (const char* env = std::getenv("CHFIS_MAX_DEPTH")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 0) return static_cast<int>(v);
        std::cerr << "warning: ignoring malformed CHFIS_MAX_DEPTH='" << env << "'\n";
    }
    return chfis::kDefaultMaxDepth;
}

struct ParamFlags {
    std::optional<double> alpha, beta, gamma;
};

/// Flags override in-file parameters; a per-cell matrix in the file combined
/// with a scalar flag for the same parameter is a conflict.
chfis::IfsParameters resolve_params(const chfis::ParsedDataset& pd,
                                    const ParamFlags& flags) {
    const std::size_t n = pd.data.cells_x(), m = pd.data.cells_y();
    auto pick = [&](const char* name, const std::optional<double>& flag,
                    const std::optional<double>& scalar,
                    const std::optional<chfis::Grid2>& matrix) -> chfis::Grid2 {
        if (flag) {
            if (matrix)
                chfis::raise(chfis::errc::syntax_error,
                             std::string("--") + name +
                                 " conflicts with the file's " + name +
                                 "_matrix section");
            return chfis::Grid2(n, m, *flag);
        }
        if (scalar) return chfis::Grid2(n, m, *scalar);
        if (matrix) return *matrix;
        chfis::raise(chfis::errc::syntax_error,
                     std::string(name) +
                         " is set neither in the file nor via --" + name);
    };
    chfis::Grid2 a = pick("alpha", flags.alpha, pd.alpha, pd.alpha_matrix);
    chfis::Grid2 b = pick("beta", flags.beta, pd.beta, pd.beta_matrix);
    chfis::Grid2 g = pick("gamma", flags.gamma, pd.gamma, pd.gamma_matrix);
    return chfis::IfsParameters::validate(std::move(a), std::move(b),
                                          std::move(g));
}

std::pair<std::size_t, std::size_t> parse_cell(const std::string& spec) {
    const auto comma = spec.find(',');
    if (comma == std::string::npos)
        chfis::raise(chfis::errc::syntax_error,
                     "--cell expects 'n,m', got '" + spec + "'");
    try {
        const std::size_t n = std::stoul(spec.substr(0, comma));
        const std::size_t m = std::stoul(spec.substr(comma + 1));
        return {n, m};
    } catch (const std::exception&) {
        chfis::raise(chfis::errc::syntax_error,
                     "--cell expects 'n,m', got '" + spec + "'");
    }
}

std::string fmt(double v) { return chfis::detail::fmt17(v); }

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        chfis::write_text_file(out_path, content);
}

int run(int argc, char** argv) {
    CLI::App app{"coalescence hidden-variable fractal interpolation surfaces"};
    app.require_subcommand(1);

    std::string data_path, base_path, pert_path, out_path, report_path;
    std::string cell_spec, kind = "z", format = "csv", grid_path;
    ParamFlags flags;
    int depth = 6;
    int eval_depth = chfis::kDefaultEvalDepth;
    double px = 0, py = 0, magnitude = 0.01, mbar = 1.3, delta = 1.0;
    std::uint64_t rng_seed = 1;

    auto add_params = [&](CLI::App* cmd) {
        cmd->add_option("--alpha", flags.alpha, "vertical scaling (|alpha| < 1)");
        cmd->add_option("--beta", flags.beta, "coupling (|beta| + |gamma| < 1)");
        cmd->add_option("--gamma", flags.gamma, "hidden scaling (|gamma| < 1)");
    };

    CLI::App* solve = app.add_subcommand("solve", "sample the surface on an address grid and write CSV");
    solve->add_option("--data", data_path, "dataset file")->required();
    add_params(solve);
    solve->add_option("--depth", depth, "address-grid refinement depth");
    solve->add_option("--out", out_path, "output CSV path (stdout if omitted)");
    solve->add_option("--report", report_path, "JSON-lines report path");

    CLI::App* eval = app.add_subcommand("eval", "evaluate the surface at one point");
    eval->add_option("--data", data_path, "dataset file")->required();
    add_params(eval);
    eval->add_option("--x", px, "x coordinate")->required();
    eval->add_option("--y", py, "y coordinate")->required();
    eval->add_option("--depth", eval_depth, "address expansion depth");
    eval->add_option("--report", report_path, "JSON-lines report path");

    CLI::App* coeffs = app.add_subcommand("coeffs", "print one cell's map coefficients");
    coeffs->add_option("--data", data_path, "dataset file")->required();
    add_params(coeffs);
    coeffs->add_option("--cell", cell_spec, "cell index 'n,m' (1-based)")->required();
    coeffs->add_option("--report", report_path, "JSON-lines report path");

    CLI::App* check = app.add_subcommand("check", "validate a dataset file and its parameters");
    check->add_option("--data", data_path, "dataset file")->required();
    add_params(check);

    CLI::App* bounds = app.add_subcommand("bounds", "closed-form perturbation bounds for a dataset pair");
    bounds->add_option("--base", base_path, "base dataset file")->required();
    bounds->add_option("--perturbed", pert_path, "perturbed dataset file")->required();
    add_params(bounds);
    bounds->add_option("--mbar", mbar, "surface modulus constant");
    bounds->add_option("--delta", delta, "surface modulus exponent in (0,1]");
    bounds->add_option("--report", report_path, "JSON-lines report path");

    CLI::App* verify = app.add_subcommand("verify", "compare measured deviations against the bounds");
    verify->add_option("--base", base_path, "base dataset file")->required();
    verify->add_option("--perturbed", pert_path, "perturbed dataset file")->required();
    add_params(verify);
    verify->add_option("--mbar", mbar, "surface modulus constant");
    verify->add_option("--delta", delta, "surface modulus exponent in (0,1]");
    verify->add_option("--depth", depth, "address-grid depth for the measurement");
    verify->add_option("--report", report_path, "JSON-lines report path");

    CLI::App* perturb = app.add_subcommand("perturb", "write a ratio-preserving perturbation of a dataset");
    perturb->add_option("--data", data_path, "dataset file")->required();
    perturb->add_option("--kind", kind, "x|y|z|t|all")->required();
    perturb->add_option("--magnitude", magnitude, "perturbation magnitude")->required();
    perturb->add_option("--rng-seed", rng_seed, "random seed")->required();
    perturb->add_option("--out", out_path, "output dataset path (stdout if omitted)");
    perturb->add_option("--report", report_path, "JSON-lines report path");

    CLI::App* exp = app.add_subcommand("export", "convert a solved grid CSV to csv or pgm");
    exp->add_option("--grid", grid_path, "grid CSV produced by solve")->required();
    exp->add_option("--format", format, "csv|pgm")->required();
    exp->add_option("--out", out_path, "output path (stdout if omitted)");
    exp->add_option("--report", report_path, "JSON-lines report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // flag/usage problems are input errors
    }

    Reporter rep;
    if (!report_path.empty()) rep.open(report_path);

    if (solve->parsed()) {
        const auto pd = chfis::load_dataset(data_path);
        const auto params = resolve_params(pd, flags);
        const auto model = chfis::build_model(pd.data, params);
        const auto grid = chfis::solve_surface(model, depth, depth_cap());
        write_or_print(out_path, chfis::write_grid_csv(grid));
        rep.emit({{"event", "solve"},
                  {"depth", depth},
                  {"samples_x", grid.xs.size()},
                  {"samples_y", grid.ys.size()},
                  {"out", out_path}});
        return 0;
    }

    if (eval->parsed()) {
        const auto pd = chfis::load_dataset(data_path);
        const auto params = resolve_params(pd, flags);
        const auto model = chfis::build_model(pd.data, params);
        const auto pe = chfis::eval_point(model, px, py, eval_depth);
        std::cout << "f1 " << fmt(pe.f1) << "\n"
                  << "f2 " << fmt(pe.f2) << "\n"
                  << "f1_err " << fmt(pe.f1_err) << "\n"
                  << "f2_err " << fmt(pe.f2_err) << "\n";
        rep.emit({{"event", "eval"},
                  {"x", px},
                  {"y", py},
                  {"depth", eval_depth},
                  {"f1", pe.f1},
                  {"f2", pe.f2}});
        return 0;
    }

    if (coeffs->parsed()) {
        const auto pd = chfis::load_dataset(data_path);
        const auto params = resolve_params(pd, flags);
        const auto model = chfis::build_model(pd.data, params);
        const auto [cn, cm] = parse_cell(cell_spec);
        const chfis::CellCoefficients& c = model.cell(cn, cm);
        std::cout << "e " << fmt(c.e) << "\nf " << fmt(c.f) << "\ng "
                  << fmt(c.g) << "\nk " << fmt(c.k) << "\ne~ " << fmt(c.et)
                  << "\nf~ " << fmt(c.ft) << "\ng~ " << fmt(c.gt) << "\nk~ "
                  << fmt(c.kt) << "\nz_eva " << fmt(c.z_eva) << "\nt_eva "
                  << fmt(c.t_eva) << "\n";
        rep.emit({{"event", "coeffs"},
                  {"cell", {cn, cm}},
                  {"e", c.e},
                  {"f", c.f},
                  {"g", c.g},
                  {"k", c.k},
                  {"e~", c.et},
                  {"f~", c.ft},
                  {"g~", c.gt},
                  {"k~", c.kt}});
        return 0;
    }

    if (check->parsed()) {
        const auto pd = chfis::load_dataset(data_path);
        std::cout << "dataset ok: " << pd.data.cells_x() << "x"
                  << pd.data.cells_y() << " cells\n";
        if (pd.has_any_params() || flags.alpha || flags.beta || flags.gamma) {
            resolve_params(pd, flags);
            std::cout << "parameters ok\n";
        }
        return 0;
    }

    if (bounds->parsed()) {
        const auto base = chfis::load_dataset(base_path);
        const auto pert = chfis::load_dataset(pert_path);
        const auto params = resolve_params(base, flags);
        const auto cfg = chfis::StabilityConfig::validate(mbar, delta);
        const bool axes_eq = base.data.x == pert.data.x && base.data.y == pert.data.y;
        const bool z_eq = base.data.z.v == pert.data.z.v;
        const bool t_eq = base.data.t.v == pert.data.t.v;

        auto print = [&](const char* name, double v) {
            std::cout << name << " " << fmt(v) << "\n";
            rep.emit({{"event", "bound"}, {"name", name}, {"value", v}});
        };
        if (z_eq && t_eq)
            print("bound_xy", chfis::bound_independent(base.data, pert.data, params, cfg));
        if (axes_eq && t_eq)
            print("bound_z", chfis::bound_dependent(base.data, pert.data, params));
        if (axes_eq && z_eq) {
            print("bound_t", chfis::bound_hidden(base.data, pert.data, params));
            print("bound_t_hidden_surface",
                  chfis::bound_hidden_surface(base.data, pert.data, params));
        }
        print("metric_d", chfis::perturbation_metric(base.data, pert.data, params, cfg));
        return 0;
    }

    if (verify->parsed()) {
        const auto base = chfis::load_dataset(base_path);
        const auto pert = chfis::load_dataset(pert_path);
        const auto params = resolve_params(base, flags);
        const auto cfg = chfis::StabilityConfig::validate(mbar, delta);
        const auto r = chfis::verify_stability(base.data, pert.data, params,
                                               cfg, depth, depth_cap());
        std::cout << "bound_xy " << fmt(r.bound_xy) << "\n"
                  << "bound_z " << fmt(r.bound_z) << "\n"
                  << "bound_t " << fmt(r.bound_t) << "\n"
                  << "bound_t_hidden_surface " << fmt(r.bound_t_hidden_surface) << "\n"
                  << "metric_d " << fmt(r.metric_d) << "\n"
                  << "empirical_sup_f1 " << fmt(r.empirical_sup_f1) << "\n"
                  << "empirical_sup_f2 " << fmt(r.empirical_sup_f2) << "\n"
                  << "max_xy_manhattan " << fmt(r.max_xy_manhattan) << "\n"
                  << "max_dz " << fmt(r.max_dz) << "\n"
                  << "max_dt " << fmt(r.max_dt) << "\n";
        rep.emit({{"event", "verify"},
                  {"bound_xy", r.bound_xy},
                  {"bound_z", r.bound_z},
                  {"bound_t", r.bound_t},
                  {"bound_t_hidden_surface", r.bound_t_hidden_surface},
                  {"metric_d", r.metric_d},
                  {"empirical_sup_f1", r.empirical_sup_f1},
                  {"empirical_sup_f2", r.empirical_sup_f2},
                  {"hard_violation", r.hard_violation},
                  {"metric_violation", r.metric_violation}});
        if (r.metric_violation)
            std::cerr << "warning: " << r.detail << "\n";
        if (r.hard_violation) {
            std::cerr << "error: stability bound violated: " << r.detail << "\n";
            return 2;
        }
        std::cout << "no violation\n";
        return 0;
    }

    if (perturb->parsed()) {
        const auto pd = chfis::load_dataset(data_path);
        const auto out = chfis::generate_perturbation(
            pd.data, chfis::perturb_kind_from_string(kind), magnitude, rng_seed);
        std::optional<chfis::IfsParameters> params;
        if (pd.has_any_params() || flags.alpha || flags.beta || flags.gamma)
            params = resolve_params(pd, flags);
        write_or_print(out_path,
                       chfis::write_dataset(out, params ? &*params : nullptr));
        rep.emit({{"event", "perturb"},
                  {"kind", kind},
                  {"magnitude", magnitude},
                  {"rng_seed", rng_seed},
                  {"out", out_path}});
        return 0;
    }

    if (exp->parsed()) {
        const auto grid = chfis::parse_grid_csv(chfis::read_text_file(grid_path));
        std::string content;
        if (format == "csv")
            content = chfis::write_grid_csv(grid);
        else if (format == "pgm")
            content = chfis::write_heightmap_pgm(grid);
        else
            chfis::raise(chfis::errc::syntax_error,
                         "--format must be csv or pgm, got '" + format + "'");
        write_or_print(out_path, content);
        rep.emit({{"event", "export"}, {"format", format}, {"out", out_path}});
        return 0;
    }

    return 3;  // unreachable: require_subcommand(1)
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const chfis::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
