// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chfis/chfis.hpp"

namespace fs = std::filesystem;
using namespace chfis;

namespace {

int g_failed = 0;

struct Check {
    std::vector<std::string> problems;

    void require(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
    void require_near(double got, double want, double tol,
                      const std::string& what) {
        if (!(std::abs(got - want) <= tol)) {
            std::ostringstream os;
            os << what << ": got " << got << ", want " << want << " +- " << tol;
            problems.push_back(os.str());
        }
    }
    void require_le(double got, double limit, const std::string& what) {
        if (!(got <= limit)) {
            std::ostringstream os;
            os << what << ": " << got << " > " << limit;
            problems.push_back(os.str());
        }
    }
};

void criterion(int id, const std::string& label, double time_limit_s,
               const std::function<void(Check&)>& body) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.problems.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (time_limit_s > 0 && elapsed > time_limit_s) {
        std::ostringstream os;
        os << "runtime " << elapsed << " s exceeds " << time_limit_s << " s";
        check.problems.push_back(os.str());
    }
    const bool pass = check.problems.empty();
    if (!pass) ++g_failed;
    std::printf("[%2d] %-58s %s (%.2f s)\n", id, label.c_str(),
                pass ? "PASS" : "FAIL", elapsed);
    for (const std::string& p : check.problems)
        std::printf("     - %s\n", p.c_str());
}

std::string data_file(const std::string& name) {
    return std::string(CHFIS_DATA_DIR) + "/" + name;
}

GeneralizedDataset load_case(const std::string& name) {
    return load_dataset(data_file(name)).data;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const StabilityConfig kCfg{1.3, 1.0};

GeneralizedDataset table1() { return load_case("table1.chfis"); }

IfsParameters sample_params() {
    return IfsParameters::uniform(0.7, 0.4, 0.5, 2, 2);
}

void run_all() {
    criterion(1, "closed-form bounds reproduce the reference error values", 1.0,
              [](Check& c) {
                  const auto base = table1();
                  const auto params = sample_params();
                  c.require_near(
                      bound_independent(base, load_case("case_ia.chfis"),
                                        params, kCfg),
                      0.0217, 5e-5, "independent bound, small case");
                  c.require_near(
                      bound_independent(base, load_case("case_ib.chfis"),
                                        params, kCfg),
                      2.1667, 5e-5, "independent bound, large case");
                  c.require_near(
                      bound_dependent(base, load_case("case_iia.chfis"), params),
                      0.0227, 5e-5, "dependent bound, small case");
                  c.require_near(
                      bound_dependent(base, load_case("case_iib.chfis"), params),
                      2.2667, 5e-5, "dependent bound, large case");
                  c.require_near(
                      bound_hidden(base, load_case("case_iiia.chfis"), params),
                      0.0213, 5e-5, "hidden bound, small case");
                  c.require_near(
                      bound_hidden(base, load_case("case_iiib.chfis"), params),
                      2.1333, 5e-5, "hidden bound, large case");
              });

    criterion(2, "dataset metric totals for the combined perturbations", 1.0,
              [](Check& c) {
                  const auto base = table1();
                  const auto params = sample_params();
                  c.require_near(
                      perturbation_metric(base, load_case("case_all_a.chfis"),
                                          params, kCfg),
                      0.0657, 5e-5, "combined small-case metric");
                  c.require_near(
                      perturbation_metric(base, load_case("case_all_b.chfis"),
                                          params, kCfg),
                      6.5667, 5e-5, "combined large-case metric");
              });

    criterion(3, "depth-8 address grid interpolates every node", 10.0,
              [](Check& c) {
                  const auto model = build_model(table1(), sample_params());
                  const SurfaceGrid g = solve_surface(model, 8);
                  const GeneralizedDataset& d = model.data();
                  const std::size_t step = (g.xs.size() - 1) / 2;
                  for (std::size_t i = 0; i < 3; ++i) {
                      for (std::size_t j = 0; j < 3; ++j) {
                          c.require(g.xs[i * step] == d.x[i] &&
                                        g.ys[j * step] == d.y[j],
                                    "node coordinates present in the grid");
                          c.require_le(
                              std::abs(g.f1.at(i * step, j * step) - d.z.at(i, j)),
                              1e-9, "f1 node residual");
                          c.require_le(
                              std::abs(g.f2.at(i * step, j * step) - d.t.at(i, j)),
                              1e-9, "f2 node residual");
                      }
                  }
              });

    criterion(4, "corner conditions hold on 200 randomized datasets", 30.0,
              [](Check& c) {
                  std::mt19937_64 rng(20250101);
                  for (int trial = 0; trial < 200; ++trial) {
                      const std::size_t nc = 1 + rng() % 4, mc = 1 + rng() % 4;
                      std::vector<double> xs(nc + 1), ys(mc + 1);
                      for (std::size_t i = 0; i <= nc; ++i)
                          xs[i] = static_cast<double>(i) +
                                  (i ? uniform_double(rng, -0.3, 0.3) : 0.0);
                      for (std::size_t j = 0; j <= mc; ++j)
                          ys[j] = 2.0 * static_cast<double>(j) +
                                  (j ? uniform_double(rng, -0.5, 0.5) : 0.0);
                      Grid2 zs(nc + 1, mc + 1), ts(nc + 1, mc + 1);
                      for (double& v : zs.v) v = uniform_double(rng, -1, 1);
                      for (double& v : ts.v) v = uniform_double(rng, -1, 1);
                      Grid2 a(nc, mc), b(nc, mc), g(nc, mc);
                      for (std::size_t k = 0; k < a.v.size(); ++k) {
                          a.v[k] = uniform_double(rng, -0.9, 0.9);
                          g.v[k] = uniform_double(rng, -0.9, 0.9);
                          const double room = 0.95 - std::abs(g.v[k]);
                          b.v[k] = uniform_double(rng, -room, room);
                      }
                      const auto model = build_model(
                          GeneralizedDataset::validate(xs, ys, zs, ts),
                          IfsParameters::validate(a, b, g));
                      for (std::size_t n = 1; n <= nc; ++n) {
                          for (std::size_t m = 1; m <= mc; ++m) {
                              for (const CornerResidual& r :
                                   verify_joinup(model, n, m)) {
                                  c.require_le(std::abs(r.dz), 1e-12,
                                               "corner residual in f1");
                                  c.require_le(std::abs(r.dt), 1e-12,
                                               "corner residual in f2");
                              }
                          }
                      }
                  }
              });

    criterion(5, "measured deviations respect the parameter-free bounds", 120.0,
              [](Check& c) {
                  const auto base = table1();
                  const auto params = sample_params();
                  const auto model_f = build_model(base, params);
                  const double mags[3] = {0.001, 0.01, 0.1};
                  int violations = 0;
                  for (int k = 0; k < 100; ++k) {
                      const double mag = mags[k % 3];
                      const auto pz = generate_perturbation(
                          base, PerturbKind::z, mag, 10000 + k);
                      const SupDiff sz = empirical_sup_diff(
                          model_f, build_model(pz, params), std::nullopt, 6);
                      if (sz.f1 > bound_dependent(base, pz, params) + 1e-9)
                          ++violations;
                      if (sz.f2 > 1e-9) ++violations;

                      const auto pt = generate_perturbation(
                          base, PerturbKind::t, mag, 20000 + k);
                      const SupDiff st = empirical_sup_diff(
                          model_f, build_model(pt, params), std::nullopt, 6);
                      if (st.f1 > bound_hidden(base, pt, params) + 1e-9)
                          ++violations;
                      if (st.f2 > bound_hidden_surface(base, pt, params) + 1e-9)
                          ++violations;
                  }
                  c.require(violations == 0,
                            std::to_string(violations) + " bound violations");
              });

    criterion(6, "axis rescale equivalence of the sampled surfaces", 60.0,
              [](Check& c) {
                  const auto base = table1();
                  const auto params = sample_params();
                  const auto model_f = build_model(base, params);
                  for (int k = 0; k < 50; ++k) {
                      auto pert = generate_perturbation(base, PerturbKind::x,
                                                        0.08, 30000 + k);
                      pert = generate_perturbation(pert, PerturbKind::y, 0.08,
                                                   40000 + k);
                      const auto model_g = build_model(pert, params);
                      const RescaleMap r = build_rescale(base, pert);
                      const SupDiff sup =
                          empirical_sup_diff(model_f, model_g, r, 6);
                      c.require_le(sup.f1, 1e-9, "sup|F1 - G1 o R|");
                      c.require_le(sup.f2, 1e-9, "sup|F2 - G2 o R|");
                  }
              });

    criterion(7, "fixed-point sweeps contract at the map rates", 30.0,
              [](Check& c) {
                  const auto model = build_model(table1(), sample_params());
                  const SweepTrace t = solve_surface_sweeps(model, 4, 20, 20);
                  // below the last-ulp flicker of the update arithmetic the
                  // ratio carries no information
                  const double noise = 64 * std::numeric_limits<double>::epsilon();
                  for (std::size_t k = 1; k < t.f2_deltas.size(); ++k) {
                      if (t.f2_deltas[k - 1] > noise)
                          c.require_le(t.f2_deltas[k],
                                       t.f2_deltas[k - 1] * (0.5 + 1e-12) + noise,
                                       "stage-1 sweep " + std::to_string(k));
                      else
                          c.require_le(t.f2_deltas[k], noise,
                                       "stage-1 sweep " + std::to_string(k));
                  }
                  for (std::size_t k = 1; k < t.f1_deltas.size(); ++k) {
                      if (t.f1_deltas[k - 1] > noise)
                          c.require_le(t.f1_deltas[k],
                                       t.f1_deltas[k - 1] * (0.7 + 1e-12) + noise,
                                       "stage-2 sweep " + std::to_string(k));
                      else
                          c.require_le(t.f1_deltas[k], noise,
                                       "stage-2 sweep " + std::to_string(k));
                  }
              });

    criterion(8, "hidden and visible surfaces coalesce in the degenerate case",
              30.0, [](Check& c) {
                  const auto base = table1();
                  const auto d = GeneralizedDataset::validate(base.x, base.y,
                                                              base.z, base.z);
                  const auto model = build_model(
                      d, IfsParameters::uniform(0.7, 0.0, 0.7, 2, 2));
                  const SurfaceGrid g = solve_surface(model, 8);
                  double sup = 0;
                  for (std::size_t k = 0; k < g.f1.v.size(); ++k)
                      sup = std::max(sup, std::abs(g.f1.v[k] - g.f2.v[k]));
                  c.require_le(sup, 1e-12, "max|f1 - f2| over the depth-8 grid");
              });

    criterion(9, "solve and export are byte deterministic", 60.0, [](Check& c) {
        const fs::path dir = fs::temp_directory_path() / "chfis_acceptance";
        fs::create_directories(dir);
        auto run = [&](const std::string& args) {
            const std::string cmd = std::string(CHFIS_CLI_PATH) + " " + args +
                                    " > /dev/null 2>&1";
            return std::system(cmd.c_str());
        };
        const std::string c1 = (dir / "a.csv").string();
        const std::string c2 = (dir / "b.csv").string();
        const std::string solve_args =
            "solve --data " + data_file("table1.chfis") + " --depth 6 --out ";
        c.require(run(solve_args + c1) == 0, "first solve run");
        c.require(run(solve_args + c2) == 0, "second solve run");
        c.require(!slurp(c1).empty() && slurp(c1) == slurp(c2),
                  "solve outputs byte-identical");
        const std::string p1 = (dir / "a.pgm").string();
        const std::string p2 = (dir / "b.pgm").string();
        c.require(run("export --grid " + c1 + " --format pgm --out " + p1) == 0,
                  "first export run");
        c.require(run("export --grid " + c2 + " --format pgm --out " + p2) == 0,
                  "second export run");
        c.require(!slurp(p1).empty() && slurp(p1) == slurp(p2),
                  "export outputs byte-identical");
        fs::remove_all(dir);
    });

    criterion(10, "roughness exponent: diagnostic range and smooth limit", 30.0,
              [](Check& c) {
                  const auto smooth = build_model(
                      table1(), IfsParameters::uniform(0.0, 0.0, 0.0, 2, 2));
                  const HolderEstimate flat =
                      estimate_holder(solve_surface(smooth, 5), 4000, 99);
                  c.require_near(flat.exponent, 1.0, 0.05,
                                 "smooth-limit exponent");
                  const auto fractal = build_model(table1(), sample_params());
                  const HolderEstimate rough =
                      estimate_holder(solve_surface(fractal, 5), 4000, 99);
                  c.require(rough.exponent > 0.0 && rough.exponent <= 1.0,
                            "fractal exponent lies in (0, 1]");
              });
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    run_all();
    if (g_failed == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failed);
    return g_failed == 0 ? 0 : 1;
}
