#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "common.hpp"

namespace fs = std::filesystem;
using chfis_test::data_path;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / "chfis_cli_test";
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CliResult run(const std::string& args) {
        const fs::path out = dir_ / "stdout.txt";
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = std::string(CHFIS_CLI_PATH) + " " + args +
                                " > " + out.string() + " 2> " + err.string();
        const int raw = std::system(cmd.c_str());
        CliResult r;
        r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    std::string tmp(const std::string& name) { return (dir_ / name).string(); }

    static double value_of(const std::string& text, const std::string& key) {
        std::istringstream is(text);
        std::string k;
        double v;
        while (is >> k >> v)
            if (k == key) return v;
        ADD_FAILURE() << "key '" << key << "' not found in:\n" << text;
        return 0.0;
    }

    fs::path dir_;
};

TEST_F(CliTest, SolveWritesCsv) {
    const auto r = run("solve --data " + data_path("table1.chfis") +
                       " --alpha 0.7 --beta 0.4 --gamma 0.5 --depth 3 --out " +
                       tmp("g.csv"));
    EXPECT_EQ(r.exit_code, 0) << r.err;
    const std::string csv = slurp(tmp("g.csv"));
    EXPECT_EQ(csv.rfind("x,y,f1,f2\n", 0), 0u);
    const chfis::SurfaceGrid grid = chfis::parse_grid_csv(csv);
    EXPECT_EQ(grid.xs.size(), 17u);
}

TEST_F(CliTest, SolveUsesFileParameters) {
    const auto r = run("solve --data " + data_path("table1.chfis") +
                       " --depth 1 --out " + tmp("g.csv"));
    EXPECT_EQ(r.exit_code, 0) << r.err;
    const chfis::SurfaceGrid grid = chfis::parse_grid_csv(slurp(tmp("g.csv")));
    EXPECT_NEAR(grid.f1.at(3, 3), 0.4925, 1e-12);
}

TEST_F(CliTest, EvalPrintsPointValues) {
    const auto r = run("eval --data " + data_path("table1.chfis") +
                       " --x 1.5 --y 1.5");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NEAR(value_of(r.out, "f1"), 0.4925, 1e-12);
    EXPECT_NEAR(value_of(r.out, "f2"), 0.8625, 1e-12);
}

TEST_F(CliTest, CoeffsPrintsCellCoefficients) {
    const auto r = run("coeffs --data " + data_path("table1.chfis") +
                       " --cell 1,1");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NEAR(value_of(r.out, "e"), -0.035, 1e-12);
    EXPECT_NEAR(value_of(r.out, "k~"), 0.15, 1e-12);
}

TEST_F(CliTest, CheckRejectsBadParameters) {
    const auto r = run("check --data " + data_path("table1.chfis") +
                       " --beta 0.6 --gamma 0.5");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("ContractionViolated"), std::string::npos);
}

TEST_F(CliTest, CheckRejectsMalformedFile) {
    const std::string bad = tmp("bad.chfis");
    chfis::write_text_file(bad, "chfis-v1\nnx 2\nny 2\nx 0 1 2\ny 0 1 2\nz 1 2 3 4 5 6 7 8\nt 1 2 3 4 5 6 7 8 9\n");
    const auto r = run("check --data " + bad);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("ShapeMismatch"), std::string::npos);
    EXPECT_NE(r.err.find("'z'"), std::string::npos);
}

TEST_F(CliTest, BoundsHiddenCase) {
    const auto r = run("bounds --base " + data_path("table1.chfis") +
                       " --perturbed " + data_path("case_iiib.chfis") +
                       " --alpha 0.7 --beta 0.4 --gamma 0.5");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NEAR(value_of(r.out, "bound_t"), 2.1333, 5e-5);
    EXPECT_NEAR(value_of(r.out, "metric_d"), 2.1333, 5e-5);
    // t changed, so the dependent-variable bound does not apply
    EXPECT_EQ(r.out.find("bound_z"), std::string::npos);
}

TEST_F(CliTest, BoundsCombinedCaseMetric) {
    const auto r = run("bounds --base " + data_path("table1.chfis") +
                       " --perturbed " + data_path("case_all_a.chfis"));
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NEAR(value_of(r.out, "metric_d"), 0.0657, 5e-5);
    EXPECT_EQ(r.out.find("bound_xy"), std::string::npos);
}

TEST_F(CliTest, VerifyPassesAndReports) {
    const std::string report = tmp("report.jsonl");
    const auto r = run("verify --base " + data_path("table1.chfis") +
                       " --perturbed " + data_path("case_iia.chfis") +
                       " --depth 5 --report " + report);
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("no violation"), std::string::npos);
    const std::string rep = slurp(report);
    EXPECT_NE(rep.find("\"event\":\"verify\""), std::string::npos);
    EXPECT_NE(rep.find("\"hard_violation\":false"), std::string::npos);
}

TEST_F(CliTest, PerturbIsDeterministic) {
    const std::string a = tmp("a.chfis"), b = tmp("b.chfis");
    const std::string args = "perturb --data " + data_path("table1.chfis") +
                             " --kind z --magnitude 0.05 --rng-seed 7 --out ";
    EXPECT_EQ(run(args + a).exit_code, 0);
    EXPECT_EQ(run(args + b).exit_code, 0);
    const std::string ba = slurp(a), bb = slurp(b);
    EXPECT_FALSE(ba.empty());
    EXPECT_EQ(ba, bb);
    // output parses and stays within the magnitude
    const chfis::ParsedDataset pd = chfis::parse_dataset(ba);
    double max_dz = 0;
    const auto base = chfis_test::table1();
    for (std::size_t k = 0; k < 9; ++k)
        max_dz = std::max(max_dz, std::abs(pd.data.z.v[k] - base.z.v[k]));
    EXPECT_LE(max_dz, 0.05);
    EXPECT_GT(max_dz, 0.0);
}

TEST_F(CliTest, ExportConvertsCsvToPgm) {
    const std::string csv = tmp("g.csv"), pgm = tmp("g.pgm");
    ASSERT_EQ(run("solve --data " + data_path("table1.chfis") +
                  " --depth 0 --out " + csv)
                  .exit_code,
              0);
    const auto r = run("export --grid " + csv + " --format pgm --out " + pgm);
    EXPECT_EQ(r.exit_code, 0) << r.err;
    const std::string bytes = slurp(pgm);
    EXPECT_EQ(bytes.rfind("P2\n3 3\n255\n", 0), 0u);
}

TEST_F(CliTest, SolveAndExportAreByteDeterministic) {
    const std::string c1 = tmp("c1.csv"), c2 = tmp("c2.csv");
    const std::string p1 = tmp("p1.pgm"), p2 = tmp("p2.pgm");
    const std::string solve_args = "solve --data " + data_path("table1.chfis") +
                                   " --depth 4 --out ";
    ASSERT_EQ(run(solve_args + c1).exit_code, 0);
    ASSERT_EQ(run(solve_args + c2).exit_code, 0);
    EXPECT_EQ(slurp(c1), slurp(c2));
    ASSERT_EQ(run("export --grid " + c1 + " --format pgm --out " + p1).exit_code, 0);
    ASSERT_EQ(run("export --grid " + c2 + " --format pgm --out " + p2).exit_code, 0);
    EXPECT_EQ(slurp(p1), slurp(p2));
}

TEST_F(CliTest, ReportsAreByteDeterministic) {
    const std::string r1 = tmp("r1.jsonl"), r2 = tmp("r2.jsonl");
    const std::string args = "verify --base " + data_path("table1.chfis") +
                             " --perturbed " + data_path("case_iiia.chfis") +
                             " --depth 4 --report ";
    ASSERT_EQ(run(args + r1).exit_code, 0);
    ASSERT_EQ(run(args + r2).exit_code, 0);
    const std::string a = slurp(r1);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(r2));
}

TEST_F(CliTest, ModulusFlagsScaleTheIndependentBound) {
    const auto r = run("bounds --base " + data_path("table1.chfis") +
                       " --perturbed " + data_path("case_ib.chfis") +
                       " --mbar 2.6 --delta 1");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NEAR(value_of(r.out, "bound_xy"), 2 * 2.1667, 1e-4);
    // a rescale-equivalent axis change keeps the measured deviation at zero,
    // so even a tiny modulus cannot trip the metric check
    const auto tiny = run("verify --base " + data_path("table1.chfis") +
                          " --perturbed " + data_path("case_ib.chfis") +
                          " --mbar 1e-8 --depth 4");
    EXPECT_EQ(tiny.exit_code, 0) << tiny.err;
    EXPECT_NE(tiny.out.find("no violation"), std::string::npos);
}

TEST_F(CliTest, HelpExitsZero) {
    EXPECT_EQ(run("--help").exit_code, 0);
    EXPECT_EQ(run("solve --help").exit_code, 0);
}

TEST_F(CliTest, DepthCapFromEnvironment) {
    const auto blocked = run("solve --data " + data_path("table1.chfis") +
                             " --depth 13 --out " + tmp("x.csv"));
    EXPECT_EQ(blocked.exit_code, 1);
    EXPECT_NE(blocked.err.find("DepthTooLarge"), std::string::npos);

    const fs::path out = dir_ / "stdout2.txt";
    const std::string cmd = std::string("CHFIS_MAX_DEPTH=4 ") + CHFIS_CLI_PATH +
                            " solve --data " + data_path("table1.chfis") +
                            " --depth 5 --out " + tmp("y.csv") + " > " +
                            out.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    EXPECT_EQ(WEXITSTATUS(raw), 1);
}

TEST_F(CliTest, ConflictingMatrixAndFlag) {
    const std::string file = tmp("matrix.chfis");
    chfis::write_text_file(file,
                           "chfis-v1\nnx 1\nny 1\nx 0 1\ny 0 1\nz 1 2 3 4\n"
                           "t 1 2 3 4\nalpha_matrix 0.5\nbeta_matrix 0.1\n"
                           "gamma_matrix 0.2\n");
    const auto conflict = run("solve --data " + file + " --alpha 0.3 --out " +
                              tmp("z.csv"));
    EXPECT_EQ(conflict.exit_code, 1);
    EXPECT_NE(conflict.err.find("conflict"), std::string::npos);
    // matrices alone are fine
    const auto ok = run("solve --data " + file + " --depth 2 --out " + tmp("z.csv"));
    EXPECT_EQ(ok.exit_code, 0) << ok.err;
}

TEST_F(CliTest, MissingParametersIsAnError) {
    const auto r = run("solve --data " + data_path("case_ia.chfis") +
                       " --depth 1 --out " + tmp("z.csv"));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("neither in the file"), std::string::npos);
}

TEST_F(CliTest, UnknownFlagExitsNonZero) {
    const auto r = run("solve --data " + data_path("table1.chfis") +
                       " --frobnicate 1");
    EXPECT_EQ(r.exit_code, 1);
}

}  // namespace
