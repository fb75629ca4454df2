#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace swspin;
using namespace swspin::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("swspin_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

int run(int (*cmd)(const Invocation&, std::ostream&, std::ostream&), const std::string& yaml, const fs::path& out,
        std::optional<double> tolerance = std::nullopt, std::string* stdout_text = nullptr) {
    std::ostringstream o, e;
    const int code = run_guarded(
        [&] {
            Invocation inv;
            inv.config = parse_config(yaml);
            inv.out_dir = out;
            inv.tolerance = tolerance;
            return cmd(inv, o, e);
        },
        e);
    if (stdout_text) *stdout_text = o.str();
    return code;
}

int run_binary(const std::string& args) {
    const int status = std::system((std::string(SWSPIN_BIN) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kPrecession = R"(spin: {twice_s: 2}
model:
  hamiltonian:
    - {coeff: -1.0, word: S3}
initial:
  coherent: {theta0: 1.0, phi0: 0.0}
time: {t_end: 3.0, dt: 0.05, method: expm}
outputs: {grid_times: [0.0, 1.5], grid_band: 4}
)";

const char* kDissipative = R"(spin: {twice_s: 2}
sigma: 0.5
model:
  hamiltonian:
    - {coeff: -1.0, word: S3}
bath: {xi: [1.0, 0.0, 0.0], gamma: 0.1, temperature: 1.0}
initial:
  coherent: {theta0: 0.7, phi0: 0.3}
time: {t_end: 20.0, dt: 0.5, method: expm}
compare: {tolerance: 1.0e-8}
)";

}  // namespace

TEST(ParseConfig, Defaults) {
    const RunConfig cfg = parse_config("sigma: 0.25\n");
    EXPECT_EQ(cfg.twice_s, 1);
    EXPECT_DOUBLE_EQ(cfg.sigma, 0.25);
    EXPECT_FALSE(cfg.bath);
    EXPECT_TRUE(cfg.model.expression().empty());
    EXPECT_EQ(cfg.time.method, IntegrationMethod::Expm);
    EXPECT_EQ(cfg.grid_band(), 1);
    EXPECT_EQ(cfg.limit_scan.spec.twice_s, (std::vector<int>{10, 20, 40, 80}));
    EXPECT_DOUBLE_EQ(cfg.compare.tolerance, 1e-8);
}

TEST(ParseConfig, ErrorsCarryLineNumbers) {
    const auto message = [](const std::string& yaml) {
        try {
            parse_config(yaml);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("spin: {twice_s: 2}\nsigma: 1.5\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("spin: {twice_s: 2}\n\nbogus: 1\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("spin: {twice_s: 2}\n\nbogus: 1\n").find("unknown key 'bogus'"), std::string::npos);
    EXPECT_NE(message("time:\n  t_end: 1\n  dt: -0.1\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("model:\n  hamiltonian:\n    - {coeff: [0, 1], word: S3}\n").find("not Hermitian"), std::string::npos);
    EXPECT_NE(message("bath: {xi: [1, 0, 0], gamma: -1}\n").find("gamma"), std::string::npos);
    EXPECT_NE(message("bath: {xi: [1, 0, 0], temperature: 0}\n").find("temperature"), std::string::npos);
    EXPECT_NE(message("time: {method: euler}\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("limit_scan: {twice_s: [20, 10]}\n").find("ascending"), std::string::npos);
    EXPECT_NE(message("spin: [1]\n").find("mapping"), std::string::npos);
    EXPECT_NE(message("spin: {twice_s: 0}\n").find("twice_s"), std::string::npos);
}

TEST(ParseConfig, ResolvedYamlRoundTrips) {
    const std::string full = std::string(kDissipative) +
                             "outputs: {grid_times: [1.0, 2.5]}\nlimit_scan: {model: asymptotics, twice_s: [4, 8], l_test: 2}\n"
                             "symbol: {random: true}\nseed: 17\n";
    const RunConfig cfg = parse_config(full);
    const std::string once = resolved_yaml(cfg);
    const RunConfig again = parse_config(once);
    EXPECT_EQ(resolved_yaml(again), once);
    EXPECT_EQ(again.seed, 17u);
    EXPECT_DOUBLE_EQ(again.sigma, 0.5);
    ASSERT_TRUE(again.bath);
    EXPECT_DOUBLE_EQ(again.bath->gamma, 0.1);
    EXPECT_EQ(again.limit_scan.spec.model, ScanModel::Asymptotics);
}

TEST(ParseConfig, QuadraticModel) {
    const RunConfig cfg = parse_config("spin: {twice_s: 3}\nmodel:\n  quadratic:\n    D: [[0, 0, 0], [0, 0, 0], [0, 0, 0.5]]\n    B: [0, 0, 1]\n");
    ASSERT_TRUE(cfg.model.quadratic);
    const SpinContext ctx(3);
    const SpinMatrices s = spin_matrices(ctx);
    EXPECT_LT((cfg.model.expression().to_operator(ctx) - (-0.5 * s.s3 * s.s3 - s.s3)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(parse_config("model:\n  quadratic:\n    D: [[0, 1, 0], [0, 0, 0], [0, 0, 0]]\n"), ConfigError);
}

TEST(Evolve, PrecessionTrajectoryAndSidecar) {
    const fs::path out = scratch_dir("evolve");
    ASSERT_EQ(run(cmd_evolve, kPrecession, out), kSuccess);
    EXPECT_TRUE(fs::exists(out / "resolved_config.yaml"));
    EXPECT_TRUE(fs::exists(out / "grid_0.csv"));
    EXPECT_TRUE(fs::exists(out / "grid_1.csv"));
    const auto rows = read_csv(out / "trajectory.csv");
    ASSERT_EQ(rows.size(), 61u);
    for (const auto& r : rows) {
        ASSERT_EQ(r.size(), 6u);
        EXPECT_NEAR(r[1], std::sin(1.0) * std::cos(r[0]), 1e-10);
        EXPECT_NEAR(r[2], -std::sin(1.0) * std::sin(r[0]), 1e-10);
        EXPECT_NEAR(r[3], std::cos(1.0), 1e-10);
        EXPECT_NEAR(r[4], 1.0, 1e-12);
    }
    // 9 band-4 Gauss nodes in theta times 10 in phi.
    EXPECT_EQ(read_csv(out / "grid_1.csv").size(), static_cast<std::size_t>(SphereGrid(4).size()));
}

TEST(Evolve, OutputIsDeterministic) {
    const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
    ASSERT_EQ(run(cmd_evolve, kDissipative, a), kSuccess);
    ASSERT_EQ(run(cmd_evolve, kDissipative, b), kSuccess);
    for (const auto& entry : fs::directory_iterator(a)) {
        ASSERT_TRUE(fs::exists(b / entry.path().filename()));
        EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
    }
}

TEST(Evolve, RelaxesToStationaryState) {
    const fs::path out = scratch_dir("relax");
    const std::string yaml = R"(spin: {twice_s: 2}
model:
  hamiltonian:
    - {coeff: -1.0, word: S3}
bath: {xi: [1.0, 0.0, 0.0], gamma: 0.2, temperature: 0.5}
initial: {mixed: true}
time: {t_end: 400.0, dt: 2.0, method: expm}
)";
    ASSERT_EQ(run(cmd_evolve, yaml, out), kSuccess);
    const RunConfig cfg = parse_config(yaml);
    const SpinContext ctx = cfg.context();
    const CMatrix rho = stationary_state(cfg.model.expression().to_operator(ctx), cfg.bath->coupling.to_operator(ctx), 0.2, 0.5);
    const auto rows = read_csv(out / "trajectory.csv");
    EXPECT_NEAR(rows.back()[3], observables_of(rho).s3, 1e-9);
    EXPECT_GT(rows.back()[3], 0.5);
}

TEST(Evolve, MatrixInitialState) {
    const fs::path dir = scratch_dir("matrix");
    {
        std::ofstream f(dir / "rho.txt");
        f << "0.5 0 0 0.1\n0 -0.1 0.5 0\n";
    }
    const std::string base = "spin: {twice_s: 1}\nmodel:\n  hamiltonian:\n    - {coeff: 1.0, word: S1}\ntime: {t_end: 0.5, dt: 0.1}\n";
    Invocation inv;
    inv.config = parse_config(base + "initial: {matrix: rho.txt}\n", dir);
    inv.out_dir = dir / "out";
    std::ostringstream o, e;
    EXPECT_EQ(run_guarded([&] { return cmd_evolve(inv, o, e); }, e), kSuccess);
    const auto rows = read_csv(dir / "out" / "trajectory.csv");
    // rho_01 = 0.1 i gives <S2> = Tr(rho S2) = -0.1
    EXPECT_NEAR(rows.front()[2], -0.1, 1e-14);
    {
        std::ofstream f(dir / "bad.txt");
        f << "0.7 0 0 0\n0 0 0.5 0\n";
    }
    inv.config = parse_config(base + "initial: {matrix: bad.txt}\n", dir);
    EXPECT_EQ(run_guarded([&] { return cmd_evolve(inv, o, e); }, e), kValidationError);
}

TEST(Evolve, Rk4BlowUpIsNumericalFailure) {
    const std::string yaml = R"(spin: {twice_s: 2}
model:
  hamiltonian:
    - {coeff: -1.0, word: S3}
bath: {xi: [1.0, 0.0, 0.0], gamma: 1000.0, temperature: 1.0}
time: {t_end: 2000.0, dt: 1.0, method: rk4}
)";
    EXPECT_EQ(run(cmd_evolve, yaml, scratch_dir("blowup")), kNumericalFailure);
}

TEST(Compare, ExitCodes) {
    std::string text;
    const fs::path ok = scratch_dir("cmp_ok");
    EXPECT_EQ(run(cmd_compare, kDissipative, ok, std::nullopt, &text), kSuccess);
    EXPECT_EQ(text.rfind("max_deviation ", 0), 0u);
    EXPECT_LT(std::stod(text.substr(14)), 1e-8);
    const auto rows = read_csv(ok / "compare.csv");
    ASSERT_EQ(rows.size(), 41u);
    EXPECT_DOUBLE_EQ(rows.back()[0], 20.0);
    EXPECT_EQ(run(cmd_compare, std::string(kDissipative) + "time: {t_end: 2.0, dt: 0.5}\n", scratch_dir("cmp_dup")),
              kValidationError);
    std::string mismatched = kDissipative;
    mismatched.replace(mismatched.find("compare: {tolerance: 1.0e-8}"), 28, "compare: {tolerance: 1.0e-8, oracle_sigma: -0.5}");
    EXPECT_EQ(run(cmd_compare, mismatched, scratch_dir("cmp_bad")), kToleranceExceeded);
    EXPECT_EQ(run(cmd_compare, kDissipative, scratch_dir("cmp_tight"), 1e-30), kToleranceExceeded);
}

TEST(LimitScan, SlopeAndExitCodes) {
    const fs::path out = scratch_dir("scan");
    std::string text;
    EXPECT_EQ(run(cmd_limit_scan, "limit_scan: {model: isotropic_bilinear, expected_slope: -1.0}\n", out, std::nullopt, &text),
              kSuccess);
    EXPECT_NEAR(std::stod(text.substr(6)), -1.0, 0.2);
    const auto rows = read_csv(out / "limit_scan.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_DOUBLE_EQ(rows[0][0], 5.0);
    EXPECT_DOUBLE_EQ(rows[3][0], 40.0);
    EXPECT_EQ(run(cmd_limit_scan, "limit_scan: {model: isotropic_bilinear, expected_slope: -3.0}\n", out), kToleranceExceeded);
    EXPECT_EQ(run(cmd_limit_scan, "limit_scan: {model: isotropic_bilinear, expected_slope: -1.15}\n", out, 0.01),
              kToleranceExceeded);
    EXPECT_EQ(run(cmd_limit_scan, "limit_scan: {twice_s: [4, 8], l_test: 3}\n", out), kValidationError);
}

TEST(Kernel, CsvShape) {
    const fs::path out = scratch_dir("kernel");
    ASSERT_EQ(run(cmd_kernel, "spin: {twice_s: 2}\nsigma: -1\n", out), kSuccess);
    const auto rows = read_csv(out / "kernel.csv");
    EXPECT_EQ(rows.size(), static_cast<std::size_t>(SphereGrid(2).size() * 9));
    // Each kernel has unit trace.
    double trace = 0.0;
    for (std::size_t k = 0; k < 9; ++k)
        if (rows[k][2] == rows[k][3]) trace += rows[k][4];
    EXPECT_NEAR(trace, 1.0, 1e-12);
}

TEST(Symbol, CoefficientsAndSeeds) {
    const fs::path out = scratch_dir("symbol");
    ASSERT_EQ(run(cmd_symbol, "spin: {twice_s: 1}\n", out), kSuccess);
    const auto rows = read_csv(out / "symbol_coefficients.csv");
    ASSERT_EQ(rows.size(), 4u);
    // S3 at S = 1/2, sigma = 0: only c_10 = sqrt(4 pi / 3) * sqrt(3) / 2.
    EXPECT_NEAR(rows[2][2], std::sqrt(4.0 * kPi / 3.0) * std::sqrt(3.0) / 2.0, 1e-13);
    EXPECT_EQ(rows[0][2], 0.0);

    const fs::path a = scratch_dir("seed_a"), b = scratch_dir("seed_b"), c = scratch_dir("seed_c");
    const std::string random = "spin: {twice_s: 3}\nsymbol: {random: true}\n";
    ASSERT_EQ(run(cmd_symbol, random + "seed: 5\n", a), kSuccess);
    ASSERT_EQ(run(cmd_symbol, random + "seed: 5\n", b), kSuccess);
    ASSERT_EQ(run(cmd_symbol, random + "seed: 6\n", c), kSuccess);
    EXPECT_EQ(slurp(a / "symbol_coefficients.csv"), slurp(b / "symbol_coefficients.csv"));
    EXPECT_NE(slurp(a / "symbol_coefficients.csv"), slurp(c / "symbol_coefficients.csv"));
}

TEST(Binary, ExitCodes) {
    const fs::path dir = scratch_dir("binary");
    {
        std::ofstream f(dir / "ok.yaml");
        f << kDissipative;
    }
    {
        std::ofstream f(dir / "bad.yaml");
        f << "sigma: 3\n";
    }
    const std::string out = " --out " + (dir / "out").string();
    EXPECT_EQ(run_binary("compare --config " + (dir / "ok.yaml").string() + out), 0);
    EXPECT_EQ(run_binary("compare --config " + (dir / "ok.yaml").string() + out + " --tolerance 1e-30"), 2);
    EXPECT_EQ(run_binary("evolve --config " + (dir / "bad.yaml").string() + out), 1);
    EXPECT_EQ(run_binary("evolve --config " + (dir / "missing.yaml").string() + out), 1);
    EXPECT_EQ(run_binary("frobnicate"), 1);
    EXPECT_EQ(run_binary("symbol --seed 3 --config " + (dir / "ok.yaml").string() + out), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "resolved_config.yaml"));
}
