#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swspin/dynamics.hpp"

namespace swspin::cli {

/// Configuration problems; the message carries the config line when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ModelConfig {
    /// Either a list of terms or a quadratic (D, B) Hamiltonian.
    std::optional<SpinExpression> hamiltonian;
    std::optional<QuadraticHamiltonian> quadratic;

    SpinExpression expression() const;
};

struct BathConfig {
    SpinExpression coupling;
    std::optional<Vec3> xi;
    double gamma = 0.0;
    double temperature = 1.0;

    BathSpec spec() const;
};

struct InitialConfig {
    enum class Kind { Coherent, Mixed, Matrix } kind = Kind::Coherent;
    double theta0 = 0.0;
    double phi0 = 0.0;
    std::filesystem::path matrix_file;
};

struct TimeConfig {
    double t_end = 1.0;
    double dt = 0.01;
    IntegrationMethod method = IntegrationMethod::Expm;
};

struct OutputConfig {
    std::string trajectory = "trajectory.csv";
    std::string grid = "grid";
    /// Band limit of the output grid; -1 means 2S.
    int grid_band = -1;
    std::vector<double> grid_times;
};

struct CompareConfig {
    double tolerance = 1e-8;
    /// Ordering of the oracle-side symbol map; defaults to sigma.
    std::optional<double> oracle_sigma;
};

struct LimitScanConfig {
    LimitScanSpec spec;
    std::optional<double> expected_slope;
    double slope_tolerance = 0.2;
};

struct KernelConfig {
    int grid_band = -1;
};

struct SymbolConfig {
    std::optional<SpinExpression> op;
    bool random = false;
};

struct RunConfig {
    int twice_s = 1;
    double sigma = 0.0;
    ModelConfig model;
    std::optional<BathConfig> bath;
    InitialConfig initial;
    TimeConfig time;
    OutputConfig outputs;
    CompareConfig compare;
    LimitScanConfig limit_scan;
    KernelConfig kernel;
    SymbolConfig symbol;
    std::uint64_t seed = 0;

    SpinContext context() const { return SpinContext(twice_s); }
    Ordering ordering() const { return Ordering(sigma); }
    int grid_band() const { return outputs.grid_band < 0 ? twice_s : outputs.grid_band; }
};

/// Parses and validates a YAML config. Unknown keys, type errors and
/// physical-constraint violations raise ConfigError with the line number.
RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// The fully resolved config (defaults applied) as YAML.
std::string resolved_yaml(const RunConfig& cfg);

/// Reads an n x n complex matrix: n lines of 2n numbers (re im pairs), comma
/// or whitespace separated.
CMatrix read_matrix_file(const std::filesystem::path& path);

}  // namespace swspin::cli
