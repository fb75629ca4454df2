#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "run_config.hpp"

namespace swspin::cli {

enum ExitCode : int { kSuccess = 0, kValidationError = 1, kToleranceExceeded = 2, kNumericalFailure = 3 };

struct Invocation {
    RunConfig config;
    std::filesystem::path out_dir = ".";
    std::optional<double> tolerance;
};

int cmd_evolve(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_compare(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_limit_scan(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_kernel(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_symbol(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Runs a command and maps exceptions to exit codes: configuration and domain
/// errors give 1, numerical failures 3.
template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err);

/// Initial density matrix of a config; validated Hermitian with unit trace.
CMatrix initial_state(const RunConfig& cfg);

/// Writes the resolved config next to the outputs.
void write_sidecar(const Invocation& inv);

}  // namespace swspin::cli

#include <ostream>

template <typename Fn>
int swspin::cli::run_guarded(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    }
}
