#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::string out = ".";
    std::optional<double> tolerance;
    std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* sub, Flags& flags) {
    sub->add_option("--config", flags.config, "YAML run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--tolerance", flags.tolerance, "tolerance override")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "seed for random test operators");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace swspin::cli;
    CLI::App app{"Stratonovich-Weyl spin phase-space tools"};
    app.require_subcommand(1);
    Flags flags;
    struct Entry {
        const char* name;
        const char* help;
        int (*fn)(const Invocation&, std::ostream&, std::ostream&);
    };
    const Entry entries[] = {
        {"evolve", "integrate a phase-space generator and write the trajectory", cmd_evolve},
        {"compare", "compare phase-space and Hilbert-space master-equation evolution", cmd_compare},
        {"limit-scan", "classical-limit deviation scan over spins", cmd_limit_scan},
        {"kernel", "dump the SW kernel entries on a grid", cmd_kernel},
        {"symbol", "dump the symbol of an operator", cmd_symbol},
    };
    std::vector<CLI::App*> subs;
    for (const Entry& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        add_flags(sub, flags);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kValidationError;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        return run_guarded(
            [&] {
                Invocation inv;
                if (!flags.config.empty()) inv.config = load_config(flags.config);
                if (flags.seed) inv.config.seed = *flags.seed;
                inv.out_dir = flags.out;
                inv.tolerance = flags.tolerance;
                return entries[i].fn(inv, std::cout, std::cerr);
            },
            std::cerr);
    }
    return kValidationError;
}
