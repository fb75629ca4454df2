#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace swspin::cli {

namespace {

std::ofstream open_output(const Invocation& inv, const std::string& name) {
    std::filesystem::create_directories(inv.out_dir);
    const std::filesystem::path p = inv.out_dir / name;
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return f;
}

PhaseSpaceOperator build_generator(const RunConfig& cfg, Ordering sigma) {
    const SpinContext ctx = cfg.context();
    const SpinExpression h = cfg.model.expression();
    if (cfg.bath) return qfp_generator(h, cfg.bath->spec(), ctx, sigma);
    if (cfg.model.quadratic) return quadratic_generator(*cfg.model.quadratic, ctx, sigma);
    if (h.empty()) return PhaseSpaceOperator::zero(ctx.band_limit());
    return unitary_generator(h, ctx, sigma);
}

CMatrix coupling_operator(const RunConfig& cfg) {
    const SpinContext ctx = cfg.context();
    if (!cfg.bath) return CMatrix::Zero(ctx.hilbert_dim(), ctx.hilbert_dim());
    return cfg.bath->coupling.to_operator(ctx);
}

void report_validity(const RunConfig& cfg, std::ostream& err) {
    if (!cfg.bath) return;
    const BathSpec b = cfg.bath->spec();
    err << std::setprecision(6) << "validity ratio gamma/(S T) = " << b.validity_ratio(cfg.context()) << '\n';
}

void write_symbol_grid(const Invocation& inv, const std::string& name, const SymbolCoefficients& w, int band) {
    const SphereGrid grid(band);
    std::ofstream f = open_output(inv, name);
    write_grid_csv(f, grid, grid.synthesize(w.resized(band)));
}

}  // namespace

CMatrix initial_state(const RunConfig& cfg) {
    const SpinContext ctx = cfg.context();
    const int n = ctx.hilbert_dim();
    switch (cfg.initial.kind) {
        case InitialConfig::Kind::Coherent: return coherent_state(ctx, cfg.initial.theta0, cfg.initial.phi0);
        case InitialConfig::Kind::Mixed: return CMatrix::Identity(n, n) / static_cast<double>(n);
        case InitialConfig::Kind::Matrix: break;
    }
    const CMatrix rho = read_matrix_file(cfg.initial.matrix_file);
    if (rho.rows() != n) throw ConfigError("initial matrix dimension does not match 2S+1");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw ConfigError("initial matrix is not Hermitian");
    if (std::abs(rho.trace() - 1.0) > 1e-10) throw ConfigError("initial matrix must have unit trace");
    return rho;
}

void write_sidecar(const Invocation& inv) {
    std::ofstream f = open_output(inv, "resolved_config.yaml");
    f << resolved_yaml(inv.config);
}

int cmd_evolve(const Invocation& inv, std::ostream& /*out*/, std::ostream& err) {
    const RunConfig& cfg = inv.config;
    const SpinContext ctx = cfg.context();
    const Ordering sigma = cfg.ordering();
    const CMatrix rho0 = initial_state(cfg);
    report_validity(cfg, err);
    write_sidecar(inv);

    const PhaseSpaceOperator g = build_generator(cfg, sigma);
    const SwTransform sw(ctx);
    const SymbolCoefficients w0 = sw.to_symbol(rho0, sigma);
    const EvolutionResult res = evolve_symbol(g, w0, ctx, sigma, cfg.time.t_end, cfg.time.dt, cfg.time.method);
    {
        std::ofstream f = open_output(inv, cfg.outputs.trajectory);
        write_trajectory_csv(f, res.times, res.observables);
    }

    double trace_drift = 0.0, norm_drift = 0.0;
    const Observables& o0 = res.observables.front();
    const double n0 = std::sqrt(o0.s1 * o0.s1 + o0.s2 * o0.s2 + o0.s3 * o0.s3);
    for (const Observables& o : res.observables) {
        trace_drift = std::max(trace_drift, std::abs(o.trace - o0.trace));
        norm_drift = std::max(norm_drift, std::abs(std::sqrt(o.s1 * o.s1 + o.s2 * o.s2 + o.s3 * o.s3) - n0));
    }
    err << std::setprecision(6) << "max |trace drift| = " << trace_drift << "\nmax ||<S>| drift| = " << norm_drift
        << '\n';

    for (std::size_t k = 0; k < cfg.outputs.grid_times.size(); ++k) {
        const double t = cfg.outputs.grid_times[k];
        const Trajectory tr = integrate(g.matrix(), w0.coefficients(), t, cfg.time.dt, cfg.time.method);
        write_symbol_grid(inv, cfg.outputs.grid + "_" + std::to_string(k) + ".csv",
                          SymbolCoefficients(ctx.band_limit(), tr.states.back()), cfg.grid_band());
    }
    return kSuccess;
}

int cmd_compare(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const RunConfig& cfg = inv.config;
    const SpinContext ctx = cfg.context();
    if (ctx.hilbert_dim() > 64) throw ConfigError("compare: 2S+1 must be <= 64 for the Hilbert-space oracle");
    const Ordering sigma = cfg.ordering();
    const Ordering oracle_sigma(cfg.compare.oracle_sigma.value_or(cfg.sigma));
    const double tolerance = inv.tolerance.value_or(cfg.compare.tolerance);
    const CMatrix rho0 = initial_state(cfg);
    report_validity(cfg, err);
    write_sidecar(inv);

    const CMatrix h = cfg.model.expression().to_operator(ctx);
    const double gamma = cfg.bath ? cfg.bath->gamma : 0.0;
    const double temperature = cfg.bath ? cfg.bath->temperature : 1.0;
    const HilbertEvolution oracle =
        evolve_density_matrix(h, coupling_operator(cfg), gamma, temperature, rho0, cfg.time.t_end, cfg.time.dt, cfg.time.method);

    const SwTransform sw(ctx);
    const PhaseSpaceOperator g = build_generator(cfg, sigma);
    const Trajectory phase = integrate(g.matrix(), sw.to_symbol(rho0, sigma).coefficients(), cfg.time.t_end,
                                       cfg.time.dt, cfg.time.method);

    std::ofstream f = open_output(inv, "compare.csv");
    f << "t,deviation\n" << std::setprecision(17);
    double worst = 0.0;
    for (std::size_t k = 0; k < oracle.times.size(); ++k) {
        const CVector ref = sw.to_symbol(oracle.states[k], oracle_sigma).coefficients();
        const double dev = (phase.states[k] - ref).norm();
        if (!std::isfinite(dev)) throw NumericalError("compare: non-finite deviation");
        worst = std::max(worst, dev);
        f << oracle.times[k] << ',' << dev << '\n';
    }
    out << std::setprecision(17) << "max_deviation " << worst << '\n';
    if (worst > tolerance) {
        err << "max deviation " << worst << " exceeds tolerance " << tolerance << '\n';
        return kToleranceExceeded;
    }
    return kSuccess;
}

int cmd_limit_scan(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const RunConfig& cfg = inv.config;
    write_sidecar(inv);
    const LimitScanResult res = classical_limit_scan(cfg.limit_scan.spec);
    {
        std::ofstream f = open_output(inv, "limit_scan.csv");
        f << "S,deviation\n" << std::setprecision(17);
        for (const LimitScanRow& r : res.rows) f << 0.5 * r.twice_s << ',' << r.deviation << '\n';
    }
    out << std::setprecision(17) << "slope " << res.slope << '\n';
    if (cfg.limit_scan.expected_slope) {
        const double tol = inv.tolerance.value_or(cfg.limit_scan.slope_tolerance);
        const double miss = std::abs(res.slope - *cfg.limit_scan.expected_slope);
        if (!(miss <= tol)) {
            err << "slope " << res.slope << " differs from expected " << *cfg.limit_scan.expected_slope << " by more than "
                << tol << '\n';
            return kToleranceExceeded;
        }
    }
    return kSuccess;
}

int cmd_kernel(const Invocation& inv, std::ostream& /*out*/, std::ostream& /*err*/) {
    const RunConfig& cfg = inv.config;
    const SpinContext ctx = cfg.context();
    const Ordering sigma = cfg.ordering();
    write_sidecar(inv);
    const SphereGrid grid(cfg.kernel.grid_band < 0 ? ctx.band_limit() : cfg.kernel.grid_band);
    std::ofstream f = open_output(inv, "kernel.csv");
    f << "theta,phi,row,col,value_re,value_im\n" << std::setprecision(17);
    for (int i = 0; i < grid.n_theta(); ++i)
        for (int j = 0; j < grid.n_phi(); ++j) {
            const CMatrix k = kernel_eval(ctx, sigma, grid.theta(i), grid.phi(j));
            for (Eigen::Index r = 0; r < k.rows(); ++r)
                for (Eigen::Index c = 0; c < k.cols(); ++c)
                    f << grid.theta(i) << ',' << grid.phi(j) << ',' << r << ',' << c << ',' << k(r, c).real() << ','
                      << k(r, c).imag() << '\n';
        }
    return kSuccess;
}

int cmd_symbol(const Invocation& inv, std::ostream& /*out*/, std::ostream& /*err*/) {
    const RunConfig& cfg = inv.config;
    const SpinContext ctx = cfg.context();
    const Ordering sigma = cfg.ordering();
    const int n = ctx.hilbert_dim();
    CMatrix a;
    if (cfg.symbol.random) {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> gauss;
        CMatrix z(n, n);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < n; ++r) z(r, c) = {gauss(rng), gauss(rng)};
        a = 0.5 * (z + z.adjoint());
    } else if (cfg.symbol.op) {
        a = cfg.symbol.op->to_operator(ctx);
    } else {
        a = spin_matrices(ctx).s3;
    }
    write_sidecar(inv);
    const SymbolCoefficients w = SwTransform(ctx).to_symbol(a, sigma);
    {
        std::ofstream f = open_output(inv, "symbol_coefficients.csv");
        f << "l,m,value_re,value_im\n" << std::setprecision(17);
        for (int l = 0; l <= w.band_limit(); ++l)
            for (int m = -l; m <= l; ++m) f << l << ',' << m << ',' << w(l, m).real() << ',' << w(l, m).imag() << '\n';
    }
    write_symbol_grid(inv, cfg.outputs.grid + ".csv", w, cfg.grid_band());
    return kSuccess;
}

}  // namespace swspin::cli
