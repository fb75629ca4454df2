#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace swspin::cli {

namespace {

std::string where(const YAML::Node& node) {
    const YAML::Mark m = node.Mark();
    if (m.line < 0) return "config";
    return "config line " + std::to_string(m.line + 1);
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) { throw ConfigError(where(node) + ": " + msg); }

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
    if (!node.IsMap()) fail(node, "'" + section + "' must be a mapping");
    std::set<std::string> seen;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + section);
        if (!seen.insert(key).second) fail(kv.first, "duplicate key '" + key + "' in " + section);
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& name) {
    if (!node.IsScalar()) fail(node, "'" + name + "' must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, "'" + name + "' has the wrong type");
    }
}

double real(const YAML::Node& node, const std::string& name) {
    const auto v = scalar<double>(node, name);
    if (!std::isfinite(v)) fail(node, "'" + name + "' must be finite");
    return v;
}

Vec3 vec3(const YAML::Node& node, const std::string& name) {
    if (!node.IsSequence() || node.size() != 3) fail(node, "'" + name + "' must be a list of 3 numbers");
    return {real(node[0], name), real(node[1], name), real(node[2], name)};
}

Complex complex_value(const YAML::Node& node, const std::string& name) {
    if (node.IsSequence()) {
        if (node.size() != 2) fail(node, "'" + name + "' must be a number or [re, im]");
        return {real(node[0], name), real(node[1], name)};
    }
    return real(node, name);
}

SpinExpression expression(const YAML::Node& node, const std::string& name) {
    if (!node.IsSequence()) fail(node, "'" + name + "' must be a list of {coeff, word} terms");
    SpinExpression out;
    for (const auto& term : node) {
        check_keys(term, name + " term", {"coeff", "word"});
        if (!term["coeff"]) fail(term, name + " term needs 'coeff'");
        const Complex c = complex_value(term["coeff"], "coeff");
        std::vector<int> word;
        if (term["word"]) {
            try {
                word = SpinExpression::parse_word(scalar<std::string>(term["word"], "word"));
            } catch (const DomainError& e) {
                fail(term["word"], e.what());
            }
        }
        out.add(c, std::move(word));
    }
    return out;
}

QuadraticHamiltonian quadratic(const YAML::Node& node) {
    check_keys(node, "model.quadratic", {"D", "B"});
    QuadraticHamiltonian qh;
    if (node["D"]) {
        const YAML::Node d = node["D"];
        if (!d.IsSequence() || d.size() != 3) fail(d, "'D' must be a 3x3 list");
        for (std::size_t i = 0; i < 3; ++i) qh.d.row(static_cast<int>(i)) = vec3(d[i], "D").transpose();
        if ((qh.d - qh.d.transpose()).cwiseAbs().maxCoeff() > 1e-14) fail(d, "'D' must be symmetric");
    }
    if (node["B"]) qh.b = vec3(node["B"], "B");
    return qh;
}

void emit_expression(YAML::Emitter& out, const SpinExpression& expr) {
    static const char* names[] = {"S1", "S2", "S3"};
    out << YAML::BeginSeq;
    for (const auto& t : expr.terms()) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "coeff";
        if (t.coeff.imag() == 0.0)
            out << YAML::Value << t.coeff.real();
        else
            out << YAML::Value << YAML::Flow << YAML::BeginSeq << t.coeff.real() << t.coeff.imag() << YAML::EndSeq;
        std::string word;
        for (int axis : t.word) word += (word.empty() ? "" : " ") + std::string(names[axis]);
        out << YAML::Key << "word" << YAML::Value << word << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

void emit_vec3(YAML::Emitter& out, const Vec3& v) {
    out << YAML::Flow << YAML::BeginSeq << v(0) << v(1) << v(2) << YAML::EndSeq;
}

}  // namespace

SpinExpression ModelConfig::expression() const {
    if (quadratic) return quadratic->expression();
    if (hamiltonian) return *hamiltonian;
    return {};
}

BathSpec BathConfig::spec() const {
    if (xi) return BathSpec::bilinear(*xi, gamma, temperature);
    BathSpec b;
    b.coupling = coupling;
    b.gamma = gamma;
    b.temperature = temperature;
    return b;
}

RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    RunConfig cfg;
    if (root.IsNull()) return cfg;
    check_keys(root, "config",
               {"spin", "sigma", "model", "bath", "initial", "time", "outputs", "compare", "limit_scan", "kernel",
                "symbol", "seed"});

    if (const YAML::Node n = root["spin"]) {
        check_keys(n, "spin", {"twice_s"});
        if (n["twice_s"]) {
            cfg.twice_s = scalar<int>(n["twice_s"], "twice_s");
            if (cfg.twice_s < 1) fail(n["twice_s"], "'twice_s' must be >= 1");
        }
    }
    if (const YAML::Node n = root["sigma"]) {
        cfg.sigma = real(n, "sigma");
        if (std::abs(cfg.sigma) > 1.0) fail(n, "'sigma' must lie in [-1, 1]");
    }
    if (const YAML::Node n = root["seed"]) cfg.seed = scalar<std::uint64_t>(n, "seed");
    const SpinContext ctx(cfg.twice_s);

    if (const YAML::Node n = root["model"]) {
        check_keys(n, "model", {"hamiltonian", "quadratic"});
        if (n["hamiltonian"] && n["quadratic"]) fail(n, "model takes either 'hamiltonian' or 'quadratic', not both");
        if (n["hamiltonian"]) {
            cfg.model.hamiltonian = expression(n["hamiltonian"], "hamiltonian");
            if (!cfg.model.hamiltonian->is_hermitian(ctx, 1e-10)) fail(n["hamiltonian"], "hamiltonian is not Hermitian");
        }
        if (n["quadratic"]) cfg.model.quadratic = quadratic(n["quadratic"]);
    }

    if (const YAML::Node n = root["bath"]) {
        check_keys(n, "bath", {"coupling", "xi", "gamma", "temperature"});
        BathConfig b;
        if (n["coupling"] && n["xi"]) fail(n, "bath takes either 'coupling' or 'xi', not both");
        if (n["xi"]) {
            b.xi = vec3(n["xi"], "xi");
            b.coupling = SpinExpression::linear({(*b.xi)(0), (*b.xi)(1), (*b.xi)(2)});
        } else if (n["coupling"]) {
            b.coupling = expression(n["coupling"], "coupling");
            if (!b.coupling.is_hermitian(ctx, 1e-10)) fail(n["coupling"], "bath coupling is not Hermitian");
        } else {
            fail(n, "bath needs 'coupling' or 'xi'");
        }
        if (n["gamma"]) b.gamma = real(n["gamma"], "gamma");
        if (b.gamma < 0.0) fail(n["gamma"], "'gamma' must be >= 0");
        if (n["temperature"]) b.temperature = real(n["temperature"], "temperature");
        if (!(b.temperature > 0.0)) fail(n["temperature"] ? n["temperature"] : n, "'temperature' must be > 0");
        cfg.bath = std::move(b);
    }

    if (const YAML::Node n = root["initial"]) {
        check_keys(n, "initial", {"coherent", "mixed", "matrix"});
        const int kinds = (n["coherent"] ? 1 : 0) + (n["mixed"] ? 1 : 0) + (n["matrix"] ? 1 : 0);
        if (kinds != 1) fail(n, "initial takes exactly one of 'coherent', 'mixed', 'matrix'");
        if (const YAML::Node c = n["coherent"]) {
            check_keys(c, "initial.coherent", {"theta0", "phi0"});
            cfg.initial.kind = InitialConfig::Kind::Coherent;
            if (c["theta0"]) cfg.initial.theta0 = real(c["theta0"], "theta0");
            if (c["phi0"]) cfg.initial.phi0 = real(c["phi0"], "phi0");
        } else if (n["mixed"]) {
            if (!scalar<bool>(n["mixed"], "mixed")) fail(n["mixed"], "'mixed' must be true when given");
            cfg.initial.kind = InitialConfig::Kind::Mixed;
        } else {
            cfg.initial.kind = InitialConfig::Kind::Matrix;
            std::filesystem::path p = scalar<std::string>(n["matrix"], "matrix");
            cfg.initial.matrix_file = p.is_absolute() ? p : base_dir / p;
        }
    }

    if (const YAML::Node n = root["time"]) {
        check_keys(n, "time", {"t_end", "dt", "method"});
        if (n["t_end"]) cfg.time.t_end = real(n["t_end"], "t_end");
        if (cfg.time.t_end < 0.0) fail(n["t_end"], "'t_end' must be >= 0");
        if (n["dt"]) cfg.time.dt = real(n["dt"], "dt");
        if (!(cfg.time.dt > 0.0)) fail(n["dt"] ? n["dt"] : n, "'dt' must be > 0");
        if (n["method"]) {
            try {
                cfg.time.method = parse_method(scalar<std::string>(n["method"], "method"));
            } catch (const DomainError& e) {
                fail(n["method"], e.what());
            }
        }
    }

    if (const YAML::Node n = root["outputs"]) {
        check_keys(n, "outputs", {"trajectory", "grid", "grid_band", "grid_times"});
        if (n["trajectory"]) cfg.outputs.trajectory = scalar<std::string>(n["trajectory"], "trajectory");
        if (n["grid"]) cfg.outputs.grid = scalar<std::string>(n["grid"], "grid");
        if (n["grid_band"]) {
            cfg.outputs.grid_band = scalar<int>(n["grid_band"], "grid_band");
            if (cfg.outputs.grid_band < 0) fail(n["grid_band"], "'grid_band' must be >= 0");
        }
        if (const YAML::Node g = n["grid_times"]) {
            if (!g.IsSequence()) fail(g, "'grid_times' must be a list");
            for (const auto& t : g) {
                const double v = real(t, "grid_times");
                if (v < 0.0 || v > cfg.time.t_end) fail(t, "grid time outside [0, t_end]");
                cfg.outputs.grid_times.push_back(v);
            }
        }
    }

    if (const YAML::Node n = root["compare"]) {
        check_keys(n, "compare", {"tolerance", "oracle_sigma"});
        if (n["tolerance"]) cfg.compare.tolerance = real(n["tolerance"], "tolerance");
        if (!(cfg.compare.tolerance > 0.0)) fail(n, "'tolerance' must be > 0");
        if (n["oracle_sigma"]) {
            cfg.compare.oracle_sigma = real(n["oracle_sigma"], "oracle_sigma");
            if (std::abs(*cfg.compare.oracle_sigma) > 1.0) fail(n["oracle_sigma"], "'oracle_sigma' must lie in [-1, 1]");
        }
    }

    cfg.limit_scan.spec.sigma = cfg.sigma;
    if (const YAML::Node n = root["limit_scan"]) {
        check_keys(n, "limit_scan",
                   {"model", "twice_s", "l_test", "gamma0", "temperature0", "b", "xi", "expected_slope", "slope_tolerance"});
        LimitScanSpec& s = cfg.limit_scan.spec;
        if (n["model"]) {
            try {
                s.model = parse_scan_model(scalar<std::string>(n["model"], "model"));
            } catch (const DomainError& e) {
                fail(n["model"], e.what());
            }
        }
        if (const YAML::Node l = n["twice_s"]) {
            if (!l.IsSequence() || l.size() < 2) fail(l, "'twice_s' must list at least two spins");
            for (const auto& v : l) {
                const int ts = scalar<int>(v, "twice_s");
                if (ts < 1) fail(v, "spins must have twice_s >= 1");
                if (!s.twice_s.empty() && ts <= s.twice_s.back()) fail(v, "spins must be strictly ascending");
                s.twice_s.push_back(ts);
            }
        }
        if (n["l_test"]) s.l_test = scalar<int>(n["l_test"], "l_test");
        if (n["gamma0"]) s.gamma0 = real(n["gamma0"], "gamma0");
        if (s.gamma0 < 0.0) fail(n["gamma0"], "'gamma0' must be >= 0");
        if (n["temperature0"]) s.temperature0 = real(n["temperature0"], "temperature0");
        if (!(s.temperature0 > 0.0)) fail(n, "'temperature0' must be > 0");
        if (n["b"]) s.b = vec3(n["b"], "b");
        if (n["xi"]) s.xi = vec3(n["xi"], "xi");
        if (n["expected_slope"]) cfg.limit_scan.expected_slope = real(n["expected_slope"], "expected_slope");
        if (n["slope_tolerance"]) cfg.limit_scan.slope_tolerance = real(n["slope_tolerance"], "slope_tolerance");
    }
    if (cfg.limit_scan.spec.twice_s.empty()) cfg.limit_scan.spec.twice_s = {10, 20, 40, 80};

    if (const YAML::Node n = root["kernel"]) {
        check_keys(n, "kernel", {"grid_band"});
        if (n["grid_band"]) {
            cfg.kernel.grid_band = scalar<int>(n["grid_band"], "grid_band");
            if (cfg.kernel.grid_band < 0) fail(n["grid_band"], "'grid_band' must be >= 0");
        }
    }

    if (const YAML::Node n = root["symbol"]) {
        check_keys(n, "symbol", {"operator", "random"});
        if (n["operator"] && n["random"]) fail(n, "symbol takes either 'operator' or 'random', not both");
        if (n["operator"]) cfg.symbol.op = expression(n["operator"], "operator");
        if (n["random"]) cfg.symbol.random = scalar<bool>(n["random"], "random");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

std::string resolved_yaml(const RunConfig& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "spin" << YAML::Value << YAML::BeginMap << YAML::Key << "twice_s" << YAML::Value << cfg.twice_s
        << YAML::EndMap;
    out << YAML::Key << "sigma" << YAML::Value << cfg.sigma;
    out << YAML::Key << "seed" << YAML::Value << cfg.seed;

    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    if (cfg.model.quadratic) {
        out << YAML::Key << "quadratic" << YAML::Value << YAML::BeginMap << YAML::Key << "D" << YAML::Value
            << YAML::BeginSeq;
        for (int i = 0; i < 3; ++i) emit_vec3(out, cfg.model.quadratic->d.row(i).transpose());
        out << YAML::EndSeq << YAML::Key << "B" << YAML::Value;
        emit_vec3(out, cfg.model.quadratic->b);
        out << YAML::EndMap;
    } else {
        out << YAML::Key << "hamiltonian" << YAML::Value;
        emit_expression(out, cfg.model.expression());
    }
    out << YAML::EndMap;

    if (cfg.bath) {
        out << YAML::Key << "bath" << YAML::Value << YAML::BeginMap;
        if (cfg.bath->xi) {
            out << YAML::Key << "xi" << YAML::Value;
            emit_vec3(out, *cfg.bath->xi);
        } else {
            out << YAML::Key << "coupling" << YAML::Value;
            emit_expression(out, cfg.bath->coupling);
        }
        out << YAML::Key << "gamma" << YAML::Value << cfg.bath->gamma << YAML::Key << "temperature" << YAML::Value
            << cfg.bath->temperature << YAML::EndMap;
    }

    out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    switch (cfg.initial.kind) {
        case InitialConfig::Kind::Coherent:
            out << YAML::Key << "coherent" << YAML::Value << YAML::BeginMap << YAML::Key << "theta0" << YAML::Value
                << cfg.initial.theta0 << YAML::Key << "phi0" << YAML::Value << cfg.initial.phi0 << YAML::EndMap;
            break;
        case InitialConfig::Kind::Mixed: out << YAML::Key << "mixed" << YAML::Value << true; break;
        case InitialConfig::Kind::Matrix:
            out << YAML::Key << "matrix" << YAML::Value << cfg.initial.matrix_file.string();
            break;
    }
    out << YAML::EndMap;

    out << YAML::Key << "time" << YAML::Value << YAML::BeginMap << YAML::Key << "t_end" << YAML::Value << cfg.time.t_end
        << YAML::Key << "dt" << YAML::Value << cfg.time.dt << YAML::Key << "method" << YAML::Value
        << to_string(cfg.time.method) << YAML::EndMap;

    out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap << YAML::Key << "trajectory" << YAML::Value
        << cfg.outputs.trajectory << YAML::Key << "grid" << YAML::Value << cfg.outputs.grid << YAML::Key << "grid_band"
        << YAML::Value << cfg.grid_band() << YAML::Key << "grid_times" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double t : cfg.outputs.grid_times) out << t;
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "compare" << YAML::Value << YAML::BeginMap << YAML::Key << "tolerance" << YAML::Value
        << cfg.compare.tolerance << YAML::Key << "oracle_sigma" << YAML::Value
        << cfg.compare.oracle_sigma.value_or(cfg.sigma) << YAML::EndMap;

    const LimitScanSpec& s = cfg.limit_scan.spec;
    out << YAML::Key << "limit_scan" << YAML::Value << YAML::BeginMap << YAML::Key << "model" << YAML::Value
        << to_string(s.model) << YAML::Key << "twice_s" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int ts : s.twice_s) out << ts;
    out << YAML::EndSeq << YAML::Key << "l_test" << YAML::Value << s.l_test << YAML::Key << "gamma0" << YAML::Value
        << s.gamma0 << YAML::Key << "temperature0" << YAML::Value << s.temperature0 << YAML::Key << "b" << YAML::Value;
    emit_vec3(out, s.b);
    out << YAML::Key << "xi" << YAML::Value;
    emit_vec3(out, s.xi);
    if (cfg.limit_scan.expected_slope)
        out << YAML::Key << "expected_slope" << YAML::Value << *cfg.limit_scan.expected_slope;
    out << YAML::Key << "slope_tolerance" << YAML::Value << cfg.limit_scan.slope_tolerance << YAML::EndMap;

    out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap << YAML::Key << "grid_band" << YAML::Value
        << (cfg.kernel.grid_band < 0 ? cfg.twice_s : cfg.kernel.grid_band) << YAML::EndMap;

    out << YAML::Key << "symbol" << YAML::Value << YAML::BeginMap;
    if (cfg.symbol.op) {
        out << YAML::Key << "operator" << YAML::Value;
        emit_expression(out, *cfg.symbol.op);
    }
    out << YAML::Key << "random" << YAML::Value << cfg.symbol.random << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

CMatrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open matrix file '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof()) throw ConfigError("matrix file '" + path.string() + "': unparsable line " + std::to_string(rows.size() + 1));
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n < 2) throw ConfigError("matrix file '" + path.string() + "': need at least 2 rows");
    CMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(r.size()) != 2 * n)
            throw ConfigError("matrix file '" + path.string() + "': row " + std::to_string(i + 1) + " needs " +
                              std::to_string(2 * n) + " numbers");
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = {r[static_cast<std::size_t>(2 * j)], r[static_cast<std::size_t>(2 * j + 1)]};
    }
    return out;
}

}  // namespace swspin::cli
