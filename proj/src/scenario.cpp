#include "symtomo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "symtomo/analysis.hpp"
#include "symtomo/propagators.hpp"

namespace symtomo {

using json = nlohmann::json;
namespace fs = std::filesystem;

Force ForceSpec::make() const {
    switch (kind) {
        case Kind::none:
            return {};
        case Kind::constant: {
            const double v = value;
            return [v](double) { return v; };
        }
        case Kind::table: {
            const std::vector<double> tt = t, ff = f;
            return [tt, ff](double x) {
                if (x <= tt.front()) return ff.front();
                if (x >= tt.back()) return ff.back();
                const auto it = std::upper_bound(tt.begin(), tt.end(), x);
                const size_t j = static_cast<size_t>(it - tt.begin());
                const double w = (x - tt[j - 1]) / (tt[j] - tt[j - 1]);
                return (1.0 - w) * ff[j - 1] + w * ff[j];
            };
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

const std::vector<std::string> kKnownTasks = {"tomogram", "propagate", "entropy", "verify-pde", "verify-oracle"};

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw ConfigError("config: " + key + ": " + what);
}

const json& section(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_object()) bad(key, "missing section");
    return j.at(key);
}

double number(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) bad(path + "." + key, "missing");
    if (!j.at(key).is_number()) bad(path + "." + key, "must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) bad(path + "." + key, "must be finite");
    return v;
}

double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
    return j.contains(key) ? number(j, key, path) : fallback;
}

std::vector<double> number_list(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) bad(path, "must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<cplx> read_wavefunction_csv(const fs::path& file, double& q_min, double& q_max) {
    std::ifstream in(file);
    if (!in) bad("state.file", "cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) bad("state.file", "empty file");
    std::vector<double> q;
    std::vector<cplx> amps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double a, b, c;
        if (!(row >> a >> b >> c)) bad("state.file", "malformed row '" + line + "'");
        q.push_back(a);
        amps.emplace_back(b, c);
    }
    if (q.size() < 8) bad("state.file", "need at least 8 samples");
    const double h = (q.back() - q.front()) / static_cast<double>(q.size() - 1);
    for (size_t i = 0; i < q.size(); ++i)
        if (std::abs(q[i] - (q.front() + h * i)) > 1e-9 * std::max(1.0, std::abs(q[i])))
            bad("state.file", "q column must be uniformly spaced");
    q_min = q.front();
    q_max = q.back();
    return amps;
}

}  // namespace

Scenario load_scenario(const fs::path& config) {
    std::ifstream in(config);
    if (!in) throw ConfigError("config: cannot open " + config.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    const fs::path base = config.parent_path();
    Scenario s;

    const json& model = section(j, "model");
    s.model.mass = number(model, "mass", "model");
    s.model.omega = number_or(model, "omega", "model", 0.0);
    if (!(s.model.mass > 0.0)) bad("model.mass", "must be > 0");
    if (s.model.omega < 0.0) bad("model.omega", "must be >= 0");
    if (model.contains("force")) {
        const json& f = model.at("force");
        const std::string kind = f.value("kind", "none");
        if (kind == "none") {
        } else if (kind == "constant") {
            s.force.kind = ForceSpec::Kind::constant;
            s.force.value = number(f, "value", "model.force");
        } else if (kind == "table") {
            s.force.kind = ForceSpec::Kind::table;
            if (!f.contains("t") || !f.contains("f")) bad("model.force", "table needs t and f arrays");
            s.force.t = number_list(f.at("t"), "model.force.t");
            s.force.f = number_list(f.at("f"), "model.force.f");
            if (s.force.t.size() < 2 || s.force.t.size() != s.force.f.size())
                bad("model.force", "t and f need equal lengths >= 2");
            if (!std::is_sorted(s.force.t.begin(), s.force.t.end()) ||
                std::adjacent_find(s.force.t.begin(), s.force.t.end()) != s.force.t.end())
                bad("model.force.t", "must be strictly increasing");
        } else {
            bad("model.force.kind", "unknown kind '" + kind + "'");
        }
    }
    s.model.force = s.force.make();

    const json& meas = section(j, "measurement");
    const double T = number(meas, "duration", "measurement");
    if (!(T > 0.0)) bad("measurement.duration", "must be > 0");
    if (meas.contains("accuracy") && meas.contains("accuracies")) bad("measurement", "give accuracy or accuracies, not both");
    if (meas.contains("accuracy")) {
        const double da = number(meas, "accuracy", "measurement");
        const int n = static_cast<int>(number_or(meas, "n_modes", "measurement", 64));
        if (!(da > 0.0)) bad("measurement.accuracy", "must be > 0");
        if (n < 1) bad("measurement.n_modes", "must be >= 1");
        s.measurement = MeasurementSpec::uniform_accuracy(T, da, n);
    } else if (meas.contains("accuracies")) {
        const std::vector<double> da = number_list(meas.at("accuracies"), "measurement.accuracies");
        for (double v : da)
            if (!(v > 0.0)) bad("measurement.accuracies", "entries must be > 0");
        s.measurement = MeasurementSpec::per_mode(T, da);
    } else {
        s.measurement = MeasurementSpec::none(T);
    }

    const json& state = section(j, "state");
    const std::string kind = state.value("kind", "gaussian_packet");
    if (kind == "gaussian_packet") {
        s.state.p = number_or(state, "p", "state", 0.0);
        s.state.l = number_or(state, "l", "state", 1.0);
        s.state.q0 = number_or(state, "q0", "state", 0.0);
        if (!(s.state.l > 0.0)) bad("state.l", "must be > 0");
    } else if (kind == "wavefunction") {
        s.state.kind = StateSpec::Kind::wavefunction;
        if (!state.contains("file") || !state.at("file").is_string()) bad("state.file", "missing");
        s.state.file = base / state.at("file").get<std::string>();
        if (!fs::exists(s.state.file)) bad("state.file", "does not exist: " + s.state.file.string());
    } else {
        bad("state.kind", "unknown kind '" + kind + "'");
    }

    const json& q = section(j, "queries");
    if (!q.contains("directions") || !q.at("directions").is_array() || q.at("directions").empty())
        bad("queries.directions", "need a non-empty list of [mu, nu]");
    for (const auto& d : q.at("directions")) {
        const std::vector<double> v = number_list(d, "queries.directions");
        if (v.size() != 2) bad("queries.directions", "entries must be [mu, nu]");
        if (v[0] == 0.0 && v[1] == 0.0) bad("queries.directions", "(0, 0) is not a direction");
        s.directions.emplace_back(v[0], v[1]);
    }
    if (q.contains("x_grid")) {
        const json& g = q.at("x_grid");
        s.x_min = number(g, "min", "queries.x_grid");
        s.x_max = number(g, "max", "queries.x_grid");
        s.x_points = static_cast<int>(number(g, "points", "queries.x_grid"));
        if (!(s.x_max > s.x_min) || s.x_points < 3) bad("queries.x_grid", "need max > min and points >= 3");
    }

    if (!j.contains("tasks") || !j.at("tasks").is_array()) bad("tasks", "need a list of task names");
    for (const auto& t : j.at("tasks")) {
        if (!t.is_string()) bad("tasks", "entries must be strings");
        const std::string name = t.get<std::string>();
        if (std::find(kKnownTasks.begin(), kKnownTasks.end(), name) == kKnownTasks.end())
            bad("tasks", "unknown task '" + name + "'");
        if (std::find(s.tasks.begin(), s.tasks.end(), name) == s.tasks.end()) s.tasks.push_back(name);
    }

    s.pde.samples = {{0.1, 0.7, 0.0, 1.0, 1.0}, {-0.3, 0.2, 0.5, -0.6, 0.8}, {0.0, 1.5, -0.4, 2.0, 1.3}};
    s.oracle.endpoints = {{0.3, -0.7}, {0.0, 0.5}, {-0.4, 0.2}};
    s.oracle.outcome = {0.2, -0.1};
    if (j.contains("verify")) {
        const json& v = j.at("verify");
        if (v.contains("tolerance")) {
            s.tolerance = number(v, "tolerance", "verify");
            if (!(*s.tolerance > 0.0)) bad("verify.tolerance", "must be > 0");
        }
        if (v.contains("pde")) {
            const json& p = v.at("pde");
            s.pde.k_factor = number_or(p, "k_factor", "verify.pde", 1.0);
            s.pde.step = number_or(p, "step", "verify.pde", s.pde.step);
            if (!(s.pde.step > 0.0)) bad("verify.pde.step", "must be > 0");
            if (p.contains("samples")) {
                s.pde.samples.clear();
                for (const auto& r : p.at("samples")) {
                    const std::vector<double> x = number_list(r, "verify.pde.samples");
                    if (x.size() != 5 || !(x[4] > 0.0)) bad("verify.pde.samples", "entries are [X', X, mu, nu, t > 0]");
                    s.pde.samples.push_back({x[0], x[1], x[2], x[3], x[4]});
                }
            }
        }
        if (v.contains("oracle")) {
            const json& o = v.at("oracle");
            if (o.contains("endpoints")) {
                s.oracle.endpoints.clear();
                for (const auto& r : o.at("endpoints")) {
                    const std::vector<double> x = number_list(r, "verify.oracle.endpoints");
                    if (x.size() != 2) bad("verify.oracle.endpoints", "entries are [q_i, q_f]");
                    s.oracle.endpoints.emplace_back(x[0], x[1]);
                }
            }
            if (o.contains("outcome")) s.oracle.outcome = number_list(o.at("outcome"), "verify.oracle.outcome");
            s.oracle.base_slices = static_cast<int>(number_or(o, "base_slices", "verify.oracle", 16));
            if (s.oracle.base_slices < 4) bad("verify.oracle.base_slices", "must be >= 4");
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// running

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const fs::path& file, const std::string& content) {
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, file);
}

struct Context {
    const Scenario& s;
    UniformGrid x_grid;
    std::optional<WaveFunction> psi;
    StructuredPropagator prop;
    StructuredPropagator isolated;

    GaussianTomogram packet() const {
        GaussianTomogram g = gaussian_packet_tomogram(s.state.p, s.state.l);
        g.mean_form.alpha = s.state.q0;
        return g;
    }
    TomogramFamily family() const {
        const WaveFunction w = *psi;
        const UniformGrid xg = x_grid;
        return [w, xg](double mu, double nu) { return tomogram_from_wavefunction(w, mu, nu, xg); };
    }
};

bool particle_case(const Scenario& s) {
    return s.model.omega == 0.0 && (s.measurement.uniform || s.measurement.n_modes == 0);
}

StructuredPropagator choose_propagator(const Scenario& s) {
    if (particle_case(s)) return particle_measured_propagator(s.model, s.measurement);
    return oscillator_measured_propagator(s.model, s.measurement);
}

std::string tomogram_table(const Context& c, bool evolved) {
    std::string out = "X,mu,nu,value\n";
    const GaussianTomogram g = evolved ? apply_propagator(c.packet(), c.prop) : c.packet();
    const TomogramFamily fam = c.psi ? (evolved ? apply_propagator(c.family(), c.prop) : c.family()) : TomogramFamily{};
    for (const auto& [mu, nu] : c.s.directions) {
        std::vector<double> values(c.x_grid.size());
        if (c.psi) {
            const SampledTomogram t = fam(mu, nu);
            for (int i = 0; i < c.x_grid.size(); ++i) values[i] = t(c.x_grid[i]);
        } else {
            for (int i = 0; i < c.x_grid.size(); ++i) values[i] = g(c.x_grid[i], mu, nu);
        }
        for (int i = 0; i < c.x_grid.size(); ++i)
            out += fmt(c.x_grid[i]) + "," + fmt(mu) + "," + fmt(nu) + "," + fmt(values[i]) + "\n";
    }
    return out;
}

std::string entropy_table(const Context& c) {
    std::string out = "mu,nu,entropy,entropy_delta\n";
    for (const auto& [mu, nu] : c.s.directions) {
        double S, dS;
        if (!c.psi) {
            const GaussianTomogram measured = apply_propagator(c.packet(), c.prop);
            S = symplectic_entropy_gaussian(measured, mu, nu);
            if (particle_case(c.s)) {
                dS = entropy_delta(c.s.state.p, c.s.state.l, c.s.model, c.s.measurement, mu, nu);
            } else {
                const GaussianTomogram free = apply_propagator(c.packet(), c.isolated);
                dS = 0.5 * std::log1p(2.0 * c.prop.variance(mu, nu) / free.width2(mu, nu));
            }
        } else {
            const SampledTomogram measured = apply_propagator(c.family(), c.prop)(mu, nu);
            const SampledTomogram free = apply_propagator(c.family(), c.isolated)(mu, nu);
            S = entropy_numeric(c.x_grid, measured.values);
            dS = S - entropy_numeric(c.x_grid, free.values);
        }
        out += fmt(mu) + "," + fmt(nu) + "," + fmt(S) + "," + fmt(dS) + "\n";
    }
    return out;
}

TaskOutcome verify_pde(const Scenario& s, double tol, std::string& table) {
    TaskOutcome r{"verify-pde", {}, true, {}};
    if (s.model.omega != 0.0 || !s.measurement.uniform || !std::isfinite(s.measurement.accuracies.front()))
        throw DomainError("verify-pde needs omega = 0 and a finite uniform accuracy");
    const double da = s.measurement.accuracies.front();
    const double c = da * da * s.measurement.duration;
    const double k = s.pde.k_factor / c;
    const PropagatorFamily family = particle_family_scaled(s.model, c);
    table = "X_prime,X,mu,nu,t,residual_step,residual_half_step\n";
    double worst = 0.0, worst_coarse = 0.0;
    for (const auto& x : s.pde.samples) {
        const double r1 = fokker_planck_residual(family, s.model, x, k, s.pde.step).residual;
        const double r2 = fokker_planck_residual(family, s.model, x, k, 0.5 * s.pde.step).residual;
        worst = std::max(worst, std::abs(r2));
        worst_coarse = std::max(worst_coarse, std::abs(r1));
        table += fmt(x.X_prime) + "," + fmt(x.X) + "," + fmt(x.mu) + "," + fmt(x.nu) + "," + fmt(x.t) + "," +
                 fmt(r1) + "," + fmt(r2) + "\n";
    }
    const double order = worst > 0.0 ? std::log2(worst_coarse / worst) : INFINITY;
    std::ostringstream os;
    os << "k = " << k << " (k_factor " << s.pde.k_factor << ", c = " << c << "): max residual " << worst
       << " at half step, observed order " << order << ", tolerance " << tol;
    r.report = os.str();
    r.passed = worst <= tol;
    return r;
}

TaskOutcome verify_oracle(const Scenario& s, double tol, std::string& table) {
    TaskOutcome r{"verify-oracle", {}, true, {}};
    // at most two measured modes keep the sliced integral small
    const int n = std::min(2, s.measurement.uniform ? 2 : s.measurement.n_modes);
    std::vector<double> da;
    for (int i = 1; i <= n; ++i) da.push_back(s.measurement.accuracy(i));
    const MeasurementSpec meas = n > 0 ? MeasurementSpec::per_mode(s.measurement.duration, da)
                                       : MeasurementSpec::none(s.measurement.duration);
    const SpectralOutcome a{s.oracle.outcome};
    table = "q_i,q_f,path_re,path_im,analytic_re,analytic_im,relative_error\n";
    double worst = 0.0;
    for (const auto& [qi, qf] : s.oracle.endpoints) {
        const cplx u = discrete_path_amplitude_extrapolated(s.model, meas, a, qi, qf, s.oracle.base_slices);
        const cplx w = weighted_amplitude(s.model, meas, a, qi, qf);
        const double rel = std::abs(u - w) / std::abs(w);
        worst = std::max(worst, rel);
        table += fmt(qi) + "," + fmt(qf) + "," + fmt(u.real()) + "," + fmt(u.imag()) + "," + fmt(w.real()) + "," +
                 fmt(w.imag()) + "," + fmt(rel) + "\n";
    }
    std::ostringstream os;
    os << n << " measured modes: max relative error " << worst << ", tolerance " << tol;
    r.report = os.str();
    r.passed = worst <= tol;
    return r;
}

json scenario_json(const Scenario& s) {
    json j;
    j["model"] = {{"mass", s.model.mass}, {"omega", s.model.omega}};
    json f;
    switch (s.force.kind) {
        case ForceSpec::Kind::none: f = {{"kind", "none"}}; break;
        case ForceSpec::Kind::constant: f = {{"kind", "constant"}, {"value", s.force.value}}; break;
        case ForceSpec::Kind::table: f = {{"kind", "table"}, {"t", s.force.t}, {"f", s.force.f}}; break;
    }
    j["model"]["force"] = f;
    json m = {{"duration", s.measurement.duration}, {"uniform", s.measurement.uniform},
              {"n_modes", s.measurement.n_modes}};
    m["accuracies"] = s.measurement.accuracies;
    j["measurement"] = m;
    if (s.state.kind == StateSpec::Kind::gaussian_packet)
        j["state"] = {{"kind", "gaussian_packet"}, {"p", s.state.p}, {"l", s.state.l}, {"q0", s.state.q0}};
    else
        j["state"] = {{"kind", "wavefunction"}, {"file", s.state.file.string()}};
    json dirs = json::array();
    for (const auto& [mu, nu] : s.directions) dirs.push_back({mu, nu});
    j["queries"] = {{"directions", dirs}, {"x_grid", {{"min", s.x_min}, {"max", s.x_max}, {"points", s.x_points}}}};
    j["tasks"] = s.tasks;
    return j;
}

}  // namespace

RunReport run_scenario(const Scenario& s, const fs::path& out_dir, RunMode mode,
                       std::optional<double> tolerance_override) {
    fs::create_directories(out_dir);
    Context c{s, UniformGrid(s.x_min, s.x_max, s.x_points), std::nullopt, {}, {}};
    if (s.state.kind == StateSpec::Kind::wavefunction) {
        double q_min = 0.0, q_max = 0.0;
        std::vector<cplx> amps = read_wavefunction_csv(s.state.file, q_min, q_max);
        const int n = static_cast<int>(amps.size());
        c.psi.emplace(QGrid(q_min, q_max, n), std::move(amps));
    }

    std::vector<std::string> tasks;
    for (const auto& t : s.tasks)
        if (mode == RunMode::run || t.rfind("verify-", 0) == 0) tasks.push_back(t);
    if (mode == RunMode::verify && tasks.empty()) tasks = {"verify-pde", "verify-oracle"};

    const bool needs_prop = std::any_of(tasks.begin(), tasks.end(),
                                        [](const std::string& t) { return t == "propagate" || t == "entropy"; });
    json precision = nullptr;
    if (needs_prop) {
        c.prop = choose_propagator(s);
        c.isolated = c.prop;
        c.isolated.sigma2 = {};
        if (!particle_case(s)) {
            const PrecisionCoefficients pc = precision_coefficients(s.measurement, s.model);
            precision = {{"kappa", pc.kappa}, {"xi", pc.xi}, {"n_terms_used", pc.n_terms_used},
                         {"tail_estimate", pc.tail_estimate}, {"tolerance", 1e-10}};
        } else {
            precision = {{"closed_form", true}};
        }
    }

    RunReport report;
    json tolerances = json::object();
    for (const auto& t : tasks) {
        TaskOutcome outcome{t, {}, true, {}};
        std::string table;
        if (t == "tomogram") {
            table = tomogram_table(c, false);
        } else if (t == "propagate") {
            table = tomogram_table(c, true);
        } else if (t == "entropy") {
            table = entropy_table(c);
        } else if (t == "verify-pde") {
            const double tol = tolerance_override.value_or(s.tolerance.value_or(kPdeTolerance));
            tolerances[t] = tol;
            outcome = verify_pde(s, tol, table);
        } else if (t == "verify-oracle") {
            const double tol = tolerance_override.value_or(s.tolerance.value_or(kOracleTolerance));
            tolerances[t] = tol;
            outcome = verify_oracle(s, tol, table);
        }
        std::string name = t;
        std::replace(name.begin(), name.end(), '-', '_');
        outcome.file = out_dir / (name + ".csv");
        write_atomic(outcome.file, table);
        if (!outcome.passed) report.exit_code = 4;
        report.tasks.push_back(outcome);
    }

    json manifest;
    manifest["scenario"] = scenario_json(s);
    manifest["mode"] = mode == RunMode::run ? "run" : "verify";
    manifest["number_format"] = "%.17g";
    manifest["tolerances"] = tolerances;
    manifest["tolerances"]["quadrature"] = 1e-10;
    manifest["tolerances"]["amplitude_tail"] = AmplitudeOptions{}.tail_tol;
    manifest["verify_settings"] = {{"pde_step", s.pde.step}, {"pde_k_factor", s.pde.k_factor},
                                   {"oracle_base_slices", s.oracle.base_slices},
                                   {"oracle_richardson_slices",
                                    {s.oracle.base_slices, 2 * s.oracle.base_slices, 4 * s.oracle.base_slices}}};
    manifest["precision_coefficients"] = precision;
    json outputs = json::array();
    for (const auto& t : report.tasks)
        outputs.push_back({{"task", t.task}, {"file", t.file.filename().string()}, {"passed", t.passed},
                           {"report", t.report}});
    manifest["outputs"] = outputs;
    manifest["exit_code"] = report.exit_code;
    write_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return report;
}

}  // namespace symtomo
