#include "qsearch/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "qsearch/bspline.hpp"
#include "qsearch/dynamics.hpp"
#include "qsearch/graph.hpp"
#include "qsearch/optimize.hpp"
#include "qsearch/protocol.hpp"

namespace qsearch {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void config_fail(int line, const std::string& what) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " +
                                what);
}

}  // namespace

ScenarioConfig ScenarioConfig::from_string(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            config_fail(lineno, "expected \"key = value\"");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) config_fail(lineno, "empty key");
        cfg.set(key, value);
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

std::pair<std::string, std::string>* ScenarioConfig::find(
    const std::string& key) {
    for (auto& e : entries_)
        if (e.first == key) return &e;
    return nullptr;
}

const std::pair<std::string, std::string>* ScenarioConfig::find(
    const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return &e;
    return nullptr;
}

bool ScenarioConfig::has(const std::string& key) const {
    return find(key) != nullptr;
}

std::string ScenarioConfig::get(const std::string& key) const {
    const auto* e = find(key);
    if (!e) throw std::invalid_argument("config: missing key \"" + key + "\"");
    return e->second;
}

std::string ScenarioConfig::get(const std::string& key,
                                const std::string& fallback) const {
    const auto* e = find(key);
    return e ? e->second : fallback;
}

double ScenarioConfig::require_double(const std::string& key) const {
    const std::string v = get(key);
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size())
        throw std::invalid_argument("config: bad number for \"" + key + "\"");
    return x;
}

double ScenarioConfig::get_double(const std::string& key,
                                  double fallback) const {
    return has(key) ? require_double(key) : fallback;
}

int ScenarioConfig::get_int(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size())
        throw std::invalid_argument("config: bad integer for \"" + key + "\"");
    return x;
}

long ScenarioConfig::get_long(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size())
        throw std::invalid_argument("config: bad integer for \"" + key + "\"");
    return x;
}

std::vector<int> ScenarioConfig::get_int_list(const std::string& key) const {
    std::vector<int> out;
    std::string v = get(key);
    for (auto& ch : v)
        if (ch == ',') ch = ' ';
    std::istringstream in(v);
    int x;
    while (in >> x) out.push_back(x);
    if (!in.eof())
        throw std::invalid_argument("config: bad integer list for \"" + key +
                                    "\"");
    return out;
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
    if (auto* e = find(key)) e->second = value;
    else entries_.emplace_back(key, value);
}

std::string ScenarioConfig::render() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
    return out.str();
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

struct Scenario {
    GraphSpec graph;
    EquivalencePartition partition;
    double g = 1.0;
    double gamma = 0.0;
    IntegratorConfig integ;
};

GraphSpec graph_from_config(const ScenarioConfig& cfg) {
    const std::string kind = cfg.get("graph", "complete");
    if (kind == "file") return load_edge_list(cfg.get("graph_file"));
    const int n = cfg.get_int("n", 0);
    if (n <= 0) throw std::invalid_argument("config: need n > 0");
    std::vector<int> marked{0};
    if (cfg.has("marked")) marked = cfg.get_int_list("marked");
    if (kind == "complete") return build_complete(n, std::move(marked));
    if (kind == "cycle") return build_cycle(n, std::move(marked));
    throw std::invalid_argument("config: unknown graph \"" + kind + "\"");
}

Scenario scenario_from_config(const ScenarioConfig& cfg) {
    Scenario sc;
    sc.graph = graph_from_config(cfg);
    sc.partition = reduce(sc.graph);
    sc.g = cfg.get_double("g", 1.0);
    if (cfg.has("gamma")) {
        sc.gamma = cfg.require_double("gamma");
    } else {
        const int n = sc.graph.n, N = sc.graph.num_marked();
        if (n == 2 * N)
            throw std::invalid_argument(
                "config: n == 2N makes gamma singular; set gamma explicitly");
        sc.gamma = sc.g / (n - 2 * N);
    }
    sc.integ.rel_tol = cfg.get_double("rel_tol", 1e-10);
    sc.integ.abs_tol = cfg.get_double("abs_tol", 1e-12);
    return sc;
}

// Per-class zeta vector from zeta_marked/zeta_unmarked, or zeta_list.
VectorXi zeta_from_config(const ScenarioConfig& cfg,
                          const std::vector<bool>& marked_flag) {
    const int m = static_cast<int>(marked_flag.size());
    VectorXi zeta(m);
    if (cfg.has("zeta_list")) {
        auto list = cfg.get_int_list("zeta_list");
        if (static_cast<int>(list.size()) != m)
            throw std::invalid_argument(
                "config: zeta_list must have one entry per class");
        for (int k = 0; k < m; ++k) zeta[k] = list[k];
        return zeta;
    }
    const int zm = cfg.get_int("zeta_marked", 0);
    const int zu = cfg.get_int("zeta_unmarked", 0);
    for (int k = 0; k < m; ++k) zeta[k] = marked_flag[k] ? zm : zu;
    return zeta;
}

std::vector<BSplineControl> splines_from_file(const std::string& path,
                                              int num_classes, double t_end) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open spline file: " + path);
    std::vector<BSplineControl> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::vector<double> pts;
        double x;
        while (ls >> x) pts.push_back(x);
        if (!ls.eof())
            throw std::invalid_argument("spline file line " +
                                        std::to_string(lineno) +
                                        ": bad control point");
        VectorX p = Eigen::Map<VectorX>(pts.data(), pts.size());
        out.emplace_back(p, t_end);
    }
    if (static_cast<int>(out.size()) != num_classes)
        throw std::invalid_argument(
            "spline file: expected one control-point line per class (" +
            std::to_string(num_classes) + ")");
    return out;
}

ControlScheme scheme_from_config(const ScenarioConfig& cfg,
                                 const Scenario& sc, double t_end) {
    const auto& marked_flag = sc.partition.marked_flag;
    const int m = static_cast<int>(marked_flag.size());
    VectorXi zeta = zeta_from_config(cfg, marked_flag);
    const std::string mode = cfg.get("control", "constant");

    if (mode == "analytic") {
        if (sc.partition.num_classes() != 2 || !sc.partition.marked_flag[0])
            throw std::invalid_argument(
                "config: analytic control needs a complete-graph scenario "
                "with both marked and unmarked nodes");
        CompleteProtocol p;
        p.n = sc.graph.n;
        p.N = sc.graph.num_marked();
        p.g = sc.g;
        p.zeta_marked = zeta[0];
        p.zeta_unmarked = zeta[1];
        const double uu = cfg.get_double("u_unmarked", 0.0);
        if (uu != 0.0) p.u_unmarked = [uu](double) { return uu; };
        return analytic_control_scheme(p);
    }
    if (mode == "constant") {
        VectorX values(m);
        const double um = cfg.get_double("u_marked", 0.0);
        const double uu = cfg.get_double("u_unmarked", 0.0);
        for (int k = 0; k < m; ++k) values[k] = marked_flag[k] ? um : uu;
        return constant_controls(zeta, values);
    }
    if (mode == "spline") {
        auto splines = splines_from_file(cfg.get("spline_file"), m, t_end);
        ControlScheme s;
        s.zeta = zeta;
        for (auto& sp : splines)
            s.u.push_back([sp](double t) { return sp(t); });
        return s;
    }
    throw std::invalid_argument("config: unknown control mode \"" + mode +
                                "\"");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << content;
}

std::string header_block(const ScenarioConfig& cfg, const std::string& command) {
    std::ostringstream out;
    out << "# qsearch " << command << '\n';
    std::istringstream rendered(cfg.render());
    std::string line;
    while (std::getline(rendered, line)) out << "# " << line << '\n';
    return out.str();
}

}  // namespace

int cmd_analytic(const ScenarioConfig& cfg, const std::string& out_path,
                 std::ostream& info) {
    if (cfg.get("graph", "complete") != "complete")
        throw std::invalid_argument("analytic: complete-graph scenarios only");
    {
        auto g = graph_from_config(cfg);
        if (g.n <= 2 * g.num_marked())
            throw std::invalid_argument(
                "analytic: the closed-form protocol requires n > 2N");
    }
    Scenario sc = scenario_from_config(cfg);
    const int n = sc.graph.n, N = sc.graph.num_marked();

    CompleteProtocol p;
    p.n = n;
    p.N = N;
    p.g = sc.g;
    p.zeta_marked = cfg.get_int("zeta_marked", 0);
    p.zeta_unmarked = cfg.get_int("zeta_unmarked", 0);
    const double uu = cfg.get_double("u_unmarked", 0.0);
    if (uu != 0.0) p.u_unmarked = [uu](double) { return uu; };

    const double tf = end_time(p);
    const int samples = cfg.get_int("samples", 401);

    std::ostringstream out;
    out << header_block(cfg, "analytic");
    out << "# t_f = " << format_value(tf) << '\n';
    out << "time,r_star,r,probability,u_star,u\n";
    for (int k = 0; k < samples; ++k) {
        const double t = tf * k / (samples - 1);
        const double rs = r_star_analytic(t, p);
        const double r = probability_constraint(rs, n, N);
        const auto [u, us] = analytic_control(t, p);
        out << format_value(t) << ',' << format_value(rs) << ','
            << format_value(r) << ',' << format_value(N * rs * rs) << ','
            << format_value(us) << ',' << format_value(u) << '\n';
    }
    write_file(out_path, out.str());
    info << "analytic protocol n=" << n << " N=" << N
         << " t_f=" << format_value(tf) << " -> " << out_path << '\n';
    return 0;
}

int cmd_simulate(const ScenarioConfig& cfg, const std::string& out_path,
                 std::ostream& info) {
    Scenario sc = scenario_from_config(cfg);
    const int m = sc.partition.num_classes();

    double t_end = cfg.get_double("t_end", 0.0);
    if (t_end <= 0.0 && cfg.get("control", "constant") == "analytic") {
        CompleteProtocol p;
        p.n = sc.graph.n;
        p.N = sc.graph.num_marked();
        p.g = sc.g;
        t_end = end_time(p);
    }
    if (t_end <= 0.0)
        throw std::invalid_argument("simulate: need t_end > 0");

    ControlScheme scheme = scheme_from_config(cfg, sc, t_end);
    SystemState st = initial_state(sc.partition);
    MatrixX coupling = quotient_coupling(sc.graph, sc.partition);

    const double gamma = sc.gamma;
    OdeRhs ode = [scheme, coupling, gamma](double t, const VectorX& y,
                                           VectorX& dy) {
        dy = pack_cartesian(
            rhs_reduced(t, unpack_cartesian(y), scheme, gamma, coupling));
    };
    Trajectory traj =
        integrate(ode, pack_cartesian(st.amps), 0.0, t_end, sc.integ);

    const int samples = cfg.get_int("samples", 401);
    std::ostringstream out;
    out << header_block(cfg, "simulate");
    out << "# classes = " << m << '\n';
    out << "time";
    for (int k = 0; k < m; ++k)
        out << ",r_" << k << ",prob_" << k << ",u_" << k;
    out << ",total\n";
    for (int s = 0; s < samples; ++s) {
        const double t = t_end * s / (samples - 1);
        VectorXc amps = unpack_cartesian(traj.sample(t));
        out << format_value(t);
        double total = 0.0;
        for (int k = 0; k < m; ++k) {
            const double r = std::abs(amps[k]);
            const double prob = st.multiplicity[k] * r * r;
            total += prob;
            out << ',' << format_value(r) << ',' << format_value(prob) << ','
                << format_value(scheme.control(k, t));
        }
        out << ',' << format_value(total) << '\n';
    }
    write_file(out_path, out.str());
    info << "simulated " << m << " classes to t=" << format_value(t_end)
         << " -> " << out_path << '\n';
    return 0;
}

int cmd_error_scan(const ScenarioConfig& cfg, const std::string& out_path,
                   std::ostream& info) {
    const double g = cfg.get_double("g", 1.0);
    const double nu = cfg.get_double("nu", 0.5);
    const double nu_star = cfg.get_double("nu_star", 0.5);
    std::vector<int> ns = cfg.get_int_list("n_list");
    if (ns.empty()) throw std::invalid_argument("error-scan: empty n_list");

    IntegratorConfig integ;
    integ.rel_tol = cfg.get_double("rel_tol", 1e-10);
    integ.abs_tol = cfg.get_double("abs_tol", 1e-12);

    std::ostringstream out;
    out << header_block(cfg, "error-scan");
    out << "n,E,failed\n";
    for (int n : ns) {
        CompleteProtocol p;
        p.n = n;
        p.N = 1;
        p.g = g;
        PerturbationSpec pert{nu_star, nu};
        try {
            const double e = perturbed_error(p, pert, integ);
            out << n << ',' << format_value(e) << ",0\n";
        } catch (const IntegrationError&) {
            out << n << ",nan,1\n";
        }
    }
    write_file(out_path, out.str());
    info << "error scan over " << ns.size() << " sizes -> " << out_path
         << '\n';
    return 0;
}

namespace {

std::vector<VectorXi> zeta_assignments_from_config(const ScenarioConfig& cfg,
                                                   int num_shells) {
    std::vector<int> set = cfg.has("zeta_set") ? cfg.get_int_list("zeta_set")
                                               : std::vector<int>{0, 1, 2};
    if (set.empty()) throw std::invalid_argument("optimize: empty zeta_set");
    const std::string mode = cfg.get("zeta_mode", "split");
    std::vector<VectorXi> out;
    if (mode == "split") {
        // one value for the marked shell, one shared by all unmarked shells
        for (int zm : set)
            for (int zu : set) {
                VectorXi z = VectorXi::Constant(num_shells, zu);
                z[0] = zm;
                out.push_back(z);
            }
        return out;
    }
    if (mode == "full") {
        double combos = std::pow(static_cast<double>(set.size()), num_shells);
        if (combos > 4096)
            throw std::invalid_argument(
                "optimize: full zeta grid too large (> 4096 assignments)");
        VectorXi z = VectorXi::Constant(num_shells, set[0]);
        std::vector<int> idx(num_shells, 0);
        for (;;) {
            for (int k = 0; k < num_shells; ++k) z[k] = set[idx[k]];
            out.push_back(z);
            int k = 0;
            while (k < num_shells && ++idx[k] == static_cast<int>(set.size())) {
                idx[k] = 0;
                ++k;
            }
            if (k == num_shells) break;
        }
        return out;
    }
    throw std::invalid_argument("optimize: unknown zeta_mode \"" + mode +
                                "\"");
}

void append_peak(std::ostringstream& out, const PeakResult& pk) {
    out << "peak_time = " << format_value(pk.t)
        << " ; peak_value = " << format_value(pk.value)
        << " ; peak_interior = " << (pk.interior ? 1 : 0);
}

}  // namespace

int cmd_optimize(const ScenarioConfig& cfg, const std::string& out_path,
                 std::ostream& info) {
    Scenario sc = scenario_from_config(cfg);
    if (sc.graph.num_marked() != 1)
        throw std::invalid_argument("optimize: exactly one marked node");

    OptimizationProblem prob;
    prob.shells = shell_descriptor(sc.graph);
    prob.gamma = sc.gamma;
    prob.zeta_assignments =
        zeta_assignments_from_config(cfg, prob.shells.num_shells());
    prob.spline_points = cfg.get_int("spline_points", 5);
    prob.bound = cfg.get_double("bound", 20.0);
    prob.tf_min = cfg.get_double("tf_min", 0.1);
    prob.tf_max = cfg.get_double("tf_max", 10.0);
    const std::string obj = cfg.get("objective", "peak");
    if (obj == "peak") prob.objective = Objective::FirstPeak;
    else if (obj == "terminal") prob.objective = Objective::Terminal;
    else throw std::invalid_argument("optimize: unknown objective \"" + obj + "\"");
    prob.eval_config.rel_tol = cfg.get_double("opt_rel_tol", 1e-8);
    prob.eval_config.abs_tol = cfg.get_double("opt_abs_tol", 1e-10);

    const long budget = cfg.get_long("budget", 20000);
    const auto seed = static_cast<std::uint64_t>(cfg.get_long("seed", 1));

    OptimizeResult res = optimize(prob, budget, seed);

    std::ostringstream out;
    out << header_block(cfg, "optimize");
    out << "# evaluations = " << res.evaluations << '\n';
    out << "# best_objective = " << format_value(res.best.objective) << '\n';
    out << "# best_terminal = " << format_value(res.best.terminal) << '\n';
    out << "# best_peak_time = " << format_value(res.best.peak.t) << '\n';
    out << "# best_peak_value = " << format_value(res.best.peak.value) << '\n';
    out << "# best_peak_interior = " << (res.best.peak.interior ? 1 : 0) << '\n';
    out << "# best_zeta =";
    for (int k = 0; k < res.best.zeta.size(); ++k) out << ' ' << res.best.zeta[k];
    out << '\n';
    out << "# best_t_f = " << format_value(res.best_trajectory.t_end()) << '\n';
    out << "# best_params =";
    for (int k = 0; k < res.best.params.size(); ++k)
        out << ' ' << format_value(res.best.params[k]);
    out << '\n';
    auto diag = pmp_diagnostics(prob, res.best.zeta, res.best.params);
    if (diag.available) {
        out << "# adjoint_lambda_sum_max = " << format_value(diag.max_lambda_sum)
            << '\n';
        out << "# adjoint_optimality_residual_max = "
            << format_value(diag.max_residual) << '\n';
    } else {
        out << "# adjoint_diagnostics = unavailable (" << diag.note << ")\n";
    }
    for (size_t a = 0; a < res.per_assignment.size(); ++a) {
        const auto& rep = res.per_assignment[a];
        out << "# assignment " << a << ": zeta =";
        for (int k = 0; k < rep.zeta.size(); ++k) out << ' ' << rep.zeta[k];
        out << " ; objective = " << format_value(rep.objective)
            << " ; terminal = " << format_value(rep.terminal) << " ; ";
        append_peak(out, rep.peak);
        out << " ; evaluations = " << rep.evaluations << '\n';
    }

    // best trajectory samples
    const int samples = cfg.get_int("samples", 401);
    const int m = prob.shells.num_shells();
    const double tf = res.best_trajectory.t_end();
    out << "time";
    for (int k = 0; k < m; ++k) out << ",r_" << k << ",prob_" << k;
    out << ",total\n";
    VectorXi mult = shell_multiplicities(prob.shells);
    for (int s = 0; s < samples; ++s) {
        const double t = tf * s / (samples - 1);
        VectorXc amps = unpack_cartesian(res.best_trajectory.sample(t));
        out << format_value(t);
        double total = 0.0;
        for (int k = 0; k < m; ++k) {
            const double r = std::abs(amps[k]);
            const double prob_k = mult[k] * r * r;
            total += prob_k;
            out << ',' << format_value(r) << ',' << format_value(prob_k);
        }
        out << ',' << format_value(total) << '\n';
    }
    write_file(out_path, out.str());
    info << "optimize: best objective " << format_value(res.best.objective)
         << " (terminal " << format_value(res.best.terminal) << ", first peak "
         << format_value(res.best.peak.value) << " at t="
         << format_value(res.best.peak.t) << ") after " << res.evaluations
         << " evaluations -> " << out_path << '\n';
    return 0;
}

int cmd_reduce(const ScenarioConfig& cfg, const std::string& out_path,
               std::ostream& info) {
    Scenario sc = scenario_from_config(cfg);
    std::ostringstream out;
    out << header_block(cfg, "reduce");
    out << "classes = " << sc.partition.num_classes() << '\n';
    for (int k = 0; k < sc.partition.num_classes(); ++k) {
        out << "class " << k << ": size = " << sc.partition.multiplicity[k]
            << ", marked = " << (sc.partition.marked_flag[k] ? 1 : 0)
            << ", nodes =";
        for (int v : sc.partition.classes[k]) out << ' ' << v;
        out << '\n';
    }
    if (sc.graph.num_marked() == 1) {
        try {
            ShellDescriptor s = shell_descriptor(sc.graph);
            out << "shells: d = " << s.d << '\n';
            out << "n_i =";
            for (int i = 0; i <= s.d; ++i) out << ' ' << s.nshell[i];
            out << '\n' << "c_i =";
            for (int i = 0; i < s.d; ++i) out << ' ' << s.c[i];
            out << '\n';
        } catch (const ShellError& e) {
            out << "shells: " << e.what() << '\n';
        }
    } else {
        out << "shells: defined for exactly one marked node\n";
    }
    if (out_path.empty()) {
        info << out.str();
    } else {
        write_file(out_path, out.str());
        info << "reduction written -> " << out_path << '\n';
    }
    return 0;
}

}  // namespace qsearch
