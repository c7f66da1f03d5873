// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "qsearch/bspline.hpp"
#include "qsearch/dynamics.hpp"
#include "qsearch/graph.hpp"
#include "qsearch/optimize.hpp"
#include "qsearch/pmp.hpp"
#include "qsearch/protocol.hpp"
#include "qsearch/radau.hpp"
#include "qsearch/scenario.hpp"

using namespace qsearch;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// Conservation audit fed by criteria 1, 5 and 6; reported as criterion 3.
double worst_conservation = 0.0;

void audit_conservation(const Trajectory& traj, const VectorXi& mult) {
    const int m = static_cast<int>(mult.size());
    for (int s = 0; s <= 100; ++s) {
        const double t =
            traj.t_begin() + (traj.t_end() - traj.t_begin()) * s / 100.0;
        VectorXc amps = unpack_cartesian(traj.sample(t));
        double total = 0.0;
        for (int k = 0; k < m; ++k) total += mult[k] * std::norm(amps[k]);
        worst_conservation =
            std::max(worst_conservation, std::abs(total - 1.0));
    }
}

Trajectory integrate_protocol(const CompleteProtocol& p,
                              const ControlScheme& scheme, double t1) {
    const ModelParams params = protocol_params(p);
    MatrixX coupling(2, 2);
    coupling << 0.0, p.n - p.N, p.N, 0.0;
    VectorXi mult(2);
    mult << p.N, p.n - p.N;
    SystemState st = initial_state(mult, {true, false});
    OdeRhs ode = [params, scheme, coupling](double t, const VectorX& y,
                                            VectorX& dy) {
        dy = pack_cartesian(rhs_reduced(t, unpack_cartesian(y), scheme,
                                        params.gamma, coupling));
    };
    return integrate(ode, pack_cartesian(st.amps), 0.0, t1);
}

const std::vector<std::pair<int, int>> kProtocolCases = {
    {3, 1}, {10, 1}, {10, 3}, {64, 1}, {65, 31}};

void criterion_1() {
    double worst_sup = 0.0, worst_final = 1.0, worst_theta = 0.0;
    bool ok = true;
    for (auto [n, N] : kProtocolCases) {
        for (int zm = 0; zm <= 2; ++zm)
            for (int zu = 0; zu <= 2; ++zu) {
                CompleteProtocol p;
                p.n = n;
                p.N = N;
                p.g = 1.0;
                p.zeta_marked = zm;
                p.zeta_unmarked = zu;
                const double tf = end_time(p);
                auto traj =
                    integrate_protocol(p, analytic_control_scheme(p), tf);

                VectorXi mult(2);
                mult << N, n - N;
                audit_conservation(traj, mult);

                double sup = 0.0, theta_dev = 0.0;
                for (int s = 0; s <= 400; ++s) {
                    const double t = tf * s / 400;
                    VectorXc amps = unpack_cartesian(traj.sample(t));
                    sup = std::max(sup, std::abs(std::abs(amps[0]) -
                                                 r_star_analytic(t, p)));
                    if (std::abs(amps[1]) > 1e-6) {
                        double Theta = std::arg(amps[1]) - std::arg(amps[0]);
                        Theta = std::remainder(Theta, 2 * std::numbers::pi);
                        theta_dev =
                            std::max(theta_dev,
                                     std::abs(Theta - std::numbers::pi / 2));
                    }
                }
                VectorXc xf = unpack_cartesian(traj.final_state());
                const double final_prob = N * std::norm(xf[0]);
                worst_sup = std::max(worst_sup, sup);
                worst_final = std::min(worst_final, final_prob);
                worst_theta = std::max(worst_theta, theta_dev);
                if (sup > 1e-6 || final_prob < 1.0 - 1e-6) ok = false;
            }
    }
    if (worst_theta > 1e-7) ok = false;
    report(1, ok,
           "analytic-protocol fidelity over 5 cases x 9 nonlinearities: sup "
           "error " +
               fmt(worst_sup) + " (<= 1e-6), worst terminal deficit " +
               fmt(1.0 - worst_final) + " (<= 1e-6), phase deviation " +
               fmt(worst_theta) + " (<= 1e-7)");
}

void criterion_2() {
    double worst = 0.0;
    bool ok = true;
    for (auto [n, N] : kProtocolCases) {
        CompleteProtocol p;
        p.n = n;
        p.N = N;
        p.g = 1.0;
        const double tf = end_time(p);
        // the zeta = 0 controls u_* = g, u = 0 extend beyond t_f, so the
        // success probability has an interior maximum at t_f
        VectorXi zeta = VectorXi::Zero(2);
        VectorX uvals(2);
        uvals << 1.0, 0.0;
        auto traj = integrate_protocol(p, constant_controls(zeta, uvals),
                                       1.15 * tf);
        const int Ncopy = N;
        auto peak = find_first_peak(traj, [Ncopy](const VectorX& y) {
            const Eigen::Index m = y.size() / 2;
            return Ncopy * (y[0] * y[0] + y[m] * y[m]);
        });
        const double diff = std::abs(peak.t - tf);
        worst = std::max(worst, diff);
        if (!peak.interior || diff > 1e-6) ok = false;

        CompleteProtocol p2 = p;
        p2.g = 2.0;
        if (std::abs(end_time(p2) - tf / 2.0) > 1e-15 * tf) ok = false;
    }
    report(2, ok,
           "end-time formula matches the integrated success-probability "
           "argmax: worst |t_peak - t_f| = " +
               fmt(worst) + " (<= 1e-6); end_time scales exactly as 1/g");
}

void criterion_4() {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> zdist(0, 2);
    std::uniform_real_distribution<double> pdist(-2.0, 2.0);
    std::uniform_real_distribution<double> gdist(0.4, 1.1);

    double worst = 0.0;
    const double horizon = 2.5;

    std::vector<GraphSpec> graphs;
    for (int n = 4; n <= 8; ++n)
        for (int N : {1, 2, 3}) {
            if (N >= n) continue;
            std::vector<int> marked(N);
            for (int k = 0; k < N; ++k) marked[k] = k;
            graphs.push_back(build_complete(n, marked));
        }
    graphs.push_back(build_cycle(6, {0}));

    for (const auto& g : graphs) {
        auto part = reduce(g);
        const int m = part.num_classes();
        const double gamma = gdist(rng);

        ControlScheme scheme;
        scheme.zeta.resize(m);
        for (int k = 0; k < m; ++k) {
            scheme.zeta[k] = zdist(rng);
            VectorX pts(5);
            for (int j = 0; j < 5; ++j) pts[j] = pdist(rng);
            BSplineControl sp(pts, horizon);
            scheme.u.push_back([sp](double t) { return sp(t); });
        }
        auto full_scheme = per_node_scheme(scheme, part.class_of);

        auto st = initial_state(part);
        VectorXc x0(g.n);
        for (int v = 0; v < g.n; ++v) x0[v] = st.amps[part.class_of[v]];

        MatrixXi L = laplacian(g);
        OdeRhs full = [full_scheme, L, gamma](double t, const VectorX& y,
                                              VectorX& dy) {
            dy = pack_cartesian(
                rhs_full(t, unpack_cartesian(y), full_scheme, gamma, L));
        };
        MatrixX coupling = quotient_coupling(g, part);
        OdeRhs red = [scheme, coupling, gamma](double t, const VectorX& y,
                                               VectorX& dy) {
            dy = pack_cartesian(
                rhs_reduced(t, unpack_cartesian(y), scheme, gamma, coupling));
        };
        auto traj_full = integrate(full, pack_cartesian(x0), 0.0, horizon);
        auto traj_red = integrate(red, pack_cartesian(st.amps), 0.0, horizon);

        for (int s = 0; s <= 50; ++s) {
            const double t = horizon * s / 50;
            VectorXc xf = unpack_cartesian(traj_full.sample(t));
            VectorXc xr = unpack_cartesian(traj_red.sample(t));
            for (int v = 0; v < g.n; ++v)
                worst = std::max(worst,
                                 std::abs(xf[v] - xr[part.class_of[v]]));
        }
    }
    report(4, worst <= 1e-8,
           "full-graph vs reduced dynamics with random bounded per-class "
           "controls (K_n, n <= 8, N in {1,2,3}; cycle n=6): max amplitude "
           "difference " +
               fmt(worst) + " (<= 1e-8)");
}

void criterion_5() {
    const std::vector<int> ns{4, 8, 16, 32, 64, 100};
    std::vector<double> errors;
    for (int n : ns) {
        CompleteProtocol p;
        p.n = n;
        p.N = 1;
        p.g = 1.0;
        errors.push_back(perturbed_error(p, {0.5, 0.5}));

        // feed the same perturbed runs into the conservation audit
        VectorXi zeta = VectorXi::Zero(2);
        VectorX uvals(2);
        uvals << 1.5, 0.5;  // u_* = g + nu_*, u = nu
        auto traj = integrate_protocol(p, constant_controls(zeta, uvals),
                                       end_time(p));
        VectorXi mult(2);
        mult << 1, n - 1;
        audit_conservation(traj, mult);
    }
    bool monotone = true;
    for (size_t k = 1; k < errors.size(); ++k)
        if (!(errors[k] < errors[k - 1])) monotone = false;
    const bool halved = errors.back() < errors.front() / 2.0;

    std::ostringstream detail;
    detail << "perturbed-control error scan (nu = nu_* = 0.5): E = {";
    for (size_t k = 0; k < errors.size(); ++k)
        detail << (k ? ", " : "") << fmt(errors[k]);
    detail << "}; monotone decrease " << (monotone ? "holds" : "FAILS")
           << ", E(100) < E(4)/2 " << (halved ? "holds" : "FAILS")
           << " [equal offsets cancel exactly: only u_* - u enters the "
              "phase-difference dynamics, so E here is integrator noise]";
    report(5, monotone && halved, detail.str());
}

void criterion_6(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();

    OptimizationProblem prob;
    prob.shells = shell_descriptor(build_cycle(6, {0}));
    prob.gamma = 1.0;
    for (int zm : {1, 2})
        for (int zu : {1, 2}) {
            VectorXi z = VectorXi::Constant(4, zu);
            z[0] = zm;
            prob.zeta_assignments.push_back(z);
        }
    prob.spline_points = 5;
    prob.bound = 20.0;
    prob.tf_min = 0.1;
    prob.tf_max = 10.0;
    prob.objective = Objective::FirstPeak;

    const long budget = 20000;
    auto res = optimize(prob, budget, seed);

    audit_conservation(res.best_trajectory, shell_multiplicities(prob.shells));

    const double attained = res.best.peak.value;
    const bool prob_ok = attained >= 0.95;
    const bool peak_ok = res.best.peak.value >= 0.90 && res.best.peak.t <= 2.0;
    const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    const bool time_ok = elapsed <= 600;

    std::ostringstream zstr;
    for (int k = 0; k < res.best.zeta.size(); ++k)
        zstr << (k ? " " : "") << res.best.zeta[k];
    std::ostringstream detail;
    detail << "cycle n=6 control search (5 spline points, bound 20, zeta in "
              "{1,2}, horizon in [0.1,10], budget "
           << budget << ", seed " << seed << "): success probability "
           << fmt(attained) << " (>= 0.95), first peak "
           << fmt(res.best.peak.value) << " at t = " << fmt(res.best.peak.t)
           << " (>= 0.90 by t <= 2.0), zeta = [" << zstr.str() << "], "
           << elapsed << " s (<= 600)";
    report(6, prob_ok && peak_ok && time_ok, detail.str());
}

void criterion_7() {
    bool ok = true;
    double worst_grad = 0.0, worst_sum = 0.0;
    for (int d : {1, 2, 3}) {
        std::mt19937_64 rng(9000 + d);
        GraphSpec g = d == 1   ? build_complete(5, {0})
                      : d == 2 ? build_cycle(5, {0})
                               : build_cycle(6, {0});
        auto shells = shell_descriptor(g);
        const int m = shells.num_shells();
        const double gamma = 0.8;

        std::uniform_int_distribution<int> zdist(0, 2);
        std::uniform_real_distribution<double> udist(-2.0, 2.0);
        std::uniform_real_distribution<double> radial(0.2, 1.0);
        std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                                     std::numbers::pi);
        std::uniform_real_distribution<double> codist(-1.0, 1.0);

        for (int trial = 0; trial < 100; ++trial) {
            VectorXi zeta(m);
            VectorX uvals(m);
            for (int k = 0; k < m; ++k) {
                zeta[k] = zdist(rng);
                uvals[k] = udist(rng);
            }
            auto scheme = constant_controls(zeta, uvals);
            VectorX y(2 * m);
            Costates co;
            co.lambda.resize(m);
            co.Lambda.resize(m);
            for (int k = 0; k < m; ++k) {
                y[k] = radial(rng);
                y[m + k] = angle(rng);
                co.lambda[k] = codist(rng);
                co.Lambda[k] = codist(rng);
            }
            Costates dot = costate_rhs(0.0, y, co, scheme, gamma, shells);
            const double eps = 3e-6;
            for (int k = 0; k < 2 * m; ++k) {
                VectorX yp = y, ym = y;
                yp[k] += eps;
                ym[k] -= eps;
                const double grad =
                    (pmp_hamiltonian(0.0, yp, co, scheme, gamma, shells) -
                     pmp_hamiltonian(0.0, ym, co, scheme, gamma, shells)) /
                    (2 * eps);
                const double expected =
                    k < m ? -dot.lambda[k] : -dot.Lambda[k - m];
                const double rel = std::abs(grad - expected) /
                                   std::max(1.0, std::abs(expected));
                worst_grad = std::max(worst_grad, rel);
                if (rel > 1e-6) ok = false;
            }
        }

        // Theorem 2 along a joint integration started from a zero Lambda sum
        VectorX y0(2 * m);
        for (int k = 0; k < m; ++k) {
            y0[k] = radial(rng);
            y0[m + k] = angle(rng);
        }
        double norm2 = 0.0;
        for (int k = 0; k < m; ++k)
            norm2 += shells.nshell[k] * y0[k] * y0[k];
        y0.head(m) /= std::sqrt(norm2);
        Costates co0;
        co0.lambda.resize(m);
        co0.Lambda.resize(m);
        for (int k = 0; k < m; ++k) {
            co0.lambda[k] = codist(rng);
            co0.Lambda[k] = codist(rng);
        }
        co0.Lambda[m - 1] -= co0.Lambda.sum();

        auto scheme = zero_controls(m);
        VectorX packed(4 * m);
        packed << y0, co0.lambda, co0.Lambda;
        OdeRhs joint = [scheme, shells, gamma, m](double t, const VectorX& v,
                                                  VectorX& dv) {
            VectorX y = v.head(2 * m);
            Costates co{v.segment(2 * m, m), v.segment(3 * m, m)};
            VectorX dy = rhs_shells(t, y, scheme, gamma, shells);
            Costates dco = costate_rhs(t, y, co, scheme, gamma, shells);
            dv.resize(4 * m);
            dv << dy, dco.lambda, dco.Lambda;
        };
        auto traj = integrate(joint, packed, 0.0, 1.5);
        for (int s = 0; s <= 50; ++s) {
            VectorX v = traj.sample(1.5 * s / 50.0);
            worst_sum =
                std::max(worst_sum, std::abs(v.segment(3 * m, m).sum()));
        }
    }
    if (worst_sum > 1e-8) ok = false;
    report(7, ok,
           "costate flow equals -grad H at 100 random points for d in "
           "{1,2,3}: worst relative error " +
               fmt(worst_grad) + " (<= 1e-6); |sum Lambda| along joint "
               "integrations " +
               fmt(worst_sum) + " (<= 1e-8)");
}

void criterion_8() {
    OdeRhs decay = [](double, const VectorX& y, VectorX& dy) { dy = -y; };
    std::vector<double> hs{0.1, 0.05, 0.025, 0.0125}, errs;
    for (double h : hs) {
        IntegratorConfig cfg;
        cfg.fixed_step = h;
        cfg.newton_tol = 1e-13;
        cfg.newton_max_iters = 20;
        auto traj = integrate(decay, VectorX::Ones(1), 0.0, 1.0, cfg);
        errs.push_back(std::abs(traj.final_state()[0] - std::exp(-1.0)));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(hs.size());
    for (int i = 0; i < m; ++i) {
        const double x = std::log(hs[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    report(8, std::abs(slope - 5.0) <= 0.3,
           "fixed-step global-error order on the scalar linear test: slope " +
               fmt(slope) + " (5 +- 0.3)");
}

void criterion_9() {
    namespace fs = std::filesystem;
    const std::string cfg_text =
        "graph = cycle\nn = 6\nmarked = 0\ngamma = 1\nzeta_set = 1 2\n"
        "zeta_mode = split\nspline_points = 5\nbound = 20\ntf_min = 0.1\n"
        "tf_max = 10\nobjective = peak\nbudget = 600\nseed = 77\n"
        "samples = 101\n";
    auto cfg = ScenarioConfig::from_string(cfg_text);
    auto out_a = fs::temp_directory_path() / "qsearch_acc_det_a.csv";
    auto out_b = fs::temp_directory_path() / "qsearch_acc_det_b.csv";
    std::ostringstream sink;
    cmd_optimize(cfg, out_a.string(), sink);
    cmd_optimize(cfg, out_b.string(), sink);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string a = slurp(out_a), b = slurp(out_b);
    const bool ok = !a.empty() && a == b;
    fs::remove(out_a);
    fs::remove(out_b);
    report(9, ok,
           "repeated optimize runs with identical config and seed produce "
           "byte-identical outputs (" +
               std::to_string(a.size()) + " bytes)");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();

    criterion_1();
    criterion_2();
    criterion_4();
    criterion_5();
    criterion_6(1);
    // criterion 3 aggregates the conservation audit of criteria 1, 5 and 6
    report(3, worst_conservation <= 1e-9,
           "probability conservation across all audited integrations: max "
           "|total - 1| = " +
               fmt(worst_conservation) + " (<= 1e-9)");
    criterion_7();
    criterion_8();
    criterion_9();

    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    std::printf("%d of 9 criteria failed (total %llds)\n", failures,
                static_cast<long long>(secs));
    return failures == 0 ? 0 : 1;
}
