#include "qsearch/protocol.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsearch {

namespace {

void require_protocol_domain(const CompleteProtocol& p) {
    if (p.n <= 2 * p.N)
        throw std::domain_error(
            "protocol: analytic formulas require n > 2N (N_perp > N)");
    if (p.g == 0.0) throw std::domain_error("protocol: g must be nonzero");
    if (p.N < 1) throw std::domain_error("protocol: need N >= 1");
}

double angular_rate(const CompleteProtocol& p) {
    return p.g * std::sqrt(static_cast<double>(p.N) * (p.n - p.N)) /
           (p.n - 2.0 * p.N);
}

}  // namespace

double end_time(const CompleteProtocol& p) {
    require_protocol_domain(p);
    return std::acos(std::sqrt(static_cast<double>(p.N) / p.n)) /
           angular_rate(p);
}

double r_star_analytic(double t, const CompleteProtocol& p) {
    require_protocol_domain(p);
    const double tf = end_time(p);
    const double slack = 1e-12 * (1.0 + tf);
    if (t < -slack || t > tf + slack)
        throw std::domain_error("r_star_analytic: t outside [0, t_f]");
    const double phase0 = std::asin(std::sqrt(static_cast<double>(p.N) / p.n));
    return std::sin(angular_rate(p) * t + phase0) / std::sqrt(p.N);
}

std::pair<double, double> analytic_control(double t,
                                           const CompleteProtocol& p) {
    const double rs = r_star_analytic(t, p);
    // clamped constraint: at t_f roundoff can push N r_*^2 an ulp past 1
    const double rem = std::max(0.0, 1.0 - p.N * rs * rs);
    const double r = std::sqrt(rem / (p.n - p.N));
    const double u = p.u_unmarked ? p.u_unmarked(t) : 0.0;
    const double us =
        (p.g + u * nonlinearity_weight(r * r, p.zeta_unmarked)) /
        nonlinearity_weight(rs * rs, p.zeta_marked);
    return {u, us};
}

ControlScheme analytic_control_scheme(const CompleteProtocol& p) {
    require_protocol_domain(p);
    ControlScheme s;
    s.zeta.resize(2);
    s.zeta << p.zeta_marked, p.zeta_unmarked;
    s.u.resize(2);
    CompleteProtocol copy = p;
    s.u[0] = [copy](double t) { return analytic_control(t, copy).second; };
    s.u[1] = [copy](double t) { return analytic_control(t, copy).first; };
    return s;
}

ModelParams protocol_params(const CompleteProtocol& p) {
    require_protocol_domain(p);
    return make_params(p.g, p.n, p.N);
}

double perturbed_error(const CompleteProtocol& p, const PerturbationSpec& pert,
                       const IntegratorConfig& cfg) {
    require_protocol_domain(p);
    if (p.zeta_marked != 0 || p.zeta_unmarked != 0)
        throw std::domain_error(
            "perturbed_error: defined for the zeta = zeta_* = 0 protocol");
    const double tf = end_time(p);
    const ModelParams params = protocol_params(p);

    VectorXi zeta = VectorXi::Zero(2);
    VectorX values(2);
    values << p.g + pert.nu_marked, pert.nu_unmarked;  // u_* = g + nu_*, u = nu
    ControlScheme scheme = constant_controls(zeta, values);

    MatrixX coupling(2, 2);
    coupling << 0.0, p.n - p.N, p.N, 0.0;

    std::vector<bool> marked_flag{true, false};
    VectorXi mult(2);
    mult << p.N, p.n - p.N;
    SystemState st = initial_state(mult, marked_flag);

    OdeRhs ode = [&params, scheme, coupling](double t, const VectorX& y,
                                             VectorX& dy) {
        dy = pack_cartesian(
            rhs_reduced(t, unpack_cartesian(y), scheme, params.gamma, coupling));
    };
    Trajectory traj = integrate(ode, pack_cartesian(st.amps), 0.0, tf, cfg);
    VectorXc amps = unpack_cartesian(traj.final_state());
    return 1.0 - p.N * std::norm(amps[0]);
}

RuntimeClass runtime_class(int n, int N, double g) {
    if (N < 1 || N > n) throw std::invalid_argument("runtime_class: bad N");
    const int n_perp = n - N;
    if (n_perp > N) {
        CompleteProtocol p;
        p.n = n;
        p.N = N;
        p.g = g;
        return RuntimeClass{RuntimeRegime::NonlinearProtocol, end_time(p), 0};
    }
    // N_perp <= N: zero controls are optimal and the measurement time is
    // O(1); padding with virtual unmarked nodes can restore n > 2N.
    return RuntimeClass{RuntimeRegime::ConstantTime, 0.0, 2 * N - n + 1};
}

int padded_size(int n, int padding) {
    if (padding < 0) throw std::invalid_argument("padded_size: padding < 0");
    return n + padding;
}

}  // namespace qsearch
