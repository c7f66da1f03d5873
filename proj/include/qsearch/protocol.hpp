#pragma once

#include <utility>

#include "qsearch/dynamics.hpp"
#include "qsearch/radau.hpp"
#include "qsearch/state.hpp"

namespace qsearch {

// Closed-form controlled-search protocol on the complete graph K_n with N
// marked nodes.  Requires n > 2N; the free unmarked control defaults to 0.
struct CompleteProtocol {
    int n = 0;
    int N = 1;
    double g = 1.0;
    int zeta_marked = 0;
    int zeta_unmarked = 0;
    ControlSignal u_unmarked;  // free choice; empty means identically zero
};

// First time the success probability N r_*^2 reaches 1:
// t_f = (n-2N)/g * acos(sqrt(N/n)) / sqrt(N(n-N)).
double end_time(const CompleteProtocol& p);

// r_*(t) = (1/sqrt(N)) sin(g sqrt(N(n-N)) t/(n-2N) + asin(sqrt(N/n))),
// defined on [0, t_f].
double r_star_analytic(double t, const CompleteProtocol& p);

// Controls satisfying u_* r_*^{2 zeta_*} - u r^{2 zeta} = g along the
// analytic trajectory; returns (u, u_*).
std::pair<double, double> analytic_control(double t,
                                           const CompleteProtocol& p);

// Two-class control scheme (marked class first) evaluating the analytic
// feedback law as functions of time.
ControlScheme analytic_control_scheme(const CompleteProtocol& p);

// Model parameters of the protocol's reduced dynamics.
ModelParams protocol_params(const CompleteProtocol& p);

// Constant offsets applied to the protocol controls, modelling imperfect
// reconstruction: u = nu, u_* = g + nu_star.
struct PerturbationSpec {
    double nu_marked = 0.0;    // nu_*
    double nu_unmarked = 0.0;  // nu
};

// Error E = 1 - N r_*^2 at the unperturbed t_f under the perturbed constant
// controls, for the zeta = zeta_* = 0 protocol.  Integrates the contracted
// flow in its Cartesian chart (regular through r = 0).
double perturbed_error(const CompleteProtocol& p, const PerturbationSpec& pert,
                       const IntegratorConfig& cfg = {});

enum class RuntimeRegime {
    NonlinearProtocol,  // N_perp > N: the time-dependent protocol applies
    ConstantTime,       // N_perp <= N: zero controls, O(1) measurement time
};

struct RuntimeClass {
    RuntimeRegime regime;
    double t_f = 0.0;     // end time when the protocol applies
    int min_padding = 0;  // virtual unmarked nodes needed to restore n > 2N
};

RuntimeClass runtime_class(int n, int N, double g = 1.0);

// Adds `padding` virtual unmarked nodes: returns the padded node count.
int padded_size(int n, int padding);

}  // namespace qsearch
