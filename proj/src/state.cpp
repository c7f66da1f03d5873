#include "qsearch/state.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsearch {

VectorX SystemState::radial() const {
    return amps.array().abs().matrix();
}

VectorX SystemState::phase() const {
    VectorX th(amps.size());
    for (Eigen::Index k = 0; k < amps.size(); ++k)
        th[k] = std::arg(amps[k]);
    return th;
}

double total_probability(const SystemState& st) {
    return (st.multiplicity.cast<double>().array() *
            st.amps.array().abs2())
        .sum();
}

SystemState initial_state(const VectorXi& multiplicity,
                          const std::vector<bool>& marked_flag) {
    const int m = static_cast<int>(multiplicity.size());
    if (static_cast<int>(marked_flag.size()) != m)
        throw std::invalid_argument("initial_state: size mismatch");
    const int n = multiplicity.sum();
    const double r = 1.0 / std::sqrt(static_cast<double>(n));
    SystemState st;
    st.amps.resize(m);
    st.multiplicity = multiplicity;
    for (int k = 0; k < m; ++k) {
        double theta = marked_flag[k] ? -std::numbers::pi / 2 : 0.0;
        st.amps[k] = std::polar(r, theta);
    }
    return st;
}

SystemState initial_state(const EquivalencePartition& p) {
    VectorXi mult(p.num_classes());
    for (int k = 0; k < p.num_classes(); ++k) mult[k] = p.multiplicity[k];
    return initial_state(mult, p.marked_flag);
}

ModelParams make_params(double g, int n, int N) {
    if (g == 0.0) throw std::invalid_argument("params: coupling g must be nonzero");
    if (N < 1 || N > n) throw std::invalid_argument("params: need 1 <= N <= n");
    if (n == 2 * N)
        throw std::invalid_argument(
            "params: n == 2N makes gamma = g/(n-2N) singular; "
            "use make_params_gamma or pad the graph");
    ModelParams p;
    p.g = g;
    p.n = n;
    p.N = N;
    p.gamma = g / (n - 2 * N);
    return p;
}

ModelParams make_params_gamma(double gamma, int n, int N) {
    if (N < 1 || N > n) throw std::invalid_argument("params: need 1 <= N <= n");
    ModelParams p;
    p.gamma = gamma;
    p.n = n;
    p.N = N;
    p.g = gamma * (n - 2 * N);
    return p;
}

ControlScheme zero_controls(int num_classes) {
    ControlScheme s;
    s.zeta = VectorXi::Zero(num_classes);
    s.u.resize(num_classes);
    return s;
}

ControlScheme constant_controls(VectorXi zeta, const VectorX& values) {
    if (zeta.size() != values.size())
        throw std::invalid_argument("constant_controls: size mismatch");
    ControlScheme s;
    s.zeta = std::move(zeta);
    s.u.reserve(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        double v = values[k];
        s.u.push_back([v](double) { return v; });
    }
    return s;
}

ControlScheme per_node_scheme(const ControlScheme& class_scheme,
                              const std::vector<int>& class_of) {
    ControlScheme s;
    const int n = static_cast<int>(class_of.size());
    s.zeta.resize(n);
    s.u.resize(n);
    for (int v = 0; v < n; ++v) {
        s.zeta[v] = class_scheme.zeta[class_of[v]];
        s.u[v] = class_scheme.u[class_of[v]];
    }
    return s;
}

}  // namespace qsearch
