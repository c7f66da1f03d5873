#pragma once

#include <functional>
#include <vector>

#include "qsearch/partition.hpp"
#include "qsearch/types.hpp"

namespace qsearch {

// One complex amplitude per equivalence class, plus the class sizes.
// Cartesian storage is primary; the polar views are derived.
struct SystemState {
    VectorXc amps;
    VectorXi multiplicity;
    double time = 0.0;

    int num_classes() const { return static_cast<int>(amps.size()); }
    VectorX radial() const;  // r_k = |amps_k|
    VectorX phase() const;   // theta_k = atan2(Im, Re)
};

// Sum of multiplicity * |amplitude|^2; conserved at 1 by the dynamics.
double total_probability(const SystemState& st);

// Uniform superposition r = 1/sqrt(n) with unmarked classes at phase 0 and
// marked classes at -pi/2, so the phase difference theta - theta_* starts at
// +pi/2 and the marked amplitude initially grows.
SystemState initial_state(const EquivalencePartition& p);
SystemState initial_state(const VectorXi& multiplicity,
                          const std::vector<bool>& marked_flag);

// Coupling strength and its graph-size scaling gamma = g/(n - 2N).
struct ModelParams {
    double g = 1.0;
    double gamma = 1.0;
    int n = 0;
    int N = 0;
};

// Derives gamma = g/(n - 2N); rejects the singular case n == 2N.
ModelParams make_params(double g, int n, int N);
// Escape hatch for n == 2N and for simulations that fix gamma directly.
ModelParams make_params_gamma(double gamma, int n, int N);

// Per-class control signal u(t) and nonlinearity exponent zeta; all nodes of
// one class share both, which is what keeps the reduction exact.
using ControlSignal = std::function<double(double)>;

struct ControlScheme {
    VectorXi zeta;
    std::vector<ControlSignal> u;

    int num_classes() const { return static_cast<int>(zeta.size()); }
    double control(int k, double t) const { return u[k] ? u[k](t) : 0.0; }
};

ControlScheme zero_controls(int num_classes);
ControlScheme constant_controls(VectorXi zeta, const VectorX& values);

// Expands a per-class scheme to single-node classes via class_of, for
// driving the full (unreduced) dynamics with the same controls.
ControlScheme per_node_scheme(const ControlScheme& class_scheme,
                              const std::vector<int>& class_of);

}  // namespace qsearch
