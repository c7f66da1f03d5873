#pragma once

#include "qsearch/dynamics.hpp"
#include "qsearch/partition.hpp"
#include "qsearch/state.hpp"

namespace qsearch {

// Adjoint variables of the shell system: lambda conjugate to the radial
// components, Lambda conjugate to the phases.  Along any optimal trajectory
// the Lambda sum is a conserved zero (global phase invariance).
struct Costates {
    VectorX lambda;
    VectorX Lambda;
};

// Control-theoretic Hamiltonian H = lambda . r' + Lambda . theta' of the
// shell dynamics; maximizing it over the controls characterizes optimal
// trajectories.
double pmp_hamiltonian(double t, const VectorX& polar, const Costates& co,
                       const ControlScheme& scheme, double gamma,
                       const ShellDescriptor& shells);

// Adjoint flow lambda' = -dH/dr, Lambda' = -dH/dtheta.
Costates costate_rhs(double t, const VectorX& polar, const Costates& co,
                     const ControlScheme& scheme, double gamma,
                     const ShellDescriptor& shells);

// Stationarity diagnostic sum_i Lambda_i r_i^{2 zeta_i} (each term is
// -dH/du_i); zero at an optimum with interior controls.
double optimality_residual(const VectorX& polar, const Costates& co,
                           const ControlScheme& scheme);

}  // namespace qsearch
