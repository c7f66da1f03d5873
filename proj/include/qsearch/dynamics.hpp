#pragma once

#include <stdexcept>

#include "qsearch/partition.hpp"
#include "qsearch/state.hpp"
#include "qsearch/types.hpp"

namespace qsearch {

// Thrown by the polar-coordinate right-hand sides when a radial component
// vanishes and phase derivatives stop being meaningful; callers switch to
// the Cartesian forms.
struct PolarSingularity : std::domain_error {
    using std::domain_error::domain_error;
};

// |x|^{2 zeta} given |x|^2, for integer zeta (0^0 == 1).
double nonlinearity_weight(double abs2, int zeta);

// Full dynamics i x_j' = gamma L_jk x_k + u_j |x_j|^{2 zeta_j} x_j, one
// entry per node; `scheme` carries per-node controls (singleton classes).
VectorXc rhs_full(double t, const VectorXc& x, const ControlScheme& scheme,
                  double gamma, const MatrixXi& L);

// Reduced dynamics on class representatives: for class a with neighbor
// counts K(a,b) the Laplacian action collapses to sum_b K(a,b) (x_b - x_a).
VectorXc rhs_reduced(double t, const VectorXc& x, const ControlScheme& scheme,
                     double gamma, const MatrixX& coupling);

// Complete-graph reduced system in polar form, y = (r_*, theta_*, r, theta).
// scheme holds the marked class first.  Throws PolarSingularity at r == 0.
Eigen::Vector4d rhs_reduced_complete(double t, const Eigen::Vector4d& y,
                                     const ControlScheme& scheme,
                                     const ModelParams& p);

// Unmarked radial component implied by probability conservation,
// r = sqrt((1 - N r_*^2)/(n - N)).
double probability_constraint(double r_star, int n, int N);

// Contracted two-variable system y = (r_*, Theta) with Theta = theta -
// theta_*, valid strictly inside 0 < r_* < 1/sqrt(N).
Eigen::Vector2d rhs_contracted(double t, const Eigen::Vector2d& y,
                               const ControlScheme& scheme,
                               const ModelParams& p);

// Shell system in polar form, y = (r_0..r_d, theta_0..theta_d); per-shell
// controls in `scheme`, shell 0 is the marked node.
VectorX rhs_shells(double t, const VectorX& y, const ControlScheme& scheme,
                   double gamma, const ShellDescriptor& shells);

// --- chart helpers -------------------------------------------------------

// Packs a complex vector as (Re..., Im...) and back.
VectorX pack_cartesian(const VectorXc& x);
VectorXc unpack_cartesian(const VectorX& y);

// (r..., theta...) <-> complex amplitudes.
VectorX pack_polar(const VectorXc& x);
VectorXc unpack_polar(const VectorX& y);

// Maps a polar-chart derivative (r', theta') to the Cartesian derivative of
// x = r e^{i theta}:  x' = (r' + i r theta') e^{i theta}.
VectorXc polar_derivative_to_cartesian(const VectorX& polar,
                                       const VectorX& polar_dot);

}  // namespace qsearch
