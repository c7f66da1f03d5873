#pragma once

#include <cstdint>
#include <vector>

#include "qsearch/bspline.hpp"
#include "qsearch/partition.hpp"
#include "qsearch/radau.hpp"
#include "qsearch/state.hpp"

namespace qsearch {

enum class Objective {
    Terminal,   // success probability r_0^2 at the horizon
    FirstPeak,  // height of the first interior peak of r_0^2
};

// Direct control search on a shell-regular graph: per-shell cubic B-spline
// controls, free initial phases theta_2..theta_d (theta_1 = 0, theta_0 a
// quarter turn behind so the marked amplitude grows), and an optional free
// horizon.  The discrete nonlinearity assignments are searched exhaustively.
struct OptimizationProblem {
    ShellDescriptor shells;
    double gamma = 1.0;
    std::vector<VectorXi> zeta_assignments;  // one entry per shell each
    int spline_points = 5;
    double bound = 20.0;
    double tf_min = 0.1;
    double tf_max = 10.0;  // tf_min == tf_max pins the horizon
    Objective objective = Objective::FirstPeak;
    IntegratorConfig eval_config{.rel_tol = 1e-8, .abs_tol = 1e-10};

    bool horizon_free() const { return tf_max > tf_min; }
    int num_phase_params() const { return shells.d >= 2 ? shells.d - 1 : 0; }
    int dimension() const {
        return shells.num_shells() * spline_points + num_phase_params() +
               (horizon_free() ? 1 : 0);
    }
};

struct EvalResult {
    double objective = 0.0;
    double terminal = 0.0;
    PeakResult peak;
    bool feasible = false;
};

// Decoded view of a flat parameter vector.
struct CandidateDecode {
    std::vector<BSplineControl> splines;  // one per shell
    VectorX initial_phases;               // size d+1, theta_0 = -pi/2, theta_1 = 0
    double t_f = 0.0;
};

CandidateDecode decode_candidate(const OptimizationProblem& prob,
                                 const VectorX& params);

// Builds the control scheme and integrates the shell dynamics in Cartesian
// coordinates (no polar singularities); returns both objective readings.
// Out-of-bound parameters and integration failures yield feasible = false
// with objective 0.
EvalResult evaluate_candidate(const OptimizationProblem& prob,
                              const VectorXi& zeta, const VectorX& params);

// Integrates the candidate at the given (tighter) tolerances and returns the
// trajectory of packed Cartesian shell amplitudes.
Trajectory candidate_trajectory(const OptimizationProblem& prob,
                                const VectorXi& zeta, const VectorX& params,
                                const IntegratorConfig& cfg);

struct AssignmentReport {
    VectorXi zeta;
    double objective = 0.0;
    double terminal = 0.0;
    PeakResult peak;
    VectorX params;
    long evaluations = 0;
};

struct OptimizeResult {
    AssignmentReport best;                       // winner across assignments
    std::vector<AssignmentReport> per_assignment;
    long evaluations = 0;
    Trajectory best_trajectory;  // re-integrated at verification tolerances
};

// Exhaustive outer search over the nonlinearity assignments; inner
// population-based differential evolution with seeded restarts.  Candidate
// streams are advanced round-robin so the evaluation sequence for any budget
// is a prefix of the sequence for a larger budget, and everything is
// deterministic in (seed, budget).
OptimizeResult optimize(const OptimizationProblem& prob, long budget,
                        std::uint64_t seed);

// Post-hoc adjoint check of a candidate: integrates the costates backwards
// from the free-endpoint conditions lambda_0(t_f) = 2 r_0(t_f), everything
// else zero, and reports the conserved Lambda sum and the stationarity
// residual along the trajectory.  Unavailable when a radial component
// crosses zero (the polar costate flow is singular there).
struct PmpDiagnostics {
    bool available = false;
    double max_lambda_sum = 0.0;  // max |sum Lambda| (conserved zero)
    double max_residual = 0.0;    // max |sum Lambda_i r_i^{2 zeta_i}|
    std::string note;
};

PmpDiagnostics pmp_diagnostics(const OptimizationProblem& prob,
                               const VectorXi& zeta, const VectorX& params,
                               const IntegratorConfig& cfg = {});

}  // namespace qsearch
