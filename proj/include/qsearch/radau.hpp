#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "qsearch/types.hpp"

namespace qsearch {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 0.0;  // 0 = choose automatically
    long max_steps = 500000;
    double newton_tol = 1e-3;   // Newton increment threshold, in error-norm units
    int newton_max_iters = 12;
    double fixed_step = 0.0;    // >0 disables step-size control (order studies)
};

struct IntegrationError : std::runtime_error {
    enum class Kind { StiffFailure, MaxSteps };
    IntegrationError(Kind k, const std::string& what)
        : std::runtime_error(what), kind(k) {}
    Kind kind;
};

using OdeRhs = std::function<void(double t, const VectorX& y, VectorX& dydt)>;

// Solution with the per-step collocation polynomials kept for dense output.
class Trajectory {
public:
    struct Step {
        double t0 = 0.0;
        double h = 0.0;
        VectorX y0;
        MatrixX stage_derivs;  // n x 3, collocation derivatives at the nodes
    };

    const std::vector<double>& times() const { return times_; }
    const std::vector<VectorX>& states() const { return states_; }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    const VectorX& final_state() const { return states_.back(); }

    // Collocation-polynomial interpolation; exact at accepted step endpoints.
    VectorX sample(double t) const;

    const OdeRhs& rhs() const { return rhs_; }
    const std::vector<Step>& steps() const { return steps_; }

private:
    friend Trajectory integrate(const OdeRhs&, VectorX, double, double,
                                const IntegratorConfig&);
    std::vector<double> times_;
    std::vector<VectorX> states_;
    std::vector<Step> steps_;
    OdeRhs rhs_;
};

// Adaptive 3-stage Radau IIA (order 5).  Stage equations are solved by a
// simplified Newton iteration with a forward-difference Jacobian frozen at
// the step start; the embedded third-order companion provides the local
// error estimate.
Trajectory integrate(const OdeRhs& rhs, VectorX y0, double t0, double t1,
                     const IntegratorConfig& cfg = {});

struct PeakResult {
    double t = 0.0;
    double value = 0.0;
    bool interior = false;  // false: no interior maximum, endpoint reported
};

// First interior local maximum of observable(y(t)) along the trajectory,
// located by a sign change of the time derivative (taken along the stored
// right-hand side) and refined by bisection to ~1e-9 in time.
PeakResult find_first_peak(const Trajectory& traj,
                           const std::function<double(const VectorX&)>& observable);

}  // namespace qsearch
