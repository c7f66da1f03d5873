#include "qsearch/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qsearch/dynamics.hpp"
#include "qsearch/pmp.hpp"

namespace qsearch {

namespace {

struct Bounds {
    VectorX lo, hi;
};

Bounds parameter_bounds(const OptimizationProblem& prob) {
    const int dim = prob.dimension();
    const int spline_block = prob.shells.num_shells() * prob.spline_points;
    Bounds b;
    b.lo.resize(dim);
    b.hi.resize(dim);
    b.lo.head(spline_block).setConstant(-prob.bound);
    b.hi.head(spline_block).setConstant(prob.bound);
    for (int k = 0; k < prob.num_phase_params(); ++k) {
        b.lo[spline_block + k] = -std::numbers::pi;
        b.hi[spline_block + k] = std::numbers::pi;
    }
    if (prob.horizon_free()) {
        b.lo[dim - 1] = prob.tf_min;
        b.hi[dim - 1] = prob.tf_max;
    }
    return b;
}

bool within_bounds(const VectorX& p, const Bounds& b) {
    return (p.array() >= b.lo.array() - 1e-12).all() &&
           (p.array() <= b.hi.array() + 1e-12).all();
}

ControlScheme spline_scheme(const VectorXi& zeta,
                            const std::vector<BSplineControl>& splines) {
    ControlScheme s;
    s.zeta = zeta;
    s.u.reserve(splines.size());
    for (const auto& sp : splines)
        s.u.push_back([sp](double t) { return sp(t); });
    return s;
}

VectorX initial_cartesian(const OptimizationProblem& prob,
                          const CandidateDecode& dec) {
    const int m = prob.shells.num_shells();
    const double r0 =
        1.0 / std::sqrt(static_cast<double>(prob.shells.total_nodes()));
    VectorXc amps(m);
    for (int k = 0; k < m; ++k)
        amps[k] = std::polar(r0, dec.initial_phases[k]);
    return pack_cartesian(amps);
}

double success_probability(const VectorX& packed) {
    const Eigen::Index m = packed.size() / 2;
    return packed[0] * packed[0] + packed[m] * packed[m];
}

}  // namespace

CandidateDecode decode_candidate(const OptimizationProblem& prob,
                                 const VectorX& params) {
    if (params.size() != prob.dimension())
        throw std::invalid_argument("decode_candidate: wrong parameter count");
    const int m = prob.shells.num_shells();
    CandidateDecode dec;
    dec.t_f = prob.horizon_free() ? params[params.size() - 1] : prob.tf_min;

    dec.splines.reserve(m);
    for (int k = 0; k < m; ++k)
        dec.splines.emplace_back(
            params.segment(k * prob.spline_points, prob.spline_points),
            dec.t_f);

    dec.initial_phases = VectorX::Zero(m);
    dec.initial_phases[0] = -std::numbers::pi / 2;
    for (int k = 0; k < prob.num_phase_params(); ++k)
        dec.initial_phases[2 + k] = params[m * prob.spline_points + k];
    return dec;
}

Trajectory candidate_trajectory(const OptimizationProblem& prob,
                                const VectorXi& zeta, const VectorX& params,
                                const IntegratorConfig& cfg) {
    CandidateDecode dec = decode_candidate(prob, params);
    ControlScheme scheme = spline_scheme(zeta, dec.splines);
    const MatrixX coupling = shell_coupling(prob.shells);
    const double gamma = prob.gamma;
    OdeRhs ode = [scheme, coupling, gamma](double t, const VectorX& y,
                                           VectorX& dy) {
        dy = pack_cartesian(
            rhs_reduced(t, unpack_cartesian(y), scheme, gamma, coupling));
    };
    return integrate(ode, initial_cartesian(prob, dec), 0.0, dec.t_f, cfg);
}

EvalResult evaluate_candidate(const OptimizationProblem& prob,
                              const VectorXi& zeta, const VectorX& params) {
    EvalResult res;
    if (!within_bounds(params, parameter_bounds(prob))) return res;
    try {
        Trajectory traj =
            candidate_trajectory(prob, zeta, params, prob.eval_config);
        res.terminal = success_probability(traj.final_state());
        res.peak = find_first_peak(traj, success_probability);
        res.objective = prob.objective == Objective::Terminal
                            ? res.terminal
                            : res.peak.value;
        res.feasible = true;
    } catch (const IntegrationError&) {
        res = EvalResult{};
    }
    return res;
}

namespace {

// Differential evolution (rand-to-best/1/bin) advanced one evaluation at a
// time so several instances interleave deterministically.
class DeStream {
public:
    DeStream(const OptimizationProblem& prob, const VectorXi& zeta,
             std::uint64_t seed)
        : prob_(&prob),
          zeta_(zeta),
          bounds_(parameter_bounds(prob)),
          rng_(seed),
          dim_(prob.dimension()),
          pop_size_(std::max(24, 2 * prob.dimension())),
          pop_(pop_size_),
          fit_(pop_size_, -1.0) {}

    // Evaluates exactly one candidate (restarts may batch a few more).
    void step() {
        if (cursor_ < pop_size_) {
            VectorX cand =
                cursor_ == 0 ? center_candidate() : random_candidate();
            evaluate_into(cursor_, std::move(cand));
            ++cursor_;
            return;
        }
        const int i = trial_index_;
        trial_index_ = (trial_index_ + 1) % pop_size_;
        VectorX trial = make_trial(i);
        EvalResult r = evaluate_candidate(*prob_, zeta_, trial);
        ++evaluations_;
        if (r.objective >= fit_[i]) {
            pop_[i] = std::move(trial);
            fit_[i] = r.objective;
            track_best(i, r);
        }
        if (trial_index_ == 0) maybe_restart();
    }

    long evaluations() const { return evaluations_; }

    AssignmentReport report() const {
        AssignmentReport rep;
        rep.zeta = zeta_;
        rep.evaluations = evaluations_;
        rep.objective = best_.objective;
        rep.terminal = best_.terminal;
        rep.peak = best_.peak;
        rep.params = best_params_;
        return rep;
    }

private:
    VectorX random_candidate() {
        VectorX c(dim_);
        for (int j = 0; j < dim_; ++j)
            c[j] = bounds_.lo[j] +
                   (bounds_.hi[j] - bounds_.lo[j]) * uniform_(rng_);
        return c;
    }

    // Zero controls, default phases, mid-range horizon: a sane anchor that
    // also covers the pure-Laplacian evolution.
    VectorX center_candidate() {
        VectorX c = VectorX::Zero(dim_);
        if (prob_->horizon_free())
            c[dim_ - 1] = 0.5 * (prob_->tf_min + prob_->tf_max);
        return c;
    }

    void evaluate_into(int i, VectorX cand) {
        EvalResult r = evaluate_candidate(*prob_, zeta_, cand);
        ++evaluations_;
        pop_[i] = std::move(cand);
        fit_[i] = r.objective;
        track_best(i, r);
    }

    void track_best(int i, const EvalResult& r) {
        if (r.objective > best_.objective || best_params_.size() == 0) {
            best_ = r;
            best_params_ = pop_[i];
        }
    }

    VectorX make_trial(int i) {
        const int r1 = pick_other(i, -1), r2 = pick_other(i, r1);
        const double F = 0.7, CR = 0.9;
        VectorX trial = pop_[i];
        const int jrand =
            std::uniform_int_distribution<int>(0, dim_ - 1)(rng_);
        for (int j = 0; j < dim_; ++j) {
            if (uniform_(rng_) < CR || j == jrand) {
                double v = pop_[i][j] + F * (best_params_[j] - pop_[i][j]) +
                           F * (pop_[r1][j] - pop_[r2][j]);
                if (v < bounds_.lo[j] || v > bounds_.hi[j])
                    v = bounds_.lo[j] +
                        (bounds_.hi[j] - bounds_.lo[j]) * uniform_(rng_);
                trial[j] = v;
            }
        }
        return trial;
    }

    int pick_other(int i, int other) {
        std::uniform_int_distribution<int> dist(0, pop_size_ - 1);
        int r = dist(rng_);
        while (r == i || r == other) r = dist(rng_);
        return r;
    }

    // Seeded restart once the population collapses: keep the fittest member,
    // redraw the rest.
    void maybe_restart() {
        const auto [mn, mx] = std::minmax_element(fit_.begin(), fit_.end());
        if (*mx - *mn > 1e-10) return;
        const int keep =
            static_cast<int>(std::distance(fit_.begin(),
                                           std::max_element(fit_.begin(),
                                                            fit_.end())));
        for (int i = 0; i < pop_size_; ++i)
            if (i != keep) evaluate_into(i, random_candidate());
    }

    const OptimizationProblem* prob_;
    VectorXi zeta_;
    Bounds bounds_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    int dim_;
    int pop_size_;
    std::vector<VectorX> pop_;
    std::vector<double> fit_;
    int cursor_ = 0;
    int trial_index_ = 0;
    long evaluations_ = 0;

    EvalResult best_;  // objective starts at 0; any feasible result beats it
    VectorX best_params_;
};

}  // namespace

OptimizeResult optimize(const OptimizationProblem& prob, long budget,
                        std::uint64_t seed) {
    if (budget <= 0)
        throw std::invalid_argument("optimize: budget must be > 0");
    if (prob.zeta_assignments.empty())
        throw std::invalid_argument("optimize: no nonlinearity assignments");
    for (const auto& z : prob.zeta_assignments)
        if (z.size() != prob.shells.num_shells())
            throw std::invalid_argument(
                "optimize: assignment size != number of shells");

    std::vector<DeStream> streams;
    streams.reserve(prob.zeta_assignments.size());
    for (size_t a = 0; a < prob.zeta_assignments.size(); ++a)
        streams.emplace_back(prob, prob.zeta_assignments[a],
                             seed + 0x9E3779B97F4A7C15ULL * (a + 1));

    // Round-robin across assignments: the evaluation sequence for a smaller
    // budget is a prefix of the sequence for a larger one, which makes the
    // best objective monotone in the budget.
    long spent = 0;
    size_t turn = 0;
    while (spent < budget) {
        DeStream& s = streams[turn];
        turn = (turn + 1) % streams.size();
        const long before = s.evaluations();
        s.step();
        spent += s.evaluations() - before;
    }

    OptimizeResult result;
    result.evaluations = spent;
    result.per_assignment.reserve(streams.size());
    for (const auto& s : streams) result.per_assignment.push_back(s.report());

    const AssignmentReport* best = &result.per_assignment.front();
    for (const auto& rep : result.per_assignment)
        if (rep.objective > best->objective) best = &rep;
    result.best = *best;

    // Re-integrate the winner at verification tolerances; the terminal and
    // peak readings are refreshed, the raw objective is kept as attained.
    IntegratorConfig verify;
    result.best_trajectory =
        candidate_trajectory(prob, result.best.zeta, result.best.params,
                             verify);
    result.best.terminal = success_probability(result.best_trajectory.final_state());
    result.best.peak = find_first_peak(
        result.best_trajectory,
        [](const VectorX& y) { return success_probability(y); });
    return result;
}

PmpDiagnostics pmp_diagnostics(const OptimizationProblem& prob,
                               const VectorXi& zeta, const VectorX& params,
                               const IntegratorConfig& cfg) {
    PmpDiagnostics diag;
    try {
        Trajectory traj = candidate_trajectory(prob, zeta, params, cfg);
        const double tf = traj.t_end();
        const int m = prob.shells.num_shells();

        CandidateDecode dec = decode_candidate(prob, params);
        ControlScheme scheme = spline_scheme(zeta, dec.splines);
        const auto shells = prob.shells;
        const double gamma = prob.gamma;

        auto polar_at = [&traj, m](double t) {
            VectorXc amps = unpack_cartesian(traj.sample(t));
            for (int k = 0; k < m; ++k)
                if (std::abs(amps[k]) < 1e-6)
                    throw PolarSingularity(
                        "pmp_diagnostics: radial component too small");
            return pack_polar(amps);
        };

        // free-endpoint conditions for the objective r_0^2(t_f)
        VectorXc xf = unpack_cartesian(traj.final_state());
        VectorX w0 = VectorX::Zero(2 * m);
        w0[0] = 2.0 * std::abs(xf[0]);

        // integrate the adjoint flow in reversed time tau = t_f - t
        OdeRhs backward = [&](double tau, const VectorX& w, VectorX& dw) {
            const double t = tf - tau;
            VectorX polar = polar_at(t);
            Costates co{w.head(m), w.tail(m)};
            Costates dot = costate_rhs(t, polar, co, scheme, gamma, shells);
            dw.resize(2 * m);
            dw << -dot.lambda, -dot.Lambda;
        };
        Trajectory co_traj = integrate(backward, w0, 0.0, tf, cfg);

        for (int s = 0; s <= 100; ++s) {
            const double tau = tf * s / 100.0;
            VectorX w = co_traj.sample(tau);
            VectorX polar = polar_at(tf - tau);
            Costates co{w.head(m), w.tail(m)};
            diag.max_lambda_sum =
                std::max(diag.max_lambda_sum, std::abs(co.Lambda.sum()));
            diag.max_residual =
                std::max(diag.max_residual,
                         std::abs(optimality_residual(polar, co, scheme)));
        }
        diag.available = true;
    } catch (const PolarSingularity& e) {
        diag.note = e.what();
    } catch (const IntegrationError& e) {
        diag.note = e.what();
    }
    return diag;
}

}  // namespace qsearch
