#include "qsearch/radau.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace qsearch {

namespace {

// 3-stage Radau IIA collocation data.  The embedded companion weights and
// the damping coefficient gamma0 (reciprocal of the real eigenvalue of
// A^{-1}) follow the classical construction for this method.
struct Tableau {
    Eigen::Matrix3d A;
    Eigen::Matrix3d Ainv;
    Eigen::Vector3d b;
    Eigen::Vector3d c;
    double gamma0;
    Eigen::Vector3d bhat_minus_b;  // embedded weights minus b
    // Integrated Lagrange basis on the nodes: I_i(theta) = k1*theta +
    // k2*theta^2 + k3*theta^3, stored as column i = (k1, k2, k3).
    Eigen::Matrix3d interp;

    Tableau() {
        const double s6 = std::sqrt(6.0);
        c << (4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0;
        A << (88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0,
            (-2.0 + 3.0 * s6) / 225.0, (296.0 + 169.0 * s6) / 1800.0,
            (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0,
            (16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0;
        b = A.row(2);
        Ainv = A.inverse();

        Eigen::EigenSolver<Eigen::Matrix3d> es(Ainv);
        double real_ev = 0.0;
        for (int k = 0; k < 3; ++k)
            if (std::abs(es.eigenvalues()[k].imag()) < 1e-12)
                real_ev = es.eigenvalues()[k].real();
        gamma0 = 1.0 / real_ev;

        // Order-3 companion with an extra f(t0, y0) term weighted gamma0:
        // gamma0 + sum bhat = 1, sum bhat c = 1/2, sum bhat c^2 = 1/3.
        Eigen::Matrix3d V;
        for (int i = 0; i < 3; ++i) {
            V(0, i) = 1.0;
            V(1, i) = c[i];
            V(2, i) = c[i] * c[i];
        }
        Eigen::Vector3d moments(1.0 - gamma0, 0.5, 1.0 / 3.0);
        bhat_minus_b = V.colPivHouseholderQr().solve(moments) - b;

        for (int i = 0; i < 3; ++i) {
            int j = (i + 1) % 3, k = (i + 2) % 3;
            double denom = (c[i] - c[j]) * (c[i] - c[k]);
            // L_i(s) = (s^2 - (c_j + c_k) s + c_j c_k)/denom, integrated.
            interp(0, i) = c[j] * c[k] / denom;
            interp(1, i) = -(c[j] + c[k]) / (2.0 * denom);
            interp(2, i) = 1.0 / (3.0 * denom);
        }
    }
};

const Tableau& tableau() {
    static const Tableau tab;
    return tab;
}

// Forward-difference Jacobian with step sqrt(eps) * max(|y_j|, 1).
MatrixX fd_jacobian(const OdeRhs& rhs, double t, const VectorX& y,
                    const VectorX& f0) {
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    const Eigen::Index n = y.size();
    MatrixX J(n, n);
    VectorX yp = y, fp(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double delta = sqrt_eps * std::max(std::abs(y[j]), 1.0);
        yp[j] = y[j] + delta;
        rhs(t, yp, fp);
        J.col(j) = (fp - f0) / delta;
        yp[j] = y[j];
    }
    return J;
}

double scaled_norm(const VectorX& v, const VectorX& scale) {
    return std::sqrt((v.array() / scale.array()).square().mean());
}

double initial_step_guess(const OdeRhs& rhs, double t0, const VectorX& y0,
                          const VectorX& f0, double span, double atol,
                          double rtol) {
    VectorX sc = (atol + rtol * y0.cwiseAbs().array()).matrix();
    const double d0 = scaled_norm(y0, sc);
    const double d1 = scaled_norm(f0, sc);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    VectorX y1 = y0 + h0 * f0, f1(y0.size());
    rhs(t0 + h0, y1, f1);
    const double d2 = scaled_norm(f1 - f0, sc) / h0;
    const double d12 = std::max(d1, d2);
    double h1 = (d12 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                               : std::pow(0.01 / d12, 1.0 / 6.0);
    return std::min({100.0 * h0, h1, span});
}

}  // namespace

VectorX Trajectory::sample(double t) const {
    const double tb = t_begin(), te = t_end();
    const double tol = 1e-12 * (1.0 + std::abs(te - tb));
    if (t < tb - tol || t > te + tol)
        throw std::domain_error("Trajectory::sample: time outside range");
    if (steps_.empty()) return states_.front();
    t = std::clamp(t, tb, te);

    size_t lo = 0, hi = steps_.size() - 1;
    while (lo < hi) {
        size_t mid = (lo + hi + 1) / 2;
        if (steps_[mid].t0 <= t) lo = mid;
        else hi = mid - 1;
    }
    const Step& st = steps_[lo];
    const double theta = std::clamp((t - st.t0) / st.h, 0.0, 1.0);

    const auto& tab = tableau();
    Eigen::Vector3d w;
    for (int i = 0; i < 3; ++i)
        w[i] = theta * (tab.interp(0, i) +
                        theta * (tab.interp(1, i) + theta * tab.interp(2, i)));
    return st.y0 + st.h * (st.stage_derivs * w);
}

Trajectory integrate(const OdeRhs& rhs, VectorX y0, double t0, double t1,
                     const IntegratorConfig& cfg) {
    if (!(t1 > t0)) throw std::invalid_argument("integrate: need t1 > t0");
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
        throw std::invalid_argument("integrate: tolerances must be positive");
    if (cfg.max_steps <= 0)
        throw std::invalid_argument("integrate: max_steps must be positive");

    const auto& tab = tableau();
    const Eigen::Index n = y0.size();
    const bool fixed = cfg.fixed_step > 0.0;
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() *
                        std::max({std::abs(t0), std::abs(t1), 1.0});

    Trajectory traj;
    traj.rhs_ = rhs;
    traj.times_.push_back(t0);
    traj.states_.push_back(y0);

    double t = t0;
    VectorX y = std::move(y0);
    VectorX f0(n);
    rhs(t, y, f0);

    double h = fixed ? cfg.fixed_step
                     : (cfg.initial_step > 0.0
                            ? cfg.initial_step
                            : initial_step_guess(rhs, t, y, f0, t1 - t0,
                                                 cfg.abs_tol, cfg.rel_tol));
    h = std::min(h, t1 - t0);

    MatrixX J;
    Eigen::PartialPivLU<MatrixX> newton_lu;  // I - h (A x J), 3n x 3n
    Eigen::PartialPivLU<MatrixX> filter_lu;  // I - h gamma0 J, n x n
    double factored_h = -1.0;
    bool have_jac = false;

    MatrixX Z(n, 3), F(n, 3);
    VectorX stage_y(n), stage_f(n), newton_scale(n);

    long steps_taken = 0;
    while (t < t1 - hmin) {
        if (++steps_taken > cfg.max_steps)
            throw IntegrationError(IntegrationError::Kind::MaxSteps,
                                   "integrate: exceeded max_steps");
        h = std::min(h, t1 - t);

        if (!have_jac) {
            J = fd_jacobian(rhs, t, y, f0);
            have_jac = true;
            factored_h = -1.0;
        }
        if (h != factored_h) {
            MatrixX M = MatrixX::Identity(3 * n, 3 * n);
            for (int bi = 0; bi < 3; ++bi)
                for (int bj = 0; bj < 3; ++bj)
                    M.block(bi * n, bj * n, n, n) -= h * tab.A(bi, bj) * J;
            newton_lu.compute(M);
            filter_lu.compute(MatrixX::Identity(n, n) - h * tab.gamma0 * J);
            factored_h = h;
        }

        // Simplified Newton on the stage increments Z_i = Y_i - y.
        newton_scale =
            (cfg.abs_tol + cfg.rel_tol * y.cwiseAbs().array()).matrix();
        Z.setZero();
        bool converged = false;
        double prev_inc = -1.0;
        VectorX G(3 * n), dZ(3 * n);
        for (int iter = 0; iter < cfg.newton_max_iters; ++iter) {
            for (int i = 0; i < 3; ++i) {
                stage_y = y + Z.col(i);
                rhs(t + tab.c[i] * h, stage_y, stage_f);
                F.col(i) = stage_f;
            }
            for (int i = 0; i < 3; ++i) {
                VectorX gi = Z.col(i);
                for (int j = 0; j < 3; ++j) gi -= h * tab.A(i, j) * F.col(j);
                G.segment(i * n, n) = gi;
            }
            dZ = newton_lu.solve(-G);
            for (int i = 0; i < 3; ++i) Z.col(i) += dZ.segment(i * n, n);

            double inc = 0.0, znorm = 0.0;
            for (int i = 0; i < 3; ++i) {
                inc = std::max(inc, scaled_norm(dZ.segment(i * n, n),
                                                newton_scale));
                znorm = std::max(znorm, scaled_norm(Z.col(i), newton_scale));
            }
            if (!std::isfinite(inc)) break;
            // roundoff floor: corrections at machine precision of the stage
            // values cannot shrink further
            const double floor_inc = 100.0 *
                                     std::numeric_limits<double>::epsilon() *
                                     std::max(1.0, znorm);
            if (inc <= cfg.newton_tol || inc <= floor_inc) {
                converged = true;
                break;
            }
            if (prev_inc > 0.0 && inc > 2.0 * prev_inc) break;  // diverging
            prev_inc = inc;
        }

        if (!converged) {
            if (fixed)
                throw IntegrationError(
                    IntegrationError::Kind::StiffFailure,
                    "integrate: Newton iteration failed at fixed step size");
            h *= 0.25;
            have_jac = false;
            if (h < hmin)
                throw IntegrationError(IntegrationError::Kind::StiffFailure,
                                       "integrate: Newton iteration failed at "
                                       "the minimum step size");
            continue;
        }

        // Collocation derivatives of the converged step: h F = A^{-1} Z.
        MatrixX stage_derivs = (Z * tab.Ainv.transpose()) / h;
        VectorX y1 = y + Z.col(2);  // stiffly accurate: c_3 = 1

        double factor = 1.0;
        if (!fixed) {
            // Embedded error estimate, damped for stiff components.
            VectorX est = tab.gamma0 * f0;
            for (int i = 0; i < 3; ++i)
                est += tab.bhat_minus_b[i] * stage_derivs.col(i);
            est = filter_lu.solve(VectorX(h * est));
            VectorX esc = (cfg.abs_tol +
                           cfg.rel_tol *
                               y.cwiseAbs().cwiseMax(y1.cwiseAbs()).array())
                              .matrix();
            const double err = scaled_norm(est, esc);

            factor = std::isfinite(err) && err > 0.0
                         ? 0.9 * std::pow(err, -0.2)
                         : 5.0;
            factor = std::clamp(factor, 0.2, 5.0);

            if (!std::isfinite(err) || err > 1.0) {
                h *= factor;
                if (h < hmin)
                    throw IntegrationError(
                        IntegrationError::Kind::StiffFailure,
                        "integrate: step size underflow under error control");
                continue;
            }
        }

        traj.steps_.push_back(Trajectory::Step{t, h, y, stage_derivs});
        t += h;
        if (std::abs(t1 - t) <= hmin) t = t1;
        y = std::move(y1);
        traj.times_.push_back(t);
        traj.states_.push_back(y);
        if (t >= t1) break;
        rhs(t, y, f0);
        have_jac = false;
        h = fixed ? cfg.fixed_step : h * factor;
    }
    return traj;
}

PeakResult find_first_peak(
    const Trajectory& traj,
    const std::function<double(const VectorX&)>& observable) {
    const auto& rhs = traj.rhs();

    // d/dt observable(y(t)) via a centered directional difference along the
    // stored right-hand side; its accuracy follows the interpolant values,
    // not the interpolant's own derivative.
    auto slope = [&](double t) {
        VectorX y = traj.sample(t);
        VectorX f(y.size());
        rhs(t, y, f);
        const double fn = f.norm();
        if (fn == 0.0) return 0.0;
        const double eps = std::sqrt(std::numeric_limits<double>::epsilon()) *
                           (1.0 + y.norm()) / fn;
        return (observable(y + eps * f) - observable(y - eps * f)) /
               (2.0 * eps);
    };

    // Sample at the collocation nodes of every step so maxima inside long
    // steps are not skipped.
    const double s6 = std::sqrt(6.0);
    const std::array<double, 2> nodes{(4.0 - s6) / 10.0, (4.0 + s6) / 10.0};
    std::vector<double> ts;
    ts.reserve(3 * traj.steps().size() + 1);
    for (const auto& st : traj.steps()) {
        ts.push_back(st.t0);
        ts.push_back(st.t0 + nodes[0] * st.h);
        ts.push_back(st.t0 + nodes[1] * st.h);
    }
    ts.push_back(traj.t_end());

    double prev_t = ts.front();
    double prev_s = slope(prev_t);
    for (size_t k = 1; k < ts.size(); ++k) {
        const double cur_t = ts[k];
        const double cur_s = slope(cur_t);
        if (prev_s > 0.0 && cur_s <= 0.0) {
            double lo = prev_t, hi = cur_t;
            while (hi - lo > 1e-9) {
                const double mid = 0.5 * (lo + hi);
                if (slope(mid) > 0.0) lo = mid;
                else hi = mid;
            }
            const double tp = 0.5 * (lo + hi);
            return PeakResult{tp, observable(traj.sample(tp)), true};
        }
        prev_t = cur_t;
        prev_s = cur_s;
    }

    const double va = observable(traj.states().front());
    const double vb = observable(traj.final_state());
    if (vb >= va) return PeakResult{traj.t_end(), vb, false};
    return PeakResult{traj.t_begin(), va, false};
}

}  // namespace qsearch
