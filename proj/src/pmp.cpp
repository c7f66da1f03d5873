#include "qsearch/pmp.hpp"

#include <cmath>

namespace qsearch {

double pmp_hamiltonian(double t, const VectorX& polar, const Costates& co,
                       const ControlScheme& scheme, double gamma,
                       const ShellDescriptor& shells) {
    const int m = shells.num_shells();
    VectorX dy = rhs_shells(t, polar, scheme, gamma, shells);
    return co.lambda.dot(dy.head(m)) + co.Lambda.dot(dy.segment(m, m));
}

Costates costate_rhs(double t, const VectorX& polar, const Costates& co,
                     const ControlScheme& scheme, double gamma,
                     const ShellDescriptor& shells) {
    const int m = shells.num_shells();
    if (polar.size() != 2 * m)
        throw std::invalid_argument("costate_rhs: state size != 2(d+1)");
    const auto r = polar.head(m);
    const auto th = polar.segment(m, m);
    for (int i = 0; i < m; ++i)
        if (!(r[i] > 1e-150))
            throw PolarSingularity(
                "costate_rhs: radial component vanished (use Cartesian form)");

    auto lam = [&](int i) { return (i >= 0 && i < m) ? co.lambda[i] : 0.0; };
    auto Lam = [&](int i) { return (i >= 0 && i < m) ? co.Lambda[i] : 0.0; };

    Costates dot;
    dot.lambda = VectorX::Zero(m);
    dot.Lambda = VectorX::Zero(m);

    for (int x = 0; x < m; ++x) {
        const double bx = shells.back_edges(x);       // edges x -> x-1
        const double cx = shells.forward_edges(x);    // edges x -> x+1
        const double bx1 = x + 1 < m ? shells.back_edges(x + 1) : 0.0;
        const double cxm = x > 0 ? shells.forward_edges(x - 1) : 0.0;

        double dH_dr = 0.0;
        double dH_dth = 0.0;

        if (x + 1 < m) {
            const double s = std::sin(th[x] - th[x + 1]);
            const double cth = std::cos(th[x] - th[x + 1]);
            dH_dr += gamma * (lam(x + 1) * bx1 * s -
                              Lam(x + 1) * bx1 / r[x + 1] * cth);
            dH_dth += gamma * (lam(x + 1) * bx1 * r[x] * cth +
                               Lam(x + 1) * bx1 * (r[x] / r[x + 1]) * s);
        }
        if (x > 0) {
            const double s = std::sin(th[x] - th[x - 1]);
            const double cth = std::cos(th[x] - th[x - 1]);
            dH_dr += gamma * (lam(x - 1) * cxm * s -
                              Lam(x - 1) * cxm / r[x - 1] * cth);
            dH_dth += gamma * (lam(x - 1) * cxm * r[x] * cth +
                               Lam(x - 1) * cxm * (r[x] / r[x - 1]) * s);
        }
        // own-equation terms
        double own_r = 0.0, own_th_r = 0.0, own_th_s = 0.0;
        if (x > 0) {
            const double cth = std::cos(th[x - 1] - th[x]);
            const double s = std::sin(th[x - 1] - th[x]);
            own_r += bx * r[x - 1] / (r[x] * r[x]) * cth;
            own_th_r += bx * r[x - 1] * cth;
            own_th_s += bx * (r[x - 1] / r[x]) * s;
        }
        if (x + 1 < m) {
            const double cth = std::cos(th[x + 1] - th[x]);
            const double s = std::sin(th[x + 1] - th[x]);
            own_r += cx * r[x + 1] / (r[x] * r[x]) * cth;
            own_th_r += cx * r[x + 1] * cth;
            own_th_s += cx * (r[x + 1] / r[x]) * s;
        }
        dH_dr += gamma * Lam(x) * own_r;
        dH_dth += gamma * (-lam(x) * own_th_r - Lam(x) * own_th_s);

        // control term -u_x r_x^{2 zeta_x} in theta_x'
        const double ux = scheme.control(x, t);
        if (scheme.zeta[x] != 0 && ux != 0.0)
            dH_dr -= Lam(x) * ux * 2.0 * scheme.zeta[x] *
                     nonlinearity_weight(r[x] * r[x], scheme.zeta[x]) / r[x];

        dot.lambda[x] = -dH_dr;
        dot.Lambda[x] = -dH_dth;
    }
    return dot;
}

double optimality_residual(const VectorX& polar, const Costates& co,
                           const ControlScheme& scheme) {
    const int m = static_cast<int>(co.Lambda.size());
    double res = 0.0;
    for (int i = 0; i < m; ++i)
        res += co.Lambda[i] *
               nonlinearity_weight(polar[i] * polar[i], scheme.zeta[i]);
    return res;
}

}  // namespace qsearch
