#include "qsearch/dynamics.hpp"

#include <cmath>

namespace qsearch {

namespace {

constexpr double kRadialFloor = 1e-150;

void check_radial(double r, const char* where) {
    if (!(r > kRadialFloor))
        throw PolarSingularity(std::string(where) +
                               ": radial component vanished, phase "
                               "derivative undefined (use Cartesian form)");
}

}  // namespace

double nonlinearity_weight(double abs2, int zeta) {
    if (zeta == 0) return 1.0;
    if (zeta > 0) {
        double w = 1.0;
        for (int k = 0; k < zeta; ++k) w *= abs2;
        return w;
    }
    double w = 1.0;
    for (int k = 0; k < -zeta; ++k) w *= abs2;
    return 1.0 / w;
}

VectorXc rhs_full(double t, const VectorXc& x, const ControlScheme& scheme,
                  double gamma, const MatrixXi& L) {
    const Complex minus_i(0.0, -1.0);
    VectorXc lap = L.cast<Complex>() * x;
    VectorXc dx(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double nl = scheme.control(static_cast<int>(j), t) *
                    nonlinearity_weight(std::norm(x[j]), scheme.zeta[j]);
        dx[j] = minus_i * (gamma * lap[j] + nl * x[j]);
    }
    return dx;
}

VectorXc rhs_reduced(double t, const VectorXc& x, const ControlScheme& scheme,
                     double gamma, const MatrixX& coupling) {
    const Complex minus_i(0.0, -1.0);
    VectorXc dx(x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a) {
        Complex lap(0.0, 0.0);
        for (Eigen::Index b = 0; b < x.size(); ++b)
            if (b != a && coupling(a, b) != 0.0)
                lap += coupling(a, b) * (x[b] - x[a]);
        double nl = scheme.control(static_cast<int>(a), t) *
                    nonlinearity_weight(std::norm(x[a]), scheme.zeta[a]);
        dx[a] = minus_i * (gamma * lap + nl * x[a]);
    }
    return dx;
}

Eigen::Vector4d rhs_reduced_complete(double t, const Eigen::Vector4d& y,
                                     const ControlScheme& scheme,
                                     const ModelParams& p) {
    const double rs = y[0], ths = y[1], r = y[2], th = y[3];
    check_radial(rs, "rhs_reduced_complete");
    check_radial(r, "rhs_reduced_complete");
    const double gamma = p.gamma;
    const int n = p.n, N = p.N;
    const double us = scheme.control(0, t) *
                      nonlinearity_weight(rs * rs, scheme.zeta[0]);
    const double u = scheme.control(1, t) *
                     nonlinearity_weight(r * r, scheme.zeta[1]);

    Eigen::Vector4d dy;
    dy[0] = gamma * (n - N) * r * std::sin(th - ths);
    dy[1] = -gamma * (N - n + (n - N) * (r / rs) * std::cos(th - ths)) - us;
    dy[2] = gamma * N * rs * std::sin(ths - th);
    dy[3] = gamma * N * (1.0 - (rs / r) * std::cos(ths - th)) - u;
    return dy;
}

double probability_constraint(double r_star, int n, int N) {
    const double rem = 1.0 - N * r_star * r_star;
    if (rem < 0.0)
        throw std::domain_error("probability_constraint: N r_*^2 > 1");
    return std::sqrt(rem / (n - N));
}

Eigen::Vector2d rhs_contracted(double t, const Eigen::Vector2d& y,
                               const ControlScheme& scheme,
                               const ModelParams& p) {
    const double rs = y[0], Theta = y[1];
    const int n = p.n, N = p.N;
    // Clamp tiny constraint violations from roundoff near full success.
    double rem = 1.0 - N * rs * rs;
    if (rem < 0.0) {
        if (rem < -1e-8)
            throw std::domain_error("rhs_contracted: N r_*^2 > 1");
        rem = 0.0;
    }
    const double r = std::sqrt(rem / (n - N));
    check_radial(rs, "rhs_contracted");
    check_radial(r, "rhs_contracted");
    const double gamma = p.gamma;
    const double us = scheme.control(0, t) *
                      nonlinearity_weight(rs * rs, scheme.zeta[0]);
    const double u = scheme.control(1, t) *
                     nonlinearity_weight(r * r, scheme.zeta[1]);

    Eigen::Vector2d dy;
    dy[0] = gamma * (n - N) * r * std::sin(Theta);
    dy[1] = gamma * ((n - N) * r / rs - N * rs / r) * std::cos(Theta) -
            p.g - u + us;
    return dy;
}

VectorX rhs_shells(double t, const VectorX& y, const ControlScheme& scheme,
                   double gamma, const ShellDescriptor& shells) {
    const int m = shells.num_shells();
    if (y.size() != 2 * m)
        throw std::invalid_argument("rhs_shells: state size != 2(d+1)");
    const auto r = y.head(m);
    const auto th = y.segment(m, m);
    for (int i = 0; i < m; ++i) check_radial(r[i], "rhs_shells");

    VectorX dy(2 * m);
    for (int j = 0; j < m; ++j) {
        const double b = shells.back_edges(j);
        const double c = shells.forward_edges(j);
        double rdot = 0.0, coupling = 0.0;
        if (j > 0) {
            rdot += b * r[j - 1] * std::sin(th[j - 1] - th[j]);
            coupling += b * (1.0 - (r[j - 1] / r[j]) * std::cos(th[j - 1] - th[j]));
        }
        if (j < m - 1) {
            rdot += c * r[j + 1] * std::sin(th[j + 1] - th[j]);
            coupling += c * (1.0 - (r[j + 1] / r[j]) * std::cos(th[j + 1] - th[j]));
        }
        const double u = scheme.control(j, t) *
                         nonlinearity_weight(r[j] * r[j], scheme.zeta[j]);
        dy[j] = gamma * rdot;
        dy[m + j] = gamma * coupling - u;
    }
    return dy;
}

VectorX pack_cartesian(const VectorXc& x) {
    VectorX y(2 * x.size());
    y.head(x.size()) = x.real();
    y.tail(x.size()) = x.imag();
    return y;
}

VectorXc unpack_cartesian(const VectorX& y) {
    const Eigen::Index m = y.size() / 2;
    VectorXc x(m);
    x.real() = y.head(m);
    x.imag() = y.tail(m);
    return x;
}

VectorX pack_polar(const VectorXc& x) {
    VectorX y(2 * x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        y[k] = std::abs(x[k]);
        y[x.size() + k] = std::arg(x[k]);
    }
    return y;
}

VectorXc unpack_polar(const VectorX& y) {
    const Eigen::Index m = y.size() / 2;
    VectorXc x(m);
    for (Eigen::Index k = 0; k < m; ++k) x[k] = std::polar(y[k], y[m + k]);
    return x;
}

VectorXc polar_derivative_to_cartesian(const VectorX& polar,
                                       const VectorX& polar_dot) {
    const Eigen::Index m = polar.size() / 2;
    VectorXc dx(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Complex phase = std::polar(1.0, polar[m + k]);
        dx[k] = (Complex(polar_dot[k], 0.0) +
                 Complex(0.0, polar[k] * polar_dot[m + k])) *
                phase;
    }
    return dx;
}

}  // namespace qsearch
