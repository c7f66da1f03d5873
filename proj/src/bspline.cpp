#include "qsearch/bspline.hpp"

#include <stdexcept>

namespace qsearch {

BSplineControl::BSplineControl(VectorX control_points, double t_end)
    : points_(std::move(control_points)), t_end_(t_end) {
    const int m = num_points();
    if (m < degree + 1)
        throw std::invalid_argument("bspline: need at least 4 control points");
    if (!(t_end > 0.0))
        throw std::invalid_argument("bspline: t_end must be positive");
    // Clamped knots: degree+1 copies at each end, uniform interior.
    const int interior = m - degree - 1;
    knots_.resize(m + degree + 1);
    for (int k = 0; k <= degree; ++k) {
        knots_[k] = 0.0;
        knots_[m + k] = t_end;
    }
    for (int k = 1; k <= interior; ++k)
        knots_[degree + k] = t_end * k / (interior + 1);
}

double BSplineControl::operator()(double t) const {
    const double slack = 1e-12 * (1.0 + t_end_);
    if (t < -slack || t > t_end_ + slack)
        throw std::domain_error("bspline: t outside [0, t_end]");
    t = std::min(std::max(t, 0.0), t_end_);

    // Knot span index: largest k with knots_[k] <= t, clamped to the last
    // nonempty span.
    int span = degree;
    const int last = num_points() - 1;
    while (span < last && t >= knots_[span + 1]) ++span;

    double d[degree + 1];
    for (int j = 0; j <= degree; ++j) d[j] = points_[span - degree + j];
    for (int r = 1; r <= degree; ++r)
        for (int j = degree; j >= r; --j) {
            const int i = span - degree + j;
            const double den = knots_[i + degree + 1 - r] - knots_[i];
            const double alpha = den == 0.0 ? 0.0 : (t - knots_[i]) / den;
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
        }
    return d[degree];
}

}  // namespace qsearch
