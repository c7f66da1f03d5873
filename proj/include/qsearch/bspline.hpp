#pragma once

#include "qsearch/types.hpp"

namespace qsearch {

// Clamped uniform cubic B-spline on [0, t_end].  By the convex-hull property
// the curve never leaves [min(points), max(points)], so bounding the control
// points bounds the control signal.
class BSplineControl {
public:
    static constexpr int degree = 3;

    BSplineControl(VectorX control_points, double t_end);

    // de Boor evaluation; throws std::domain_error outside [0, t_end].
    double operator()(double t) const;

    int num_points() const { return static_cast<int>(points_.size()); }
    double t_end() const { return t_end_; }
    const VectorX& points() const { return points_; }
    double bound() const { return points_.cwiseAbs().maxCoeff(); }

private:
    VectorX points_;
    VectorX knots_;
    double t_end_;
};

}  // namespace qsearch
