#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qsearch/radau.hpp"

using namespace qsearch;

namespace {

OdeRhs decay = [](double, const VectorX& y, VectorX& dy) { dy = -y; };

}  // namespace

TEST_CASE("scalar linear test reaches e^-1") {
    VectorX y0 = VectorX::Ones(1);
    auto traj = integrate(decay, y0, 0.0, 1.0);
    CHECK(traj.final_state()[0] ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK(traj.t_end() == doctest::Approx(1.0));
}

TEST_CASE("fixed-step global error scales like h^5") {
    std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errs;
    for (double h : hs) {
        IntegratorConfig cfg;
        cfg.fixed_step = h;
        cfg.newton_tol = 1e-13;
        cfg.newton_max_iters = 20;
        auto traj = integrate(decay, VectorX::Ones(1), 0.0, 1.0, cfg);
        errs.push_back(std::abs(traj.final_state()[0] - std::exp(-1.0)));
    }
    // least-squares slope in log-log
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(hs.size());
    for (int i = 0; i < m; ++i) {
        const double x = std::log(hs[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope == doctest::Approx(5.0).epsilon(0.06));  // 5 +- 0.3
}

TEST_CASE("stiff problem integrates without step collapse") {
    const double k = 1e5;
    OdeRhs stiff = [k](double, const VectorX& y, VectorX& dy) {
        dy.resize(2);
        dy[0] = -k * (y[0] - std::sin(y[1]));
        dy[1] = 1.0;
    };
    VectorX y0(2);
    y0 << 1.0, 0.0;
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-8;
    cfg.abs_tol = 1e-10;
    auto traj = integrate(stiff, y0, 0.0, 2.0, cfg);
    // particular solution (k^2 sin t - k cos t)/(k^2 + 1); transient decayed
    const double expected =
        (k * k * std::sin(2.0) - k * std::cos(2.0)) / (k * k + 1.0);
    CHECK(traj.final_state()[0] == doctest::Approx(expected).epsilon(1e-8));
    // an explicit method would need ~1e5 steps here
    CHECK(traj.steps().size() < 500);
}

TEST_CASE("dense output equals step solutions at the endpoints") {
    auto traj = integrate(decay, VectorX::Ones(1), 0.0, 1.0);
    for (size_t k = 0; k < traj.times().size(); ++k) {
        VectorX s = traj.sample(traj.times()[k]);
        CHECK(s[0] == doctest::Approx(traj.states()[k][0]).epsilon(1e-15));
    }
}

TEST_CASE("dense output interpolates accurately inside steps") {
    OdeRhs cosine = [](double t, const VectorX&, VectorX& dy) {
        dy.resize(1);
        dy[0] = std::cos(t);
    };
    auto traj = integrate(cosine, VectorX::Zero(1), 0.0, 3.0);
    for (double t = 0.05; t < 3.0; t += 0.1)
        CHECK(traj.sample(t)[0] == doctest::Approx(std::sin(t)).epsilon(1e-9));
    CHECK_THROWS_AS(traj.sample(3.5), std::domain_error);
}

TEST_CASE("tolerance halving does not hurt accuracy") {
    OdeRhs orbit = [](double, const VectorX& y, VectorX& dy) {
        dy.resize(2);
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    VectorX y0(2);
    y0 << 1.0, 0.0;
    double prev_err = -1.0;
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        IntegratorConfig cfg;
        cfg.rel_tol = tol;
        cfg.abs_tol = tol * 1e-2;
        auto traj = integrate(orbit, y0, 0.0, 10.0, cfg);
        const double err = std::abs(traj.final_state()[0] - std::cos(10.0)) +
                           std::abs(traj.final_state()[1] + std::sin(10.0));
        if (prev_err > 0.0) CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("max step guard fires") {
    IntegratorConfig cfg;
    cfg.max_steps = 3;
    try {
        integrate(decay, VectorX::Ones(1), 0.0, 1e6, cfg);
        FAIL("expected MaxSteps");
    } catch (const IntegrationError& e) {
        CHECK(e.kind == IntegrationError::Kind::MaxSteps);
    }
}

TEST_CASE("right-hand side breakdown reports a stiff failure") {
    // derivative turns NaN past t = 1: Newton can never converge there
    OdeRhs breaks = [](double t, const VectorX& y, VectorX& dy) {
        dy.resize(1);
        dy[0] = std::sqrt(1.0 - t) * (1.0 + 0.0 * y[0]);
    };
    CHECK_THROWS_AS(integrate(breaks, VectorX::Zero(1), 0.0, 2.0),
                    IntegrationError);
}

TEST_CASE("config validation") {
    IntegratorConfig bad;
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(integrate(decay, VectorX::Ones(1), 0.0, 1.0, bad),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(decay, VectorX::Ones(1), 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("first peak of sin^2") {
    OdeRhs unit = [](double, const VectorX&, VectorX& dy) {
        dy.resize(1);
        dy[0] = 1.0;
    };
    auto traj = integrate(unit, VectorX::Zero(1), 0.0, 3.0);
    auto peak = find_first_peak(traj, [](const VectorX& y) {
        return std::sin(y[0]) * std::sin(y[0]);
    });
    CHECK(peak.interior);
    CHECK(peak.t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-6));
    CHECK(peak.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("monotone observable reports the endpoint") {
    auto traj = integrate(decay, VectorX::Ones(1), 0.0, 1.0);
    auto falling =
        find_first_peak(traj, [](const VectorX& y) { return y[0]; });
    CHECK_FALSE(falling.interior);
    CHECK(falling.t == doctest::Approx(0.0));
    auto rising =
        find_first_peak(traj, [](const VectorX& y) { return -y[0]; });
    CHECK_FALSE(rising.interior);
    CHECK(rising.t == doctest::Approx(1.0));
}

TEST_CASE("oscillator peak found inside a long integration") {
    OdeRhs orbit = [](double, const VectorX& y, VectorX& dy) {
        dy.resize(2);
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    VectorX y0(2);
    y0 << 0.0, 1.0;  // y(t) = sin t
    auto traj = integrate(orbit, y0, 0.0, 8.0);
    auto peak = find_first_peak(traj, [](const VectorX& y) { return y[0]; });
    CHECK(peak.interior);
    CHECK(peak.t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-7));
}
