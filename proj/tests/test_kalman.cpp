#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "pedcross/kalman.hpp"
#include "pedcross/rng.hpp"

using namespace pedcross;

namespace {

bool symmetric_psd(const StateMatrix& p, double tol = 1e-9) {
    if (((p - p.transpose()).array().abs() > tol).any()) return false;
    Eigen::SelfAdjointEigenSolver<StateMatrix> es(p);
    return (es.eigenvalues().array() >= -tol).all();
}

}  // namespace

TEST_CASE("init yields zero velocity and diagonal PSD covariance") {
    KalmanFilter filter;
    KalmanState s = filter.init({35, 70, 0.5, 100});
    CHECK(s.mean(0) == 35.0);
    CHECK(s.mean(1) == 70.0);
    CHECK(s.mean(2) == 0.5);
    CHECK(s.mean(3) == 100.0);
    CHECK(s.mean.tail<4>().isZero());
    CHECK(symmetric_psd(s.covariance));

    KalmanState again = filter.init({35, 70, 0.5, 100});
    CHECK(again.mean == s.mean);
    CHECK(again.covariance == s.covariance);
}

TEST_CASE("init rejects degenerate measurements") {
    KalmanFilter filter;
    CHECK_THROWS_AS(filter.init({0, 0, 0.5, 0.0}), NonPositiveExtent);
    CHECK_THROWS_AS(filter.init({0, 0, -0.5, 10.0}), NonPositiveExtent);
}

TEST_CASE("predict advances position by velocity") {
    KalmanFilter filter;
    KalmanState s = filter.init({100, 100, 0.5, 80});
    s.mean(4) = 2.0;
    s.mean(5) = -1.0;
    KalmanState next = filter.predict(s);
    CHECK(next.mean(0) == doctest::Approx(102.0));
    CHECK(next.mean(1) == doctest::Approx(99.0));
    CHECK(next.mean(2) == doctest::Approx(0.5));
    CHECK(next.mean(3) == doctest::Approx(80.0));

    KalmanState still = filter.init({100, 100, 0.5, 80});
    KalmanState next_still = filter.predict(still);
    CHECK(next_still.mean.head<4>() == still.mean.head<4>());
    // Process noise strictly inflates the covariance.
    CHECK(next_still.covariance.trace() > still.covariance.trace());
}

TEST_CASE("update with tiny measurement noise pins the position block") {
    KalmanNoise noise;
    noise.measurement_std = 1e-9;
    KalmanFilter filter(noise);
    KalmanState s = filter.init({100, 100, 0.5, 80});
    s = filter.predict(s);
    KalmanState posterior = filter.update(s, {104, 98, 0.52, 82});
    CHECK(posterior.mean(0) == doctest::Approx(104).epsilon(1e-6));
    CHECK(posterior.mean(1) == doctest::Approx(98).epsilon(1e-6));
    CHECK(posterior.mean(3) == doctest::Approx(82).epsilon(1e-6));
}

TEST_CASE("posterior position lies between prediction and measurement") {
    KalmanFilter filter;
    KalmanState s = filter.init({100, 100, 0.5, 80});
    s = filter.predict(s);
    BoxMeasurement z{110, 90, 0.6, 92};
    KalmanState posterior = filter.update(s, z);
    const double zs[4] = {z.u, z.v, z.lambda, z.h};
    for (int i = 0; i < 4; ++i) {
        const double lo = std::min(s.mean(i), zs[i]);
        const double hi = std::max(s.mean(i), zs[i]);
        CHECK(posterior.mean(i) >= lo - 1e-12);
        CHECK(posterior.mean(i) <= hi + 1e-12);
    }
}

TEST_CASE("repeated updates converge to a constant measurement") {
    KalmanFilter filter;
    KalmanState s = filter.init({100, 100, 0.5, 80});
    s.mean(4) = 5.0;  // moving prior
    s.mean(5) = -3.0;
    BoxMeasurement z{140, 60, 0.5, 80};
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
        s = filter.update(s, z);
        const double err = std::hypot(s.mean(0) - z.u, s.mean(1) - z.v);
        if (i >= 2) CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1.0);
}

TEST_CASE("covariance stays symmetric PSD through predict/update cycles") {
    KalmanFilter filter;
    Rng rng(17);
    KalmanState s = filter.init({200, 150, 0.4, 120});
    for (int i = 0; i < 200; ++i) {
        s = filter.predict(s);
        BoxMeasurement z{200 + rng.uniform(-5, 5), 150 + rng.uniform(-5, 5),
                         0.4 + rng.uniform(-0.01, 0.01), 120 + rng.uniform(-3, 3)};
        s = filter.update(s, z);
        REQUIRE(symmetric_psd(s.covariance));
    }
}

TEST_CASE("singular innovation is reported") {
    KalmanNoise noise;
    noise.measurement_std = 0.0;
    noise.aspect_position_std = 0.0;
    noise.process_position_std = 0.0;
    noise.process_velocity_std = 0.0;
    noise.aspect_velocity_std = 0.0;
    noise.init_position_factor = 0.0;
    noise.init_velocity_factor = 0.0;
    KalmanFilter filter(noise);
    KalmanState s = filter.init({10, 10, 1.0, 10});  // zero covariance, zero R
    CHECK_THROWS_AS(filter.update(s, {10, 10, 1.0, 10}), SingularInnovation);
}
