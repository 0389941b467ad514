#pragma once

#include <Eigen/Dense>

#include "pedcross/geometry.hpp"

namespace pedcross {

using StateVector = Eigen::Matrix<double, 8, 1>;   // (u, v, lambda, h, du, dv, dlambda, dh)
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;

struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Zero();

    BoxMeasurement measurement() const {
        return BoxMeasurement{mean(0), mean(1), mean(2), mean(3)};
    }
    BBox bbox() const { return state_to_bbox(mean(0), mean(1), mean(2), mean(3)); }
};

/// Noise model: position and velocity standard deviations scale with the box
/// height so the filter adapts to pedestrian size; the aspect-ratio component
/// uses small fixed stds.
struct KalmanNoise {
    double process_position_std = 1.0 / 20.0;   // x h
    double process_velocity_std = 1.0 / 160.0;  // x h
    double measurement_std = 1.0 / 20.0;        // x h
    double init_position_factor = 2.0;          // init pos std = factor x process_position_std x h
    double init_velocity_factor = 10.0;         // init vel std = factor x process_velocity_std x h
    double aspect_position_std = 1e-2;          // fixed
    double aspect_velocity_std = 1e-5;          // fixed
};

/// Constant-velocity Kalman filter over the 8-dim box state, unit time step
/// of one frame.
class KalmanFilter {
public:
    KalmanFilter() = default;
    explicit KalmanFilter(const KalmanNoise& noise) : noise_(noise) {}

    /// Initialize from a measurement with zero velocity. Throws
    /// NonPositiveExtent if h <= 0 or lambda <= 0.
    KalmanState init(const BoxMeasurement& z) const;

    /// Advance one frame: position block += velocity block, covariance
    /// propagated and inflated by process noise.
    KalmanState predict(const KalmanState& s) const;

    /// Linear-Gaussian measurement update (Joseph form). Throws
    /// SingularInnovation if the innovation covariance is not positive
    /// definite.
    KalmanState update(const KalmanState& s, const BoxMeasurement& z) const;

    const KalmanNoise& noise() const { return noise_; }

private:
    KalmanNoise noise_;
};

}  // namespace pedcross
