#include "pedcross/kalman.hpp"

#include "pedcross/errors.hpp"

namespace pedcross {

namespace {

StateMatrix transition_matrix() {
    StateMatrix f = StateMatrix::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
    return f;
}

void symmetrize(StateMatrix& p) { p = ((p + p.transpose()) / 2.0).eval(); }

}  // namespace

KalmanState KalmanFilter::init(const BoxMeasurement& z) const {
    if (z.h <= 0.0 || z.lambda <= 0.0) {
        throw NonPositiveExtent("kalman init: aspect ratio and height must be positive");
    }
    KalmanState s;
    s.mean << z.u, z.v, z.lambda, z.h, 0.0, 0.0, 0.0, 0.0;

    const double pos = noise_.init_position_factor * noise_.process_position_std * z.h;
    const double vel = noise_.init_velocity_factor * noise_.process_velocity_std * z.h;
    Eigen::Matrix<double, 8, 1> std;
    std << pos, pos, noise_.aspect_position_std, pos,
           vel, vel, noise_.aspect_velocity_std, vel;
    s.covariance = std.array().square().matrix().asDiagonal();
    return s;
}

KalmanState KalmanFilter::predict(const KalmanState& s) const {
    const StateMatrix f = transition_matrix();
    const double h = s.mean(3);
    const double pos = noise_.process_position_std * h;
    const double vel = noise_.process_velocity_std * h;
    Eigen::Matrix<double, 8, 1> std;
    std << pos, pos, noise_.aspect_position_std, pos,
           vel, vel, noise_.aspect_velocity_std, vel;

    KalmanState out;
    out.mean = f * s.mean;
    out.covariance = f * s.covariance * f.transpose();
    out.covariance += StateMatrix(std.array().square().matrix().asDiagonal());
    symmetrize(out.covariance);
    return out;
}

KalmanState KalmanFilter::update(const KalmanState& s, const BoxMeasurement& z) const {
    using ObsMatrix = Eigen::Matrix<double, 4, 8>;
    ObsMatrix h_mat = ObsMatrix::Zero();
    for (int i = 0; i < 4; ++i) h_mat(i, i) = 1.0;

    const double mh = noise_.measurement_std * s.mean(3);
    Eigen::Matrix<double, 4, 1> std;
    std << mh, mh, noise_.aspect_position_std, mh;
    Eigen::Matrix4d r = std.array().square().matrix().asDiagonal();

    Eigen::Matrix4d innovation_cov = h_mat * s.covariance * h_mat.transpose() + r;
    Eigen::LDLT<Eigen::Matrix4d> ldlt(innovation_cov);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
        throw SingularInnovation("kalman update: innovation covariance is not invertible");
    }

    MeasurementVector zv;
    zv << z.u, z.v, z.lambda, z.h;
    MeasurementVector innovation = zv - h_mat * s.mean;

    Eigen::Matrix<double, 8, 4> gain =
        ldlt.solve(h_mat * s.covariance.transpose()).transpose();

    KalmanState out;
    out.mean = s.mean + gain * innovation;
    // Joseph form keeps the covariance symmetric positive semidefinite under
    // extreme noise ratios.
    StateMatrix ikh = StateMatrix::Identity() - gain * h_mat;
    out.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
    symmetrize(out.covariance);
    return out;
}

}  // namespace pedcross
