#pragma once

#include <Eigen/Core>

// Data-parallel covariance kernels. Each OpenMP kernel has a serial twin with
// the same arithmetic; tests require the two to agree bit-for-bit and the
// benchmark target compares their throughput.
namespace mctd::kernels {

// Matern-5/2 ARD correlation as a function of the scaled distance r.
double matern52(double r);

// K(i, j) = signal_variance * matern52(|(a_i - b_j) / lengthscale|).
// Rows of `a` and `b` are points; `lengthscales` has one entry per column.
Eigen::MatrixXd matern52_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               const Eigen::VectorXd& lengthscales, double signal_variance);
Eigen::MatrixXd matern52_cross_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                      const Eigen::VectorXd& lengthscales,
                                      double signal_variance);

// Symmetric training covariance with `diag_add` on the diagonal.
Eigen::MatrixXd matern52_gram(const Eigen::MatrixXd& a, const Eigen::VectorXd& lengthscales,
                              double signal_variance, double diag_add);
Eigen::MatrixXd matern52_gram_serial(const Eigen::MatrixXd& a,
                                     const Eigen::VectorXd& lengthscales,
                                     double signal_variance, double diag_add);

}  // namespace mctd::kernels
