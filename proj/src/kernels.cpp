#include "mctd/kernels.hpp"

#include <cmath>

namespace mctd::kernels {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873127623544;

inline double scaled_distance(const Eigen::MatrixXd& a, Eigen::Index i,
                              const Eigen::MatrixXd& b, Eigen::Index j,
                              const Eigen::VectorXd& inv_ls) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double d = (a(i, k) - b(j, k)) * inv_ls[k];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double matern52(double r) {
  const double t = kSqrt5 * r;
  return (1.0 + t + t * t / 3.0) * std::exp(-t);
}

Eigen::MatrixXd matern52_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               const Eigen::VectorXd& lengthscales, double signal_variance) {
  const Eigen::VectorXd inv_ls = lengthscales.cwiseInverse();
  Eigen::MatrixXd k(a.rows(), b.rows());
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = b.rows();
#pragma omp parallel for schedule(static) if (rows * cols > 4096)
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      k(i, j) = signal_variance * matern52(scaled_distance(a, i, b, j, inv_ls));
  return k;
}

Eigen::MatrixXd matern52_cross_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                      const Eigen::VectorXd& lengthscales,
                                      double signal_variance) {
  const Eigen::VectorXd inv_ls = lengthscales.cwiseInverse();
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = signal_variance * matern52(scaled_distance(a, i, b, j, inv_ls));
  return k;
}

Eigen::MatrixXd matern52_gram(const Eigen::MatrixXd& a, const Eigen::VectorXd& lengthscales,
                              double signal_variance, double diag_add) {
  const Eigen::VectorXd inv_ls = lengthscales.cwiseInverse();
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (n > 64)
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = signal_variance + diag_add;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = signal_variance * matern52(scaled_distance(a, i, a, j, inv_ls));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd matern52_gram_serial(const Eigen::MatrixXd& a,
                                     const Eigen::VectorXd& lengthscales,
                                     double signal_variance, double diag_add) {
  const Eigen::VectorXd inv_ls = lengthscales.cwiseInverse();
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = signal_variance + diag_add;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = signal_variance * matern52(scaled_distance(a, i, a, j, inv_ls));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace mctd::kernels
