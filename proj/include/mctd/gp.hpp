#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mctd/domain.hpp"

namespace mctd {

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matern-5/2 ARD hyperparameters. Lengthscales live in unit-cube units; the
// variances are on standardized targets.
struct KernelParams {
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 1e-4;
};

struct Interval {
  double lo;
  double hi;
};

struct GpBounds {
  Interval lengthscale{0.005, 2.0};
  Interval signal_variance{0.05, 20.0};
  Interval noise_variance{1e-6, 1e-2};
};

struct FitOptions {
  std::size_t restarts = 4;
  std::size_t evals_per_restart = 200;
  // Only the most recent max_train samples enter the model.
  std::size_t max_train = 300;
  // Hyperparameter search runs on at most this many of the most recent
  // training samples; the final model conditions on all of them. 0 = no cap.
  std::size_t hyper_subset = 0;
  GpBounds bounds{};
  // Replaces the default first start point when set.
  std::optional<KernelParams> warm_start;
};

inline constexpr double kJitterStart = 1e-6;
inline constexpr double kJitterMax = 1e-2;

// Posterior of a zero-mean GP on standardized targets over the unit cube.
// Immutable after construction and safe to share read-only.
class GpModel {
 public:
  // Conditions on `samples` (the last FitOptions::max_train are not applied
  // here; pass what should be used) with fixed hyperparameters. Throws
  // InsufficientData on an empty set and IllConditioned when the covariance
  // does not factor even with jitter 1e-2.
  static GpModel condition(const std::vector<Sample>& samples, const DomainBox& box,
                           KernelParams params);

  struct Prediction {
    double mean;
    double variance;
  };
  struct BatchPrediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
  };

  // Posterior mean and latent variance in original units.
  Prediction predict(const Point& x) const;
  BatchPrediction predict_batch(const std::vector<Point>& xs) const;
  BatchPrediction predict_batch_serial(const std::vector<Point>& xs) const;

  // -1/2 y'alpha - sum log diag(L) - n/2 log(2 pi), standardized targets.
  double log_marginal_likelihood() const;

  // Lengthscales rescaled to the box widths.
  Eigen::VectorXd correlation_lengths() const;
  // Geometric mean of the unit-cube lengthscales clamped to [0.1, 2].
  double correlation_scalar() const;

  // One joint posterior draw over the candidates, original units.
  Eigen::VectorXd sample_joint(const std::vector<Point>& xs, Rng& rng) const;

  const KernelParams& params() const { return params_; }
  const DomainBox& box() const { return box_; }
  std::size_t size() const { return static_cast<std::size_t>(train_x_.rows()); }
  std::size_t dim() const { return box_.dim(); }
  double y_mean() const { return y_mean_; }
  double y_std() const { return y_std_; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& train_x_unit() const { return train_x_; }
  const Eigen::VectorXd& train_y_standardized() const { return train_y_; }

 private:
  GpModel(DomainBox box) : box_(std::move(box)) {}
  Eigen::MatrixXd to_unit_rows(const std::vector<Point>& xs) const;

  DomainBox box_;
  Eigen::MatrixXd train_x_;
  Eigen::VectorXd train_y_;
  KernelParams params_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  double jitter_ = 0.0;
};

// Fits hyperparameters by maximizing the log marginal likelihood with
// multi-start derivative-free coordinate search in log-parameter space.
GpModel fit_gp(const std::vector<Sample>& samples, const DomainBox& box, Rng& rng,
               const FitOptions& options = {});

// Log marginal likelihood of standardized data for given hyperparameters,
// -inf when the covariance cannot be factored.
double log_marginal_likelihood(const Eigen::MatrixXd& x_unit, const Eigen::VectorXd& y,
                               const KernelParams& params);

// Expected improvement for minimization; max(best - mean, 0) when sd <= 1e-12.
double expected_improvement(double mean, double sd, double best_y);
double expected_improvement(const GpModel& model, const Point& x, double best_y);

double normal_pdf(double z);
double normal_cdf(double z);

// Indices of the `batch` smallest values of one joint posterior draw over
// the candidates (ties broken by index).
std::vector<std::size_t> thompson_select(const GpModel& model, const std::vector<Point>& candidates,
                                         Rng& rng, std::size_t batch);

}  // namespace mctd
