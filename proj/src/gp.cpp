#include "mctd/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mctd/kernels.hpp"

namespace mctd {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356065947281123527972;

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  bool ok = false;
};

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  return diag.allFinite() && (diag.array() > 0.0).all();
}

// Factors K + (noise + jitter) I, escalating jitter from 1e-6 by x10 to 1e-2.
Factor factor_gram(const Eigen::MatrixXd& x_unit, const KernelParams& p) {
  Factor f;
  Eigen::MatrixXd k =
      kernels::matern52_gram(x_unit, p.lengthscales, p.signal_variance, p.noise_variance);
  f.llt.compute(k);
  if (factor_ok(f.llt)) {
    f.ok = true;
    return f;
  }
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    f.llt.compute(kj);
    if (factor_ok(f.llt)) {
      f.jitter = jitter;
      f.ok = true;
      return f;
    }
  }
  return f;
}

double lml_from_factor(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& alpha) {
  const double n = static_cast<double>(y.size());
  const double log_det_half = llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * y.dot(alpha) - log_det_half - 0.5 * n * kLog2Pi;
}

// Log-space parameter vector: [log l_1..l_d, log signal, log noise].
Eigen::VectorXd pack(const KernelParams& p) {
  const Eigen::Index d = p.lengthscales.size();
  Eigen::VectorXd t(d + 2);
  t.head(d) = p.lengthscales.array().log().matrix();
  t[d] = std::log(p.signal_variance);
  t[d + 1] = std::log(p.noise_variance);
  return t;
}

KernelParams unpack(const Eigen::VectorXd& t) {
  const Eigen::Index d = t.size() - 2;
  KernelParams p;
  p.lengthscales = t.head(d).array().exp().matrix();
  p.signal_variance = std::exp(t[d]);
  p.noise_variance = std::exp(t[d + 1]);
  return p;
}

struct LogBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

LogBounds log_bounds(const GpBounds& b, Eigen::Index d) {
  LogBounds lb{Eigen::VectorXd(d + 2), Eigen::VectorXd(d + 2)};
  lb.lo.head(d).setConstant(std::log(b.lengthscale.lo));
  lb.hi.head(d).setConstant(std::log(b.lengthscale.hi));
  lb.lo[d] = std::log(b.signal_variance.lo);
  lb.hi[d] = std::log(b.signal_variance.hi);
  lb.lo[d + 1] = std::log(b.noise_variance.lo);
  lb.hi[d + 1] = std::log(b.noise_variance.hi);
  return lb;
}

// Coordinate pattern search maximizing the LML; only strict improvements are
// accepted, so the result is never worse than the start.
std::pair<Eigen::VectorXd, double> coordinate_search(const Eigen::MatrixXd& x_unit,
                                                     const Eigen::VectorXd& y,
                                                     Eigen::VectorXd theta, const LogBounds& lb,
                                                     std::size_t budget) {
  auto eval = [&](const Eigen::VectorXd& t) {
    return log_marginal_likelihood(x_unit, y, unpack(t));
  };
  double best = eval(theta);
  std::size_t used = 1;
  double step = 1.0;
  while (used < budget && step > 1e-3) {
    bool moved = false;
    for (Eigen::Index k = 0; k < theta.size() && used < budget; ++k) {
      for (double sign : {1.0, -1.0}) {
        if (used >= budget) break;
        Eigen::VectorXd cand = theta;
        cand[k] = std::clamp(theta[k] + sign * step, lb.lo[k], lb.hi[k]);
        if (cand[k] == theta[k]) continue;
        const double v = eval(cand);
        ++used;
        if (v > best) {
          best = v;
          theta = std::move(cand);
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return {theta, best};
}

struct Standardized {
  Eigen::MatrixXd x_unit;
  Eigen::VectorXd y;
  double mean = 0.0;
  double sd = 1.0;
};

Standardized standardize(const std::vector<Sample>& samples, const DomainBox& box) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto d = static_cast<Eigen::Index>(box.dim());
  Standardized s;
  s.x_unit.resize(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Sample& smp = samples[static_cast<std::size_t>(i)];
    if (smp.x.size() != d) throw ContractViolation("GP: sample dimension mismatch");
    s.x_unit.row(i) = box.to_unit(smp.x).transpose();
    y[i] = smp.y;
  }
  s.mean = y.mean();
  const double var = (y.array() - s.mean).square().mean();
  s.sd = var > 1e-24 ? std::sqrt(var) : 1.0;
  s.y = (y.array() - s.mean) / s.sd;
  return s;
}

std::vector<Sample> most_recent(const std::vector<Sample>& samples, std::size_t cap) {
  if (cap == 0 || samples.size() <= cap) return samples;
  return {samples.end() - static_cast<std::ptrdiff_t>(cap), samples.end()};
}

}  // namespace

double log_marginal_likelihood(const Eigen::MatrixXd& x_unit, const Eigen::VectorXd& y,
                               const KernelParams& params) {
  Factor f = factor_gram(x_unit, params);
  if (!f.ok) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = f.llt.solve(y);
  return lml_from_factor(f.llt, y, alpha);
}

GpModel GpModel::condition(const std::vector<Sample>& samples, const DomainBox& box,
                           KernelParams params) {
  if (samples.empty()) throw InsufficientData("GP: need at least one sample to condition on");
  if (static_cast<std::size_t>(params.lengthscales.size()) != box.dim())
    throw ContractViolation("GP: lengthscale count must equal the box dimension");
  Standardized s = standardize(samples, box);
  GpModel m(box);
  m.train_x_ = std::move(s.x_unit);
  m.train_y_ = std::move(s.y);
  m.y_mean_ = s.mean;
  m.y_std_ = s.sd;
  m.params_ = std::move(params);
  Factor f = factor_gram(m.train_x_, m.params_);
  if (!f.ok) throw IllConditioned("GP: covariance not positive definite after jitter escalation");
  m.chol_ = std::move(f.llt);
  m.jitter_ = f.jitter;
  m.alpha_ = m.chol_.solve(m.train_y_);
  return m;
}

Eigen::MatrixXd GpModel::to_unit_rows(const std::vector<Point>& xs) const {
  Eigen::MatrixXd u(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (static_cast<std::size_t>(xs[i].size()) != dim())
      throw ContractViolation("GP: query dimension mismatch");
    u.row(static_cast<Eigen::Index>(i)) = box_.to_unit(xs[i]).transpose();
  }
  return u;
}

GpModel::Prediction GpModel::predict(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dim())
    throw ContractViolation("GP: query dimension mismatch");
  const Eigen::RowVectorXd u = box_.to_unit(x).transpose();
  const Eigen::VectorXd ks =
      kernels::matern52_cross_serial(train_x_, u, params_.lengthscales, params_.signal_variance)
          .col(0);
  const double mean_s = ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(ks);
  const double var_s = std::max(params_.signal_variance - v.squaredNorm(), 0.0);
  return {y_mean_ + y_std_ * mean_s, y_std_ * y_std_ * var_s};
}

GpModel::BatchPrediction GpModel::predict_batch(const std::vector<Point>& xs) const {
  const Eigen::MatrixXd u = to_unit_rows(xs);
  // n x m cross covariance, parallel over training rows.
  const Eigen::MatrixXd kc =
      kernels::matern52_cross(train_x_, u, params_.lengthscales, params_.signal_variance);
  BatchPrediction out;
  out.mean = (kc.transpose() * alpha_).array() * y_std_ + y_mean_;
  const Eigen::MatrixXd v = chol_.matrixL().solve(kc);
  out.variance.resize(u.rows());
  const Eigen::Index m = u.rows();
#pragma omp parallel for schedule(static) if (m > 256)
  for (Eigen::Index j = 0; j < m; ++j)
    out.variance[j] =
        y_std_ * y_std_ * std::max(params_.signal_variance - v.col(j).squaredNorm(), 0.0);
  return out;
}

GpModel::BatchPrediction GpModel::predict_batch_serial(const std::vector<Point>& xs) const {
  BatchPrediction out;
  out.mean.resize(static_cast<Eigen::Index>(xs.size()));
  out.variance.resize(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Prediction p = predict(xs[i]);
    out.mean[static_cast<Eigen::Index>(i)] = p.mean;
    out.variance[static_cast<Eigen::Index>(i)] = p.variance;
  }
  return out;
}

double GpModel::log_marginal_likelihood() const {
  return lml_from_factor(chol_, train_y_, alpha_);
}

Eigen::VectorXd GpModel::correlation_lengths() const {
  return (params_.lengthscales.array() * box_.widths().array()).matrix();
}

double GpModel::correlation_scalar() const {
  const double g = std::exp(params_.lengthscales.array().log().mean());
  return std::clamp(g, 0.1, 2.0);
}

Eigen::VectorXd GpModel::sample_joint(const std::vector<Point>& xs, Rng& rng) const {
  const Eigen::MatrixXd u = to_unit_rows(xs);
  const Eigen::Index m = u.rows();
  const double s2 = params_.signal_variance;
  const Eigen::MatrixXd kc = kernels::matern52_cross(train_x_, u, params_.lengthscales, s2);
  const Eigen::VectorXd mean = kc.transpose() * alpha_;
  const Eigen::MatrixXd v = chol_.matrixL().solve(kc);
  Eigen::MatrixXd cov = kernels::matern52_gram(u, params_.lengthscales, s2, 0.0);
  cov.noalias() -= v.transpose() * v;

  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = g(rng);

  Eigen::VectorXd draw;
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool done = false;
  for (double jitter = 1e-10 * s2; jitter <= kJitterMax * s2 * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd cj = cov;
    cj.diagonal().array() += jitter;
    llt.compute(cj);
    if (factor_ok(llt)) {
      draw = mean + llt.matrixL() * z;
      done = true;
      break;
    }
  }
  if (!done) {
    // Degenerate candidate geometry: fall back to independent marginals.
    draw = mean + (cov.diagonal().array().max(0.0).sqrt() * z.array()).matrix();
  }
  return (draw.array() * y_std_ + y_mean_).matrix();
}

GpModel fit_gp(const std::vector<Sample>& samples, const DomainBox& box, Rng& rng,
               const FitOptions& options) {
  if (samples.size() < 2) throw InsufficientData("fit_gp: need at least 2 samples");
  const std::vector<Sample> train = most_recent(samples, options.max_train);
  const std::vector<Sample> hyper = most_recent(train, options.hyper_subset);
  const Standardized s = standardize(hyper, box);
  const auto d = static_cast<Eigen::Index>(box.dim());
  const LogBounds lb = log_bounds(options.bounds, d);

  // All start points are drawn up front so the search order cannot perturb
  // the random stream.
  std::vector<Eigen::VectorXd> starts;
  KernelParams first;
  if (options.warm_start && options.warm_start->lengthscales.size() == d) {
    first = *options.warm_start;
  } else {
    first.lengthscales = Eigen::VectorXd::Constant(d, 0.5);
    first.signal_variance = 1.0;
    first.noise_variance = 1e-4;
  }
  starts.push_back(pack(first).cwiseMax(lb.lo).cwiseMin(lb.hi));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t r = 1; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    Eigen::VectorXd t(d + 2);
    for (Eigen::Index k = 0; k < t.size(); ++k) t[k] = lb.lo[k] + unit(rng) * (lb.hi[k] - lb.lo[k]);
    starts.push_back(t);
  }

  std::vector<std::pair<Eigen::VectorXd, double>> results(starts.size());
  const auto n_starts = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel for schedule(dynamic, 1) if (s.x_unit.rows() > 48)
  for (std::ptrdiff_t r = 0; r < n_starts; ++r)
    results[static_cast<std::size_t>(r)] =
        coordinate_search(s.x_unit, s.y, starts[static_cast<std::size_t>(r)], lb,
                          options.evals_per_restart);

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].second > results[best].second) best = r;
  if (!std::isfinite(results[best].second))
    throw IllConditioned("fit_gp: no start point produced a factorizable covariance");
  return GpModel::condition(train, box, unpack(results[best].first));
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double sd, double best_y) {
  const double gap = best_y - mean;
  if (!(sd > 1e-12)) return std::max(gap, 0.0);
  const double z = gap / sd;
  return std::max(gap * normal_cdf(z) + sd * normal_pdf(z), 0.0);
}

double expected_improvement(const GpModel& model, const Point& x, double best_y) {
  const auto p = model.predict(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), best_y);
}

std::vector<std::size_t> thompson_select(const GpModel& model, const std::vector<Point>& candidates,
                                         Rng& rng, std::size_t batch) {
  if (batch > candidates.size())
    throw ContractViolation("thompson_select: batch exceeds candidate count");
  if (candidates.empty() || batch == 0) return {};
  const Eigen::VectorXd draw = model.sample_joint(candidates, rng);
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(batch), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double va = draw[static_cast<Eigen::Index>(a)];
                      const double vb = draw[static_cast<Eigen::Index>(b)];
                      return va < vb || (va == vb && a < b);
                    });
  idx.resize(batch);
  return idx;
}

}  // namespace mctd
