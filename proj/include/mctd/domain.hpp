#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mctd {

using Point = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BudgetExhausted : std::logic_error {
  using std::logic_error::logic_error;
};

// Axis-aligned compact box. Owns clipping and the unit-cube normalization
// used by the surrogate models.
class DomainBox {
 public:
  DomainBox(std::vector<double> lower, std::vector<double> upper);
  static DomainBox cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return lower_.size(); }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }
  double width(std::size_t i) const { return upper_[i] - lower_[i]; }
  Point lower_point() const;
  Point upper_point() const;
  Point widths() const;

  bool contains(const Point& x) const;
  Point clip(const Point& x) const;
  Point to_unit(const Point& x) const;
  Point from_unit(const Point& u) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct Sample {
  Point x;
  double y = 0.0;
  std::size_t index = 0;
};

using EvalFn = std::function<double(const Point&)>;

// A black-box objective with ground-truth call accounting. Every evaluation
// in the toolkit goes through evaluate(); the counter is not synchronized.
class Objective {
 public:
  Objective(std::string name, DomainBox box, EvalFn fn,
            std::optional<double> known_optimum = std::nullopt);

  // Clips x into the box, evaluates, increments the counter.
  Sample evaluate(const Point& x);

  const std::string& name() const { return name_; }
  const DomainBox& box() const { return box_; }
  std::size_t dim() const { return box_.dim(); }
  const EvalFn& eval_fn() const { return fn_; }
  std::optional<double> known_optimum() const { return known_optimum_; }
  std::size_t eval_count() const { return count_; }
  std::optional<double> best_y() const { return best_y_; }

  // Hard cap on ground-truth calls; evaluate() throws BudgetExhausted past it.
  void set_eval_limit(std::optional<std::size_t> limit) { limit_ = limit; }
  std::optional<std::size_t> eval_limit() const { return limit_; }
  // Calls left under the limit (SIZE_MAX when unlimited), zero after early stop.
  std::size_t remaining() const;
  // True once the limit is hit or the known optimum is reached within 1e-8.
  bool exhausted() const { return remaining() == 0; }
  bool target_reached() const;

  // Invoked after every ground-truth call.
  void set_observer(std::function<void(const Sample&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  std::string name_;
  DomainBox box_;
  EvalFn fn_;
  std::optional<double> known_optimum_;
  std::size_t count_ = 0;
  std::optional<std::size_t> limit_;
  std::optional<double> best_y_;
  std::function<void(const Sample&)> observer_;
};

inline constexpr double kTargetTolerance = 1e-8;

}  // namespace mctd
