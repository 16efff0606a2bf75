#include "mctd/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mctd {

DomainBox::DomainBox(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size())
    throw ContractViolation("DomainBox: bound lists must be non-empty and of equal length");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
      throw ContractViolation("DomainBox: lower[i] < upper[i] violated at dimension " +
                              std::to_string(i));
  }
}

DomainBox DomainBox::cube(std::size_t dim, double lo, double hi) {
  return DomainBox(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

Point DomainBox::lower_point() const {
  return Eigen::Map<const Eigen::VectorXd>(lower_.data(), static_cast<Eigen::Index>(dim()));
}

Point DomainBox::upper_point() const {
  return Eigen::Map<const Eigen::VectorXd>(upper_.data(), static_cast<Eigen::Index>(dim()));
}

Point DomainBox::widths() const { return upper_point() - lower_point(); }

bool DomainBox::contains(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double v = x[static_cast<Eigen::Index>(i)];
    if (v < lower_[i] || v > upper_[i]) return false;
  }
  return true;
}

Point DomainBox::clip(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dim())
    throw ContractViolation("DomainBox::clip: dimension mismatch");
  Point out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[i] = std::clamp(x[i], lower_[k], upper_[k]);
  }
  return out;
}

Point DomainBox::to_unit(const Point& x) const {
  return ((x - lower_point()).array() / widths().array()).matrix();
}

Point DomainBox::from_unit(const Point& u) const {
  return (lower_point().array() + u.array() * widths().array()).matrix();
}

Objective::Objective(std::string name, DomainBox box, EvalFn fn,
                     std::optional<double> known_optimum)
    : name_(std::move(name)),
      box_(std::move(box)),
      fn_(std::move(fn)),
      known_optimum_(known_optimum) {}

Sample Objective::evaluate(const Point& x) {
  if (static_cast<std::size_t>(x.size()) != box_.dim())
    throw ContractViolation("Objective::evaluate: point has dimension " +
                            std::to_string(x.size()) + ", expected " +
                            std::to_string(box_.dim()));
  if (limit_ && count_ >= *limit_)
    throw BudgetExhausted("Objective::evaluate: evaluation limit reached");
  Sample s;
  s.x = box_.clip(x);
  s.y = fn_(s.x);
  s.index = ++count_;
  if (!best_y_ || s.y < *best_y_) best_y_ = s.y;
  if (observer_) observer_(s);
  return s;
}

bool Objective::target_reached() const {
  return known_optimum_ && best_y_ && std::abs(*best_y_ - *known_optimum_) <= kTargetTolerance;
}

std::size_t Objective::remaining() const {
  if (target_reached()) return 0;
  if (!limit_) return std::numeric_limits<std::size_t>::max();
  return *limit_ > count_ ? *limit_ - count_ : 0;
}

}  // namespace mctd
