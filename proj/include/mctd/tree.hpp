#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "mctd/descent.hpp"
#include "mctd/domain.hpp"
#include "mctd/gp.hpp"
#include "mctd/local_bo.hpp"
#include "mctd/trace.hpp"

namespace mctd {

// Weights of the three selection rules:
//   child score       -y* + c_d * sum(last `window` dy) + c_p * sqrt(ln N_parent / N_child)
//   exploration node  -mean(children y*) + c_p_explore * sqrt(ln N_branch)
//   leaf expansion    -y* + c_d_leaf * sum(last `window_leaf` dy) < c_p_leaf * sqrt(ln N_leaf)
struct UctParams {
  double c_d = 10.0;
  double c_p = 0.5;
  double c_p_explore = 0.1;
  double c_d_leaf = 50.0;
  double c_p_leaf = 0.1;
  std::size_t window = 10;
  std::size_t window_leaf = 10;

  void validate() const;
};

struct TreeNode {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  std::vector<Sample> samples;
  Sample best;
  std::deque<double> dy;  // newest last
  std::size_t visits = 0;
  std::size_t optimized = 0;  // OPTIMIZE calls run on this node
  std::size_t level = 0;
  TrustRegion tr;
  Point anchor;
  std::optional<KernelParams> last_params;  // warm start for the next fit

  bool is_leaf() const { return children.empty(); }
  // Sum of the newest `window` entries of dy.
  double recent_improvement(std::size_t window) const;
};

double uct_child(const TreeNode& child, std::size_t parent_visits, const UctParams& p);
double uct_explore(const std::vector<const TreeNode*>& children, std::size_t branch_visits,
                   const UctParams& p);
bool leaf_expand_pred(const TreeNode& leaf, const UctParams& p);

struct MctdConfig {
  UctParams uct;
  DescentConfig descent;
  TrConfig tr;
  FitOptions fit;
  std::size_t iteration_budget = 30;
  double ratio_descent = 1.0;
  double ratio_bo = 2.0;
  std::size_t nr = 0;  // GP threshold; 0 means min(2 * dim, 40)
  std::size_t history_cap = 10;
  std::size_t inherit = 0;  // samples handed to an inheritor; 0 means gp_threshold

  std::size_t gp_threshold(std::size_t dim) const;
  std::size_t inherit_count(std::size_t dim) const { return inherit ? inherit : gp_threshold(dim); }
  // Descent share of a per-iteration budget; the BO share is the rest.
  std::size_t descent_share(std::size_t budget) const;
  void validate() const;
};

// One branch decision made during select().
struct BranchDecision {
  std::size_t branch = 0;
  std::vector<double> child_scores;
  double explore_score = 0.0;
  // Index into the branch's children, or nullopt when the exploration node won.
  std::optional<std::size_t> chosen;
};

struct Selection {
  std::size_t node = 0;
  std::vector<std::size_t> path;  // root .. node
  bool expanded = false;
  std::vector<BranchDecision> decisions;
};

// Monte Carlo Tree Descent over one objective. Owns the tree; installs a
// trace observer on the objective for its lifetime.
class MctdSearch {
 public:
  MctdSearch(Objective& obj, MctdConfig cfg, std::uint64_t seed);
  ~MctdSearch();
  MctdSearch(const MctdSearch&) = delete;
  MctdSearch& operator=(const MctdSearch&) = delete;

  // Seeds the root with one uniform sample. Called by the first step() if
  // not called explicitly.
  void initialize();
  // One select / optimize / backup iteration. Returns false when the
  // objective was already exhausted.
  bool step();

  Selection select();
  std::size_t expand(std::size_t id);
  void optimize_node(std::size_t id);
  void backup(std::size_t id);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
  TreeNode& node(std::size_t id) { return nodes_.at(id); }
  const std::vector<Selection>& selections() const { return selections_; }
  const RunTrace& trace() const { return trace_; }
  RunTrace take_trace() { return std::move(trace_); }
  const MctdConfig& config() const { return cfg_; }
  // Number of times each node's trust region was created (always 1).
  std::size_t tr_inits(std::size_t id) const { return tr_inits_.at(id); }

 private:
  std::size_t add_node(std::optional<std::size_t> parent, Point anchor);
  void record(TreeNode& n, const Sample& s);
  void set_current(std::size_t id);

  Objective& obj_;
  MctdConfig cfg_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> tr_inits_;
  std::vector<Selection> selections_;
  std::vector<Sample> fresh_;  // ground-truth samples of the current iteration
  RunTrace trace_;
  std::string current_tag_;
  bool initialized_ = false;
};

// Runs MCTD until max_evals ground-truth calls or the known optimum is hit.
RunTrace mctd_run(Objective& obj, const MctdConfig& cfg, std::size_t max_evals,
                  std::uint64_t seed);

}  // namespace mctd
