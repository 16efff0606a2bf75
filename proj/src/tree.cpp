#include "mctd/tree.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "mctd/sampling.hpp"

namespace mctd {

void UctParams::validate() const {
  for (double w : {c_d, c_p, c_p_explore, c_d_leaf, c_p_leaf})
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractViolation("UctParams: weights must be finite and >= 0");
}

double TreeNode::recent_improvement(std::size_t window) const {
  const std::size_t n = std::min(window, dy.size());
  return std::accumulate(dy.end() - static_cast<std::ptrdiff_t>(n), dy.end(), 0.0);
}

double uct_child(const TreeNode& child, std::size_t parent_visits, const UctParams& p) {
  if (child.visits < 1) throw ContractViolation("uct_child: child must have been visited");
  const double explore =
      std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(parent_visits, 1))) /
                static_cast<double>(child.visits));
  return -child.best.y + p.c_d * child.recent_improvement(p.window) + p.c_p * explore;
}

double uct_explore(const std::vector<const TreeNode*>& children, std::size_t branch_visits,
                   const UctParams& p) {
  if (children.empty()) throw ContractViolation("uct_explore: branch has no children");
  double sum = 0.0;
  for (const TreeNode* c : children) sum += c->best.y;
  const double mean = sum / static_cast<double>(children.size());
  return -mean +
         p.c_p_explore * std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(branch_visits, 1))));
}

bool leaf_expand_pred(const TreeNode& leaf, const UctParams& p) {
  const double lhs = -leaf.best.y + p.c_d_leaf * leaf.recent_improvement(p.window_leaf);
  const double rhs =
      p.c_p_leaf * std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(leaf.visits, 1))));
  return lhs < rhs;
}

std::size_t MctdConfig::gp_threshold(std::size_t dim) const {
  return nr > 0 ? nr : std::min<std::size_t>(2 * dim, 40);
}

std::size_t MctdConfig::descent_share(std::size_t budget) const {
  const double share = static_cast<double>(budget) * ratio_descent / (ratio_descent + ratio_bo);
  return std::min<std::size_t>(budget, static_cast<std::size_t>(std::lround(share)));
}

void MctdConfig::validate() const {
  uct.validate();
  descent.validate();
  if (iteration_budget < 1) throw ContractViolation("MctdConfig: iteration_budget must be >= 1");
  if (!(ratio_descent >= 0.0) || !(ratio_bo >= 0.0) || !(ratio_descent + ratio_bo > 0.0))
    throw ContractViolation("MctdConfig: budget ratio parts must be >= 0 and not both zero");
  if (history_cap < std::max(uct.window, uct.window_leaf))
    throw ContractViolation("MctdConfig: history_cap must cover both improvement windows");
}

MctdSearch::MctdSearch(Objective& obj, MctdConfig cfg, std::uint64_t seed)
    : obj_(obj), cfg_(std::move(cfg)), rng_(seed) {
  cfg_.validate();
  trace_.algorithm = "mctd";
  trace_.benchmark = obj_.name();
  trace_.dim = obj_.dim();
  trace_.seed = seed;
  obj_.set_observer([this](const Sample& s) {
    trace_.append(s, current_tag_);
    fresh_.push_back(s);
  });
}

MctdSearch::~MctdSearch() { obj_.set_observer(nullptr); }

void MctdSearch::set_current(std::size_t id) { current_tag_ = std::to_string(id); }

std::size_t MctdSearch::add_node(std::optional<std::size_t> parent, Point anchor) {
  TreeNode n;
  n.id = nodes_.size();
  n.parent = parent;
  n.level = parent ? nodes_[*parent].level + 1 : 0;
  n.tr = init_tr(cfg_.tr);
  n.tr.center = anchor;
  n.anchor = std::move(anchor);
  n.best.y = std::numeric_limits<double>::infinity();
  nodes_.push_back(std::move(n));
  tr_inits_.push_back(1);
  if (parent) nodes_[*parent].children.push_back(nodes_.back().id);
  return nodes_.back().id;
}

void MctdSearch::record(TreeNode& n, const Sample& s) {
  const bool first = n.samples.empty();
  const double before = n.best.y;
  n.samples.push_back(s);
  if (first || s.y < n.best.y) n.best = s;
  if (!first) {
    n.dy.push_back(std::max(before - n.best.y, 0.0));
    while (n.dy.size() > cfg_.history_cap) n.dy.pop_front();
  }
}

void MctdSearch::initialize() {
  if (initialized_) return;
  initialized_ = true;
  const std::size_t root = add_node(std::nullopt, sample_uniform(obj_.box(), rng_));
  set_current(root);
  fresh_.clear();
  const Sample s = obj_.evaluate(nodes_[root].anchor);
  record(nodes_[root], s);
  nodes_[root].anchor = s.x;
}

bool MctdSearch::step() {
  if (!initialized_) initialize();
  if (obj_.exhausted()) return false;
  fresh_.clear();
  Selection sel = select();
  optimize_node(sel.node);
  backup(sel.node);
  selections_.push_back(std::move(sel));
  return true;
}

Selection MctdSearch::select() {
  Selection sel;
  std::size_t b = 0;
  sel.path.push_back(b);
  bool done = false;
  while (!nodes_[b].is_leaf()) {
    BranchDecision dec;
    dec.branch = b;
    std::vector<const TreeNode*> kids;
    for (std::size_t c : nodes_[b].children) kids.push_back(&nodes_[c]);
    std::size_t best = 0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      dec.child_scores.push_back(uct_child(*kids[i], nodes_[b].visits, cfg_.uct));
      if (dec.child_scores[i] > dec.child_scores[best]) best = i;
    }
    dec.explore_score = uct_explore(kids, nodes_[b].visits, cfg_.uct);
    if (dec.explore_score > dec.child_scores[best]) {
      sel.decisions.push_back(std::move(dec));
      const std::size_t created = expand(b);
      sel.path.push_back(created);
      sel.expanded = true;
      done = true;
      break;
    }
    dec.chosen = best;
    sel.decisions.push_back(std::move(dec));
    b = nodes_[b].children[best];
    sel.path.push_back(b);
  }
  // A leaf that has never been optimized is descended on first.
  if (!done && nodes_[b].optimized >= 1 && leaf_expand_pred(nodes_[b], cfg_.uct)) {
    const std::size_t created = expand(b);
    sel.path.push_back(created);
    sel.expanded = true;
  }
  for (std::size_t id : sel.path) ++nodes_[id].visits;
  sel.node = sel.path.back();
  return sel;
}

std::size_t MctdSearch::expand(std::size_t id) {
  const DomainBox& box = obj_.box();
  if (nodes_[id].is_leaf()) {
    // Inheritor child: starts at the leaf's best with the samples nearest to it.
    const Point start = nodes_[id].best.x;
    const std::size_t inheritor = add_node(id, start);
    const TreeNode& leaf = nodes_[id];
    const Point start_unit = box.to_unit(start);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(leaf.samples.size());
    for (std::size_t i = 0; i < leaf.samples.size(); ++i)
      dist.emplace_back((box.to_unit(leaf.samples[i].x) - start_unit).squaredNorm(), i);
    const std::size_t keep = std::min(cfg_.inherit_count(box.dim()), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep), dist.end());
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < keep; ++i) picked.push_back(dist[i].second);
    std::sort(picked.begin(), picked.end());
    TreeNode& inh = nodes_[inheritor];
    for (std::size_t i : picked) {
      const Sample& s = nodes_[id].samples[i];
      inh.samples.push_back(s);
      if (inh.samples.size() == 1 || s.y < inh.best.y) inh.best = s;
    }
    inh.dy = nodes_[id].dy;
    inh.visits = 1;
    inh.last_params = nodes_[id].last_params;
    inh.tr = nodes_[id].tr;
    inh.tr.center = start;
  }

  // Exploration child: per-dimension offset magnitude uniform in
  // [0.1, 0.5] * width * exp(-level), floored at 1% of the width.
  const double decay = std::exp(-static_cast<double>(nodes_[id].level));
  const double lo = std::max(0.1 * decay, 0.01);
  const double hi = std::max(0.5 * decay, 0.01);
  const Point center = nodes_[id].best.x;
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution flip(0.5);
  Point anchor = center;
  for (int attempt = 0; attempt < 10; ++attempt) {
    for (Eigen::Index i = 0; i < anchor.size(); ++i) {
      const double off = mag(rng_) * box.width(static_cast<std::size_t>(i));
      anchor[i] = center[i] + (flip(rng_) ? off : -off);
    }
    if (box.contains(anchor)) break;
  }
  anchor = box.clip(anchor);
  const std::size_t child = add_node(id, anchor);
  set_current(child);
  const Sample s = obj_.evaluate(anchor);
  record(nodes_[child], s);
  return child;
}

void MctdSearch::optimize_node(std::size_t id) {
  const std::size_t budget = std::min(cfg_.iteration_budget, obj_.remaining());
  if (budget == 0) return;
  const std::size_t descent_budget = cfg_.descent_share(budget);
  const std::size_t bo_budget = budget - descent_budget;
  const DomainBox& box = obj_.box();
  TreeNode& n = nodes_[id];
  ++n.optimized;
  set_current(id);

  FitOptions fit = cfg_.fit;
  std::optional<GpModel> oracle;
  double corr = 1.0;
  if (n.samples.size() >= cfg_.gp_threshold(box.dim())) {
    fit.warm_start = n.last_params;
    try {
      oracle.emplace(fit_gp(n.samples, box, rng_, fit));
      n.last_params = oracle->params();
      corr = oracle->correlation_scalar();
    } catch (const std::runtime_error&) {
      oracle.reset();
    }
  }

  if (descent_budget > 0) {
    DescentContext ctx{n.best, std::max<std::size_t>(n.visits, 1), n.level, corr};
    const DescentOutcome out =
        descend(ctx, obj_, oracle ? &*oracle : nullptr, cfg_.descent, descent_budget, rng_);
    for (const Sample& s : out.evaluated) record(n, s);
  }

  if (bo_budget > 0 && !obj_.exhausted()) {
    fit.warm_start = n.last_params;
    std::vector<Sample> working = n.samples;
    const LocalBoOutcome out = local_bo_run(working, n.tr, obj_, bo_budget, rng_, cfg_.tr, fit);
    n.tr = out.tr;
    for (const Sample& s : out.evaluated) record(n, s);
  }
}

void MctdSearch::backup(std::size_t id) {
  std::size_t cur = id;
  while (nodes_[cur].parent) {
    TreeNode& p = nodes_[*nodes_[cur].parent];
    const double before = p.best.y;
    for (const Sample& s : fresh_) {
      p.samples.push_back(s);
      if (s.y < p.best.y) p.best = s;
    }
    if (nodes_[cur].best.y < p.best.y) p.best = nodes_[cur].best;
    p.dy.push_back(std::max(before - p.best.y, 0.0));
    while (p.dy.size() > cfg_.history_cap) p.dy.pop_front();
    cur = p.id;
  }
}

RunTrace mctd_run(Objective& obj, const MctdConfig& cfg, std::size_t max_evals,
                  std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const auto old_limit = obj.eval_limit();
  obj.set_eval_limit(obj.eval_count() + max_evals);
  RunTrace trace;
  {
    MctdSearch search(obj, cfg, seed);
    while (search.step()) {
    }
    trace = search.take_trace();
  }
  obj.set_eval_limit(old_limit);
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace mctd
