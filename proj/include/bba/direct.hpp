#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "bba/common.hpp"

namespace bba {

/// Search region for the rectangle-division maximizer. The box is the largest
/// axis-aligned region that keeps the seed point at its exact center: per
/// dimension, half-extent = min(C, seed_d - lo_d, hi_d - seed_d). Any point
/// within L1 distance C of the seed deviates by at most C per coordinate, so
/// the box covers the whole feasible ball (intersected with the bounds).
/// Dimensions whose half-extent collapses to zero (seed on a bound face) are
/// frozen at the seed value and excluded from the unit cube.
struct SearchBox {
  FeatureVector center;          // seed point, full dimension
  FeatureVector half_extent;     // full dimension, 0 for frozen dims
  std::vector<int> active;       // indices of non-frozen dimensions

  int active_dims() const { return static_cast<int>(active.size()); }

  /// Maps unit-cube coordinates over the active dims back to feature space.
  FeatureVector to_feature(const Eigen::VectorXd& u) const {
    FeatureVector x = center;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const int d = active[j];
      x[d] = center[d] + (2.0 * u[static_cast<int>(j)] - 1.0) * half_extent[d];
    }
    return x;
  }
};

inline SearchBox build_search_box(const FeatureVector& seed, double budget,
                                  const Box& bounds) {
  if (budget <= 0.0) {
    throw std::invalid_argument("build_search_box: budget must be > 0");
  }
  if (seed.size() != bounds.lower.size()) {
    throw std::invalid_argument("build_search_box: dimension mismatch");
  }
  if (!bounds.contains(seed)) {
    throw std::invalid_argument("build_search_box: seed outside bounds");
  }
  SearchBox box;
  box.center = seed;
  box.half_extent = FeatureVector::Zero(seed.size());
  for (int d = 0; d < seed.size(); ++d) {
    const double h = std::min(
        budget, std::min(seed[d] - bounds.lower[d], bounds.upper[d] - seed[d]));
    box.half_extent[d] = h;
    if (h > 0.0) box.active.push_back(d);
  }
  return box;
}

/// One cell of the cube partition. Side lengths are implied by the per-dim
/// trisection depths: side_j = 3^-depth_j in unit-cube units. Splitting always
/// targets the longest sides, so depths within a rectangle never spread more
/// than one level apart; (min_depth, deep_count) identifies the size class
/// exactly.
struct Rectangle {
  Eigen::VectorXd center_u;   // unit-cube coordinates over active dims
  std::vector<int> depth;     // trisections per active dim
  int min_depth = 0;
  int deep_count = 0;         // dims at min_depth + 1
  double value = 0.0;         // objective at center; valid when feasible
  bool feasible = false;
  std::uint64_t order = 0;    // creation index, total tie-break

  /// Center-to-vertex distance in unit-cube units.
  double size() const {
    const int m = static_cast<int>(depth.size());
    const double shallow = static_cast<double>(m - deep_count);
    const double s2 = shallow * std::pow(9.0, -min_depth) +
                      deep_count * std::pow(9.0, -(min_depth + 1));
    return 0.5 * std::sqrt(s2);
  }
};

struct DirectConfig {
  int budget = 500;     // cap on center evaluations per maximize call
  double eps = 1e-4;    // improvement margin for the potentially-optimal test
  int max_depth = 30;   // per-dimension trisection limit

  void validate() const {
    if (budget < 1) throw std::invalid_argument("DirectConfig: budget >= 1");
    if (eps < 0.0) throw std::invalid_argument("DirectConfig: eps >= 0");
    if (max_depth < 1) {
      throw std::invalid_argument("DirectConfig: max_depth >= 1");
    }
  }
};

struct DirectResult {
  FeatureVector point;
  double value = 0.0;
  int evaluations = 0;
};

/// Rectangle partition plus incumbent bookkeeping. Objective values are only
/// stored for feasible-centered rectangles; infeasible ones carry a surrogate
/// slightly below the worst feasible value seen, which keeps them divisible
/// (feasible children can emerge) without ever becoming the incumbent.
class DirectState {
 public:
  explicit DirectState(SearchBox box) : box_(std::move(box)) {}

  const SearchBox& box() const { return box_; }
  const std::vector<Rectangle>& rectangles() const { return rects_; }
  int evaluations() const { return evaluations_; }
  bool has_feasible() const { return has_feasible_; }
  double best_value() const { return best_value_; }
  const FeatureVector& best_point() const { return best_point_; }

  double surrogate_value() const {
    // Below every feasible value by a margin, so infeasible cells lose all
    // value comparisons yet still register on the size-value hull. Before any
    // feasible center exists all cells tie, which degrades the selection to
    // largest-rectangle splitting until the feasible region is hit.
    if (!has_feasible_) return 0.0;
    return worst_value_ - std::abs(worst_value_) * 1e-2 - 1e-6;
  }

  double effective_value(const Rectangle& r) const {
    return r.feasible ? r.value : surrogate_value();
  }

  /// Evaluates the root rectangle (cube center = the seed point).
  template <typename Objective, typename Feasible>
  void initialize(Objective&& objective, Feasible&& feasible) {
    if (!rects_.empty()) throw std::logic_error("DirectState: reinitialized");
    const int m = box_.active_dims();
    Rectangle root;
    root.center_u = Eigen::VectorXd::Constant(m, 0.5);
    root.depth.assign(m, 0);
    root.order = next_order_++;
    evaluate(root, objective, feasible);
    rects_.push_back(std::move(root));
  }

  /// Rectangles on the upper-right hull of (size, value) that pass the
  /// eps-improvement test for some K > 0, adapted to maximization:
  /// value + K*size must dominate every other rectangle and exceed
  /// best + eps*|best|. Returned sorted by size desc, value desc, creation
  /// order asc.
  std::vector<std::size_t> potentially_optimal(double eps) const {
    if (rects_.empty()) {
      throw std::logic_error("DirectState: potentially_optimal on empty state");
    }
    // Best rectangle per size class.
    std::map<std::pair<int, int>, std::size_t> classes;
    for (std::size_t i = 0; i < rects_.size(); ++i) {
      const auto key = std::make_pair(rects_[i].min_depth,
                                      rects_[i].deep_count);
      auto it = classes.find(key);
      if (it == classes.end()) {
        classes.emplace(key, i);
        continue;
      }
      const double vi = effective_value(rects_[i]);
      const double vb = effective_value(rects_[it->second]);
      if (vi > vb || (vi == vb && rects_[i].order < rects_[it->second].order)) {
        it->second = i;
      }
    }
    struct Candidate {
      double size;
      double value;
      std::size_t index;
    };
    std::vector<Candidate> cand;
    cand.reserve(classes.size());
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [key, idx] : classes) {
      cand.push_back({rects_[idx].size(), effective_value(rects_[idx]), idx});
    }
    for (const Rectangle& r : rects_) best = std::max(best, effective_value(r));

    std::vector<std::size_t> out;
    for (const Candidate& a : cand) {
      double k_lo = 0.0;
      double k_hi = std::numeric_limits<double>::infinity();
      bool dominated = false;
      for (const Candidate& b : cand) {
        if (&a == &b) continue;
        if (b.size > a.size) {
          k_hi = std::min(k_hi, (a.value - b.value) / (b.size - a.size));
        } else if (b.size < a.size) {
          k_lo = std::max(k_lo, (b.value - a.value) / (a.size - b.size));
        } else if (b.value > a.value) {
          dominated = true;
        }
      }
      if (dominated || k_hi <= 0.0 || k_hi < k_lo) continue;
      if (std::isfinite(k_hi)) {
        if (a.value + k_hi * a.size < best + eps * std::abs(best)) continue;
      }
      out.push_back(a.index);
    }
    std::sort(out.begin(), out.end(), [this](std::size_t x, std::size_t y) {
      const Rectangle& rx = rects_[x];
      const Rectangle& ry = rects_[y];
      const double sx = rx.size();
      const double sy = ry.size();
      if (sx != sy) return sx > sy;
      const double vx = effective_value(rx);
      const double vy = effective_value(ry);
      if (vx != vy) return vx > vy;
      return rx.order < ry.order;
    });
    return out;
  }

  /// Number of center evaluations a division of this rectangle will spend.
  int trisect_cost(std::size_t index) const {
    const Rectangle& r = rects_[index];
    int longest = 0;
    for (int k : r.depth) {
      if (k == r.min_depth) ++longest;
    }
    return 2 * longest;
  }

  /// Splits rects_[index] into thirds along every longest dimension. Two new
  /// centers are evaluated per split dimension; dimensions with better new
  /// values keep the larger pieces (ties to the lower dimension index). The
  /// parent rectangle is replaced in place by the innermost middle child, so
  /// its center and value are preserved. Returns evaluations spent.
  template <typename Objective, typename Feasible>
  int trisect(std::size_t index, Objective&& objective, Feasible&& feasible) {
    Rectangle parent = rects_[index];
    std::vector<int> dims;
    for (std::size_t j = 0; j < parent.depth.size(); ++j) {
      if (parent.depth[j] == parent.min_depth) {
        dims.push_back(static_cast<int>(j));
      }
    }
    const double delta = std::pow(3.0, -(parent.min_depth + 1));

    struct Child {
      int dim;
      double offset;
      double value;
      bool feasible;
    };
    std::vector<Child> children;
    children.reserve(2 * dims.size());
    for (int dj : dims) {
      for (double s : {-1.0, 1.0}) {
        Rectangle probe;  // only the center matters for evaluation
        probe.center_u = parent.center_u;
        probe.center_u[dj] += s * delta;
        evaluate(probe, objective, feasible);
        children.push_back({dj, s * delta, probe.value, probe.feasible});
      }
    }

    // Jones order: dimensions whose best new value is higher are split first,
    // leaving their children in the larger remaining pieces.
    std::vector<std::pair<double, int>> ranked;
    for (int dj : dims) {
      double w = -std::numeric_limits<double>::infinity();
      for (const Child& c : children) {
        if (c.dim != dj) continue;
        const double ev = c.feasible ? c.value : surrogate_value();
        w = std::max(w, ev);
      }
      ranked.emplace_back(w, dj);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });

    Rectangle middle = parent;
    for (const auto& [w, dj] : ranked) {
      middle.depth[dj] += 1;
      for (const Child& c : children) {
        if (c.dim != dj) continue;
        Rectangle side;
        side.center_u = middle.center_u;
        side.center_u[dj] += c.offset;
        side.depth = middle.depth;
        side.value = c.value;
        side.feasible = c.feasible;
        side.order = next_order_++;
        refresh_size_class(side);
        rects_.push_back(std::move(side));
      }
    }
    middle.order = next_order_++;
    refresh_size_class(middle);
    rects_[index] = std::move(middle);
    return 2 * static_cast<int>(dims.size());
  }

 private:
  template <typename Objective, typename Feasible>
  void evaluate(Rectangle& r, Objective&& objective, Feasible&& feasible) {
    const FeatureVector x = box_.to_feature(r.center_u);
    ++evaluations_;
    r.feasible = feasible(x);
    if (!r.feasible) {
      r.value = 0.0;
      return;
    }
    r.value = objective(x);
    if (!has_feasible_ || r.value < worst_value_) worst_value_ = r.value;
    if (!has_feasible_ || r.value > best_value_) {
      best_value_ = r.value;
      best_point_ = x;
    }
    has_feasible_ = true;
  }

  static void refresh_size_class(Rectangle& r) {
    int mn = r.depth.empty() ? 0 : r.depth[0];
    for (int k : r.depth) mn = std::min(mn, k);
    int deep = 0;
    for (int k : r.depth) {
      if (k != mn) ++deep;
    }
    r.min_depth = mn;
    r.deep_count = deep;
  }

  SearchBox box_;
  std::vector<Rectangle> rects_;
  std::uint64_t next_order_ = 0;
  int evaluations_ = 0;
  bool has_feasible_ = false;
  double best_value_ = -std::numeric_limits<double>::infinity();
  double worst_value_ = std::numeric_limits<double>::infinity();
  FeatureVector best_point_;
};

/// Derivative-free global maximization of `objective` over `box`, restricted
/// to points accepted by `feasible`. The first evaluated point is the cube
/// center, which maps exactly to the seed. Deterministic: identical inputs
/// and budget give identical output.
template <typename Objective, typename Feasible>
DirectResult direct_maximize(Objective&& objective, Feasible&& feasible,
                             const SearchBox& box, const DirectConfig& cfg) {
  cfg.validate();
  DirectState state(box);
  if (box.active_dims() == 0) {
    // Fully frozen box: the seed is the only candidate.
    if (!feasible(box.center)) {
      throw NumericalError("direct_maximize: no feasible point in search box");
    }
    return DirectResult{box.center, objective(box.center), 1};
  }
  state.initialize(objective, feasible);
  while (state.evaluations() < cfg.budget) {
    const std::vector<std::size_t> selected = state.potentially_optimal(cfg.eps);
    bool divided = false;
    for (std::size_t idx : selected) {
      if (state.rectangles()[idx].min_depth >= cfg.max_depth) continue;
      if (state.evaluations() + state.trisect_cost(idx) > cfg.budget) continue;
      state.trisect(idx, objective, feasible);
      divided = true;
      if (state.evaluations() >= cfg.budget) break;
    }
    if (!divided) break;  // budget exhausted or everything at max depth
  }
  if (!state.has_feasible()) {
    throw NumericalError(
        "direct_maximize: no feasible center found within budget");
  }
  return DirectResult{state.best_point(), state.best_value(),
                      state.evaluations()};
}

}  // namespace bba
