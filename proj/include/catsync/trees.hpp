#pragma once

#include <optional>
#include <string>
#include <vector>

#include "catsync/series.hpp"
#include "catsync/tangent.hpp"

namespace catsync {

/// Node kinds: ξ, U, a, h for the manifold trees; K, N, 𝔐 for the tangent
/// trees.
enum class NodeType { xi = 0, U = 1, a = 2, h = 3, K = 4, N = 5, M = 6 };

struct TreeNode {
  NodeType type = NodeType::xi;
  int alpha = 0;  // ±1 once resolved; 0 means both signs are summed
  int i = -1;     // tangent index labels 0 (+), 1 (−), 2 (clock)
  int j = -1;
  int order = 0;  // n_v of 𝔐 leaves
  int parent = -1;
  std::vector<int> children;
};

/// Rooted tree stored as a node list; nodes[0] is the root (special node).
class DecoratedTree {
 public:
  int add(TreeNode node, int parent);
  /// Copies `sub` below `parent`, returning the index of its root.
  int graft(const DecoratedTree& sub, int parent);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }
  const TreeNode& root() const { return nodes_.at(0); }
  int size() const { return static_cast<int>(nodes_.size()); }

  /// Number of nodes for manifold trees, Σ n_v for tangent trees.
  int order() const;

  /// Canonical text with children sorted; equal strings mean isomorphic
  /// labelled trees. `with_indices` = false hides tangent index labels.
  std::string canonical(int v = 0, bool with_indices = true) const;

 private:
  std::vector<TreeNode> nodes_;
};

inline constexpr int kEnumMax = 6;

/// All trees of order n with root type eta (0..3), children unordered,
/// α of non-root nodes left unresolved. The root α is set when given.
std::vector<DecoratedTree> enumerate_theta_star(int n, int eta,
                                                std::optional<int> alpha = std::nullopt,
                                                int n_enum_max = kEnumMax);

/// Every assignment of α = ±1 to the unresolved a/h nodes, isomorphic
/// results merged.
std::vector<DecoratedTree> resolve_alpha(const DecoratedTree& t);

/// True when no ξ/U node has exactly one child of type ξ/U and nothing else.
bool satisfies_star_constraint(const DecoratedTree& t);

/// Evaluation context for manifold trees; shares grid, clock decay and
/// orbit-sum policy with a series bundle.
struct TreeContext {
  const SeriesBundle& bundle;
};

/// Σ of Val over all α-resolutions of `t` on the (φ, t) grid. Type U/h
/// results are constant in t.
GridFunction eval_tree(const DecoratedTree& t, const TreeContext& ctx);

/// Sum over Θ*_{n,η(,α)} of eval_tree.
GridFunction sum_theta_star(int n, int eta, std::optional<int> alpha,
                            const TreeContext& ctx);

int count_internal_type1(const DecoratedTree& t);

struct LemmaRow {
  int n = 0;
  int trees = 0;
  int max_internal_u = 0;
  double bound = 0.0;     // (2n−1)/3
  bool saturated = false; // max attains the bound exactly
};

struct LemmaReport {
  std::vector<LemmaRow> rows;
  bool all_pass = true;
  std::vector<int> saturating_orders;
};

/// Exhaustive check of N_i¹ ≤ (2n−1)/3 over every tree up to n_max.
LemmaReport certify_lemma21(int n_max, int n_enum_max = kEnumMax);

/// Optimal tree of level k: internal U nodes with two children except at
/// level 1, where each has one square child. Order 2^k − 1 + 2^{k−1}.
DecoratedTree saturating_tree(int k);

/// Tangent trees for ν_i (eta = N, i = j) or k_ij (eta = K, i ≠ j).
std::vector<DecoratedTree> enumerate_theta_starstar(int n, NodeType eta, int i, int j,
                                                    int n_enum_max = kEnumMax);

/// Number of distinct topologies once free internal indices are hidden.
int count_topologies(const std::vector<DecoratedTree>& trees);

/// Family sum of a tangent tree on the whole grid, m labels summed by the
/// same orbit sums as the frame recursion.
PhiFunction eval_tangent_tree(const DecoratedTree& t, const MSeries& ms,
                              const TorusGrid& grid, OrbitSum how);

/// Same value at one grid point by explicit summation over the m labels
/// with node factors and path shifts p(v). Truncated sums only.
double eval_tangent_tree_labels(const DecoratedTree& t, const MSeries& ms,
                                const TorusGrid& grid, int point, int terms);

/// Graphviz text of a tree.
std::string render_dot(const DecoratedTree& t, const std::string& name);

}  // namespace catsync
