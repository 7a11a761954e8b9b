#include "catsync/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "catsync/errors.hpp"

namespace catsync {

int DecoratedTree::add(TreeNode node, int parent) {
  node.parent = parent;
  node.children.clear();
  nodes_.push_back(std::move(node));
  const int id = size() - 1;
  if (parent >= 0) nodes_.at(parent).children.push_back(id);
  return id;
}

int DecoratedTree::graft(const DecoratedTree& sub, int parent) {
  std::vector<int> map(sub.size());
  for (int v = 0; v < sub.size(); ++v) {
    const TreeNode& n = sub.nodes_[v];
    map[v] = add(n, n.parent < 0 ? parent : map[n.parent]);
  }
  return map[0];
}

int DecoratedTree::order() const {
  bool tangent = false;
  int sum = 0;
  for (const TreeNode& n : nodes_) {
    if (n.type == NodeType::M) {
      tangent = true;
      sum += n.order;
    } else if (n.type == NodeType::K || n.type == NodeType::N) {
      tangent = true;
    }
  }
  return tangent ? sum : size();
}

namespace {

char type_letter(NodeType t) {
  switch (t) {
    case NodeType::xi: return 'X';
    case NodeType::U: return 'U';
    case NodeType::a: return 'A';
    case NodeType::h: return 'H';
    case NodeType::K: return 'K';
    case NodeType::N: return 'N';
    case NodeType::M: return 'M';
  }
  return '?';
}

bool is_clock_type(NodeType t) { return t == NodeType::xi || t == NodeType::U; }
bool is_square(NodeType t) { return t == NodeType::a || t == NodeType::h; }

}  // namespace

std::string DecoratedTree::canonical(int v, bool with_indices) const {
  const TreeNode& n = nodes_.at(v);
  std::string s(1, type_letter(n.type));
  if (n.alpha != 0) s += n.alpha > 0 ? '+' : '-';
  if (n.type == NodeType::M || n.type == NodeType::K || n.type == NodeType::N) {
    if (with_indices) s += std::to_string(n.i) + std::to_string(n.j);
    if (n.type == NodeType::M) s += ":" + std::to_string(n.order);
  }
  if (n.children.empty()) return s;
  std::vector<std::string> kids;
  for (int c : n.children) kids.push_back(canonical(c, with_indices));
  std::sort(kids.begin(), kids.end());
  s += '(';
  for (std::size_t k = 0; k < kids.size(); ++k) {
    if (k) s += ',';
    s += kids[k];
  }
  s += ')';
  return s;
}

// ---------------------------------------------------------------- Θ* trees

namespace {

DecoratedTree single(NodeType t) {
  DecoratedTree d;
  TreeNode n;
  n.type = t;
  d.add(n, -1);
  return d;
}

// Subtrees with unresolved α, indexed [type][order], built bottom up.
class StarTable {
 public:
  explicit StarTable(int n_max) : by_(4, std::vector<std::vector<DecoratedTree>>(n_max + 1)) {
    pool_.resize(n_max + 1);
    for (int m = 1; m <= n_max; ++m) {
      for (int t = 0; t < 4; ++t) build(t, m);
      for (int t = 0; t < 4; ++t)
        for (const auto& d : by_[t][m]) pool_[m].push_back(&d);
    }
  }
  const std::vector<DecoratedTree>& get(int type, int m) const { return by_[type][m]; }

 private:
  void build(int type, int m) {
    auto& out = by_[type][m];
    const NodeType nt = static_cast<NodeType>(type);
    if (m == 1) {
      out.push_back(single(nt));
      return;
    }
    // Children as nondecreasing sequences of (order, position) in the pools.
    std::vector<std::pair<int, int>> chosen;
    std::function<void(int, int, int)> rec = [&](int remaining, int min_order, int min_pos) {
      if (remaining == 0) {
        if (is_clock_type(nt) && chosen.size() == 1 &&
            is_clock_type(pool_[chosen[0].first][chosen[0].second]->root().type))
          return;
        DecoratedTree d = single(nt);
        for (auto [o, k] : chosen) d.graft(*pool_[o][k], 0);
        out.push_back(std::move(d));
        return;
      }
      for (int o = min_order; o <= remaining; ++o) {
        const int start = o == min_order ? min_pos : 0;
        for (int k = start; k < static_cast<int>(pool_[o].size()); ++k) {
          chosen.emplace_back(o, k);
          rec(remaining - o, o, k);
          chosen.pop_back();
        }
      }
    };
    rec(m - 1, 1, 0);
  }

  std::vector<std::vector<std::vector<DecoratedTree>>> by_;
  std::vector<std::vector<const DecoratedTree*>> pool_;
};

}  // namespace

std::vector<DecoratedTree> enumerate_theta_star(int n, int eta, std::optional<int> alpha,
                                                int n_enum_max) {
  if (n < 1) throw ConfigError("trees: order must be >= 1");
  if (eta < 0 || eta > 3) throw ConfigError("trees: root type must be 0..3");
  if (n > n_enum_max)
    throw SizeLimit("trees: order " + std::to_string(n) + " exceeds n_enum_max = " +
                    std::to_string(n_enum_max));
  if (alpha && *alpha != 1 && *alpha != -1) throw ConfigError("trees: alpha must be +1 or -1");
  StarTable table(n);
  std::vector<DecoratedTree> out = table.get(eta, n);
  if (alpha && eta >= 2)
    for (auto& t : out) t.nodes()[0].alpha = *alpha;
  return out;
}

bool satisfies_star_constraint(const DecoratedTree& t) {
  for (const TreeNode& n : t.nodes())
    if (is_clock_type(n.type) && n.children.size() == 1 &&
        is_clock_type(t.nodes()[n.children[0]].type))
      return false;
  return true;
}

// ---------------------------------------------------------- evaluation

std::vector<DecoratedTree> resolve_alpha(const DecoratedTree& t) {
  std::vector<int> free;
  for (int v = 0; v < t.size(); ++v)
    if (is_square(t.nodes()[v].type) && t.nodes()[v].alpha == 0) free.push_back(v);
  std::set<std::string> seen;
  std::vector<DecoratedTree> out;
  for (unsigned mask = 0; mask < (1u << free.size()); ++mask) {
    DecoratedTree r = t;
    for (std::size_t b = 0; b < free.size(); ++b)
      r.nodes()[free[b]].alpha = (mask >> b) & 1u ? -1 : 1;
    if (seen.insert(r.canonical()).second) out.push_back(std::move(r));
  }
  return out;
}

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

class Evaluator {
 public:
  Evaluator(const DecoratedTree& t, const SeriesBundle& b) : t_(t), b_(b) {}

  GridFunction value(int v) const {
    const TreeNode& node = t_.nodes()[v];
    const CatMap& cat = CatMap::get();
    const TorusGrid& grid = b_.grid();
    const int nt = b_.times().nt;
    const double h = b_.times().step();
    const double w0 = b_.constants().w0;
    const GridFunction& E = b_.clock_decay();

    std::vector<GridFunction> kids;
    MultiIndex q;
    int s1 = 0, s3p = 0, s3m = 0;
    std::map<std::string, int> classes;
    for (int c : node.children) {
      const TreeNode& cn = t_.nodes()[c];
      kids.push_back(value(c));
      if (is_clock_type(cn.type)) {
        ++q.clock;
      } else if (cn.alpha > 0) {
        ++q.plus;
      } else {
        ++q.minus;
      }
      if (cn.type == NodeType::U) ++s1;
      if (cn.type == NodeType::h) (cn.alpha > 0 ? s3p : s3m) += 1;
      ++classes[t_.canonical(c)];
    }
    double coef = factorial(q.plus) * factorial(q.minus) * factorial(q.clock);
    for (const auto& [key, r] : classes) coef /= factorial(r);
    coef *= std::pow(cat.lambda_plus, s3p) * std::pow(cat.lambda_minus, s3m);

    const bool clock = is_clock_type(node.type);
    TrigPoly target;
    if (clock) {
      target = b_.spec().g;
    } else {
      const auto& x = node.alpha > 0 ? cat.x_plus : cat.x_minus;
      target = b_.spec().f1 * x[0] + b_.spec().f2 * x[1];
    }
    const std::vector<MultiIndex> idx{q};

    GridFunction out(grid.size(), nt);
    std::vector<double> f(nt + 1), cum(nt + 1);
    PhiFunction inner(grid.size());
    for (int p = 0; p < grid.size(); ++p) {
      const TorusPoint s = apply_cat(grid.point(p));
      for (int k = 0; k <= nt; ++k) {
        const double t = k * h;
        double tay = 0.0;
        target.accumulate_taylor(s.phi[0], s.phi[1], w0 + t, t, idx, &tay);
        double val = coef * tay * std::pow(E(p, k), clock ? s1 - 1 : s1);
        for (const auto& c : kids) val *= c(p, k);
        f[k] = val;
      }
      cumulative_simpson(f.data(), cum.data(), nt, h);
      if (clock) {
        for (int k = 0; k <= nt; ++k) out(p, k) = E(p, k) * cum[k];
      } else {
        std::copy(cum.begin(), cum.end(), out.row(p));
      }
      inner[p] = out(p, nt);
    }
    if (node.type == NodeType::xi || node.type == NodeType::a) return out;

    PhiFunction u;
    if (node.type == NodeType::U) {
      u = backward_orbit_sum(grid, b_.lambda_clock(), inner, b_.clock_sum());
    } else if (node.alpha > 0) {
      u = forward_orbit_sum(grid, 1.0 / cat.lambda_plus, inner, b_.hyperbolic_sum());
      for (double& x : u) x *= -1.0 / cat.lambda_plus;
    } else {
      u = backward_orbit_sum(grid, cat.lambda_minus, inner, b_.hyperbolic_sum());
    }
    for (int p = 0; p < grid.size(); ++p) std::fill(out.row(p), out.row(p) + nt + 1, u[p]);
    return out;
  }

 private:
  const DecoratedTree& t_;
  const SeriesBundle& b_;
};

void add_into(GridFunction& acc, const GridFunction& x) {
  if (acc.empty()) {
    acc = x;
    return;
  }
  for (std::size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] += x.data()[i];
}

}  // namespace

GridFunction eval_tree(const DecoratedTree& t, const TreeContext& ctx) {
  const auto& b = ctx.bundle;
  GridFunction acc(b.grid().size(), b.times().nt);
  for (const DecoratedTree& r : resolve_alpha(t)) {
    Evaluator ev(r, b);
    add_into(acc, ev.value(0));
  }
  return acc;
}

GridFunction sum_theta_star(int n, int eta, std::optional<int> alpha, const TreeContext& ctx) {
  const auto& b = ctx.bundle;
  GridFunction acc(b.grid().size(), b.times().nt);
  for (const DecoratedTree& t : enumerate_theta_star(n, eta, alpha)) add_into(acc, eval_tree(t, ctx));
  return acc;
}

// ------------------------------------------------------------- lemma

int count_internal_type1(const DecoratedTree& t) {
  int c = 0;
  for (const TreeNode& n : t.nodes())
    if (n.type == NodeType::U && !n.children.empty()) ++c;
  return c;
}

LemmaReport certify_lemma21(int n_max, int n_enum_max) {
  if (n_max > n_enum_max)
    throw SizeLimit("lemma: n_max " + std::to_string(n_max) + " exceeds n_enum_max = " +
                    std::to_string(n_enum_max));
  StarTable table(n_max);
  LemmaReport rep;
  for (int n = 1; n <= n_max; ++n) {
    LemmaRow row;
    row.n = n;
    row.bound = (2.0 * n - 1.0) / 3.0;
    for (int eta = 0; eta < 4; ++eta)
      for (const DecoratedTree& t : table.get(eta, n)) {
        ++row.trees;
        const int c = count_internal_type1(t);
        row.max_internal_u = std::max(row.max_internal_u, c);
        if (c > row.bound) {
          rep.all_pass = false;
          throw NumericalError(NumericalError::Kind::BoundViolation,
                               "lemma: tree " + t.canonical() + " has " + std::to_string(c) +
                                   " internal U nodes at order " + std::to_string(n));
        }
      }
    row.saturated = (2 * n - 1) % 3 == 0 && row.max_internal_u == (2 * n - 1) / 3;
    if (row.saturated) rep.saturating_orders.push_back(n);
    rep.rows.push_back(row);
  }
  return rep;
}

DecoratedTree saturating_tree(int k) {
  if (k < 1) throw ConfigError("saturating_tree: level must be >= 1");
  DecoratedTree t;
  TreeNode u;
  u.type = NodeType::U;
  std::function<void(int, int)> grow = [&](int level, int parent) {
    const int v = t.add(u, parent);
    if (level == 1) {
      TreeNode sq;
      sq.type = NodeType::a;
      t.add(sq, v);
      return;
    }
    grow(level - 1, v);
    grow(level - 1, v);
  };
  grow(k, -1);
  return t;
}

// ---------------------------------------------------------- Θ** trees

namespace {

DecoratedTree m_leaf(int i, int j, int n) {
  DecoratedTree d;
  TreeNode m;
  m.type = NodeType::M;
  m.i = i;
  m.j = j;
  m.order = n;
  d.add(m, -1);
  return d;
}

DecoratedTree join(NodeType type, int i, int j, const DecoratedTree& a,
                   const DecoratedTree* b = nullptr) {
  DecoratedTree d;
  TreeNode r;
  r.type = type;
  r.i = i;
  r.j = j;
  d.add(r, -1);
  d.graft(a, 0);
  if (b) d.graft(*b, 0);
  return d;
}

std::vector<DecoratedTree> starstar(int n, NodeType eta, int i, int j) {
  std::vector<DecoratedTree> out;
  out.push_back(join(eta, i, j, m_leaf(i, j, n)));
  for (int n1 = 1; n1 < n; ++n1) {
    const int n2 = n - n1;
    for (int jp = 0; jp < 3; ++jp) {
      if (jp == j) continue;
      const DecoratedTree leaf = m_leaf(i, jp, n1);
      for (const DecoratedTree& k : starstar(n2, NodeType::K, jp, j))
        out.push_back(join(eta, i, j, leaf, &k));
    }
    if (eta == NodeType::K)
      for (const DecoratedTree& k : starstar(n1, NodeType::K, i, j))
        for (const DecoratedTree& nn : starstar(n2, NodeType::N, j, j))
          out.push_back(join(eta, i, j, k, &nn));
  }
  return out;
}

}  // namespace

std::vector<DecoratedTree> enumerate_theta_starstar(int n, NodeType eta, int i, int j,
                                                    int n_enum_max) {
  if (n < 1) throw ConfigError("trees: order must be >= 1");
  if (n > n_enum_max)
    throw SizeLimit("trees: order " + std::to_string(n) + " exceeds n_enum_max = " +
                    std::to_string(n_enum_max));
  if (i < 0 || i > 2 || j < 0 || j > 2) throw ConfigError("trees: indices must be 0..2");
  if (eta == NodeType::N && i != j) throw ConfigError("trees: N trees need i == j");
  if (eta == NodeType::K && i == j) throw ConfigError("trees: K trees need i != j");
  if (eta != NodeType::N && eta != NodeType::K) throw ConfigError("trees: root must be K or N");
  return starstar(n, eta, i, j);
}

int count_topologies(const std::vector<DecoratedTree>& trees) {
  std::set<std::string> s;
  for (const auto& t : trees) s.insert(t.canonical(0, false));
  return static_cast<int>(s.size());
}

namespace {

double leaf_value(const TreeNode& m, const MSeries& ms, int p) {
  return CatMap::get().multiplier(m.j) * ms.at(m.order)[p](m.i, m.j);
}

// Index of the K child carrying the Sφ shift (sibling of an N child), or -1.
int shifted_child(const DecoratedTree& t, int v) {
  const TreeNode& n = t.nodes()[v];
  if (n.type != NodeType::K || n.children.size() != 2) return -1;
  for (int c : n.children)
    if (t.nodes()[c].type == NodeType::N)
      for (int o : n.children)
        if (o != c) return o;
  return -1;
}

PhiFunction tangent_value(const DecoratedTree& t, int v, const MSeries& ms,
                          const TorusGrid& grid, OrbitSum how) {
  const TreeNode& n = t.nodes()[v];
  const int np = grid.size();
  PhiFunction out(np);
  if (n.type == NodeType::M) {
    for (int p = 0; p < np; ++p) out[p] = leaf_value(n, ms, p);
    return out;
  }
  std::vector<PhiFunction> kids;
  for (int c : n.children) kids.push_back(tangent_value(t, c, ms, grid, how));
  const int sc = shifted_child(t, v);
  for (int p = 0; p < np; ++p) {
    double x = 1.0;
    for (std::size_t c = 0; c < kids.size(); ++c)
      x *= n.children[c] == sc ? -kids[c][grid.forward(p)] : kids[c][p];
    out[p] = x;
  }
  if (n.type == NodeType::N) return out;
  const CatMap& cat = CatMap::get();
  return solve_twisted_cohomology(grid, cat.multiplier(n.i), cat.multiplier(n.j), out, how);
}

}  // namespace

PhiFunction eval_tangent_tree(const DecoratedTree& t, const MSeries& ms, const TorusGrid& grid,
                              OrbitSum how) {
  return tangent_value(t, 0, ms, grid, how);
}

double eval_tangent_tree_labels(const DecoratedTree& t, const MSeries& ms,
                                const TorusGrid& grid, int point, int terms) {
  const CatMap& cat = CatMap::get();
  const auto& nodes = t.nodes();
  std::vector<int> knodes, leaves;
  std::vector<int> q(t.size(), 0);
  for (int v = 0; v < t.size(); ++v) {
    if (nodes[v].type == NodeType::K) knodes.push_back(v);
    if (nodes[v].type == NodeType::M) leaves.push_back(v);
    const int sc = shifted_child(t, v);
    if (sc >= 0) q[sc] = 1;
  }
  // Label range per K node: forward m = 0..M, backward m = −1..−M.
  struct Range {
    int first, count;
    double base, ratio;
  };
  std::vector<Range> ranges;
  double sign = 1.0;
  for (int v : knodes) {
    const double li = cat.multiplier(nodes[v].i);
    const double lj = cat.multiplier(nodes[v].j);
    const int alpha = lj < li ? 1 : -1;
    // −α λ_i^{−1} (λ_i/λ_j)^{−m}
    if (alpha > 0) {
      ranges.push_back({0, terms + 1, -1.0 / li, lj / li});
    } else {
      ranges.push_back({-1, terms, (1.0 / li) * (li / lj), li / lj});
    }
    for (int c : nodes[v].children)
      if (nodes[c].type == NodeType::N) sign = -sign;
  }
  std::vector<int> lab(knodes.size(), 0);
  std::vector<int> m(t.size(), 0);
  double total = 0.0;
  while (true) {
    double w = sign;
    for (std::size_t a = 0; a < knodes.size(); ++a) {
      const Range& r = ranges[a];
      w *= r.base * std::pow(r.ratio, lab[a]);
      m[knodes[a]] = r.first == 0 ? lab[a] : -1 - lab[a];
    }
    for (int leaf : leaves) {
      int shift = 0;
      for (int u = leaf; u >= 0; u = nodes[u].parent) shift += m[u] + q[u];
      w *= leaf_value(nodes[leaf], ms, grid.shift(point, shift));
    }
    total += w;
    std::size_t a = 0;
    for (; a < knodes.size(); ++a) {
      if (++lab[a] < ranges[a].count) break;
      lab[a] = 0;
    }
    if (a == knodes.size()) break;
  }
  return total;
}

std::string render_dot(const DecoratedTree& t, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n  rankdir=BT;\n";
  for (int v = 0; v < t.size(); ++v) {
    const TreeNode& n = t.nodes()[v];
    std::string label;
    switch (n.type) {
      case NodeType::xi: label = "xi"; break;
      case NodeType::U: label = "U"; break;
      case NodeType::a: label = "a"; break;
      case NodeType::h: label = "h"; break;
      case NodeType::K: label = "K"; break;
      case NodeType::N: label = "N"; break;
      case NodeType::M: label = "M"; break;
    }
    if (n.alpha != 0) label += n.alpha > 0 ? "+" : "-";
    if (n.i >= 0) label += " " + std::to_string(n.i) + std::to_string(n.j);
    if (n.type == NodeType::M) label += " (" + std::to_string(n.order) + ")";
    const bool square = is_square(n.type) || n.type == NodeType::M;
    os << "  n" << v << " [label=\"" << label << "\", shape=" << (square ? "box" : "circle")
       << (v == 0 ? ", peripheries=2" : "") << "];\n";
    if (n.parent >= 0) os << "  n" << v << " -> n" << n.parent << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace catsync
