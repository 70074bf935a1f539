#include "resdeploy/grid/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "resdeploy/error.hpp"

namespace resdeploy::grid {
namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

std::string describe_components(const std::vector<std::vector<int>>& comps, const std::vector<int>& ids) {
  std::ostringstream os;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    os << (c ? " | " : "") << "{";
    for (std::size_t k = 0; k < comps[c].size(); ++k) {
      const int n = comps[c][k];
      os << (k ? "," : "") << (ids.empty() ? n : ids[n]);
    }
    os << "}";
  }
  return os.str();
}

}  // namespace

std::vector<std::vector<int>> connected_components(int num_nodes, const std::vector<Branch>& branches) {
  std::vector<int> parent(num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Branch& b : branches) {
    const int ra = find_root(parent, b.from);
    const int rb = find_root(parent, b.to);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<int, std::vector<int>> groups;
  for (int n = 0; n < num_nodes; ++n) groups[find_root(parent, n)].push_back(n);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.front() < b.front(); });
  return out;
}

Eigen::MatrixXd compute_ptdf(int num_nodes, const std::vector<Branch>& branches, int slack,
                             const std::vector<int>& node_ids) {
  if (num_nodes <= 0) throw ValidationError("grid has no nodes");
  if (slack < 0 || slack >= num_nodes) throw ValidationError("slack index out of range");
  for (std::size_t l = 0; l < branches.size(); ++l) {
    const Branch& b = branches[l];
    if (b.from < 0 || b.from >= num_nodes || b.to < 0 || b.to >= num_nodes) {
      throw ValidationError("branch " + std::to_string(l) + " references a node out of range");
    }
    if (b.from == b.to) throw ValidationError("branch " + std::to_string(l) + " is a self-loop");
    if (!(b.reactance_pu > 0.0)) {
      throw ValidationError("branch " + std::to_string(l) + " has non-positive reactance " +
                            std::to_string(b.reactance_pu));
    }
  }
  const auto comps = connected_components(num_nodes, branches);
  if (comps.size() > 1) {
    throw ValidationError("grid is disconnected; components: " + describe_components(comps, node_ids));
  }

  // Reduced susceptance system without the slack row/column.
  const int nr = num_nodes - 1;
  auto reduced = [slack](int n) { return n < slack ? n : n - 1; };
  Eigen::MatrixXd bred = Eigen::MatrixXd::Zero(nr, nr);
  for (const Branch& b : branches) {
    const double y = 1.0 / b.reactance_pu;
    if (b.from != slack) bred(reduced(b.from), reduced(b.from)) += y;
    if (b.to != slack) bred(reduced(b.to), reduced(b.to)) += y;
    if (b.from != slack && b.to != slack) {
      bred(reduced(b.from), reduced(b.to)) -= y;
      bred(reduced(b.to), reduced(b.from)) -= y;
    }
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(num_nodes, num_nodes);  // angle per unit injection
  if (nr > 0) {
    const Eigen::MatrixXd inv = Eigen::PartialPivLU<Eigen::MatrixXd>(bred).inverse();
    for (int a = 0; a < num_nodes; ++a) {
      if (a == slack) continue;
      for (int c = 0; c < num_nodes; ++c) {
        if (c == slack) continue;
        x(a, c) = inv(reduced(a), reduced(c));
      }
    }
  }
  Eigen::MatrixXd ptdf(static_cast<int>(branches.size()), num_nodes);
  for (std::size_t l = 0; l < branches.size(); ++l) {
    const Branch& b = branches[l];
    ptdf.row(static_cast<int>(l)) = (x.row(b.from) - x.row(b.to)) / b.reactance_pu;
  }
  ptdf.col(slack).setZero();
  return ptdf;
}

GridModel GridModel::build(std::vector<Node> nodes, std::vector<Line> lines, std::vector<Generator> generators,
                           std::optional<int> slack_node) {
  GridModel g;
  if (nodes.empty()) throw ValidationError("grid has no nodes");
  std::set<int> seen;
  for (const Node& n : nodes) {
    if (!seen.insert(n.id).second) throw ValidationError("duplicate node id " + std::to_string(n.id));
  }
  g.nodes_ = std::move(nodes);
  g.lines_ = std::move(lines);
  g.generators_ = std::move(generators);

  const int slack_id = slack_node.value_or(*seen.begin());
  g.slack_index_ = g.node_index(slack_id);

  std::vector<int> ids;
  for (const Node& n : g.nodes_) ids.push_back(n.id);

  for (const Line& l : g.lines_) {
    const auto from = g.find_node(l.from_node);
    const auto to = g.find_node(l.to_node);
    if (!from || !to) {
      throw ValidationError("line '" + l.id + "' references unknown node " +
                            std::to_string(from ? l.to_node : l.from_node));
    }
    if (!(l.flow_limit_mw > 0.0)) throw ValidationError("line '" + l.id + "' has non-positive flow limit");
    if (!(l.reactance_pu > 0.0)) throw ValidationError("line '" + l.id + "' has non-positive reactance");
    g.branches_.push_back({*from, *to, l.reactance_pu});
  }
  for (const Generator& gen : g.generators_) {
    const auto n = g.find_node(gen.node);
    if (!n) throw ValidationError("generator '" + gen.id + "' references unknown node " + std::to_string(gen.node));
    if (gen.p_min_mw > gen.p_max_mw) throw ValidationError("generator '" + gen.id + "' has p_min > p_max");
    if (gen.cost_energy < 0.0 || gen.cost_up < 0.0 || gen.cost_down < 0.0) {
      throw ValidationError("generator '" + gen.id + "' has a negative cost");
    }
    g.gen_node_.push_back(*n);
  }

  g.ptdf_ = compute_ptdf(g.num_nodes(), g.branches_, g.slack_index_, ids);
  g.ptdf_gen_.resize(g.num_lines(), g.num_generators());
  for (int k = 0; k < g.num_generators(); ++k) g.ptdf_gen_.col(k) = g.ptdf_.col(g.gen_node_[k]);
  return g;
}

std::optional<int> GridModel::find_node(int node_id) const {
  for (int i = 0; i < num_nodes(); ++i)
    if (nodes_[i].id == node_id) return i;
  return std::nullopt;
}

int GridModel::node_index(int node_id) const {
  if (auto i = find_node(node_id)) return *i;
  throw ValidationError("unknown node id " + std::to_string(node_id));
}

Eigen::MatrixXd GridModel::incidence() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_nodes(), num_generators());
  for (int k = 0; k < num_generators(); ++k) a(gen_node_[k], k) = 1.0;
  return a;
}

Eigen::VectorXd GridModel::flow_limits() const {
  Eigen::VectorXd f(num_lines());
  for (int l = 0; l < num_lines(); ++l) f[l] = lines_[l].flow_limit_mw;
  return f;
}

Eigen::VectorXd GridModel::p_max() const {
  Eigen::VectorXd v(num_generators());
  for (int k = 0; k < num_generators(); ++k) v[k] = generators_[k].p_max_mw;
  return v;
}

Eigen::VectorXd GridModel::p_min() const {
  Eigen::VectorXd v(num_generators());
  for (int k = 0; k < num_generators(); ++k) v[k] = generators_[k].p_min_mw;
  return v;
}

double GridModel::susceptance_condition() const {
  const int nr = num_nodes() - 1;
  if (nr <= 0) return 1.0;
  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(num_nodes(), num_nodes());
  for (const Branch& b : branches_) {
    const double y = 1.0 / b.reactance_pu;
    bbus(b.from, b.from) += y;
    bbus(b.to, b.to) += y;
    bbus(b.from, b.to) -= y;
    bbus(b.to, b.from) -= y;
  }
  Eigen::MatrixXd bred(nr, nr);
  for (int a = 0, ra = 0; a < num_nodes(); ++a) {
    if (a == slack_index_) continue;
    for (int c = 0, rc = 0; c < num_nodes(); ++c) {
      if (c == slack_index_) continue;
      bred(ra, rc++) = bbus(a, c);
    }
    ++ra;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bred);
  const auto& s = svd.singularValues();
  return s[0] / s[s.size() - 1];
}

Eigen::VectorXd net_injection(const GridModel& grid, const Eigen::VectorXd& p, const Eigen::VectorXd& d_hat) {
  if (p.size() != grid.num_generators() || d_hat.size() != grid.num_nodes()) {
    throw ValidationError("dispatch/demand dimension mismatch with grid");
  }
  Eigen::VectorXd q = -d_hat;
  for (int k = 0; k < grid.num_generators(); ++k) q[grid.generator_node_index(k)] += p[k];
  return q;
}

Eigen::VectorXd scheduled_flows(const GridModel& grid, const Eigen::VectorXd& p, const Eigen::VectorXd& d_hat,
                                double tol) {
  const Eigen::VectorXd q = net_injection(grid, p, d_hat);
  const double imbalance = q.sum();
  if (std::abs(imbalance) > tol) {
    std::ostringstream os;
    os << "unbalanced injection: generation minus demand = " << imbalance << " MW";
    throw ValidationError(os.str());
  }
  return grid.ptdf() * q;
}

}  // namespace resdeploy::grid
