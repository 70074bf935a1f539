#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace resdeploy::grid {

struct Node {
  int id = 0;
  std::string zone;
};

struct Line {
  std::string id;
  int from_node = 0;  // node ids, not indices
  int to_node = 0;
  double reactance_pu = 0.0;
  double flow_limit_mw = 0.0;
};

struct Generator {
  std::string id;
  int node = 0;
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
  double cost_energy = 0.0;  // $/MWh
  double cost_up = 0.0;      // $/MW-h of upward reserve
  double cost_down = 0.0;    // $/MW-h of downward reserve
};

// Branch in index space, as consumed by compute_ptdf.
struct Branch {
  int from = 0;
  int to = 0;
  double reactance_pu = 0.0;
};

// Connected components of the graph (node indices, each sorted ascending,
// components ordered by their smallest member).
std::vector<std::vector<int>> connected_components(int num_nodes, const std::vector<Branch>& branches);

/// DC power-flow PTDF matrix (branches x nodes). Column `slack` is zero; entry
/// (l, n) is the flow on branch l (positive from -> to) caused by injecting
/// 1 MW at node n and withdrawing it at the slack node.
///
/// Throws ValidationError on a non-positive reactance or a disconnected graph
/// (the message lists the components using `node_ids` when given).
Eigen::MatrixXd compute_ptdf(int num_nodes, const std::vector<Branch>& branches, int slack,
                             const std::vector<int>& node_ids = {});

/// Immutable DC network: nodes, lines, generators, PTDF and the generator
/// incidence. Node order is the order of construction; all vectors indexed by
/// node use that order.
class GridModel {
 public:
  // Validates every invariant and computes the PTDF. `slack_node` defaults to
  // the lowest node id.
  static GridModel build(std::vector<Node> nodes, std::vector<Line> lines,
                         std::vector<Generator> generators, std::optional<int> slack_node = std::nullopt);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_lines() const { return static_cast<int>(lines_.size()); }
  int num_generators() const { return static_cast<int>(generators_.size()); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Generator>& generators() const { return generators_; }

  int slack_node() const { return nodes_[slack_index_].id; }
  int slack_index() const { return slack_index_; }
  int node_index(int node_id) const;  // throws ValidationError if unknown
  std::optional<int> find_node(int node_id) const;
  int generator_node_index(int g) const { return gen_node_[g]; }
  const std::vector<int>& generator_node_indices() const { return gen_node_; }
  int line_from_index(int l) const { return branches_[l].from; }
  int line_to_index(int l) const { return branches_[l].to; }
  const std::vector<Branch>& branches() const { return branches_; }

  const Eigen::MatrixXd& ptdf() const { return ptdf_; }
  // PTDF times the generator incidence (lines x generators).
  const Eigen::MatrixXd& ptdf_generators() const { return ptdf_gen_; }
  // Node-by-generator incidence A (exactly one 1 per column).
  Eigen::MatrixXd incidence() const;

  Eigen::VectorXd flow_limits() const;
  Eigen::VectorXd p_max() const;
  Eigen::VectorXd p_min() const;

  // 2-norm condition number of the reduced nodal susceptance matrix.
  double susceptance_condition() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Line> lines_;
  std::vector<Generator> generators_;
  std::vector<Branch> branches_;
  std::vector<int> gen_node_;
  int slack_index_ = 0;
  Eigen::MatrixXd ptdf_;
  Eigen::MatrixXd ptdf_gen_;
};

// Nodal injection A p - d for a generator dispatch and nodal net demand.
Eigen::VectorXd net_injection(const GridModel& grid, const Eigen::VectorXd& p, const Eigen::VectorXd& d_hat);

/// Scheduled energy flows M (A p - d_hat). Throws ValidationError if the
/// injection is unbalanced by more than `tol` MW (message carries the amount).
Eigen::VectorXd scheduled_flows(const GridModel& grid, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& d_hat, double tol = 1e-6);

}  // namespace resdeploy::grid
