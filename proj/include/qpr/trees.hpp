// Copyright 2026 The QPR Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Renormalised labelled trees and self-energy clusters.
//
// Trees are stored two ways.  LabelledTree is the explicit form (one record
// per node; node i's exiting line is "line i") used for auditing, export and
// component-labelled enumeration.  TreeCatalog holds hash-consed skeletons
// (modes, shape and scales, no component labels) from which values are
// evaluated by contracting component indices; every distinct subtree is
// stored once and children are kept in canonical (sorted id) order.

#pragma once

#include "qpr/common.hpp"
#include "qpr/forcing.hpp"
#include "qpr/frequency.hpp"
#include "qpr/scalefun.hpp"

#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace qpr {

inline constexpr int kExternalScale = 1 << 20;  // scale of lines leaving a cluster

struct TreeNode {
  Mode mode;
  int parent = -1;  // -1: the exiting line is the root line (or the cluster's exit)
  Mode momentum;    // momentum of the exiting line
  int scale = 0;    // scale label of the exiting line
  int e = 0;        // component labels of the exiting line
  int u = 0;
};

struct LabelledTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the top node
  // Node receiving the external entering line of a self-energy cluster, or -1.
  int leg = -1;
  // True when the top node's exiting line is external (cluster exit).
  bool open_top = false;
  Mode leg_momentum;  // momentum carried by the external leg, if known

  int order() const { return static_cast<int>(nodes.size()); }
  int top() const { return 0; }
  Mode total_momentum() const { return nodes.empty() ? Mode{} : nodes[0].momentum; }
  int l1_weight() const;  // K(.) = sum |nu_v|
  std::vector<std::vector<int>> children() const;
};

struct SelfEnergyCluster {
  std::vector<int> nodes;  // node indices of the host tree, ascending
  int scale = -1;
  int entering_line = -1;  // node whose exiting line enters; -2 for the external leg
  int exiting_line = -1;   // node whose exiting line leaves the cluster
  std::vector<int> path;   // lines strictly between entering and exiting line
};

// All self-energy clusters of a tree with consistent momenta and scales.
std::vector<SelfEnergyCluster> find_self_energy_clusters(const LabelledTree& tree);

// Exact integer check of the conservation law on every line.
bool conservation_holds(const LabelledTree& tree);

struct SiegelBryunoReport {
  int K = 0;                    // sum of |nu_v|
  std::vector<int> lines_at_or_above;  // N_n for n = 0..max scale
  std::vector<double> bound;    // 2^{-(m_n-2)} K
  bool cluster_check = false;
  double cluster_K_bound = 0.0;  // 2^{m_q - 1}
  bool ok = true;
  int violating_scale = -1;
};

// Line counting bound N_n <= 2^{2 - m_n} K for trees; for clusters (scale >= 0) also the lower
// bound K(T) >= 2^{m_q - 1}.  Lines counted exclude the exit line of open trees.
SiegelBryunoReport siegel_bryuno_check(const LabelledTree& tree, const ScaleSequences& seq,
                                       std::optional<int> cluster_scale = std::nullopt);

// Canonical text: adjacency list + labels.  Children ordered canonically.
std::string canonical_encoding(const LabelledTree& tree, bool with_components = true);
void write_tree(std::ostream& os, const LabelledTree& tree, int d);

// Product over nodes of the number of distinct orderings of the entering
// lines, s_v! / prod m_i!.  Summing symmetry_weight * value over equivalence
// classes reproduces the Taylor expansion, whose 1/s_v! acts on ordered tuples.
double symmetry_weight(const LabelledTree& tree);

struct Truncation {
  int K = 3;      // maximal tree order
  int p_max = 0;  // maximal line scale
  std::size_t tree_cap = 2'000'000;
};

struct Subtree {
  Mode mode;
  std::vector<int> children;  // catalog ids, ascending
  Mode momentum;
  double divisor = 0.0;  // w . momentum
  int scale = 0;
  int order = 1;
  int max_scale = 0;     // max scale over all lines incl. exit
  int l1 = 0;
  double weight = 1.0;   // 1 / prod m_i! over repeated children
};

struct ZeroRoot {
  Mode mode;
  std::vector<int> children;
  int order = 1;
  int max_scale = -1;
  double weight = 1.0;
};

// Subtree with one external entering leg somewhere below its top node.  The
// lines on the leg's path carry momentum nu0 + nu', so their scales are only
// fixed once the leg divisor x is known.
struct LegSubtree {
  Mode mode;
  std::vector<int> children;  // ordinary catalog ids, ascending
  int leg_child = -1;         // LegSubtree id, or -1 when the leg enters here
  Mode nu0;                   // sum of modes (excluding the leg momentum)
  double divisor0 = 0.0;      // w . nu0
  int order = 1;
  int max_fixed_scale = -1;   // max scale among non-path lines
  int l1 = 0;
  double weight = 1.0;
};

struct ClusterInstance {
  int root = -1;                 // LegSubtree id
  std::vector<int> path_scales;  // scales of path lines, from top-1 down to the leg node
};

class TreeCatalog {
 public:
  TreeCatalog(const ForcingModel& model, const FrequencyVector& omega, const Partition& partition,
              const Truncation& trunc);

  const ForcingModel& model() const { return *model_; }
  const FrequencyVector& omega() const { return *omega_; }
  const Partition& partition() const { return *partition_; }
  const Truncation& truncation() const { return trunc_; }

  const std::vector<Subtree>& subtrees() const { return subtrees_; }
  const std::vector<ZeroRoot>& zero_roots() const { return zero_roots_; }
  const std::vector<LegSubtree>& leg_subtrees() const { return legs_; }
  // LegSubtree ids whose nu0 vanishes: self-energy clusters of scale >= 0.
  const std::vector<int>& cluster_roots() const { return cluster_roots_; }

  LabelledTree flatten(int id) const;
  LabelledTree flatten_zero_root(int index) const;
  // Cluster skeleton with the given path scales, leg and exit line external.
  LabelledTree flatten_cluster(const ClusterInstance& inst) const;

  // Path of a cluster root: LegSubtree ids from the top down to the leg node.
  std::vector<int> leg_path(int root) const;

  // Valid scale-q instances at leg divisor x (cached, thread-safe).
  const std::vector<ClusterInstance>& cluster_instances(int q, double x) const;

  // Divisors of every line in the catalog (sorted, unique).
  std::vector<double> line_divisors() const;

 private:
  void build_subtrees();
  void build_zero_roots();
  void build_leg_subtrees();
  void check_budget(std::size_t n) const;
  void append_flat(int id, int parent, LabelledTree& out) const;
  std::vector<ClusterInstance> compute_instances(int q, double x) const;

  const ForcingModel* model_;
  const FrequencyVector* omega_;
  const Partition* partition_;
  Truncation trunc_;

  std::vector<Subtree> subtrees_;
  std::vector<ZeroRoot> zero_roots_;
  std::vector<LegSubtree> legs_;
  std::vector<int> cluster_roots_;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, double>, std::vector<ClusterInstance>> instance_cache_;
};

// Component-labelled renormalised trees of order k, total momentum nu, root
// component j (0-based), one per equivalence class, in canonical order.
std::vector<LabelledTree> enumerate_trees(const TreeCatalog& catalog, int k, const Mode& nu, int j);

// Canonical unlabelled rooted shapes with k nodes (encoded as nested parens).
std::vector<std::string> enumerate_shapes(int k);

}  // namespace qpr
