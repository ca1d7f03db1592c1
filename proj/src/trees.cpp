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

#include "qpr/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace qpr {

namespace {

std::string mode_key(const Mode& m) {
  std::string s;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i) s += ',';
    s += std::to_string(m[i]);
  }
  return s;
}

double inverse_multiplicity(const std::vector<int>& sorted_ids) {
  double w = 1.0;
  std::size_t i = 0;
  while (i < sorted_ids.size()) {
    std::size_t j = i;
    while (j < sorted_ids.size() && sorted_ids[j] == sorted_ids[i]) ++j;
    for (std::size_t c = 2; c <= j - i; ++c) w /= static_cast<double>(c);
    i = j;
  }
  return w;
}

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(static_cast<std::size_t>(n)) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[static_cast<std::size_t>(x)] != x) {
      p[static_cast<std::size_t>(x)] = p[static_cast<std::size_t>(p[static_cast<std::size_t>(x)])];
      x = p[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { p[static_cast<std::size_t>(find(a))] = find(b); }
};

// Calls fn(chosen) for every nondecreasing choice of ids from candidates
// (sorted by order) whose orders sum to total.
template <class OrderOf, class Fn>
void for_each_multiset(const std::vector<int>& candidates, OrderOf order_of, int total, Fn&& fn) {
  std::vector<int> chosen;
  std::function<void(std::size_t, int)> rec = [&](std::size_t start, int remaining) {
    if (remaining == 0) {
      fn(chosen);
      return;
    }
    for (std::size_t i = start; i < candidates.size(); ++i) {
      const int o = order_of(candidates[i]);
      if (o > remaining) break;
      chosen.push_back(candidates[i]);
      rec(i, remaining - o);
      chosen.pop_back();
    }
  };
  rec(0, total);
}

}  // namespace

int LabelledTree::l1_weight() const {
  int k = 0;
  for (const auto& n : nodes) k += n.mode.l1();
  return k;
}

std::vector<std::vector<int>> LabelledTree::children() const {
  std::vector<std::vector<int>> ch(nodes.size());
  for (std::size_t v = 0; v < nodes.size(); ++v)
    if (nodes[v].parent >= 0) ch[static_cast<std::size_t>(nodes[v].parent)].push_back(static_cast<int>(v));
  return ch;
}

bool conservation_holds(const LabelledTree& tree) {
  const auto ch = tree.children();
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    Mode m = tree.nodes[v].mode;
    for (int c : ch[v]) m += tree.nodes[static_cast<std::size_t>(c)].momentum;
    if (tree.leg == static_cast<int>(v)) m += tree.leg_momentum;
    if (m != tree.nodes[v].momentum) return false;
  }
  return true;
}

std::vector<SelfEnergyCluster> find_self_energy_clusters(const LabelledTree& tree) {
  std::vector<SelfEnergyCluster> out;
  const int n = tree.order();
  if (n == 0) return out;
  const auto ch = tree.children();
  auto node = [&](int v) -> const TreeNode& { return tree.nodes[static_cast<std::size_t>(v)]; };

  for (int v = 0; v < n; ++v) {
    const int entering = static_cast<int>(ch[static_cast<std::size_t>(v)].size()) + (tree.leg == v ? 1 : 0);
    if (node(v).mode.is_zero() && entering == 1) {
      SelfEnergyCluster c;
      c.nodes = {v};
      c.scale = -1;
      c.entering_line = tree.leg == v ? -2 : ch[static_cast<std::size_t>(v)][0];
      c.exiting_line = v;
      out.push_back(std::move(c));
    }
  }

  std::set<int> thresholds;
  for (int v = 1; v < n; ++v) thresholds.insert(node(v).scale);
  const int top_exit = tree.open_top ? kExternalScale : node(0).scale;

  for (int q : thresholds) {
    Dsu dsu(n);
    for (int v = 1; v < n; ++v)
      if (node(v).scale <= q) dsu.unite(v, node(v).parent);
    std::map<int, std::vector<int>> comps;
    for (int v = 0; v < n; ++v) comps[dsu.find(v)].push_back(v);
    for (auto& [rep, members] : comps) {
      if (members.size() < 2) continue;
      std::vector<char> in(static_cast<std::size_t>(n), 0);
      for (int v : members) in[static_cast<std::size_t>(v)] = 1;
      int top = -1, max_internal = -2;
      Mode sum;
      for (int v : members) {
        sum += node(v).mode;
        const int p = node(v).parent;
        if (p < 0 || !in[static_cast<std::size_t>(p)]) top = v;
        else max_internal = std::max(max_internal, node(v).scale);
      }
      if (max_internal != q) continue;
      const int exit_scale = top == 0 ? top_exit : node(top).scale;
      if (exit_scale <= q) continue;
      if (!sum.is_zero()) continue;
      int entering = -1, count = 0;
      for (int v = 0; v < n; ++v) {
        const int p = node(v).parent;
        if (!in[static_cast<std::size_t>(v)] && p >= 0 && in[static_cast<std::size_t>(p)]) {
          entering = v;
          ++count;
        }
      }
      if (tree.leg >= 0 && in[static_cast<std::size_t>(tree.leg)]) {
        entering = -2;
        ++count;
      }
      if (count != 1) continue;
      SelfEnergyCluster c;
      c.nodes = members;
      c.scale = q;
      c.entering_line = entering;
      c.exiting_line = top;
      int p = entering == -2 ? tree.leg : node(entering).parent;
      while (p != top) {
        c.path.push_back(p);
        p = node(p).parent;
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

SiegelBryunoReport siegel_bryuno_check(const LabelledTree& tree, const ScaleSequences& seq,
                                       std::optional<int> cluster_scale) {
  SiegelBryunoReport rep;
  rep.K = tree.l1_weight();
  int max_scale = 0;
  const std::size_t first = tree.open_top ? 1 : 0;
  for (std::size_t v = first; v < tree.nodes.size(); ++v) max_scale = std::max(max_scale, tree.nodes[v].scale);
  for (int s = 0; s <= max_scale && s <= seq.n_max(); ++s) {
    int count = 0;
    for (std::size_t v = first; v < tree.nodes.size(); ++v)
      if (tree.nodes[v].scale >= s) ++count;
    const double bound = std::ldexp(static_cast<double>(rep.K), 2 - seq.m[static_cast<std::size_t>(s)]);
    rep.lines_at_or_above.push_back(count);
    rep.bound.push_back(bound);
    if (count > bound && rep.ok) {
      rep.ok = false;
      rep.violating_scale = s;
    }
  }
  if (cluster_scale && *cluster_scale >= 0 && *cluster_scale <= seq.n_max()) {
    rep.cluster_check = true;
    rep.cluster_K_bound = std::ldexp(1.0, seq.m[static_cast<std::size_t>(*cluster_scale)] - 1);
    if (rep.K < rep.cluster_K_bound && rep.ok) {
      rep.ok = false;
      rep.violating_scale = *cluster_scale;
    }
  }
  return rep;
}

std::string canonical_encoding(const LabelledTree& tree, bool with_components) {
  if (tree.nodes.empty()) return "()";
  const auto ch = tree.children();
  std::function<std::string(int)> enc = [&](int v) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(v)];
    std::string s = "(" + mode_key(nd.mode) + "|" + std::to_string(nd.scale);
    if (with_components) s += "|" + std::to_string(nd.e) + "," + std::to_string(nd.u);
    if (tree.leg == v) s += "|*";
    std::vector<std::string> kids;
    for (int c : ch[static_cast<std::size_t>(v)]) kids.push_back(enc(c));
    std::sort(kids.begin(), kids.end());
    for (auto& k : kids) s += k;
    return s + ")";
  };
  return enc(0);
}

void write_tree(std::ostream& os, const LabelledTree& tree, int d) {
  os << "tree order=" << tree.order() << " momentum=" << to_string(tree.total_momentum(), d);
  if (tree.leg >= 0) os << " leg=" << tree.leg;
  os << '\n';
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    const TreeNode& n = tree.nodes[v];
    os << "  node " << v << " parent " << n.parent << " mode " << to_string(n.mode, d) << " momentum "
       << to_string(n.momentum, d) << " scale " << n.scale << " e " << n.e << " u " << n.u << '\n';
  }
}

double symmetry_weight(const LabelledTree& tree) {
  const auto ch = tree.children();
  std::vector<std::string> enc(tree.nodes.size());
  std::function<void(int)> fill = [&](int v) {
    std::vector<std::string> kids;
    for (int c : ch[static_cast<std::size_t>(v)]) {
      fill(c);
      kids.push_back(enc[static_cast<std::size_t>(c)]);
    }
    std::sort(kids.begin(), kids.end());
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(v)];
    std::string s = "(" + mode_key(nd.mode) + "|" + std::to_string(nd.scale) + "|" + std::to_string(nd.e) +
                    "," + std::to_string(nd.u) + (tree.leg == v ? "|*" : "");
    for (auto& k : kids) s += k;
    enc[static_cast<std::size_t>(v)] = s + ")";
  };
  fill(0);
  double w = 1.0;
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    std::map<std::string, int> counts;
    for (int c : ch[v]) ++counts[enc[static_cast<std::size_t>(c)]];
    int s = static_cast<int>(ch[v].size());
    if (tree.leg == static_cast<int>(v)) ++s;
    for (int i = 2; i <= s; ++i) w *= i;
    for (auto& [k, m] : counts)
      for (int i = 2; i <= m; ++i) w /= i;
  }
  return w;
}

// ---------------------------------------------------------------------------

TreeCatalog::TreeCatalog(const ForcingModel& model, const FrequencyVector& omega,
                         const Partition& partition, const Truncation& trunc)
    : model_(&model), omega_(&omega), partition_(&partition), trunc_(trunc) {
  if (trunc.K < 1) throw ConfigError("tree order K must be >= 1");
  if (trunc.p_max < 0) throw ConfigError("p_max must be >= 0");
  if (trunc.p_max > partition.max_scale())
    throw ConfigError("p_max=" + std::to_string(trunc.p_max) + " exceeds resolved scales (" +
                      std::to_string(partition.max_scale()) + ")");
  if (omega.dim() != model.d()) throw ConfigError("frequency dimension does not match the forcing");
  build_subtrees();
  build_zero_roots();
  build_leg_subtrees();
}

void TreeCatalog::check_budget(std::size_t n) const {
  if (n > trunc_.tree_cap)
    throw BudgetExceeded("tree catalog exceeds cap of " + std::to_string(trunc_.tree_cap) + " entries");
}

void TreeCatalog::append_flat(int id, int parent, LabelledTree& out) const {
  const Subtree& s = subtrees_[static_cast<std::size_t>(id)];
  TreeNode nd;
  nd.mode = s.mode;
  nd.parent = parent;
  nd.momentum = s.momentum;
  nd.scale = s.scale;
  const int me = static_cast<int>(out.nodes.size());
  out.nodes.push_back(nd);
  for (int c : s.children) append_flat(c, me, out);
}

LabelledTree TreeCatalog::flatten(int id) const {
  LabelledTree t;
  append_flat(id, -1, t);
  return t;
}

LabelledTree TreeCatalog::flatten_zero_root(int index) const {
  const ZeroRoot& z = zero_roots_[static_cast<std::size_t>(index)];
  LabelledTree t;
  TreeNode top;
  top.mode = z.mode;
  top.scale = -1;
  t.nodes.push_back(top);
  for (int c : z.children) append_flat(c, 0, t);
  return t;
}

std::vector<int> TreeCatalog::leg_path(int root) const {
  std::vector<int> path;
  for (int id = root; id >= 0; id = legs_[static_cast<std::size_t>(id)].leg_child) path.push_back(id);
  return path;
}

LabelledTree TreeCatalog::flatten_cluster(const ClusterInstance& inst) const {
  const auto path = leg_path(inst.root);
  if (inst.path_scales.size() + 1 != path.size())
    throw ValidationError("cluster instance has wrong number of path scales");
  LabelledTree t;
  t.open_top = true;
  int parent = -1;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const LegSubtree& L = legs_[static_cast<std::size_t>(path[i])];
    TreeNode nd;
    nd.mode = L.mode;
    nd.parent = parent;
    nd.momentum = L.nu0;
    nd.scale = i == 0 ? kExternalScale : inst.path_scales[i - 1];
    const int me = static_cast<int>(t.nodes.size());
    t.nodes.push_back(nd);
    for (int c : L.children) append_flat(c, me, t);
    parent = me;
  }
  t.leg = parent;
  return t;
}

void TreeCatalog::build_subtrees() {
  const auto& modes = model_->active_modes();
  for (int k = 1; k <= trunc_.K; ++k) {
    std::vector<int> candidates(subtrees_.size());
    std::iota(candidates.begin(), candidates.end(), 0);
    std::vector<Subtree> fresh;
    for (const Mode& m : modes) {
      for_each_multiset(
          candidates, [&](int id) { return subtrees_[static_cast<std::size_t>(id)].order; }, k - 1,
          [&](const std::vector<int>& kids) {
            if (m.is_zero() && kids.size() == 1) return;
            Subtree s;
            s.mode = m;
            s.children = kids;
            s.momentum = m;
            s.order = k;
            s.l1 = m.l1();
            s.max_scale = -1;
            for (int c : kids) {
              const Subtree& cs = subtrees_[static_cast<std::size_t>(c)];
              s.momentum += cs.momentum;
              s.l1 += cs.l1;
              s.max_scale = std::max(s.max_scale, cs.max_scale);
            }
            if (s.momentum.is_zero()) return;
            s.divisor = omega_->dot(s.momentum);
            if (s.divisor == 0.0)
              throw ResonanceError("exact resonance w.nu = 0 at nu=" + to_string(s.momentum, model_->d()));
            s.weight = inverse_multiplicity(kids);
            const int child_max = s.max_scale;
            for (int n : partition_->scales_of(s.divisor, trunc_.p_max)) {
              Subtree t = s;
              t.scale = n;
              t.max_scale = std::max(child_max, n);
              fresh.push_back(std::move(t));
            }
          });
    }
    // Renormalisation filter; only clusters touching the new top can appear.
    for (Subtree& s : fresh) {
      subtrees_.push_back(std::move(s));
      const int id = static_cast<int>(subtrees_.size()) - 1;
      if (!find_self_energy_clusters(flatten(id)).empty()) subtrees_.pop_back();
      check_budget(subtrees_.size());
    }
  }
}

void TreeCatalog::build_zero_roots() {
  std::vector<int> candidates(subtrees_.size());
  std::iota(candidates.begin(), candidates.end(), 0);
  for (int k = 1; k <= trunc_.K + 1; ++k) {
    for (const Mode& m : model_->active_modes()) {
      for_each_multiset(
          candidates, [&](int id) { return subtrees_[static_cast<std::size_t>(id)].order; }, k - 1,
          [&](const std::vector<int>& kids) {
            Mode mom = m;
            int max_scale = -1;
            for (int c : kids) {
              mom += subtrees_[static_cast<std::size_t>(c)].momentum;
              max_scale = std::max(max_scale, subtrees_[static_cast<std::size_t>(c)].max_scale);
            }
            if (!mom.is_zero()) return;
            if (m.is_zero() && kids.size() == 1) return;
            ZeroRoot z{m, kids, k, max_scale, inverse_multiplicity(kids)};
            zero_roots_.push_back(std::move(z));
            if (!find_self_energy_clusters(flatten_zero_root(static_cast<int>(zero_roots_.size()) - 1)).empty())
              zero_roots_.pop_back();
            check_budget(subtrees_.size() + zero_roots_.size());
          });
    }
  }
}

void TreeCatalog::build_leg_subtrees() {
  std::vector<int> candidates(subtrees_.size());
  std::iota(candidates.begin(), candidates.end(), 0);
  auto order_of = [&](int id) { return subtrees_[static_cast<std::size_t>(id)].order; };
  // Clusters go one order beyond the trees, matching the zero-momentum trees
  // that make up the averaged vector field.
  const int kmax = trunc_.K + 1;
  std::vector<std::vector<int>> legs_by_order(static_cast<std::size_t>(kmax) + 1);
  for (int k = 1; k <= kmax; ++k) {
    for (const Mode& m : model_->active_modes()) {
      auto emit = [&](int leg_child, const std::vector<int>& kids) {
        if (m.is_zero() && kids.empty()) return;  // lone zero-mode node: scale -1 cluster
        LegSubtree L;
        L.mode = m;
        L.children = kids;
        L.leg_child = leg_child;
        L.nu0 = m;
        L.order = k;
        L.l1 = m.l1();
        L.weight = inverse_multiplicity(kids);
        for (int c : kids) {
          const Subtree& cs = subtrees_[static_cast<std::size_t>(c)];
          L.nu0 += cs.momentum;
          L.l1 += cs.l1;
          L.max_fixed_scale = std::max(L.max_fixed_scale, cs.max_scale);
        }
        if (leg_child >= 0) {
          const LegSubtree& lc = legs_[static_cast<std::size_t>(leg_child)];
          L.nu0 += lc.nu0;
          L.l1 += lc.l1;
          L.max_fixed_scale = std::max(L.max_fixed_scale, lc.max_fixed_scale);
        }
        L.divisor0 = omega_->dot(L.nu0);
        legs_.push_back(std::move(L));
        const int id = static_cast<int>(legs_.size()) - 1;
        legs_by_order[static_cast<std::size_t>(k)].push_back(id);
        if (legs_.back().nu0.is_zero()) cluster_roots_.push_back(id);
        check_budget(subtrees_.size() + zero_roots_.size() + legs_.size());
      };
      for_each_multiset(candidates, order_of, k - 1, [&](const std::vector<int>& kids) { emit(-1, kids); });
      for (int k1 = 1; k1 < k; ++k1) {
        for (int lc : legs_by_order[static_cast<std::size_t>(k1)]) {
          for_each_multiset(candidates, order_of, k - 1 - k1,
                            [&](const std::vector<int>& kids) { emit(lc, kids); });
        }
      }
    }
  }
}

std::vector<ClusterInstance> TreeCatalog::compute_instances(int q, double x) const {
  std::vector<ClusterInstance> out;
  for (int root : cluster_roots_) {
    const LegSubtree& top = legs_[static_cast<std::size_t>(root)];
    if (top.max_fixed_scale > q) continue;
    const auto path = leg_path(root);
    std::vector<std::vector<int>> options;
    bool feasible = true;
    for (std::size_t i = 1; i < path.size(); ++i) {
      const double div = legs_[static_cast<std::size_t>(path[i])].divisor0 + x;
      if (div == 0.0) {
        feasible = false;
        break;
      }
      options.push_back(partition_->scales_of(div, q));
      if (options.back().empty()) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    ClusterInstance inst;
    inst.root = root;
    inst.path_scales.assign(options.size(), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_scale) {
      if (i == options.size()) {
        if (max_scale != q) return;
        const LabelledTree t = flatten_cluster(inst);
        for (const auto& c : find_self_energy_clusters(t))
          if (static_cast<int>(c.nodes.size()) != t.order()) return;
        out.push_back(inst);
        return;
      }
      for (int s : options[i]) {
        inst.path_scales[i] = s;
        rec(i + 1, std::max(max_scale, s));
      }
    };
    rec(0, top.max_fixed_scale);
  }
  return out;
}

const std::vector<ClusterInstance>& TreeCatalog::cluster_instances(int q, double x) const {
  const auto key = std::make_pair(q, x);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = instance_cache_.find(key);
    if (it != instance_cache_.end()) return it->second;
  }
  auto inst = compute_instances(q, x);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return instance_cache_.emplace(key, std::move(inst)).first->second;
}

std::vector<double> TreeCatalog::line_divisors() const {
  std::vector<double> out;
  for (const auto& s : subtrees_) out.push_back(s.divisor);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<LabelledTree> enumerate_trees(const TreeCatalog& catalog, int k, const Mode& nu, int j) {
  const int r = catalog.model().r();
  if (j < 0 || j >= r) throw ConfigError("component index out of range");
  std::vector<LabelledTree> skeletons;
  if (nu.is_zero()) {
    for (std::size_t i = 0; i < catalog.zero_roots().size(); ++i)
      if (catalog.zero_roots()[i].order == k) skeletons.push_back(catalog.flatten_zero_root(static_cast<int>(i)));
  } else {
    for (std::size_t i = 0; i < catalog.subtrees().size(); ++i) {
      const Subtree& s = catalog.subtrees()[i];
      if (s.order == k && s.momentum == nu) skeletons.push_back(catalog.flatten(static_cast<int>(i)));
    }
  }
  std::map<std::string, LabelledTree> classes;
  for (LabelledTree& t : skeletons) {
    t.nodes[0].e = j;
    if (nu.is_zero()) t.nodes[0].u = j;
    // free labels: u of the root line (nonzero nu), then e,u of every other line
    std::vector<int*> slots;
    if (!nu.is_zero()) slots.push_back(&t.nodes[0].u);
    for (std::size_t v = 1; v < t.nodes.size(); ++v) {
      slots.push_back(&t.nodes[v].e);
      slots.push_back(&t.nodes[v].u);
    }
    std::size_t total = 1;
    for (std::size_t i = 0; i < slots.size(); ++i) total *= static_cast<std::size_t>(r);
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (int* s : slots) {
        *s = static_cast<int>(c % static_cast<std::size_t>(r));
        c /= static_cast<std::size_t>(r);
      }
      classes.emplace(canonical_encoding(t), t);
    }
  }
  std::vector<LabelledTree> out;
  out.reserve(classes.size());
  for (auto& [key, t] : classes) out.push_back(std::move(t));
  return out;
}

std::vector<std::string> enumerate_shapes(int k) {
  if (k < 1) return {};
  std::vector<std::vector<std::string>> by_size(static_cast<std::size_t>(k) + 1);
  by_size[1] = {"()"};
  for (int n = 2; n <= k; ++n) {
    std::vector<std::string> pool;
    std::vector<int> sizes;
    for (int s = 1; s < n; ++s)
      for (const auto& sh : by_size[static_cast<std::size_t>(s)]) {
        pool.push_back(sh);
        sizes.push_back(s);
      }
    std::vector<int> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::set<std::string> shapes;
    for_each_multiset(idx, [&](int i) { return sizes[static_cast<std::size_t>(i)]; }, n - 1,
                      [&](const std::vector<int>& kids) {
                        std::vector<std::string> parts;
                        for (int i : kids) parts.push_back(pool[static_cast<std::size_t>(i)]);
                        std::sort(parts.begin(), parts.end());
                        std::string s = "(";
                        for (auto& p : parts) s += p;
                        shapes.insert(s + ")");
                      });
    by_size[static_cast<std::size_t>(n)].assign(shapes.begin(), shapes.end());
  }
  return by_size[static_cast<std::size_t>(k)];
}

}  // namespace qpr
