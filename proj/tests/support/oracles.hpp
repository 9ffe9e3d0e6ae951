#pragma once

// Independent reference implementations used to check the library. None of
// them call into the code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "patch_triage/classifier.hpp"
#include "patch_triage/edit_script.hpp"
#include "patch_triage/metrics.hpp"
#include "patch_triage/syntax_tree.hpp"

namespace patch_triage::oracle {

// ---------------------------------------------------------------- LCS

/// Textbook full-table LCS, filled from the front.
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        t[i][j] = t[i - 1][j - 1] + 1;
      } else {
        t[i][j] = t[i - 1][j] > t[i][j - 1] ? t[i - 1][j] : t[i][j - 1];
      }
    }
  }
  return t[a.size()][b.size()];
}

inline double dice(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * static_cast<double>(lcs(a, b)) / static_cast<double>(a.size() + b.size());
}

// ---------------------------------------------------------------- DBSCAN

/// Clusters as the equivalence classes of core points under the transitive
/// closure of "within eps", computed with a Warshall closure. A non-core point
/// within eps of a core point joins the class of its smallest-id core
/// neighbour; the rest is noise.
inline Clustering dbscan(const std::vector<std::string>& ids, const std::vector<double>& d, double eps,
                         std::size_t min_pts) {
  const std::size_t n = ids.size();
  auto within = [&](std::size_t a, std::size_t b) { return a == b || d[a * n + b] <= eps + kEpsSlack; };
  std::vector<bool> core(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t k = 0;
    for (std::size_t q = 0; q < n; ++q) k += within(p, q);
    core[p] = k >= min_pts;
  }
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) reach[p][q] = core[p] && core[q] && within(p, q);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
      }
    }
  }
  std::map<std::string, std::set<std::string>> by_rep;  // smallest core id of a class -> members
  auto rep_of = [&](std::size_t p) {
    std::string best;
    for (std::size_t q = 0; q < n; ++q) {
      if (reach[p][q] && (best.empty() || ids[q] < best)) best = ids[q];
    }
    return best;
  };
  Clustering out;
  for (std::size_t p = 0; p < n; ++p) {
    if (core[p]) {
      by_rep[rep_of(p)].insert(ids[p]);
      continue;
    }
    std::optional<std::size_t> anchor;
    for (std::size_t q = 0; q < n; ++q) {
      if (core[q] && within(p, q) && (!anchor || ids[q] < ids[*anchor])) anchor = q;
    }
    if (anchor) {
      by_rep[rep_of(*anchor)].insert(ids[p]);
    } else {
      out.noise.push_back(ids[p]);
    }
  }
  for (auto& [rep, members] : by_rep) out.clusters.emplace_back(members.begin(), members.end());
  std::sort(out.clusters.begin(), out.clusters.end());
  std::sort(out.noise.begin(), out.noise.end());
  return out;
}

// ---------------------------------------------------------------- trees

/// Mutable tree with stable node handles, used to build random trees and to
/// replay edit scripts.
struct MutableTree {
  struct MNode {
    std::string type;
    std::optional<std::string> label;
    long parent = -1;
    std::vector<long> children;
  };
  std::vector<MNode> nodes;
  long root = -1;

  long add(std::string type, std::optional<std::string> label, long parent, std::size_t pos) {
    nodes.push_back({std::move(type), std::move(label), parent, {}});
    const long id = static_cast<long>(nodes.size()) - 1;
    if (parent >= 0) {
      auto& kids = nodes[static_cast<std::size_t>(parent)].children;
      kids.insert(kids.begin() + static_cast<long>(std::min(pos, kids.size())), id);
    }
    return id;
  }
  void detach(long id) {
    const long p = nodes[static_cast<std::size_t>(id)].parent;
    if (p < 0) return;
    auto& kids = nodes[static_cast<std::size_t>(p)].children;
    kids.erase(std::find(kids.begin(), kids.end(), id));
    nodes[static_cast<std::size_t>(id)].parent = -1;
  }
  std::vector<long> live() const {
    std::vector<long> out;
    if (root < 0) return out;
    std::vector<long> stack{root};
    while (!stack.empty()) {
      const long id = stack.back();
      stack.pop_back();
      out.push_back(id);
      const auto& kids = nodes[static_cast<std::size_t>(id)].children;
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }
  bool is_ancestor(long a, long id) const {
    for (long p = nodes[static_cast<std::size_t>(id)].parent; p >= 0; p = nodes[static_cast<std::size_t>(p)].parent) {
      if (p == a) return true;
    }
    return false;
  }

  static MutableTree from(const SyntaxTree& t) {
    MutableTree m;
    for (NodeId id = 0; id < static_cast<NodeId>(t.size()); ++id) {
      const long parent = t.parent(id);
      m.nodes.push_back({t.type(id), t.label(id), parent, {}});
      if (parent >= 0) m.nodes[static_cast<std::size_t>(parent)].children.push_back(id);
    }
    m.root = 0;
    return m;
  }

  SyntaxTree freeze() const {
    TreeBuilder b;
    std::function<void(long, NodeId)> walk = [&](long id, NodeId parent) {
      const auto& n = nodes[static_cast<std::size_t>(id)];
      const NodeId mine = b.add(n.type, n.label, {}, parent);
      for (long c : n.children) walk(c, mine);
    };
    walk(root, kNoNode);
    return std::move(b).build();
  }
};

inline const std::vector<std::string>& tree_types() {
  static const std::vector<std::string> types{"block", "call", "expr", "ident", "stmt"};
  return types;
}

inline std::optional<std::string> random_label(std::mt19937_64& rng) {
  static const std::vector<std::string> labels{"a", "b", "c", "x", "+"};
  std::uniform_int_distribution<std::size_t> pick(0, labels.size());
  const std::size_t k = pick(rng);
  if (k == labels.size()) return std::nullopt;
  return labels[k];
}

inline std::string random_type(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, tree_types().size() - 1);
  return tree_types()[pick(rng)];
}

/// Random ordered tree with `size` nodes, root type "root".
inline MutableTree random_tree(std::mt19937_64& rng, std::size_t size) {
  MutableTree t;
  t.root = t.add("root", std::nullopt, -1, 0);
  while (t.nodes.size() < size) {
    std::uniform_int_distribution<std::size_t> parent(0, t.nodes.size() - 1);
    const long p = static_cast<long>(parent(rng));
    std::uniform_int_distribution<std::size_t> pos(0, t.nodes[static_cast<std::size_t>(p)].children.size());
    t.add(random_type(rng), random_label(rng), p, pos(rng));
  }
  return t;
}

/// Applies `count` random insert / delete / relabel / move / wrap edits,
/// never touching the root and never exceeding `max_size` live nodes.
inline void mutate(MutableTree& t, std::mt19937_64& rng, std::size_t count, std::size_t max_size) {
  std::uniform_int_distribution<int> kind(0, 4);
  for (std::size_t done = 0; done < count;) {
    const auto nodes = t.live();
    std::uniform_int_distribution<std::size_t> any(0, nodes.size() - 1);
    const long target = nodes[any(rng)];
    auto& n = t.nodes[static_cast<std::size_t>(target)];
    switch (kind(rng)) {
      case 0: {  // insert a leaf
        if (nodes.size() >= max_size) continue;
        std::uniform_int_distribution<std::size_t> pos(0, n.children.size());
        t.add(random_type(rng), random_label(rng), target, pos(rng));
        break;
      }
      case 1: {  // delete a node, splicing its children into its place
        if (target == t.root) continue;
        const long p = n.parent;
        auto& siblings = t.nodes[static_cast<std::size_t>(p)].children;
        const auto at = std::find(siblings.begin(), siblings.end(), target) - siblings.begin();
        const auto kids = n.children;
        t.detach(target);
        for (std::size_t i = 0; i < kids.size(); ++i) {
          t.nodes[static_cast<std::size_t>(kids[i])].parent = p;
          siblings.insert(siblings.begin() + at + static_cast<long>(i), kids[i]);
        }
        break;
      }
      case 2: {  // relabel
        auto label = random_label(rng);
        if (label == n.label) continue;
        n.label = std::move(label);
        break;
      }
      case 3: {  // move a subtree
        if (target == t.root) continue;
        std::vector<long> hosts;
        for (long h : nodes) {
          if (h != target && !t.is_ancestor(target, h)) hosts.push_back(h);
        }
        std::uniform_int_distribution<std::size_t> pick(0, hosts.size() - 1);
        const long host = hosts[pick(rng)];
        t.detach(target);
        std::uniform_int_distribution<std::size_t> pos(0, t.nodes[static_cast<std::size_t>(host)].children.size());
        const std::size_t at = pos(rng);
        auto& kids = t.nodes[static_cast<std::size_t>(host)].children;
        kids.insert(kids.begin() + static_cast<long>(at), target);
        t.nodes[static_cast<std::size_t>(target)].parent = host;
        break;
      }
      default: {  // wrap a node in a new parent
        if (target == t.root || nodes.size() >= max_size) continue;
        const long p = n.parent;
        auto& siblings = t.nodes[static_cast<std::size_t>(p)].children;
        const auto at = static_cast<std::size_t>(std::find(siblings.begin(), siblings.end(), target) - siblings.begin());
        t.detach(target);
        const long wrapper = t.add(random_type(rng), random_label(rng), p, at);
        t.nodes[static_cast<std::size_t>(wrapper)].children.push_back(target);
        t.nodes[static_cast<std::size_t>(target)].parent = wrapper;
        break;
      }
    }
    ++done;
  }
}

/// Replays `script` on `before`. Node handles follow the script's numbering:
/// before-tree ids first, then inserted nodes in emission order, with a
/// virtual root above everything. Returns nullopt when an action refers to
/// something that does not exist or breaks the tree shape.
inline std::optional<SyntaxTree> apply_script(const SyntaxTree& before, const EditScript& script) {
  MutableTree t = MutableTree::from(before);
  // Virtual root sits at the end; shift nothing so before ids stay valid.
  const long vroot = t.add("<root>", std::nullopt, -1, 0);
  t.nodes[0].parent = vroot;
  t.nodes[static_cast<std::size_t>(vroot)].children.push_back(0);
  std::map<ScriptNodeId, long> handle;
  for (NodeId id = 0; id < static_cast<NodeId>(before.size()); ++id) handle[id] = id;
  handle[kScriptRoot] = vroot;
  auto find = [&](ScriptNodeId id) -> std::optional<long> {
    const auto it = handle.find(id);
    if (it == handle.end()) return std::nullopt;
    return it->second;
  };
  std::set<long> deleted;
  for (const auto& a : script.actions) {
    switch (a.kind) {
      case ActionKind::Insert: {
        const auto parent = find(a.parent);
        if (!parent || deleted.count(*parent) || handle.count(a.node)) return std::nullopt;
        if (a.position > t.nodes[static_cast<std::size_t>(*parent)].children.size()) return std::nullopt;
        handle[a.node] = t.add(a.node_type, a.label, *parent, a.position);
        break;
      }
      case ActionKind::Delete: {
        const auto node = find(a.node);
        if (!node || deleted.count(*node)) return std::nullopt;
        if (!t.nodes[static_cast<std::size_t>(*node)].children.empty()) return std::nullopt;
        t.detach(*node);
        deleted.insert(*node);
        break;
      }
      case ActionKind::Update: {
        const auto node = find(a.node);
        if (!node || deleted.count(*node)) return std::nullopt;
        t.nodes[static_cast<std::size_t>(*node)].label = a.label;
        break;
      }
      case ActionKind::Move: {
        const auto node = find(a.node);
        const auto parent = find(a.parent);
        if (!node || !parent || deleted.count(*node) || deleted.count(*parent)) return std::nullopt;
        if (*node == *parent || t.is_ancestor(*node, *parent)) return std::nullopt;
        t.detach(*node);
        auto& kids = t.nodes[static_cast<std::size_t>(*parent)].children;
        if (a.position > kids.size()) return std::nullopt;
        kids.insert(kids.begin() + static_cast<long>(a.position), *node);
        t.nodes[static_cast<std::size_t>(*node)].parent = *parent;
        break;
      }
    }
  }
  const auto& top = t.nodes[static_cast<std::size_t>(vroot)].children;
  if (top.size() != 1) return std::nullopt;
  t.root = top[0];
  t.nodes[static_cast<std::size_t>(t.root)].parent = -1;
  return t.freeze();
}

/// Size of a maximum mapping between `a` and `b` that pairs equal types and
/// preserves ancestry and left-to-right order (the mappings admitted by tree
/// edit distance). Exhaustive backtracking; keep both trees small.
inline std::size_t max_valid_mapping(const SyntaxTree& a, const SyntaxTree& b) {
  const auto na = static_cast<NodeId>(a.size()), nb = static_cast<NodeId>(b.size());
  std::vector<std::pair<NodeId, NodeId>> chosen;
  std::vector<bool> used(static_cast<std::size_t>(nb), false);
  std::size_t best = 0;
  auto compatible = [&](NodeId x, NodeId y) {
    for (const auto& [u, v] : chosen) {
      // u precedes x in preorder, so u is either an ancestor of x or left of it.
      const bool anc_a = a.is_descendant(u, x);
      const bool anc_b = b.is_descendant(v, y);
      if (anc_a != anc_b) return false;
      if (!anc_b && !(v < y)) return false;
    }
    return true;
  };
  std::function<void(NodeId)> search = [&](NodeId x) {
    if (chosen.size() + static_cast<std::size_t>(na - x) <= best) return;
    if (x == na) {
      best = std::max(best, chosen.size());
      return;
    }
    for (NodeId y = 0; y < nb; ++y) {
      if (used[static_cast<std::size_t>(y)] || a.type(x) != b.type(y) || !compatible(x, y)) continue;
      used[static_cast<std::size_t>(y)] = true;
      chosen.emplace_back(x, y);
      search(x + 1);
      chosen.pop_back();
      used[static_cast<std::size_t>(y)] = false;
    }
    search(x + 1);
  };
  search(0);
  return best;
}

// ---------------------------------------------------------------- metrics

struct Rates {
  std::optional<double> tpr, precision, mcc;
};

struct Evaluation {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t atp = 0, afn = 0;
  Rates base, adjusted;
};

inline Rates rates(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Rates r;
  const long double TP = tp, FP = fp, FN = fn, TN = tn;
  if (tp + fn) r.tpr = static_cast<double>(TP / (TP + FN));
  if (tp + fp) r.precision = static_cast<double>(TP / (TP + FP));
  const long double den = (TP + FP) * (TP + FN) * (TN + FP) * (TN + FN);
  if (den > 0) r.mcc = static_cast<double>((TP * TN - FP * FN) / std::sqrt(den));
  return r;
}

/// Brute-force scoring: one pass per vulnerability over the whole record
/// list, with long double arithmetic for the rates.
inline Evaluation evaluate(const std::vector<PredictionRecord>& preds) {
  Evaluation e;
  std::set<std::string> vulns;
  for (const auto& p : preds) {
    if (p.true_label && p.predicted_label) ++e.tp;
    if (p.true_label && !p.predicted_label) ++e.fn;
    if (!p.true_label && p.predicted_label) ++e.fp;
    if (!p.true_label && !p.predicted_label) ++e.tn;
    if (p.vuln_id) vulns.insert(*p.vuln_id);
  }
  for (const auto& v : vulns) {
    bool all = true;
    for (const auto& p : preds) {
      if (p.vuln_id == v && !p.predicted_label) all = false;
    }
    ++(all ? e.atp : e.afn);
  }
  for (const auto& p : preds) {
    if (p.true_label && !p.vuln_id) ++(p.predicted_label ? e.atp : e.afn);
  }
  e.base = rates(e.tp, e.fp, e.fn, e.tn);
  e.adjusted = rates(e.atp, e.fp, e.afn, e.tn);
  return e;
}

}  // namespace patch_triage::oracle
