#include "patch_triage/edit_script.hpp"

#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "patch_triage/error.hpp"
#include "patch_triage/sequence.hpp"

namespace patch_triage {

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Insert: return "insert";
    case ActionKind::Delete: return "delete";
    case ActionKind::Update: return "update";
    case ActionKind::Move: return "move";
  }
  return "insert";
}

ActionKind action_kind_from_string(std::string_view text) {
  if (text == "insert") return ActionKind::Insert;
  if (text == "delete") return ActionKind::Delete;
  if (text == "update") return ActionKind::Update;
  if (text == "move") return ActionKind::Move;
  throw Error("unknown edit action kind '" + std::string(text) + "'");
}

namespace {

constexpr ScriptNodeId kNone = std::numeric_limits<ScriptNodeId>::min();
constexpr const char* kRootType = "<root>";

struct WorkNode {
  std::string type;
  std::optional<std::string> label;
  ScriptNodeId parent = kNone;
  std::vector<ScriptNodeId> children;
};

// Both trees are viewed with a virtual root (id -1) above their real root so
// that replacing the root itself is expressible. Vectors are indexed id + 1.
class ScriptGenerator {
 public:
  ScriptGenerator(const SyntaxTree& before, const SyntaxTree& after, const TreeMapping& mapping)
      : after_(after) {
    work_.resize(before.size() + 1);
    work_[0] = WorkNode{kRootType, std::nullopt, kNone, {0}};
    for (NodeId id = 0; id < static_cast<NodeId>(before.size()); ++id) {
      const Node& n = before.node(id);
      WorkNode w{n.type, n.label, n.parent == kNoNode ? kScriptRoot : n.parent, {}};
      for (NodeId c : n.children) w.children.push_back(c);
      work_[slot(id)] = std::move(w);
    }
    work_to_after_.assign(before.size() + 1, kNone);
    after_to_work_.assign(after.size() + 1, kNone);
    after_in_order_.assign(after.size() + 1, false);
    work_to_after_[0] = kScriptRoot;
    after_to_work_[0] = kScriptRoot;
    for (const auto& [b, a] : mapping.pairs()) {
      work_to_after_[slot(b)] = a;
      after_to_work_[slot(a)] = b;
    }
  }

  EditScript run() {
    std::deque<ScriptNodeId> queue{kScriptRoot};
    while (!queue.empty()) {
      const ScriptNodeId x = queue.front();
      queue.pop_front();
      ScriptNodeId w = kScriptRoot;
      if (x != kScriptRoot) {
        const ScriptNodeId y = after_parent(x);
        const ScriptNodeId z = after_to_work_[slot(y)];
        if (after_to_work_[slot(x)] == kNone) {
          const std::size_t k = find_pos(x);
          w = static_cast<ScriptNodeId>(work_.size()) - 1;
          const Node& src = after_.node(static_cast<NodeId>(x));
          work_.push_back(WorkNode{src.type, src.label, kNone, {}});
          work_to_after_.push_back(x);
          after_to_work_[slot(x)] = w;
          attach(w, z, k);
          script_.actions.push_back(EditAction{ActionKind::Insert, src.type, src.label, std::nullopt,
                                               node(z).type, k, w, z});
        } else {
          w = after_to_work_[slot(x)];
          const Node& target = after_.node(static_cast<NodeId>(x));
          if (node(w).label != target.label) {
            script_.actions.push_back(EditAction{ActionKind::Update, node(w).type, target.label,
                                                 node(w).label, std::nullopt, 0, w, node(w).parent});
            node(w).label = target.label;
          }
          if (node(w).parent != z) {
            detach(w);
            const std::size_t k = find_pos(x);
            attach(w, z, k);
            script_.actions.push_back(EditAction{ActionKind::Move, node(w).type, node(w).label,
                                                 std::nullopt, node(z).type, k, w, z});
          }
        }
      }
      after_in_order_[slot(x)] = true;
      align_children(w, x);
      for (ScriptNodeId c : after_children(x)) queue.push_back(c);
    }

    std::vector<ScriptNodeId> order;
    postorder(kScriptRoot, order);
    for (ScriptNodeId w : order) {
      if (w == kScriptRoot || work_to_after_[slot(w)] != kNone) continue;
      if (!node(w).children.empty()) {
        throw std::logic_error("edit script: deleting a node that still has children");
      }
      script_.actions.push_back(EditAction{ActionKind::Delete, node(w).type, node(w).label,
                                           std::nullopt, std::nullopt, 0, w, node(w).parent});
      detach(w);
    }
    return std::move(script_);
  }

 private:
  static std::size_t slot(ScriptNodeId id) { return static_cast<std::size_t>(id + 1); }
  WorkNode& node(ScriptNodeId id) { return work_[slot(id)]; }

  ScriptNodeId after_parent(ScriptNodeId x) const {
    const NodeId p = after_.parent(static_cast<NodeId>(x));
    return p == kNoNode ? kScriptRoot : p;
  }
  std::vector<ScriptNodeId> after_children(ScriptNodeId x) const {
    if (x == kScriptRoot) return {0};
    const auto kids = after_.children(static_cast<NodeId>(x));
    return {kids.begin(), kids.end()};
  }

  void detach(ScriptNodeId w) {
    auto& siblings = node(node(w).parent).children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), w));
    node(w).parent = kNone;
  }
  void attach(ScriptNodeId w, ScriptNodeId parent, std::size_t k) {
    auto& siblings = node(parent).children;
    siblings.insert(siblings.begin() + static_cast<std::ptrdiff_t>(k), w);
    node(w).parent = parent;
  }

  // Index right after the partner of x's rightmost in-order left sibling.
  std::size_t find_pos(ScriptNodeId x) const {
    ScriptNodeId v = kNone;
    for (ScriptNodeId c : after_children(after_parent(x))) {
      if (c == x) break;
      if (after_in_order_[slot(c)]) v = c;
    }
    if (v == kNone) return 0;
    const ScriptNodeId u = after_to_work_[slot(v)];
    const auto& siblings = work_[slot(work_[slot(u)].parent)].children;
    return static_cast<std::size_t>(std::find(siblings.begin(), siblings.end(), u) - siblings.begin()) + 1;
  }

  void align_children(ScriptNodeId w, ScriptNodeId x) {
    const auto x_children = after_children(x);
    for (ScriptNodeId c : x_children) after_in_order_[slot(c)] = false;
    std::vector<ScriptNodeId> s1, s2;
    for (ScriptNodeId c : node(w).children) {
      const ScriptNodeId p = work_to_after_[slot(c)];
      if (p != kNone && after_parent(p) == x) s1.push_back(c);
    }
    for (ScriptNodeId c : x_children) {
      const ScriptNodeId p = after_to_work_[slot(c)];
      if (p != kNone && node(p).parent == w) s2.push_back(c);
    }
    const auto common = lcs_alignment<ScriptNodeId, ScriptNodeId>(
        s1, s2, [&](ScriptNodeId a, ScriptNodeId b) { return work_to_after_[slot(a)] == b; });
    std::vector<bool> aligned(s2.size(), false);
    for (const auto& [i, j] : common) {
      after_in_order_[slot(s2[j])] = true;
      aligned[j] = true;
    }
    for (std::size_t j = 0; j < s2.size(); ++j) {
      if (aligned[j]) continue;
      const ScriptNodeId b = s2[j];
      const ScriptNodeId a = after_to_work_[slot(b)];
      detach(a);
      const std::size_t k = find_pos(b);
      attach(a, w, k);
      script_.actions.push_back(EditAction{ActionKind::Move, node(a).type, node(a).label,
                                           std::nullopt, node(w).type, k, a, w});
      after_in_order_[slot(b)] = true;
    }
  }

  void postorder(ScriptNodeId w, std::vector<ScriptNodeId>& out) const {
    for (ScriptNodeId c : work_[slot(w)].children) postorder(c, out);
    out.push_back(w);
  }

  const SyntaxTree& after_;
  std::vector<WorkNode> work_;
  std::vector<ScriptNodeId> work_to_after_;
  std::vector<ScriptNodeId> after_to_work_;
  std::vector<bool> after_in_order_;
  EditScript script_;
};

}  // namespace

EditScript edit_script(const SyntaxTree& before, const SyntaxTree& after, const TreeMapping& mapping) {
  if (auto problem = validate_mapping(before, after, mapping); !problem.empty()) {
    throw InconsistentMapping(problem);
  }
  return ScriptGenerator(before, after, mapping).run();
}

EditScript diff_trees(const SyntaxTree& before, const SyntaxTree& after, const MatcherOptions& options) {
  return edit_script(before, after, match_trees(before, after, options));
}

TokenSequence encode_script(const EditScript& script) {
  TokenSequence out;
  out.reserve(script.size());
  for (const auto& a : script.actions) {
    std::string token;
    switch (a.kind) {
      case ActionKind::Insert:
        token = "INS:" + a.node_type;
        if (a.label) token += ":" + *a.label;
        break;
      case ActionKind::Delete:
        token = "DEL:" + a.node_type;
        if (a.label) token += ":" + *a.label;
        break;
      case ActionKind::Update:
        token = "UPD:" + a.node_type + ":" + a.label.value_or("");
        break;
      case ActionKind::Move:
        token = "MOV:" + a.node_type + ":" + a.parent_type.value_or(kRootType);
        break;
    }
    out.push_back(std::move(token));
  }
  return out;
}

TokenSequence encode_line_diff(const std::vector<std::string>& removed,
                               const std::vector<std::string>& added) {
  TokenSequence out;
  auto split = [&](const std::vector<std::string>& lines, const char* prefix) {
    for (const auto& line : lines) {
      std::istringstream in(line);
      std::string lexeme;
      while (in >> lexeme) out.push_back(prefix + lexeme);
    }
  };
  split(removed, "DEL:");
  split(added, "ADD:");
  return out;
}

}  // namespace patch_triage
