// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/graph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace fpg {

namespace {

OperatorSpec plain_conv(int kernel, int stride) {
  return {{{OpType::conv, kernel, stride}}};
}

OperatorSpec conv_block(int kernel, int stride) {
  return {{{OpType::relu}, {OpType::conv, kernel, stride}, {OpType::bn}}};
}

OperatorSpec same_up_op(SameUpKind kind) {
  switch (kind) {
    case SameUpKind::conv3_s2: return conv_block(3, 2);
    case SameUpKind::maxpool2: return {{{OpType::maxpool2}}};
    case SameUpKind::avgpool2: return {{{OpType::avgpool2}}};
  }
  return {};
}

OperatorSpec across_down_op(AcrossDownKind kind) {
  OperatorSpec op{{{OpType::nearest_up2}}};
  if (kind == AcrossDownKind::intp) return op;
  const int kernel = kind == AcrossDownKind::intp_k1 ? 1 : 3;
  op.steps.push_back({OpType::relu});
  op.steps.push_back({OpType::conv, kernel, 1});
  op.steps.push_back({OpType::bn});
  return op;
}

OperatorSpec across_skip_op(AcrossSkipKind kind) {
  if (kind == AcrossSkipKind::identity) return {{{OpType::identity}}};
  return conv_block(1, 1);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& part : parts) {
    if (!out.empty()) out += "; ";
    out += part;
  }
  return out;
}

int backbone_top_in_range(const ArchConfig& config) {
  return std::min(config.backbone.top_level(), config.max_level);
}

}  // namespace

bool edge_canonical_less(const Edge& a, const Edge& b) {
  auto key = [](const Edge& e) {
    return std::tuple(e.kind, e.src.pathway, e.src.level, e.dst.pathway,
                      e.dst.level, e.src.role, e.dst.role);
  };
  return key(a) < key(b);
}

const NodeRef* ArchGraph::find(NodeRole role, int pathway, int level) const {
  for (const NodeRef& node : nodes) {
    if (node.role == role && node.pathway == pathway && node.level == level)
      return &node;
  }
  return nullptr;
}

std::vector<const Edge*> ArchGraph::incoming(const NodeRef& node) const {
  std::vector<const Edge*> result;
  for (const Edge& edge : edges) {
    if (edge.dst.same_node(node)) result.push_back(&edge);
  }
  std::sort(result.begin(), result.end(),
            [](const Edge* a, const Edge* b) {
              return edge_canonical_less(*a, *b);
            });
  return result;
}

std::vector<const Edge*> ArchGraph::outgoing(const NodeRef& node) const {
  std::vector<const Edge*> result;
  for (const Edge& edge : edges) {
    if (edge.src.same_node(node)) result.push_back(&edge);
  }
  std::sort(result.begin(), result.end(),
            [](const Edge* a, const Edge* b) {
              return edge_canonical_less(*a, *b);
            });
  return result;
}

std::vector<NodeRef> ArchGraph::topo_order() const {
  using Key = std::tuple<NodeRole, int, int>;
  auto key_of = [](const NodeRef& n) {
    return Key(n.role, n.pathway, n.level);
  };
  std::map<Key, const NodeRef*> by_key;
  std::map<Key, int> indegree;
  for (const NodeRef& node : nodes) {
    by_key[key_of(node)] = &node;
    indegree[key_of(node)] = 0;
  }
  std::map<Key, std::vector<Key>> adj;
  for (const Edge& edge : edges) {
    adj[key_of(edge.src)].push_back(key_of(edge.dst));
    ++indegree[key_of(edge.dst)];
  }
  // Min-heap keyed by (role, pathway, level) makes the order deterministic.
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> ready;
  for (const auto& [key, deg] : indegree) {
    if (deg == 0) ready.push(key);
  }
  std::vector<NodeRef> order;
  while (!ready.empty()) {
    Key key = ready.top();
    ready.pop();
    order.push_back(*by_key.at(key));
    for (const Key& next : adj[key]) {
      if (--indegree[next] == 0) ready.push(next);
    }
  }
  if (order.size() != nodes.size())
    throw std::runtime_error("graph has a cycle");
  return order;
}

int lowest_level(const ArchConfig& config, int pathway) {
  if (!config.contraction || pathway <= 1) return config.min_level;
  const int stacked_index = pathway - 1;  // 1 for the first stacked pathway
  const int cut = std::max(0, 4 - stacked_index);
  return std::min(config.min_level + cut, config.max_level);
}

bool node_alive(const ArchConfig& config, int pathway, int level) {
  if (pathway < 1 || pathway > config.num_pathways) return false;
  if (level < config.min_level || level > config.max_level) return false;
  return level >= lowest_level(config, pathway);
}

bool entry_node(const ArchConfig& config, int pathway, int level) {
  if (!config.contraction || pathway < 2 || pathway - 1 > 4) return false;
  return level == lowest_level(config, pathway);
}

ArchGraph build_fpg(const ArchConfig& config) {
  if (auto errors = check_config(config); !errors.empty())
    throw std::invalid_argument("invalid config: " + join(errors));

  ArchGraph g;
  g.config = config;
  const int p = config.num_pathways;
  const int lo = config.min_level;
  const int hi = config.max_level;
  const int w = config.width;
  const int bb_top = backbone_top_in_range(config);

  auto backbone_node = [&](int level) {
    return NodeRef{NodeRole::backbone, 0, level,
                   config.backbone.channels_at(level)};
  };
  auto pyramid_node = [&](int pathway, int level) {
    return NodeRef{NodeRole::pyramid, pathway, level, w};
  };
  auto output_node = [&](int level) {
    return NodeRef{NodeRole::output, p, level, w};
  };
  auto alive = [&](int pathway, int level) {
    return node_alive(config, pathway, level);
  };
  auto entry = [&](int pathway, int level) {
    return entry_node(config, pathway, level);
  };
  // Deepest pathway that owns a node at this level; output convs read it.
  auto deepest_alive = [&](int level) {
    for (int j = p; j >= 1; --j) {
      if (alive(j, level)) return j;
    }
    return 1;
  };
  // Nearest shallower pathway with a node at this level; AcrossSame reads
  // it. Falls back to the lateral pathway for contracted entry columns.
  auto prev_alive = [&](int pathway, int level) {
    for (int j = pathway - 1; j >= 1; --j) {
      if (alive(j, level)) return j;
    }
    return 1;
  };

  for (int i = lo; i <= bb_top; ++i) {
    if (config.backbone.channels_at(i) > 0) g.nodes.push_back(backbone_node(i));
  }
  for (int j = 1; j <= p; ++j) {
    for (int i = lo; i <= hi; ++i) {
      if (alive(j, i)) g.nodes.push_back(pyramid_node(j, i));
    }
  }
  for (int i = lo; i <= hi; ++i) g.nodes.push_back(output_node(i));

  // Lateral reductions from the backbone into pathway 1.
  for (int i = lo; i <= bb_top; ++i) {
    if (config.backbone.channels_at(i) == 0) continue;
    g.edges.push_back({backbone_node(i), pyramid_node(1, i),
                       EdgeKind::backbone_lateral, plain_conv(1, 1)});
  }
  // Pathway 1 extends past the backbone by strided 3x3 convs. These are
  // structural (the levels would not exist otherwise), so the same_up flag
  // does not gate them.
  for (int i = bb_top + 1; i <= hi; ++i) {
    g.edges.push_back({pyramid_node(1, i - 1), pyramid_node(1, i),
                       EdgeKind::same_up, plain_conv(3, 2)});
  }
  if (config.flags.same_up) {
    for (int j = 2; j <= p; ++j) {
      for (int i = lo + 1; i <= hi; ++i) {
        if (alive(j, i) && alive(j, i - 1))
          g.edges.push_back({pyramid_node(j, i - 1), pyramid_node(j, i),
                             EdgeKind::same_up,
                             same_up_op(config.same_up_kind)});
      }
    }
  }
  // AcrossSame is structural: every stacked node reads its level peer from
  // the nearest shallower pathway (the lateral pathway for entry nodes).
  for (int j = 2; j <= p; ++j) {
    for (int i = lo; i <= hi; ++i) {
      if (!alive(j, i)) continue;
      g.edges.push_back({pyramid_node(prev_alive(j, i), i), pyramid_node(j, i),
                         EdgeKind::across_same, conv_block(1, 1)});
    }
  }
  if (config.flags.across_up) {
    for (int j = 2; j <= p; ++j) {
      for (int i = lo + 1; i <= hi; ++i) {
        if (alive(j, i) && !entry(j, i) && alive(j - 1, i - 1))
          g.edges.push_back({pyramid_node(j - 1, i - 1), pyramid_node(j, i),
                             EdgeKind::across_up, conv_block(3, 2)});
      }
    }
  }
  if (config.flags.across_down) {
    for (int j = 2; j <= p; ++j) {
      for (int i = lo; i < hi; ++i) {
        if (alive(j, i) && !entry(j, i) && alive(j - 1, i + 1))
          g.edges.push_back({pyramid_node(j - 1, i + 1), pyramid_node(j, i),
                             EdgeKind::across_down,
                             across_down_op(config.across_down_kind)});
      }
    }
  }
  if (config.flags.across_skip) {
    for (int j = 2; j <= p; ++j) {
      for (int i = lo; i <= hi; ++i) {
        if (alive(j, i) && !entry(j, i))
          g.edges.push_back({pyramid_node(1, i), pyramid_node(j, i),
                             EdgeKind::across_skip,
                             across_skip_op(config.across_skip_kind)});
      }
    }
  }
  for (int i = lo; i <= hi; ++i) {
    g.edges.push_back({pyramid_node(deepest_alive(i), i), output_node(i),
                       EdgeKind::output_conv, plain_conv(3, 1)});
    g.outputs.push_back(output_node(i));
  }

  std::sort(g.edges.begin(), g.edges.end(), edge_canonical_less);
  return g;
}

ArchGraph build_fpn(int width, const BackboneSpec& backbone,
                    DetectorPreset preset) {
  ArchConfig config = default_config(preset);
  config.width = width;
  config.backbone = backbone;
  config.flags = {false, false, false, false};
  if (auto errors = check_config(config); !errors.empty())
    throw std::invalid_argument("invalid config: " + join(errors));

  ArchGraph g;
  g.config = config;
  const int lo = config.min_level;
  const int hi = config.max_level;
  const int bb_top = backbone_top_in_range(config);

  auto backbone_node = [&](int level) {
    return NodeRef{NodeRole::backbone, 0, level, backbone.channels_at(level)};
  };
  auto pyramid_node = [&](int level) {
    return NodeRef{NodeRole::pyramid, 1, level, width};
  };
  auto output_node = [&](int level) {
    return NodeRef{NodeRole::output, 1, level, width};
  };

  for (int i = lo; i <= bb_top; ++i) g.nodes.push_back(backbone_node(i));
  for (int i = lo; i <= hi; ++i) g.nodes.push_back(pyramid_node(i));
  for (int i = lo; i <= hi; ++i) g.nodes.push_back(output_node(i));

  for (int i = lo; i <= bb_top; ++i) {
    g.edges.push_back({backbone_node(i), pyramid_node(i),
                       EdgeKind::backbone_lateral, plain_conv(1, 1)});
  }
  // Top-down merges over the lateral levels; each node below the top sums
  // its lateral with the upsampled node above.
  for (int i = lo; i < bb_top; ++i) {
    g.edges.push_back({pyramid_node(i + 1), pyramid_node(i),
                       EdgeKind::top_down, {{{OpType::nearest_up2}}}});
  }
  if (preset == DetectorPreset::retinanet) {
    // Extra levels: P6 is a strided conv on C5, P7 a strided conv on P6.
    g.edges.push_back({backbone_node(bb_top), pyramid_node(bb_top + 1),
                       EdgeKind::backbone_lateral, plain_conv(3, 2)});
    g.edges.push_back(
        {pyramid_node(bb_top + 1), pyramid_node(bb_top + 2),
         EdgeKind::same_up,
         {{{OpType::relu}, {OpType::conv, 3, 2}}}});
  } else {
    // Extra level: P6 subsamples P5.
    g.edges.push_back({pyramid_node(bb_top), pyramid_node(bb_top + 1),
                       EdgeKind::same_up, {{{OpType::maxpool2}}}});
  }
  for (int i = lo; i <= hi; ++i) {
    OperatorSpec op =
        i <= bb_top ? plain_conv(3, 1) : OperatorSpec{{{OpType::identity}}};
    g.edges.push_back({pyramid_node(i), output_node(i),
                       EdgeKind::output_conv, std::move(op)});
    g.outputs.push_back(output_node(i));
  }

  std::sort(g.edges.begin(), g.edges.end(), edge_canonical_less);
  return g;
}

namespace {

std::string edge_name(const Edge& e) {
  return to_string(e.kind) + " " + node_name(e.src) + " -> " +
         node_name(e.dst);
}

bool has_conv(const OperatorSpec& op) {
  return std::any_of(op.steps.begin(), op.steps.end(),
                     [](const OpStep& s) { return s.type == OpType::conv; });
}

void check_op(const Edge& e, std::vector<std::string>& errors) {
  const auto& steps = e.op.steps;
  if (steps.empty()) {
    errors.push_back(edge_name(e) + ": empty operator");
    return;
  }
  auto is_standalone = [](OpType t) {
    return t == OpType::identity || t == OpType::maxpool2 ||
           t == OpType::avgpool2;
  };
  if (std::any_of(steps.begin(), steps.end(),
                  [&](const OpStep& s) { return is_standalone(s.type); })) {
    if (steps.size() != 1)
      errors.push_back(edge_name(e) +
                       ": identity/pool must be the whole operator");
    return;
  }
  // Remaining vocabulary: [nearest_up2?] [relu?] [conv?] [bn?] in exactly
  // that order, each at most once; relu/bn only make sense around a conv.
  auto rank = [](OpType t) {
    switch (t) {
      case OpType::nearest_up2: return 0;
      case OpType::relu: return 1;
      case OpType::conv: return 2;
      case OpType::bn: return 3;
      default: return -1;
    }
  };
  int last_rank = -1;
  bool conv_seen = false;
  for (const OpStep& s : steps) {
    if (rank(s.type) <= last_rank) {
      errors.push_back(edge_name(e) + ": operator steps out of order (" +
                       to_string(s.type) + ")");
      return;
    }
    last_rank = rank(s.type);
    if (s.type == OpType::conv) {
      conv_seen = true;
      if (s.kernel != 1 && s.kernel != 3)
        errors.push_back(edge_name(e) + ": conv kernel must be 1 or 3");
      if (s.stride != 1 && s.stride != 2)
        errors.push_back(edge_name(e) + ": conv stride must be 1 or 2");
    }
  }
  if (!conv_seen && steps.size() == 1 &&
      steps[0].type == OpType::nearest_up2) {
    return;  // bare interpolation
  }
  if (!conv_seen)
    errors.push_back(edge_name(e) + ": relu/bn require a conv step");
}

}  // namespace

std::vector<std::string> validate(const ArchGraph& g) {
  std::vector<std::string> errors = check_config(g.config);

  std::set<std::tuple<NodeRole, int, int>> seen;
  for (const NodeRef& node : g.nodes) {
    if (!seen.insert({node.role, node.pathway, node.level}).second)
      errors.push_back("duplicate node " + node_name(node));
    if (node.channels <= 0)
      errors.push_back(node_name(node) + ": non-positive channels");
    if (node.role == NodeRole::backbone && node.pathway != 0)
      errors.push_back(node_name(node) + ": backbone nodes live on pathway 0");
    if (node.role == NodeRole::pyramid && node.channels != g.config.width)
      errors.push_back(node_name(node) + ": pyramid width mismatch");
  }

  auto node_at = [&](NodeRole role, int pathway, int level) {
    return g.find(role, pathway, level);
  };
  int backbone_top = 0;
  for (const NodeRef& node : g.nodes) {
    if (node.role == NodeRole::backbone)
      backbone_top = std::max(backbone_top, node.level);
  }
  auto deepest_pyramid_at = [&](int level) {
    int deepest = 0;
    for (const NodeRef& node : g.nodes) {
      if (node.role == NodeRole::pyramid && node.level == level)
        deepest = std::max(deepest, node.pathway);
    }
    return deepest;
  };

  for (const Edge& e : g.edges) {
    const NodeRef* src = node_at(e.src.role, e.src.pathway, e.src.level);
    const NodeRef* dst = node_at(e.dst.role, e.dst.pathway, e.dst.level);
    if (!src || e.src.channels != src->channels) {
      errors.push_back(edge_name(e) + ": unknown source node");
      continue;
    }
    if (!dst || e.dst.channels != dst->channels) {
      errors.push_back(edge_name(e) + ": unknown destination node");
      continue;
    }
    if (!has_conv(e.op) && e.src.channels != e.dst.channels)
      errors.push_back(edge_name(e) +
                       ": conv-free operator cannot change channels");
    check_op(e, errors);

    auto coord_error = [&](const char* rule) {
      errors.push_back(edge_name(e) + ": violates " + rule);
    };
    switch (e.kind) {
      case EdgeKind::backbone_lateral: {
        bool level_ok = e.dst.level == e.src.level ||
                        (e.dst.level == e.src.level + 1 &&
                         e.src.level == backbone_top);
        if (e.src.role != NodeRole::backbone ||
            e.dst.role != NodeRole::pyramid || e.dst.pathway != 1 || !level_ok)
          coord_error("backbone_lateral rule (backbone -> pathway 1, same "
                      "level, or one above the top backbone level)");
        break;
      }
      case EdgeKind::same_up:
        if (e.src.role != NodeRole::pyramid ||
            e.dst.role != NodeRole::pyramid ||
            e.src.pathway != e.dst.pathway ||
            e.dst.level != e.src.level + 1)
          coord_error("same_up rule (same pathway, one level up)");
        break;
      case EdgeKind::across_same: {
        bool gap_free = true;
        for (int j = e.src.pathway + 1; j < e.dst.pathway; ++j) {
          if (node_at(NodeRole::pyramid, j, e.src.level)) gap_free = false;
        }
        if (e.src.role != NodeRole::pyramid ||
            e.dst.role != NodeRole::pyramid ||
            e.src.level != e.dst.level || e.src.pathway >= e.dst.pathway ||
            !gap_free)
          coord_error("across_same rule (same level, nearest shallower "
                      "pathway)");
        break;
      }
      case EdgeKind::across_up:
        if (e.src.role != NodeRole::pyramid ||
            e.dst.role != NodeRole::pyramid ||
            e.dst.pathway != e.src.pathway + 1 ||
            e.dst.level != e.src.level + 1)
          coord_error("across_up rule (next pathway, one level up)");
        break;
      case EdgeKind::across_down:
        if (e.src.role != NodeRole::pyramid ||
            e.dst.role != NodeRole::pyramid ||
            e.dst.pathway != e.src.pathway + 1 ||
            e.dst.level != e.src.level - 1)
          coord_error("across_down rule (next pathway, one level down)");
        break;
      case EdgeKind::across_skip:
        if (e.src.role != NodeRole::pyramid ||
            e.dst.role != NodeRole::pyramid || e.src.pathway != 1 ||
            e.dst.pathway < 2 || e.src.level != e.dst.level)
          coord_error("across_skip rule (pathway 1 -> deeper pathway, same "
                      "level)");
        break;
      case EdgeKind::top_down:
        if (e.src.role != NodeRole::pyramid ||
            e.dst.role != NodeRole::pyramid ||
            e.src.pathway != e.dst.pathway ||
            e.dst.level != e.src.level - 1)
          coord_error("top_down rule (same pathway, one level down)");
        break;
      case EdgeKind::output_conv:
        if (e.src.role != NodeRole::pyramid ||
            e.dst.role != NodeRole::output || e.src.level != e.dst.level ||
            e.src.pathway != deepest_pyramid_at(e.src.level))
          coord_error("output_conv rule (deepest pathway at the level)");
        break;
    }
  }

  // Fusion arity.
  for (const NodeRef& node : g.nodes) {
    std::size_t indeg = 0;
    for (const Edge& e : g.edges) {
      if (e.dst.same_node(node)) ++indeg;
    }
    if (node.role == NodeRole::backbone && indeg != 0)
      errors.push_back(node_name(node) + ": backbone nodes take no inputs");
    if (node.role == NodeRole::pyramid && indeg == 0)
      errors.push_back(node_name(node) + ": pyramid node has no inputs");
    if (node.role == NodeRole::output && indeg != 1)
      errors.push_back(node_name(node) + ": output nodes take exactly one "
                                         "input");
  }

  // Outputs listing must mirror the output-role nodes, one per level.
  std::vector<NodeRef> expect;
  for (const NodeRef& node : g.nodes) {
    if (node.role == NodeRole::output) expect.push_back(node);
  }
  std::sort(expect.begin(), expect.end(),
            [](const NodeRef& a, const NodeRef& b) {
              return a.level < b.level;
            });
  if (g.outputs != expect)
    errors.push_back("outputs list does not match output nodes in level "
                     "order");

  try {
    (void)g.topo_order();
  } catch (const std::exception& ex) {
    errors.push_back(ex.what());
  }
  return errors;
}

std::string to_string(NodeRole role) {
  switch (role) {
    case NodeRole::backbone: return "backbone";
    case NodeRole::pyramid: return "pyramid";
    case NodeRole::output: return "output";
  }
  return "?";
}

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::backbone_lateral: return "backbone_lateral";
    case EdgeKind::same_up: return "same_up";
    case EdgeKind::across_same: return "across_same";
    case EdgeKind::across_up: return "across_up";
    case EdgeKind::across_down: return "across_down";
    case EdgeKind::across_skip: return "across_skip";
    case EdgeKind::top_down: return "top_down";
    case EdgeKind::output_conv: return "output_conv";
  }
  return "?";
}

std::string to_string(OpType type) {
  switch (type) {
    case OpType::identity: return "identity";
    case OpType::relu: return "relu";
    case OpType::conv: return "conv";
    case OpType::bn: return "bn";
    case OpType::nearest_up2: return "nearest_up2";
    case OpType::maxpool2: return "maxpool2";
    case OpType::avgpool2: return "avgpool2";
  }
  return "?";
}

NodeRole node_role_from(std::string_view s) {
  if (s == "backbone") return NodeRole::backbone;
  if (s == "pyramid") return NodeRole::pyramid;
  if (s == "output") return NodeRole::output;
  throw std::invalid_argument("unknown node role: '" + std::string(s) + "'");
}

EdgeKind edge_kind_from(std::string_view s) {
  if (s == "backbone_lateral") return EdgeKind::backbone_lateral;
  if (s == "same_up") return EdgeKind::same_up;
  if (s == "across_same") return EdgeKind::across_same;
  if (s == "across_up") return EdgeKind::across_up;
  if (s == "across_down") return EdgeKind::across_down;
  if (s == "across_skip") return EdgeKind::across_skip;
  if (s == "top_down") return EdgeKind::top_down;
  if (s == "output_conv") return EdgeKind::output_conv;
  throw std::invalid_argument("unknown edge kind: '" + std::string(s) + "'");
}

OpType op_type_from(std::string_view s) {
  if (s == "identity") return OpType::identity;
  if (s == "relu") return OpType::relu;
  if (s == "conv") return OpType::conv;
  if (s == "bn") return OpType::bn;
  if (s == "nearest_up2") return OpType::nearest_up2;
  if (s == "maxpool2") return OpType::maxpool2;
  if (s == "avgpool2") return OpType::avgpool2;
  throw std::invalid_argument("unknown op type: '" + std::string(s) + "'");
}

std::string node_name(const NodeRef& node) {
  std::ostringstream out;
  switch (node.role) {
    case NodeRole::backbone: out << "C" << node.level; break;
    case NodeRole::pyramid: out << "P" << node.level << "^" << node.pathway;
      break;
    case NodeRole::output: out << "P" << node.level << "^out"; break;
  }
  return out.str();
}

}  // namespace fpg
