// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "fpg/config.hpp"

namespace fpg {

enum class NodeRole { backbone, pyramid, output };

/// Connection families. The enum order is the canonical fusion order:
/// incoming edges of a node are summed sorted by (kind, src pathway,
/// src level).
enum class EdgeKind {
  backbone_lateral,
  same_up,
  across_same,
  across_up,
  across_down,
  across_skip,
  top_down,  // FPN-style within-pathway merge; never produced by build_fpg
  output_conv,
};

/// A node is identified by (role, pathway, level). Backbone nodes live on
/// pathway 0, pyramid nodes on pathways 1..p, output nodes mirror the
/// deepest pathway.
struct NodeRef {
  NodeRole role = NodeRole::pyramid;
  int pathway = 1;
  int level = 3;
  int channels = 0;

  bool same_node(const NodeRef& o) const {
    return role == o.role && pathway == o.pathway && level == o.level;
  }
  bool operator==(const NodeRef&) const = default;
};

/// Primitive steps an edge operator is composed of, applied left to right.
enum class OpType { identity, relu, conv, bn, nearest_up2, maxpool2, avgpool2 };

struct OpStep {
  OpType type = OpType::identity;
  int kernel = 0;  // conv only
  int stride = 1;  // conv only
  bool operator==(const OpStep&) const = default;
};

/// Edge operator: a short pipeline such as [relu, conv3x3/s2, bn].
/// At most one step is a conv; its channel counts come from the edge
/// endpoints (src channels -> dst channels).
struct OperatorSpec {
  std::vector<OpStep> steps;
  bool operator==(const OperatorSpec&) const = default;
};

struct Edge {
  NodeRef src;
  NodeRef dst;
  EdgeKind kind;
  OperatorSpec op;
  bool operator==(const Edge&) const = default;
};

/// Total order used for edge storage and for fusion at a node:
/// (kind, src pathway, src level, dst pathway, dst level, roles).
bool edge_canonical_less(const Edge& a, const Edge& b);

/// A typed DAG over the (pathway, level) grid, plus per-level output heads.
struct ArchGraph {
  ArchConfig config;
  std::vector<NodeRef> nodes;
  std::vector<Edge> edges;
  std::vector<NodeRef> outputs;  // one per level, ascending

  const NodeRef* find(NodeRole role, int pathway, int level) const;
  /// Incoming edges of `node` in canonical fusion order, regardless of the
  /// storage order of `edges`.
  std::vector<const Edge*> incoming(const NodeRef& node) const;
  std::vector<const Edge*> outgoing(const NodeRef& node) const;
  /// Deterministic topological order (Kahn's algorithm; ties broken by
  /// (role, pathway, level)). Throws std::runtime_error on a cycle.
  std::vector<NodeRef> topo_order() const;

  bool operator==(const ArchGraph&) const = default;
};

/// Grid occupancy under contraction: pathway 1 spans all levels; stacked
/// pathway j (j >= 2) starts at lowest_level(config, j).
bool node_alive(const ArchConfig& config, int pathway, int level);
int lowest_level(const ArchConfig& config, int pathway);
/// Entry nodes are the lowest nodes of the first four stacked pathways of a
/// contracted grid; they receive exactly one (AcrossSame) input.
bool entry_node(const ArchConfig& config, int pathway, int level);

/// Builds the feature pyramid grid for `config`.
/// Throws std::invalid_argument when check_config(config) is non-empty.
ArchGraph build_fpg(const ArchConfig& config);

/// Builds a classic top-down FPN over the same node/edge vocabulary:
/// a single pathway with lateral 1x1 reductions, top-down nearest-neighbour
/// merges, 3x3 output convs, and preset-specific extra levels.
ArchGraph build_fpn(int width, const BackboneSpec& backbone,
                    DetectorPreset preset);

/// Structural diagnostics (coordinate rules per kind, acyclicity, channel
/// consistency, operator composition, fusion arity); empty means valid.
std::vector<std::string> validate(const ArchGraph& graph);

std::string to_string(NodeRole role);
std::string to_string(EdgeKind kind);
std::string to_string(OpType type);
NodeRole node_role_from(std::string_view s);
EdgeKind edge_kind_from(std::string_view s);
OpType op_type_from(std::string_view s);

/// Short display name: "C3" / "P3^2" / "P3^out".
std::string node_name(const NodeRef& node);

}  // namespace fpg
