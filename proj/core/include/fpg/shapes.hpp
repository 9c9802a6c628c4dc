// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "fpg/graph.hpp"

namespace fpg {

/// Spatial shape of one feature map (batch is an execution-time concept).
struct Shape {
  int c = 0;
  int h = 0;
  int w = 0;
  bool operator==(const Shape&) const = default;
};

/// Per-node shapes for a given input resolution.
struct ShapeTable {
  int input_h = 0;
  int input_w = 0;
  std::map<std::tuple<NodeRole, int, int>, Shape> by_node;

  const Shape& at(const NodeRef& node) const;
  bool contains(const NodeRef& node) const;
};

/// Input validation: H and W must be positive multiples of 2^max_level.
/// Each violated dimension yields its own diagnostic.
std::vector<std::string> check_input(const ArchConfig& config, int h, int w);

/// Shape of `op` applied to `in` (conv output channels supplied by caller
/// via `conv_out_channels`; pass 0 for "keep input channels").
Shape op_output_shape(const OperatorSpec& op, Shape in, int conv_out_channels);

/// Infers every node's shape and checks edge/op consistency: every edge's
/// operator must map its source shape onto its destination shape, so all
/// inputs fused at a node agree. Throws std::invalid_argument for a bad
/// input size and std::runtime_error (naming the node) for an inconsistent
/// graph.
ShapeTable infer_shapes(const ArchGraph& graph, int h, int w);

}  // namespace fpg
