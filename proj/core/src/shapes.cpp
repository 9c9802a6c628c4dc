// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/shapes.hpp"

#include <stdexcept>

namespace fpg {

const Shape& ShapeTable::at(const NodeRef& node) const {
  auto it = by_node.find({node.role, node.pathway, node.level});
  if (it == by_node.end())
    throw std::out_of_range("no shape for node " + node_name(node));
  return it->second;
}

bool ShapeTable::contains(const NodeRef& node) const {
  return by_node.count({node.role, node.pathway, node.level}) != 0;
}

std::vector<std::string> check_input(const ArchConfig& config, int h, int w) {
  std::vector<std::string> errors;
  const int divisor = 1 << config.max_level;
  auto check_dim = [&](const char* name, int value) {
    if (value <= 0) {
      errors.push_back(std::string("input ") + name + " must be positive, "
                       "got " + std::to_string(value));
    } else if (value % divisor != 0) {
      errors.push_back(std::string("input ") + name + " (" +
                       std::to_string(value) + ") must be divisible by 2^" +
                       std::to_string(config.max_level) + " = " +
                       std::to_string(divisor));
    }
  };
  check_dim("height", h);
  check_dim("width", w);
  return errors;
}

Shape op_output_shape(const OperatorSpec& op, Shape in,
                      int conv_out_channels) {
  Shape s = in;
  for (const OpStep& step : op.steps) {
    switch (step.type) {
      case OpType::identity:
      case OpType::relu:
      case OpType::bn:
        break;
      case OpType::conv:
        if (conv_out_channels > 0) s.c = conv_out_channels;
        if (step.stride == 2) {
          s.h /= 2;
          s.w /= 2;
        }
        break;
      case OpType::nearest_up2:
        s.h *= 2;
        s.w *= 2;
        break;
      case OpType::maxpool2:
      case OpType::avgpool2:
        s.h /= 2;
        s.w /= 2;
        break;
    }
  }
  return s;
}

ShapeTable infer_shapes(const ArchGraph& graph, int h, int w) {
  if (auto errors = check_input(graph.config, h, w); !errors.empty()) {
    std::string message;
    for (const std::string& e : errors) {
      if (!message.empty()) message += "; ";
      message += e;
    }
    throw std::invalid_argument(message);
  }

  ShapeTable table;
  table.input_h = h;
  table.input_w = w;
  for (const NodeRef& node : graph.nodes) {
    table.by_node[{node.role, node.pathway, node.level}] =
        Shape{node.channels, h >> node.level, w >> node.level};
  }

  // Every edge operator must map its source shape to its destination's
  // shape; with all inputs checked against the same destination shape,
  // fusion sums are automatically consistent.
  for (const Edge& edge : graph.edges) {
    const Shape& src = table.at(edge.src);
    const Shape& dst = table.at(edge.dst);
    Shape mapped = op_output_shape(edge.op, src, edge.dst.channels);
    if (!(mapped == dst)) {
      throw std::runtime_error(
          "shape mismatch at node " + node_name(edge.dst) + ": edge " +
          to_string(edge.kind) + " from " + node_name(edge.src) +
          " produces " + std::to_string(mapped.c) + "x" +
          std::to_string(mapped.h) + "x" + std::to_string(mapped.w) +
          " but the node is " + std::to_string(dst.c) + "x" +
          std::to_string(dst.h) + "x" + std::to_string(dst.w));
    }
  }
  return table;
}

}  // namespace fpg
