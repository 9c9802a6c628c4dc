// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/shapes.hpp"

#include <stdexcept>
#include <string>

#include "doctest.h"
#include "fpg/config.hpp"
#include "fpg/graph.hpp"

using namespace fpg;

TEST_CASE("retinanet outputs at 640x640 span strides 8..128") {
  ArchConfig config = fpg_preset(9, 256);
  ArchGraph graph = build_fpg(config);
  ShapeTable shapes = infer_shapes(graph, 640, 640);
  const int expected[] = {80, 40, 20, 10, 5};
  for (int level = 3; level <= 7; ++level) {
    Shape s = shapes.at(NodeRef{NodeRole::output, config.num_pathways, level});
    CHECK(s.c == 256);
    CHECK(s.h == expected[level - 3]);
    CHECK(s.w == expected[level - 3]);
  }
}

TEST_CASE("rcnn outputs at 256x256 span strides 4..64") {
  ArchConfig config = fpg_preset(1, 8, DetectorPreset::rcnn);
  ArchGraph graph = build_fpg(config);
  ShapeTable shapes = infer_shapes(graph, 256, 256);
  const int expected[] = {64, 32, 16, 8, 4};
  for (int level = 2; level <= 6; ++level) {
    Shape s = shapes.at(NodeRef{NodeRole::output, config.num_pathways, level});
    CHECK(s.c == 8);
    CHECK(s.h == expected[level - 2]);
    CHECK(s.w == expected[level - 2]);
  }
}

TEST_CASE("every node shape is (channels, H >> level, W >> level)") {
  ArchConfig config = fpg_preset(3, 16);
  config.contraction = false;
  ArchGraph graph = build_fpg(config);
  ShapeTable shapes = infer_shapes(graph, 512, 256);
  for (const NodeRef& node : graph.nodes) {
    Shape s = shapes.at(node);
    CHECK(s.c == node.channels);
    CHECK(s.h == 512 >> node.level);
    CHECK(s.w == 256 >> node.level);
  }
}

TEST_CASE("check_input reports one diagnostic per bad dimension") {
  ArchConfig config = fpg_preset(1, 8);  // max_level 7 -> multiples of 128

  CHECK(check_input(config, 256, 384).empty());

  auto errors = check_input(config, 200, 256);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("height") != std::string::npos);
  CHECK(errors[0].find("200") != std::string::npos);

  errors = check_input(config, 256, 200);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("width") != std::string::npos);

  errors = check_input(config, 200, 200);
  CHECK(errors.size() == 2);

  errors = check_input(config, 0, 128);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("positive") != std::string::npos);
  CHECK_FALSE(check_input(config, 128, -128).empty());
}

TEST_CASE("infer_shapes rejects invalid input sizes") {
  ArchGraph graph = build_fpg(fpg_preset(1, 8));
  CHECK_THROWS_AS(infer_shapes(graph, 100, 128), std::invalid_argument);
  CHECK_THROWS_AS(infer_shapes(graph, 128, 0), std::invalid_argument);
}

TEST_CASE("shape inference names the node on an inconsistent edge") {
  // Un-striding a same-up conv makes the edge produce its source resolution
  // one level up; the mismatch must be reported against the target node.
  ArchConfig config = fpg_preset(1, 8);
  ArchGraph graph = build_fpg(config);
  std::string broken_node;
  for (Edge& edge : graph.edges) {
    if (edge.kind != EdgeKind::same_up) continue;
    for (OpStep& step : edge.op.steps) {
      if (step.type == OpType::conv) step.stride = 1;
    }
    broken_node = node_name(edge.dst);
    break;
  }
  REQUIRE_FALSE(broken_node.empty());
  try {
    infer_shapes(graph, 256, 256);
    FAIL("expected a shape inconsistency error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(broken_node) != std::string::npos);
  }
}

TEST_CASE("op_output_shape follows each step") {
  Shape s{8, 32, 32};
  OperatorSpec block{{OpStep{OpType::relu}, OpStep{OpType::conv, 3, 2},
                      OpStep{OpType::bn}}};
  Shape out = op_output_shape(block, s, 16);
  CHECK(out.c == 16);
  CHECK(out.h == 16);
  CHECK(out.w == 16);

  OperatorSpec up{{OpStep{OpType::nearest_up2}}};
  out = op_output_shape(up, s, 0);
  CHECK(out.c == 8);
  CHECK(out.h == 64);

  OperatorSpec pool{{OpStep{OpType::maxpool2}}};
  out = op_output_shape(pool, s, 0);
  CHECK(out.h == 16);
  CHECK(out.c == 8);
}

TEST_CASE("fpn shapes are consistent with the grid rule") {
  ArchGraph graph = build_fpn(16, resnet50(), DetectorPreset::retinanet);
  ShapeTable shapes = infer_shapes(graph, 256, 256);
  for (const NodeRef& node : graph.nodes) {
    Shape s = shapes.at(node);
    CHECK(s.h == 256 >> node.level);
    CHECK(s.c == node.channels);
  }
  Shape p7 = shapes.at(NodeRef{NodeRole::output, 1, 7});
  CHECK(p7.h == 2);
  CHECK(p7.c == 16);
}
