// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "fpg/config.hpp"
#include "fpg/graph.hpp"
#include "support/arch_oracle.hpp"

using namespace fpg;

namespace {

std::map<EdgeKind, int> kind_counts(const ArchGraph& graph) {
  std::map<EdgeKind, int> counts;
  for (const Edge& edge : graph.edges) ++counts[edge.kind];
  return counts;
}

int pyramid_nodes(const ArchGraph& graph) {
  int n = 0;
  for (const NodeRef& node : graph.nodes)
    if (node.role == NodeRole::pyramid) ++n;
  return n;
}

bool contains(const std::vector<std::string>& errors,
              const std::string& needle) {
  for (const std::string& e : errors)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("single pathway over resnet50 has the ten expected edges") {
  ArchGraph graph = build_fpg(default_config(DetectorPreset::retinanet));
  CHECK(graph.nodes.size() == 13);  // 3 backbone + 5 pyramid + 5 output
  CHECK(graph.edges.size() == 10);
  auto counts = kind_counts(graph);
  CHECK(counts[EdgeKind::backbone_lateral] == 3);
  CHECK(counts[EdgeKind::same_up] == 2);  // P6, P7 extrapolation
  CHECK(counts[EdgeKind::output_conv] == 5);
  CHECK(graph.outputs.size() == 5);
  CHECK(validate(graph).empty());
}

TEST_CASE("two pathways, all connections on: 32 edges") {
  ArchConfig config = default_config(DetectorPreset::retinanet);
  config.num_pathways = 2;
  ArchGraph graph = build_fpg(config);
  CHECK(graph.edges.size() == 32);
  auto counts = kind_counts(graph);
  CHECK(counts[EdgeKind::backbone_lateral] == 3);
  CHECK(counts[EdgeKind::same_up] == 2 + 4);
  CHECK(counts[EdgeKind::across_same] == 5);
  CHECK(counts[EdgeKind::across_up] == 4);
  CHECK(counts[EdgeKind::across_down] == 4);
  CHECK(counts[EdgeKind::across_skip] == 5);
  CHECK(counts[EdgeKind::output_conv] == 5);
}

TEST_CASE("contracted 9-pathway grid: node and edge census") {
  ArchGraph graph = build_fpg(fpg_preset(9, 256));
  CHECK(graph.nodes.size() == 52);
  CHECK(pyramid_nodes(graph) == 44);
  CHECK(graph.edges.size() == 140);
  auto counts = kind_counts(graph);
  CHECK(counts[EdgeKind::backbone_lateral] == 3);
  CHECK(counts[EdgeKind::same_up] == 32);
  CHECK(counts[EdgeKind::across_same] == 39);
  CHECK(counts[EdgeKind::across_up] == 0);  // disabled by the preset
  CHECK(counts[EdgeKind::across_down] == 26);
  CHECK(counts[EdgeKind::across_skip] == 35);
  CHECK(counts[EdgeKind::output_conv] == 5);
  CHECK(validate(graph).empty());
}

TEST_CASE("full 9-pathway grid: edge census") {
  ArchGraph graph = build_fpg(ablation_preset("full"));
  CHECK(graph.edges.size() == 208);
  auto counts = kind_counts(graph);
  CHECK(counts[EdgeKind::backbone_lateral] == 3);
  CHECK(counts[EdgeKind::same_up] == 38);
  CHECK(counts[EdgeKind::across_same] == 45);
  CHECK(counts[EdgeKind::across_up] == 36);
  CHECK(counts[EdgeKind::across_down] == 36);
  CHECK(counts[EdgeKind::across_skip] == 45);
  CHECK(counts[EdgeKind::output_conv] == 5);
  CHECK(validate(graph).empty());
}

TEST_CASE("builder agrees with the brute-force wiring oracle") {
  const std::pair<int, int> ranges[] = {{3, 5}, {2, 4}, {3, 7}, {2, 6}};
  int cases = 0;
  for (int pathways : {1, 2, 3}) {
    for (bool contraction : {false, true}) {
      for (int mask = 0; mask < 16; ++mask) {
        for (auto [lo, hi] : ranges) {
          ArchConfig config = default_config(DetectorPreset::retinanet);
          config.num_pathways = pathways;
          config.width = 16;
          config.min_level = lo;
          config.max_level = hi;
          config.contraction = contraction;
          config.flags.across_down = mask & 1;
          config.flags.across_up = mask & 2;
          config.flags.same_up = mask & 4;
          config.flags.across_skip = mask & 8;
          ArchGraph graph = build_fpg(config);
          REQUIRE(fpg_test::graph_edges(graph) ==
                  fpg_test::oracle_edges(config));
          REQUIRE(validate(graph).empty());
          ++cases;
        }
      }
    }
  }
  CHECK(cases == 3 * 2 * 16 * 4);

  // Operator-variant sweep on a contracted grid.
  for (SameUpKind su : {SameUpKind::conv3_s2, SameUpKind::maxpool2,
                        SameUpKind::avgpool2}) {
    for (AcrossSkipKind sk : {AcrossSkipKind::conv1, AcrossSkipKind::identity}) {
      for (AcrossDownKind ad : {AcrossDownKind::intp, AcrossDownKind::intp_k1,
                                AcrossDownKind::intp_k3}) {
        ArchConfig config = fpg_preset(4, 8);
        config.same_up_kind = su;
        config.across_skip_kind = sk;
        config.across_down_kind = ad;
        ArchGraph graph = build_fpg(config);
        REQUIRE(fpg_test::graph_edges(graph) ==
                fpg_test::oracle_edges(config));
        REQUIRE(validate(graph).empty());
      }
    }
  }
}

TEST_CASE("disabling one connection family removes exactly that family") {
  ArchConfig base = default_config(DetectorPreset::retinanet);
  base.num_pathways = 4;
  base.width = 16;
  ArchGraph full = build_fpg(base);
  auto full_counts = kind_counts(full);

  auto check_removal = [&](EdgeKind kind, auto flip) {
    ArchConfig config = base;
    flip(config.flags);
    ArchGraph graph = build_fpg(config);
    auto counts = kind_counts(graph);
    for (auto [k, n] : full_counts) {
      if (k != kind) CHECK(counts[k] == n);
    }
    return counts[kind];
  };

  CHECK(check_removal(EdgeKind::across_down,
                      [](ConnectionFlags& f) { f.across_down = false; }) == 0);
  CHECK(check_removal(EdgeKind::across_up,
                      [](ConnectionFlags& f) { f.across_up = false; }) == 0);
  CHECK(check_removal(EdgeKind::across_skip,
                      [](ConnectionFlags& f) { f.across_skip = false; }) == 0);

  // same_up keeps the structural pathway-1 extrapolation above the backbone.
  ArchConfig no_su = base;
  no_su.flags.same_up = false;
  ArchGraph graph = build_fpg(no_su);
  for (const Edge& edge : graph.edges) {
    if (edge.kind == EdgeKind::same_up) CHECK(edge.src.pathway == 1);
  }
  CHECK(kind_counts(graph)[EdgeKind::same_up] == 2);
}

TEST_CASE("contraction trims nodes and gives entry nodes a single input") {
  ArchConfig config = fpg_preset(9, 256);
  CHECK(lowest_level(config, 1) == 3);
  CHECK(lowest_level(config, 2) == 6);
  CHECK(lowest_level(config, 3) == 5);
  CHECK(lowest_level(config, 4) == 4);
  CHECK(lowest_level(config, 5) == 3);
  CHECK(lowest_level(config, 6) == 3);
  CHECK(lowest_level(config, 10) == 3);
  CHECK(entry_node(config, 2, 6));
  CHECK(entry_node(config, 3, 5));
  CHECK(entry_node(config, 4, 4));
  CHECK(entry_node(config, 5, 3));
  CHECK_FALSE(entry_node(config, 6, 3));
  CHECK_FALSE(entry_node(config, 2, 7));

  ArchGraph contracted = build_fpg(config);
  ArchConfig full_config = config;
  full_config.contraction = false;
  ArchGraph full = build_fpg(full_config);

  for (const NodeRef& node : contracted.nodes) {
    CHECK(full.find(node.role, node.pathway, node.level) != nullptr);
    if (node.role == NodeRole::pyramid)
      CHECK(node_alive(config, node.pathway, node.level));
  }
  CHECK(contracted.nodes.size() < full.nodes.size());

  for (int j = 2; j <= 5; ++j) {
    const int level = lowest_level(config, j);
    const NodeRef* entry = contracted.find(NodeRole::pyramid, j, level);
    REQUIRE(entry != nullptr);
    auto in = contracted.incoming(*entry);
    REQUIRE(in.size() == 1);
    CHECK(in[0]->kind == EdgeKind::across_same);
    CHECK(in[0]->src.pathway == 1);
  }
}

TEST_CASE("construction is deterministic and canonically sorted") {
  ArchConfig config = fpg_preset(5, 32);
  ArchGraph a = build_fpg(config);
  ArchGraph b = build_fpg(config);
  CHECK(a == b);
  CHECK(std::is_sorted(a.edges.begin(), a.edges.end(), edge_canonical_less));

  ArchGraph fpn = build_fpn(32, resnet50(), DetectorPreset::rcnn);
  CHECK(std::is_sorted(fpn.edges.begin(), fpn.edges.end(),
                       edge_canonical_less));
}

TEST_CASE("incoming edges arrive in canonical fusion order") {
  ArchGraph graph = build_fpg(ablation_preset("full"));
  for (const NodeRef& node : graph.nodes) {
    auto in = graph.incoming(node);
    for (std::size_t i = 1; i < in.size(); ++i)
      CHECK(edge_canonical_less(*in[i - 1], *in[i]));
  }
}

TEST_CASE("validate flags crafted structural defects") {
  ArchGraph good = build_fpg(fpg_preset(2, 16));

  SUBCASE("duplicate node") {
    ArchGraph g = good;
    g.nodes.push_back(g.nodes.front());
    CHECK(contains(validate(g), "duplicate node"));
  }
  SUBCASE("pyramid width mismatch") {
    ArchGraph g = good;
    for (NodeRef& node : g.nodes) {
      if (node.role == NodeRole::pyramid) {
        node.channels = 99;
        break;
      }
    }
    CHECK(contains(validate(g), "width mismatch"));
  }
  SUBCASE("conv-free operator changing channels") {
    ArchGraph g = good;
    for (Edge& e : g.edges) {
      if (e.kind == EdgeKind::backbone_lateral) {
        e.op.steps = {OpStep{OpType::identity}};
        break;
      }
    }
    CHECK(contains(validate(g), "conv-free operator cannot change channels"));
  }
  SUBCASE("across_same skipping an alive pathway") {
    ArchConfig config = fpg_preset(3, 16);
    config.contraction = false;
    ArchGraph g = build_fpg(config);
    for (Edge& e : g.edges) {
      if (e.kind == EdgeKind::across_same && e.dst.pathway == 3)
        e.src.pathway = 1;  // pathway 2 is alive at this level: not nearest
    }
    CHECK(contains(validate(g), "across_same rule"));
  }
  SUBCASE("cycle") {
    ArchGraph g = good;
    Edge fwd = g.edges.back();
    for (const Edge& e : g.edges) {
      if (e.kind == EdgeKind::across_same) fwd = e;
    }
    Edge back = fwd;
    std::swap(back.src, back.dst);
    back.kind = EdgeKind::across_same;
    g.edges.push_back(back);
    CHECK(contains(validate(g), "cycle"));
  }
  SUBCASE("operator steps out of order") {
    ArchGraph g = good;
    for (Edge& e : g.edges) {
      if (e.kind == EdgeKind::across_same) {
        std::reverse(e.op.steps.begin(), e.op.steps.end());
        break;
      }
    }
    CHECK(contains(validate(g), "out of order"));
  }
  SUBCASE("relu without conv") {
    ArchGraph g = good;
    for (Edge& e : g.edges) {
      if (e.kind == EdgeKind::backbone_lateral) {
        e.op.steps = {OpStep{OpType::relu}};
        break;
      }
    }
    auto errors = validate(g);
    CHECK(contains(errors, "require a conv step"));
  }
  SUBCASE("output node with two inputs") {
    ArchGraph g = good;
    Edge extra = g.edges.back();
    for (const Edge& e : g.edges) {
      if (e.kind == EdgeKind::output_conv) extra = e;
    }
    g.edges.push_back(extra);
    CHECK(contains(validate(g), "exactly one"));
  }
}

TEST_CASE("fpn graphs: structure per preset") {
  SUBCASE("retinanet") {
    ArchGraph graph = build_fpn(256, resnet50(), DetectorPreset::retinanet);
    CHECK(graph.edges.size() == 12);
    auto counts = kind_counts(graph);
    CHECK(counts[EdgeKind::backbone_lateral] == 4);  // C3..C5 + stride-2 P6
    CHECK(counts[EdgeKind::same_up] == 1);           // P7
    CHECK(counts[EdgeKind::top_down] == 2);
    CHECK(counts[EdgeKind::output_conv] == 5);
    CHECK(counts[EdgeKind::across_same] == 0);
    CHECK(counts[EdgeKind::across_up] == 0);
    CHECK(counts[EdgeKind::across_down] == 0);
    CHECK(counts[EdgeKind::across_skip] == 0);
    CHECK(validate(graph).empty());
    CHECK(graph.config.min_level == 3);
    CHECK(graph.config.max_level == 7);
  }
  SUBCASE("rcnn") {
    ArchGraph graph = build_fpn(256, resnet50(), DetectorPreset::rcnn);
    CHECK(graph.edges.size() == 13);
    auto counts = kind_counts(graph);
    CHECK(counts[EdgeKind::backbone_lateral] == 4);  // C2..C5
    CHECK(counts[EdgeKind::same_up] == 1);           // P6 maxpool
    CHECK(counts[EdgeKind::top_down] == 3);
    CHECK(counts[EdgeKind::output_conv] == 5);
    CHECK(validate(graph).empty());
    CHECK(graph.config.min_level == 2);
    CHECK(graph.config.max_level == 6);
  }
}

TEST_CASE("ablation presets") {
  ArchConfig full = ablation_preset("full");
  CHECK(full.num_pathways == 10);
  CHECK(full.width == 256);
  CHECK_FALSE(full.contraction);
  CHECK(full.flags.across_down);
  CHECK(full.flags.across_up);
  CHECK(full.flags.same_up);
  CHECK(full.flags.across_skip);

  CHECK_FALSE(ablation_preset("no_ad").flags.across_down);
  CHECK_FALSE(ablation_preset("no_au").flags.across_up);
  CHECK_FALSE(ablation_preset("no_su").flags.same_up);
  CHECK_FALSE(ablation_preset("no_as").flags.across_skip);

  ArchConfig contracted = ablation_preset("contracted");
  CHECK(contracted.contraction);
  CHECK_FALSE(contracted.flags.across_up);
  CHECK(contracted == fpg_preset(9, 256));

  CHECK_THROWS_AS(ablation_preset("bogus"), std::invalid_argument);
}

TEST_CASE("build_fpg rejects bad configs") {
  ArchConfig config = default_config(DetectorPreset::retinanet);
  config.num_pathways = 0;
  CHECK_THROWS_AS(build_fpg(config), std::invalid_argument);

  config = default_config(DetectorPreset::retinanet);
  config.min_level = 6;  // above the resnet50 top level (5)
  CHECK_THROWS_AS(build_fpg(config), std::invalid_argument);

  config = default_config(DetectorPreset::retinanet);
  config.min_level = 5;
  config.max_level = 4;
  CHECK_THROWS_AS(build_fpg(config), std::invalid_argument);

  config = default_config(DetectorPreset::retinanet);
  config.width = 0;
  CHECK_THROWS_AS(build_fpg(config), std::invalid_argument);
}
