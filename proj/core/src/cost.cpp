// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/cost.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace fpg {

namespace {

std::uint64_t u64(int v) { return static_cast<std::uint64_t>(v); }

/// MACs of one k x k conv producing out_c x out_h x out_w from in_c
/// channels. Bias adds no MACs.
std::uint64_t conv_flops(int kernel, int in_c, int out_c, int out_h,
                         int out_w) {
  return u64(kernel) * u64(kernel) * u64(in_c) * u64(out_c) * u64(out_h) *
         u64(out_w);
}

std::uint64_t conv_params(int kernel, int in_c, int out_c, bool bias) {
  return u64(kernel) * u64(kernel) * u64(in_c) * u64(out_c) +
         (bias ? u64(out_c) : 0);
}

}  // namespace

Cost edge_cost(const Edge& edge, const ShapeTable& shapes,
               const CostOptions& options) {
  Cost cost;
  Shape cur = shapes.at(edge.src);
  for (const OpStep& step : edge.op.steps) {
    Shape next = cur;
    switch (step.type) {
      case OpType::conv: {
        next.c = edge.dst.channels;
        if (step.stride == 2) {
          next.h /= 2;
          next.w /= 2;
        }
        cost.flops += conv_flops(step.kernel, cur.c, next.c, next.h, next.w);
        cost.params += conv_params(step.kernel, cur.c, next.c, /*bias=*/true);
        break;
      }
      case OpType::bn:
        cost.params += 2 * u64(cur.c);  // scale + shift
        if (options.count_elementwise)
          cost.flops += 2 * u64(cur.c) * u64(cur.h) * u64(cur.w);
        break;
      case OpType::relu:
        if (options.count_elementwise)
          cost.flops += u64(cur.c) * u64(cur.h) * u64(cur.w);
        break;
      case OpType::identity:
        break;
      case OpType::nearest_up2:
        next.h *= 2;
        next.w *= 2;
        if (options.count_elementwise)
          cost.flops += u64(next.c) * u64(next.h) * u64(next.w);
        break;
      case OpType::maxpool2:
      case OpType::avgpool2:
        next.h /= 2;
        next.w /= 2;
        if (options.count_elementwise)
          cost.flops += 4 * u64(next.c) * u64(next.h) * u64(next.w);
        break;
    }
    cur = next;
  }
  return cost;
}

Cost CostReport::kind_total(EdgeKind kind) const {
  Cost total;
  for (const auto& [edge, cost] : per_edge) {
    if (edge.kind == kind) total += cost;
  }
  return total;
}

CostReport graph_cost(const ArchGraph& graph, const ShapeTable& shapes,
                      const CostOptions& options) {
  CostReport report;
  for (const Edge& edge : graph.edges) {
    Cost cost = edge_cost(edge, shapes, options);
    report.total += cost;
    report.per_edge.emplace_back(edge, cost);
  }
  if (options.count_elementwise) {
    // Fusing d inputs at a node costs d-1 elementwise adds.
    std::map<std::tuple<NodeRole, int, int>, std::uint64_t> indegree;
    for (const Edge& edge : graph.edges)
      ++indegree[{edge.dst.role, edge.dst.pathway, edge.dst.level}];
    for (const NodeRef& node : graph.nodes) {
      auto it = indegree.find({node.role, node.pathway, node.level});
      if (it == indegree.end() || it->second <= 1) continue;
      const Shape& s = shapes.at(node);
      Cost cost{(it->second - 1) * u64(s.c) * u64(s.h) * u64(s.w), 0};
      report.total += cost;
      report.per_node.emplace_back(node, cost);
    }
  }
  return report;
}

Cost head_cost(const HeadSpec& head, int in_channels,
               const std::vector<Shape>& levels) {
  Cost cost;
  const int tw = head.tower_width;
  const int cls_out = head.anchors * head.classes;
  const int box_out = head.anchors * 4;

  // Shared parameters: two towers plus one prediction conv each.
  std::uint64_t params = 0;
  for (int tower = 0; tower < 2; ++tower) {
    int c = in_channels;
    for (int i = 0; i < head.tower_convs; ++i) {
      params += conv_params(3, c, tw, true);
      c = tw;
    }
  }
  params += conv_params(3, tw, cls_out, true);
  params += conv_params(3, tw, box_out, true);
  cost.params = params;

  // Per-position MACs, identical at every level; only the area varies.
  std::uint64_t per_position = 0;
  for (int tower = 0; tower < 2; ++tower) {
    int c = in_channels;
    for (int i = 0; i < head.tower_convs; ++i) {
      per_position += conv_flops(3, c, tw, 1, 1);
      c = tw;
    }
  }
  per_position += conv_flops(3, tw, cls_out, 1, 1);
  per_position += conv_flops(3, tw, box_out, 1, 1);
  for (const Shape& level : levels)
    cost.flops += per_position * u64(level.h) * u64(level.w);
  return cost;
}

BackboneCost backbone_cost(const BackboneSpec& spec, int h, int w) {
  BackboneCost result;
  if (h <= 0 || w <= 0 || h % 4 != 0 || w % 4 != 0)
    throw std::invalid_argument(
        "backbone input must be positive and divisible by 4");

  // Stem: 7x7/s2 conv (no bias) + bn, then 3x3/s2 max pool.
  {
    Cost stem;
    std::uint64_t area2 = u64(h / 2) * u64(w / 2);
    stem.flops = u64(7) * 7 * 3 * spec.stem_channels * area2;
    stem.params = u64(7) * 7 * 3 * spec.stem_channels +
                  2 * u64(spec.stem_channels);
    result.stages.push_back({"stem", stem});
    result.total += stem;
  }

  int in_channels = spec.stem_channels;
  for (std::size_t idx = 0; idx < spec.stages.size(); ++idx) {
    const BackboneStage& stage = spec.stages[idx];
    if (stage.kind != BlockKind::bottleneck)
      throw std::invalid_argument("unsupported block kind in stage " +
                                  stage.name);
    const int out_c = stage.channels;
    const int mid_c = out_c / 4;
    const std::uint64_t area = u64(h >> stage.level) * u64(w >> stage.level);
    // The first stage keeps the post-stem stride; later stages halve the
    // resolution in their first block, so that block's leading 1x1 conv
    // still runs at the larger input resolution.
    const bool strided = idx != 0;
    const std::uint64_t in_area = strided ? area * 4 : area;

    Cost stage_cost;
    for (int block = 0; block < stage.blocks; ++block) {
      const int block_in = block == 0 ? in_channels : out_c;
      const std::uint64_t conv1_area = block == 0 ? in_area : area;
      // Convs carry no bias (batch norm follows each); bn has scale+shift.
      stage_cost.flops += u64(block_in) * mid_c * conv1_area;       // 1x1
      stage_cost.flops += u64(9) * mid_c * mid_c * area;            // 3x3
      stage_cost.flops += u64(mid_c) * out_c * area;                // 1x1
      stage_cost.params += u64(block_in) * mid_c + 2 * u64(mid_c);
      stage_cost.params += u64(9) * mid_c * mid_c + 2 * u64(mid_c);
      stage_cost.params += u64(mid_c) * out_c + 2 * u64(out_c);
      if (block == 0) {
        // Projection shortcut onto the new width/stride.
        stage_cost.flops += u64(block_in) * out_c * area;
        stage_cost.params += u64(block_in) * out_c + 2 * u64(out_c);
      }
    }
    result.stages.push_back({stage.name, stage_cost});
    result.total += stage_cost;
    in_channels = out_c;
  }
  return result;
}

DetectorCost detector_cost(const ArchGraph& graph, int h, int w,
                           const CostOptions& options, const HeadSpec& head) {
  DetectorCost result;
  ShapeTable shapes = infer_shapes(graph, h, w);
  result.backbone = backbone_cost(graph.config.backbone, h, w).total;
  result.pyramid = graph_cost(graph, shapes, options).total;
  std::vector<Shape> levels;
  for (const NodeRef& out : graph.outputs) levels.push_back(shapes.at(out));
  result.head = head_cost(head, graph.config.width, levels);
  result.total = result.backbone + result.pyramid + result.head;
  return result;
}

DetectorCost detector_cost(const ArchConfig& config, int h, int w,
                           const CostOptions& options, const HeadSpec& head) {
  return detector_cost(build_fpg(config), h, w, options, head);
}

VariantDelta variant_cost_delta(const ArchConfig& a, const ArchConfig& b,
                                int h, int w) {
  auto pyramid = [&](const ArchConfig& config) {
    ArchGraph graph = build_fpg(config);
    return graph_cost(graph, infer_shapes(graph, h, w)).total;
  };
  Cost ca = pyramid(a);
  Cost cb = pyramid(b);
  return {static_cast<std::int64_t>(ca.flops) -
              static_cast<std::int64_t>(cb.flops),
          static_cast<std::int64_t>(ca.params) -
              static_cast<std::int64_t>(cb.params)};
}

std::vector<SweepRow> sweep(const std::vector<std::pair<int, int>>& pw_pairs,
                            DetectorPreset preset, int h, int w) {
  std::vector<SweepRow> rows;
  for (const auto& [pathways, width] : pw_pairs) {
    ArchConfig config = fpg_preset(pathways, width, preset);
    DetectorCost cost = detector_cost(config, h, w);
    rows.push_back({pathways, width, preset, h, w, cost.total, cost.pyramid});
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.total.flops < b.total.flops;
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "pathways,width,preset,input_h,input_w,flops_g,params_m,"
      "pyramid_flops_g,pyramid_params_m\n";
  char line[256];
  for (const SweepRow& row : rows) {
    std::snprintf(line, sizeof(line), "%d,%d,%s,%d,%d,%.3f,%.3f,%.3f,%.3f\n",
                  row.pathways, row.width, to_string(row.preset).c_str(),
                  row.input_h, row.input_w, row.total.flops / 1e9,
                  row.total.params / 1e6, row.pyramid.flops / 1e9,
                  row.pyramid.params / 1e6);
    out += line;
  }
  return out;
}

}  // namespace fpg
