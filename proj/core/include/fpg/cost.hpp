// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fpg/shapes.hpp"

namespace fpg {

/// FLOPs are multiply-accumulates (one MAC = one FLOP) and by default count
/// convolutions only. Params count every learnable scalar: conv weights,
/// conv bias, and batch-norm scale/shift.
struct Cost {
  std::uint64_t flops = 0;
  std::uint64_t params = 0;

  Cost& operator+=(const Cost& o) {
    flops += o.flops;
    params += o.params;
    return *this;
  }
  friend Cost operator+(Cost a, const Cost& b) { return a += b; }
  bool operator==(const Cost&) const = default;
};

struct CostOptions {
  /// Also count per-element work (fusion sums, activations, normalisation,
  /// pooling, interpolation) as FLOPs. Off by default: the reported numbers
  /// then cover convolutions only.
  bool count_elementwise = false;
};

/// Cost of a single edge operator at the resolutions in `shapes`.
Cost edge_cost(const Edge& edge, const ShapeTable& shapes,
               const CostOptions& options = {});

/// Edge-by-edge accounting for one graph (backbone stages excluded; the
/// graph only sees backbone outputs).
struct CostReport {
  std::vector<std::pair<Edge, Cost>> per_edge;
  /// Fusion-sum cost per node; zero unless count_elementwise is set.
  std::vector<std::pair<NodeRef, Cost>> per_node;
  Cost total;

  Cost kind_total(EdgeKind kind) const;
};

CostReport graph_cost(const ArchGraph& graph, const ShapeTable& shapes,
                      const CostOptions& options = {});

/// Dense detection head applied to every pyramid level: two parallel towers
/// of 3x3 convs (ReLU, no norm) followed by 3x3 prediction convs for
/// anchors*classes classification and anchors*4 box regression channels.
/// Weights are shared across levels, so params are counted once.
struct HeadSpec {
  int anchors = 9;
  int classes = 80;
  int tower_convs = 4;
  int tower_width = 256;
};

/// `in_channels` is the pyramid width feeding the head; `levels` holds the
/// spatial shape of each attached pyramid output. No levels means zero
/// FLOPs but still the full (shared) parameter count.
Cost head_cost(const HeadSpec& head, int in_channels,
               const std::vector<Shape>& levels);

struct StageCost {
  std::string name;
  Cost cost;
};

/// Analytic cost of the backbone trunk (stem + residual stages, batch-norm
/// params included, classifier excluded).
struct BackboneCost {
  Cost total;
  std::vector<StageCost> stages;
};

BackboneCost backbone_cost(const BackboneSpec& spec, int h, int w);

/// backbone + pyramid + head totals for a full detector at h x w input.
struct DetectorCost {
  Cost backbone;
  Cost pyramid;
  Cost head;
  Cost total;
};

DetectorCost detector_cost(const ArchGraph& graph, int h, int w,
                           const CostOptions& options = {},
                           const HeadSpec& head = {});
DetectorCost detector_cost(const ArchConfig& config, int h, int w,
                           const CostOptions& options = {},
                           const HeadSpec& head = {});

/// Pyramid-only cost difference a - b at h x w input (signed).
struct VariantDelta {
  std::int64_t flops = 0;
  std::int64_t params = 0;
};

VariantDelta variant_cost_delta(const ArchConfig& a, const ArchConfig& b,
                                int h, int w);

/// One sweep row; `pathways` uses the published convention (stacked
/// pathways only, as in "9@256").
struct SweepRow {
  int pathways = 0;
  int width = 0;
  DetectorPreset preset = DetectorPreset::retinanet;
  int input_h = 0;
  int input_w = 0;
  Cost total;
  Cost pyramid;
};

/// Evaluates fpg_preset(p, w, preset) for every (p, w) pair; rows are
/// sorted by total FLOPs ascending.
std::vector<SweepRow> sweep(const std::vector<std::pair<int, int>>& pw_pairs,
                            DetectorPreset preset, int h, int w);

/// CSV with header
/// pathways,width,preset,input_h,input_w,flops_g,params_m,pyramid_flops_g,pyramid_params_m
/// and giga/mega values printed with three decimals.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace fpg
