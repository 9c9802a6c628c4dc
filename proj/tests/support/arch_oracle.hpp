// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference for the grid wiring rules, kept independent of the
// production builder: instead of constructing edges, it enumerates every
// candidate (kind, src, dst) pair over the whole grid and keeps the legal
// ones. Comparing the two catches emission bugs (duplicates, misses,
// off-by-one bounds) that a constructive re-implementation could share.

#pragma once

#include <algorithm>
#include <set>
#include <tuple>
#include <vector>

#include "fpg/config.hpp"
#include "fpg/graph.hpp"

namespace fpg_test {

struct OracleEdge {
  fpg::EdgeKind kind;
  int src_pathway, src_level;
  int dst_pathway, dst_level;
  std::vector<fpg::OpStep> steps;

  auto key() const {
    return std::tuple(kind, src_pathway, src_level, dst_pathway, dst_level);
  }
  bool operator<(const OracleEdge& o) const { return key() < o.key(); }
  bool operator==(const OracleEdge& o) const {
    return key() == o.key() && steps == o.steps;
  }
};

inline std::vector<fpg::OpStep> oracle_conv_block(int k, int s) {
  return {{fpg::OpType::relu}, {fpg::OpType::conv, k, s}, {fpg::OpType::bn}};
}

/// Every edge the rules admit for `config`, described by coordinates and
/// operator pipeline. Backbone laterals and output convs are reported with
/// pathway 0 / num_pathways as in the production graph.
inline std::vector<OracleEdge> oracle_edges(const fpg::ArchConfig& c) {
  using fpg::EdgeKind;
  using fpg::OpType;
  std::vector<OracleEdge> out;

  const int p = c.num_pathways;
  const int lo = c.min_level;
  const int hi = c.max_level;
  const int bb_top = std::min(c.backbone.top_level(), hi);

  // Column floor: stacked column s (1-based) loses its lowest levels until
  // the fifth column; the floor never exceeds the top level.
  auto floor_of = [&](int j) {
    if (!c.contraction || j == 1) return lo;
    int missing = 4 - (j - 1);
    if (missing < 0) missing = 0;
    return std::min(lo + missing, hi);
  };
  auto alive = [&](int j, int i) {
    return j >= 1 && j <= p && i >= lo && i <= hi && i >= floor_of(j);
  };
  // Contracted columns 1..4 start with a single-input node at their floor.
  auto is_entry = [&](int j, int i) {
    return c.contraction && j >= 2 && j <= 5 && i == floor_of(j);
  };

  for (int i = lo; i <= bb_top; ++i) {
    out.push_back({EdgeKind::backbone_lateral, 0, i, 1, i,
                   {{OpType::conv, 1, 1}}});
  }
  for (int i = bb_top + 1; i <= hi; ++i) {
    out.push_back({EdgeKind::same_up, 1, i - 1, 1, i, {{OpType::conv, 3, 2}}});
  }

  // Candidate scan over every stacked node and kind.
  for (int j = 2; j <= p; ++j) {
    for (int i = lo; i <= hi; ++i) {
      if (!alive(j, i)) continue;

      int prev = j - 1;
      while (prev > 1 && !alive(prev, i)) --prev;
      out.push_back({EdgeKind::across_same, prev, i, j, i,
                     oracle_conv_block(1, 1)});

      if (c.flags.same_up && alive(j, i - 1) && i - 1 >= lo) {
        std::vector<fpg::OpStep> op;
        switch (c.same_up_kind) {
          case fpg::SameUpKind::conv3_s2: op = oracle_conv_block(3, 2); break;
          case fpg::SameUpKind::maxpool2: op = {{OpType::maxpool2}}; break;
          case fpg::SameUpKind::avgpool2: op = {{OpType::avgpool2}}; break;
        }
        out.push_back({EdgeKind::same_up, j, i - 1, j, i, op});
      }
      if (c.flags.across_up && !is_entry(j, i) && alive(j - 1, i - 1) &&
          i - 1 >= lo) {
        out.push_back({EdgeKind::across_up, j - 1, i - 1, j, i,
                       oracle_conv_block(3, 2)});
      }
      if (c.flags.across_down && !is_entry(j, i) && alive(j - 1, i + 1) &&
          i + 1 <= hi) {
        std::vector<fpg::OpStep> op{{OpType::nearest_up2}};
        if (c.across_down_kind == fpg::AcrossDownKind::intp_k1) {
          for (auto s : oracle_conv_block(1, 1)) op.push_back(s);
        } else if (c.across_down_kind == fpg::AcrossDownKind::intp_k3) {
          for (auto s : oracle_conv_block(3, 1)) op.push_back(s);
        }
        out.push_back({EdgeKind::across_down, j - 1, i + 1, j, i, op});
      }
      if (c.flags.across_skip && !is_entry(j, i)) {
        std::vector<fpg::OpStep> op =
            c.across_skip_kind == fpg::AcrossSkipKind::identity
                ? std::vector<fpg::OpStep>{{OpType::identity}}
                : oracle_conv_block(1, 1);
        out.push_back({EdgeKind::across_skip, 1, i, j, i, op});
      }
    }
  }

  for (int i = lo; i <= hi; ++i) {
    int deepest = p;
    while (deepest > 1 && !alive(deepest, i)) --deepest;
    out.push_back({EdgeKind::output_conv, deepest, i, p, i,
                   {{OpType::conv, 3, 1}}});
  }

  std::sort(out.begin(), out.end());
  return out;
}

/// The production graph's edges in the oracle's format (output edges keep
/// the destination's stored pathway).
inline std::vector<OracleEdge> graph_edges(const fpg::ArchGraph& g) {
  std::vector<OracleEdge> out;
  for (const fpg::Edge& e : g.edges) {
    out.push_back({e.kind, e.src.pathway, e.src.level, e.dst.pathway,
                   e.dst.level, e.op.steps});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fpg_test
