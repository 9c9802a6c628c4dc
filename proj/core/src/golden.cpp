// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/golden.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace fpg::golden {

namespace {

constexpr double kAbsoluteTolerance = 0.05;
constexpr double kDeltaTolerance = 0.10;

double rel_err(double actual, double expected) {
  return std::abs(actual - expected) / std::abs(expected);
}

}  // namespace

const std::vector<ReferenceRow>& component_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"full", 173.3, 104.5},       {"no_ad", 128.1, 83.3},
      {"no_au", 162.0, 83.3},       {"no_su", 162.0, 83.3},
      {"no_as", 162.2, 101.5},      {"contracted", 136.0, 72.5},
  };
  return rows;
}

const std::vector<ReferenceRow>& same_up_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"same_up_avgpool2", 128.1, 54.8},
      {"same_up_maxpool2", 128.1, 54.8},
      {"same_up_conv3_s2", 136.0, 72.5},
  };
  return rows;
}

const std::vector<ReferenceRow>& across_skip_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"across_skip_identity", 133.0, 70.2},
      {"across_skip_conv1", 136.0, 72.5},
  };
  return rows;
}

const std::vector<ReferenceRow>& across_down_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"across_down_intp", 109.3, 57.2},
      {"across_down_intp_k1", 112.3, 58.9},
      {"across_down_intp_k3", 136.0, 72.5},
  };
  return rows;
}

const std::vector<ReferenceRow>& total_rows() {
  static const std::vector<ReferenceRow> rows = {
      {"fpn_1_256", 95.7, 37.8},
      {"fpg_9_128", 95.9, 40.1},
      {"fpg_9_256", 136.0, 72.5},
  };
  return rows;
}

bool is_fpn_row(std::string_view name) { return name == "fpn_1_256"; }

ArchConfig reference_config(std::string_view name) {
  if (name == "full" || name == "no_ad" || name == "no_au" ||
      name == "no_su" || name == "no_as" || name == "contracted") {
    return ablation_preset(name);
  }
  ArchConfig config = fpg_preset(9, 256);
  if (name == "same_up_conv3_s2") return config;
  if (name == "same_up_maxpool2") {
    config.same_up_kind = SameUpKind::maxpool2;
    return config;
  }
  if (name == "same_up_avgpool2") {
    config.same_up_kind = SameUpKind::avgpool2;
    return config;
  }
  if (name == "across_skip_conv1") return config;
  if (name == "across_skip_identity") {
    config.across_skip_kind = AcrossSkipKind::identity;
    return config;
  }
  if (name == "across_down_intp_k3") return config;
  if (name == "across_down_intp_k1") {
    config.across_down_kind = AcrossDownKind::intp_k1;
    return config;
  }
  if (name == "across_down_intp") {
    config.across_down_kind = AcrossDownKind::intp;
    return config;
  }
  if (name == "fpg_9_256") return config;
  if (name == "fpg_9_128") return fpg_preset(9, 128);
  if (name == "fpn_1_256") {
    ArchConfig fpn = default_config(DetectorPreset::retinanet);
    fpn.width = 256;
    return fpn;
  }
  throw std::invalid_argument("unknown reference row: '" + std::string(name) +
                              "'");
}

ReferenceCheckResult reference_check(int h, int w) {
  ReferenceCheckResult result;

  auto detector = [&](std::string_view name) {
    if (is_fpn_row(name)) {
      ArchGraph graph = build_fpn(256, resnet50(), DetectorPreset::retinanet);
      return detector_cost(graph, h, w);
    }
    return detector_cost(reference_config(name), h, w);
  };
  auto add_absolute = [&](const ReferenceRow& row) {
    DetectorCost cost = detector(row.name);
    const double flops_g = cost.total.flops / 1e9;
    const double params_m = cost.total.params / 1e6;
    for (auto [tag, expected, actual] :
         {std::tuple{"flops_g", row.flops_g, flops_g},
          std::tuple{"params_m", row.params_m, params_m}}) {
      CheckLine line;
      line.label = std::string(row.name) + " " + tag;
      line.expected = expected;
      line.actual = actual;
      line.rel_err = rel_err(actual, expected);
      line.tolerance = kAbsoluteTolerance;
      line.pass = line.rel_err <= line.tolerance;
      result.all_pass = result.all_pass && line.pass;
      result.lines.push_back(std::move(line));
    }
  };

  for (const auto& rows :
       {component_rows(), same_up_rows(), across_skip_rows(),
        across_down_rows(), total_rows()}) {
    for (const ReferenceRow& row : rows) add_absolute(row);
  }

  // Headline gaps between named configurations, checked as differences so
  // a systematic offset cannot hide a wrong per-edge formula.
  struct DeltaCase {
    const char* a;
    const char* b;
    double flops_g;
    double params_m;
  };
  const DeltaCase deltas[] = {
      {"full", "no_au", 173.3 - 162.0, 104.5 - 83.3},
      {"no_au", "contracted", 162.0 - 136.0, 83.3 - 72.5},
      {"same_up_conv3_s2", "same_up_maxpool2", 136.0 - 128.1, 72.5 - 54.8},
      {"across_skip_conv1", "across_skip_identity", 136.0 - 133.0,
       72.5 - 70.2},
      {"across_down_intp_k3", "across_down_intp_k1", 136.0 - 112.3,
       72.5 - 58.9},
      {"across_down_intp_k1", "across_down_intp", 112.3 - 109.3,
       58.9 - 57.2},
  };
  for (const DeltaCase& d : deltas) {
    VariantDelta delta = variant_cost_delta(reference_config(d.a),
                                            reference_config(d.b), h, w);
    for (auto [tag, expected, actual] :
         {std::tuple{"delta_flops_g", d.flops_g, delta.flops / 1e9},
          std::tuple{"delta_params_m", d.params_m, delta.params / 1e6}}) {
      CheckLine line;
      line.label = std::string(d.a) + " - " + d.b + " " + tag;
      line.expected = expected;
      line.actual = actual;
      line.rel_err = rel_err(actual, expected);
      line.tolerance = kDeltaTolerance;
      line.pass = line.rel_err <= line.tolerance;
      result.all_pass = result.all_pass && line.pass;
      result.lines.push_back(std::move(line));
    }
  }
  return result;
}

}  // namespace fpg::golden
