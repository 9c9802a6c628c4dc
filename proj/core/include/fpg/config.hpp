// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fpg {

/// Detector family a pyramid feeds. Fixes the level range:
/// retinanet uses P3..P7, rcnn uses P2..P6.
enum class DetectorPreset { retinanet, rcnn };

/// Operator choice for SameUp connections inside a stacked pathway.
enum class SameUpKind { conv3_s2, maxpool2, avgpool2 };

/// Operator choice for AcrossSkip connections from the lateral pathway.
enum class AcrossSkipKind { conv1, identity };

/// Operator choice for AcrossDown connections (nearest x2 upsample, then
/// optionally a conv block).
enum class AcrossDownKind { intp, intp_k1, intp_k3 };

/// Residual block family of a backbone stage.
enum class BlockKind { bottleneck };

/// Exact ratio, used for the informational channel-reduction factor beta.
struct Rational {
  int num = 1;
  int den = 1;
  bool operator==(const Rational&) const = default;
};

/// Which cross/within-pathway connection families the grid carries.
/// AcrossSame connections are structural and always present.
struct ConnectionFlags {
  bool across_down = true;
  bool across_up = true;
  bool same_up = true;
  bool across_skip = true;
  bool operator==(const ConnectionFlags&) const = default;
};

/// One backbone stage; its feature map has stride 2^level.
struct BackboneStage {
  std::string name;  // "C2".."C5"
  int level = 2;
  int channels = 256;
  int blocks = 3;
  BlockKind kind = BlockKind::bottleneck;
  bool operator==(const BackboneStage&) const = default;
};

/// Backbone description used for lateral-channel lookup and the analytic
/// backbone cost model. Stages must be consecutive in level order.
struct BackboneSpec {
  std::string name;
  int stem_channels = 64;
  std::vector<BackboneStage> stages;

  /// Channels of the stage at pyramid level `level`, or 0 if not covered.
  int channels_at(int level) const;
  /// Highest level covered by a stage (e.g. 5 for ResNet).
  int top_level() const;
  bool operator==(const BackboneSpec&) const = default;
};

BackboneSpec resnet50();
BackboneSpec resnet101();

/// Full architecture description of one feature pyramid grid.
///
/// num_pathways counts all pyramid pathways including the initial lateral
/// pathway (pathway 1); pathways 2..p are the stacked fusion pathways.
/// The published "N@w" naming counts only the stacked pathways, so the
/// 9@256 preset corresponds to num_pathways = 10.
struct ArchConfig {
  int num_pathways = 1;
  int width = 256;
  DetectorPreset detector = DetectorPreset::retinanet;
  int min_level = 3;
  int max_level = 7;
  ConnectionFlags flags;
  bool contraction = false;
  SameUpKind same_up_kind = SameUpKind::conv3_s2;
  AcrossSkipKind across_skip_kind = AcrossSkipKind::conv1;
  AcrossDownKind across_down_kind = AcrossDownKind::intp_k3;
  Rational beta{1, 8};
  BackboneSpec backbone = resnet50();

  bool operator==(const ArchConfig&) const = default;
};

/// Diagnostics for violated config invariants; empty means valid.
std::vector<std::string> check_config(const ArchConfig& config);

/// Config with the level range of `preset` and library defaults elsewhere.
ArchConfig default_config(DetectorPreset preset);

/// The published FPG defaults for "N@w": `stacked_pathways` fusion pathways
/// after the lateral pathway, contracted grid, AcrossUp disabled.
ArchConfig fpg_preset(int stacked_pathways, int width,
                      DetectorPreset preset = DetectorPreset::retinanet);

/// Rows of the component-ablation family (RetinaNet 9@256):
/// "full", "no_ad", "no_au", "no_su", "no_as", "contracted".
ArchConfig ablation_preset(std::string_view name);

std::string to_string(DetectorPreset v);
std::string to_string(SameUpKind v);
std::string to_string(AcrossSkipKind v);
std::string to_string(AcrossDownKind v);
std::string to_string(BlockKind v);

DetectorPreset detector_preset_from(std::string_view s);
SameUpKind same_up_kind_from(std::string_view s);
AcrossSkipKind across_skip_kind_from(std::string_view s);
AcrossDownKind across_down_kind_from(std::string_view s);
BlockKind block_kind_from(std::string_view s);

}  // namespace fpg
