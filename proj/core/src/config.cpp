// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/config.hpp"

#include <stdexcept>

namespace fpg {

namespace {

std::string bad_value(std::string_view what, std::string_view got) {
  return std::string("unknown ") + std::string(what) + ": '" +
         std::string(got) + "'";
}

}  // namespace

int BackboneSpec::channels_at(int level) const {
  for (const BackboneStage& stage : stages) {
    if (stage.level == level) return stage.channels;
  }
  return 0;
}

int BackboneSpec::top_level() const {
  int top = 0;
  for (const BackboneStage& stage : stages) {
    if (stage.level > top) top = stage.level;
  }
  return top;
}

BackboneSpec resnet50() {
  return BackboneSpec{
      .name = "resnet50",
      .stem_channels = 64,
      .stages = {{"C2", 2, 256, 3, BlockKind::bottleneck},
                 {"C3", 3, 512, 4, BlockKind::bottleneck},
                 {"C4", 4, 1024, 6, BlockKind::bottleneck},
                 {"C5", 5, 2048, 3, BlockKind::bottleneck}},
  };
}

BackboneSpec resnet101() {
  BackboneSpec spec = resnet50();
  spec.name = "resnet101";
  spec.stages[2].blocks = 23;
  return spec;
}

std::vector<std::string> check_config(const ArchConfig& config) {
  std::vector<std::string> errors;
  if (config.num_pathways < 1) errors.push_back("num_pathways must be >= 1");
  if (config.width < 1) errors.push_back("width must be >= 1");
  if (config.min_level < 2) errors.push_back("min_level must be >= 2");
  if (config.max_level > 7) errors.push_back("max_level must be <= 7");
  if (config.min_level >= config.max_level)
    errors.push_back("min_level must be < max_level");
  if (config.beta.num < 1 || config.beta.den < 1)
    errors.push_back("beta must be a positive rational");
  if (config.backbone.stages.empty()) {
    errors.push_back("backbone needs at least one stage");
  } else {
    for (std::size_t i = 0; i < config.backbone.stages.size(); ++i) {
      const BackboneStage& stage = config.backbone.stages[i];
      if (stage.channels < 1)
        errors.push_back("backbone stage " + stage.name +
                         " has non-positive channels");
      if (stage.blocks < 1)
        errors.push_back("backbone stage " + stage.name +
                         " has non-positive block count");
      if (i > 0 &&
          stage.level != config.backbone.stages[i - 1].level + 1)
        errors.push_back("backbone stage levels must be consecutive");
    }
    // The lateral pathway needs at least one backbone-covered level and
    // builds the levels above the backbone by successive downsampling.
    if (config.min_level > config.backbone.top_level())
      errors.push_back("min_level exceeds the backbone's top level");
  }
  return errors;
}

ArchConfig default_config(DetectorPreset preset) {
  ArchConfig config;
  config.detector = preset;
  if (preset == DetectorPreset::retinanet) {
    config.min_level = 3;
    config.max_level = 7;
  } else {
    config.min_level = 2;
    config.max_level = 6;
  }
  return config;
}

ArchConfig fpg_preset(int stacked_pathways, int width, DetectorPreset preset) {
  ArchConfig config = default_config(preset);
  config.num_pathways = stacked_pathways + 1;
  config.width = width;
  config.contraction = true;
  config.flags = {.across_down = true,
                  .across_up = false,
                  .same_up = true,
                  .across_skip = true};
  return config;
}

ArchConfig ablation_preset(std::string_view name) {
  ArchConfig config = default_config(DetectorPreset::retinanet);
  config.num_pathways = 10;
  config.width = 256;
  config.contraction = false;
  config.flags = {.across_down = true,
                  .across_up = true,
                  .same_up = true,
                  .across_skip = true};
  if (name == "full") return config;
  if (name == "no_ad") {
    config.flags.across_down = false;
    return config;
  }
  if (name == "no_au") {
    config.flags.across_up = false;
    return config;
  }
  if (name == "no_su") {
    config.flags.same_up = false;
    return config;
  }
  if (name == "no_as") {
    config.flags.across_skip = false;
    return config;
  }
  if (name == "contracted") return fpg_preset(9, 256);
  throw std::invalid_argument(bad_value("ablation preset", name));
}

std::string to_string(DetectorPreset v) {
  return v == DetectorPreset::retinanet ? "retinanet" : "rcnn";
}

std::string to_string(SameUpKind v) {
  switch (v) {
    case SameUpKind::conv3_s2: return "conv3_s2";
    case SameUpKind::maxpool2: return "maxpool2";
    case SameUpKind::avgpool2: return "avgpool2";
  }
  return "?";
}

std::string to_string(AcrossSkipKind v) {
  return v == AcrossSkipKind::conv1 ? "conv1" : "identity";
}

std::string to_string(AcrossDownKind v) {
  switch (v) {
    case AcrossDownKind::intp: return "intp";
    case AcrossDownKind::intp_k1: return "intp_k1";
    case AcrossDownKind::intp_k3: return "intp_k3";
  }
  return "?";
}

std::string to_string(BlockKind v) {
  switch (v) {
    case BlockKind::bottleneck: return "bottleneck";
  }
  return "?";
}

DetectorPreset detector_preset_from(std::string_view s) {
  if (s == "retinanet") return DetectorPreset::retinanet;
  if (s == "rcnn") return DetectorPreset::rcnn;
  throw std::invalid_argument(bad_value("detector preset", s));
}

SameUpKind same_up_kind_from(std::string_view s) {
  if (s == "conv3_s2") return SameUpKind::conv3_s2;
  if (s == "maxpool2") return SameUpKind::maxpool2;
  if (s == "avgpool2") return SameUpKind::avgpool2;
  throw std::invalid_argument(bad_value("same_up_kind", s));
}

AcrossSkipKind across_skip_kind_from(std::string_view s) {
  if (s == "conv1") return AcrossSkipKind::conv1;
  if (s == "identity") return AcrossSkipKind::identity;
  throw std::invalid_argument(bad_value("across_skip_kind", s));
}

AcrossDownKind across_down_kind_from(std::string_view s) {
  if (s == "intp") return AcrossDownKind::intp;
  if (s == "intp_k1") return AcrossDownKind::intp_k1;
  if (s == "intp_k3") return AcrossDownKind::intp_k3;
  throw std::invalid_argument(bad_value("across_down_kind", s));
}

BlockKind block_kind_from(std::string_view s) {
  if (s == "bottleneck") return BlockKind::bottleneck;
  throw std::invalid_argument(bad_value("block_kind", s));
}

}  // namespace fpg
