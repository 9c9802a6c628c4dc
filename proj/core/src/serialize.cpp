// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/serialize.hpp"

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace fpg {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument(message);
}

/// Strictness guard: every object must carry exactly the known keys.
void check_keys(const Json& obj, const char* context,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(std::string(context) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      fail("unknown key '" + key + "' in " + context);
    }
  }
  for (const char* key : allowed) {
    if (!obj.contains(key))
      fail(std::string("missing key '") + key + "' in " + context);
  }
}

Json flags_to_json(const ConnectionFlags& flags) {
  return Json{{"across_down", flags.across_down},
              {"across_up", flags.across_up},
              {"same_up", flags.same_up},
              {"across_skip", flags.across_skip}};
}

ConnectionFlags flags_from_json(const Json& j) {
  check_keys(j, "flags", {"across_down", "across_up", "same_up",
                          "across_skip"});
  return {j.at("across_down").get<bool>(), j.at("across_up").get<bool>(),
          j.at("same_up").get<bool>(), j.at("across_skip").get<bool>()};
}

Json backbone_to_json(const BackboneSpec& spec) {
  Json stages = Json::array();
  for (const BackboneStage& stage : spec.stages) {
    stages.push_back(Json{{"name", stage.name},
                          {"level", stage.level},
                          {"channels", stage.channels},
                          {"blocks", stage.blocks},
                          {"kind", to_string(stage.kind)}});
  }
  return Json{{"name", spec.name},
              {"stem_channels", spec.stem_channels},
              {"stages", stages}};
}

BackboneSpec backbone_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "resnet50") return resnet50();
    if (name == "resnet101") return resnet101();
    fail("unknown backbone preset: '" + name + "'");
  }
  check_keys(j, "backbone", {"name", "stem_channels", "stages"});
  BackboneSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.stem_channels = j.at("stem_channels").get<int>();
  for (const Json& stage_json : j.at("stages")) {
    check_keys(stage_json, "backbone stage",
               {"name", "level", "channels", "blocks", "kind"});
    BackboneStage stage;
    stage.name = stage_json.at("name").get<std::string>();
    stage.level = stage_json.at("level").get<int>();
    stage.channels = stage_json.at("channels").get<int>();
    stage.blocks = stage_json.at("blocks").get<int>();
    stage.kind = block_kind_from(stage_json.at("kind").get<std::string>());
    spec.stages.push_back(std::move(stage));
  }
  return spec;
}

Json config_to_json_impl(const ArchConfig& config) {
  return Json{{"num_pathways", config.num_pathways},
              {"width", config.width},
              {"detector", to_string(config.detector)},
              {"min_level", config.min_level},
              {"max_level", config.max_level},
              {"flags", flags_to_json(config.flags)},
              {"contraction", config.contraction},
              {"same_up_kind", to_string(config.same_up_kind)},
              {"across_skip_kind", to_string(config.across_skip_kind)},
              {"across_down_kind", to_string(config.across_down_kind)},
              {"beta", Json{{"num", config.beta.num},
                            {"den", config.beta.den}}},
              {"backbone", backbone_to_json(config.backbone)}};
}

ArchConfig config_from_json_impl(const Json& j) {
  check_keys(j, "config",
             {"num_pathways", "width", "detector", "min_level", "max_level",
              "flags", "contraction", "same_up_kind", "across_skip_kind",
              "across_down_kind", "beta", "backbone"});
  ArchConfig config;
  config.num_pathways = j.at("num_pathways").get<int>();
  config.width = j.at("width").get<int>();
  config.detector = detector_preset_from(j.at("detector").get<std::string>());
  config.min_level = j.at("min_level").get<int>();
  config.max_level = j.at("max_level").get<int>();
  config.flags = flags_from_json(j.at("flags"));
  config.contraction = j.at("contraction").get<bool>();
  config.same_up_kind =
      same_up_kind_from(j.at("same_up_kind").get<std::string>());
  config.across_skip_kind =
      across_skip_kind_from(j.at("across_skip_kind").get<std::string>());
  config.across_down_kind =
      across_down_kind_from(j.at("across_down_kind").get<std::string>());
  const Json& beta = j.at("beta");
  check_keys(beta, "beta", {"num", "den"});
  config.beta = {beta.at("num").get<int>(), beta.at("den").get<int>()};
  config.backbone = backbone_from_json(j.at("backbone"));
  return config;
}

Json node_to_json(const NodeRef& node) {
  return Json{{"role", to_string(node.role)},
              {"pathway", node.pathway},
              {"level", node.level},
              {"channels", node.channels}};
}

NodeRef node_from_json(const Json& j) {
  check_keys(j, "node", {"role", "pathway", "level", "channels"});
  return {node_role_from(j.at("role").get<std::string>()),
          j.at("pathway").get<int>(), j.at("level").get<int>(),
          j.at("channels").get<int>()};
}

Json op_to_json(const OperatorSpec& op) {
  Json steps = Json::array();
  for (const OpStep& step : op.steps) {
    Json step_json{{"type", to_string(step.type)}};
    if (step.type == OpType::conv) {
      step_json["kernel"] = step.kernel;
      step_json["stride"] = step.stride;
    }
    steps.push_back(std::move(step_json));
  }
  return steps;
}

OperatorSpec op_from_json(const Json& j) {
  if (!j.is_array()) fail("op must be a JSON array of steps");
  OperatorSpec op;
  for (const Json& step_json : j) {
    OpStep step;
    step.type = op_type_from(step_json.at("type").get<std::string>());
    if (step.type == OpType::conv) {
      check_keys(step_json, "conv step", {"type", "kernel", "stride"});
      step.kernel = step_json.at("kernel").get<int>();
      step.stride = step_json.at("stride").get<int>();
    } else {
      check_keys(step_json, "op step", {"type"});
    }
    op.steps.push_back(step);
  }
  return op;
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& ex) {
    fail(std::string("JSON parse error: ") + ex.what());
  }
}

}  // namespace

std::string config_to_json(const ArchConfig& config, int indent) {
  return config_to_json_impl(config).dump(indent);
}

ArchConfig config_from_json(const std::string& text) {
  try {
    return config_from_json_impl(parse(text));
  } catch (const Json::exception& ex) {
    fail(std::string("malformed config: ") + ex.what());
  }
}

std::string graph_to_json(const ArchGraph& graph, int indent) {
  Json nodes = Json::array();
  for (const NodeRef& node : graph.nodes) nodes.push_back(node_to_json(node));
  Json edges = Json::array();
  for (const Edge& edge : graph.edges) {
    edges.push_back(Json{{"src", node_to_json(edge.src)},
                         {"dst", node_to_json(edge.dst)},
                         {"kind", to_string(edge.kind)},
                         {"op", op_to_json(edge.op)}});
  }
  Json outputs = Json::array();
  for (const NodeRef& node : graph.outputs)
    outputs.push_back(node_to_json(node));
  return Json{{"config", config_to_json_impl(graph.config)},
              {"nodes", nodes},
              {"edges", edges},
              {"outputs", outputs}}
      .dump(indent);
}

ArchGraph graph_from_json(const std::string& text) {
  try {
    Json j = parse(text);
    check_keys(j, "graph", {"config", "nodes", "edges", "outputs"});
    ArchGraph graph;
    graph.config = config_from_json_impl(j.at("config"));
    for (const Json& node_json : j.at("nodes"))
      graph.nodes.push_back(node_from_json(node_json));
    for (const Json& edge_json : j.at("edges")) {
      check_keys(edge_json, "edge", {"src", "dst", "kind", "op"});
      Edge edge;
      edge.src = node_from_json(edge_json.at("src"));
      edge.dst = node_from_json(edge_json.at("dst"));
      edge.kind = edge_kind_from(edge_json.at("kind").get<std::string>());
      edge.op = op_from_json(edge_json.at("op"));
      graph.edges.push_back(std::move(edge));
    }
    for (const Json& node_json : j.at("outputs"))
      graph.outputs.push_back(node_from_json(node_json));
    return graph;
  } catch (const Json::exception& ex) {
    fail(std::string("malformed graph: ") + ex.what());
  }
}

std::string graph_to_dot(const ArchGraph& graph) {
  auto style = [](EdgeKind kind) -> const char* {
    switch (kind) {
      case EdgeKind::backbone_lateral: return "color=gray50";
      case EdgeKind::same_up: return "color=black";
      case EdgeKind::across_same: return "color=royalblue";
      case EdgeKind::across_up: return "color=forestgreen, style=dashed";
      case EdgeKind::across_down: return "color=firebrick, style=dashed";
      case EdgeKind::across_skip: return "color=purple, style=dotted";
      case EdgeKind::top_down: return "color=darkorange, style=dashed";
      case EdgeKind::output_conv: return "color=black, style=bold";
    }
    return "";
  };
  std::string out = "digraph fpg {\n  rankdir=BT;\n  node [shape=box];\n";
  for (const NodeRef& node : graph.nodes) {
    out += "  \"" + node_name(node) + "\";\n";
  }
  for (const Edge& edge : graph.edges) {
    out += "  \"" + node_name(edge.src) + "\" -> \"" + node_name(edge.dst) +
           "\" [" + style(edge.kind) + "];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace fpg
