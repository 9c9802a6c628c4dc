// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "fpg/graph.hpp"

namespace fpg {

/// Field-for-field JSON for ArchConfig. The backbone is embedded as a full
/// object; config_from_json additionally accepts the preset names
/// "resnet50" / "resnet101" as a plain string.
std::string config_to_json(const ArchConfig& config, int indent = 2);

/// Strict parser: any unknown key at any nesting level, missing field, or
/// out-of-vocabulary enum string throws std::invalid_argument with a
/// message naming the offender.
ArchConfig config_from_json(const std::string& text);

/// Lossless graph round-trip (config, nodes, edges with operator
/// pipelines, outputs).
std::string graph_to_json(const ArchGraph& graph, int indent = 2);
ArchGraph graph_from_json(const std::string& text);

/// Graphviz export: backbone nodes "C{i}", pyramid nodes "P{i}^{j}",
/// outputs "P{i}^out"; one style per edge kind.
std::string graph_to_dot(const ArchGraph& graph);

}  // namespace fpg
