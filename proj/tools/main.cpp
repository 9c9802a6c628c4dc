// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: build/validate pyramid architectures, inspect
// shapes, reproduce the cost figures, sweep configurations, export graphs,
// and run the toy executor.
//
// Exit codes: 0 success, 1 invalid config/graph/arguments, 2 failed
// reference check (`cost --check`).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpg/config.hpp"
#include "fpg/cost.hpp"
#include "fpg/golden.hpp"
#include "fpg/graph.hpp"
#include "fpg/net.hpp"
#include "fpg/serialize.hpp"
#include "fpg/shapes.hpp"

namespace {

struct ConfigSource {
  std::string preset;       // "fpg:9@256", "fpn:1@256", "ablation:no_ad"
  std::string config_path;  // JSON config file
  std::string detector = "retinanet";
  bool use_fpn = false;
  fpg::ArchConfig config;

  void resolve() {
    if (preset.empty() == config_path.empty())
      throw std::invalid_argument(
          "exactly one of --preset or --config is required");
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw std::invalid_argument("cannot open config file: " + config_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      config = fpg::config_from_json(buffer.str());
      return;
    }
    const auto colon = preset.find(':');
    const std::string family = preset.substr(0, colon);
    const std::string rest =
        colon == std::string::npos ? "" : preset.substr(colon + 1);
    const fpg::DetectorPreset det = fpg::detector_preset_from(detector);
    if (family == "ablation") {
      config = fpg::ablation_preset(rest);
      return;
    }
    if (family == "fpg" || family == "fpn") {
      const auto at = rest.find('@');
      if (at == std::string::npos)
        throw std::invalid_argument("preset must look like " + family +
                                    ":<pathways>@<width>");
      const int pathways = std::stoi(rest.substr(0, at));
      const int width = std::stoi(rest.substr(at + 1));
      if (family == "fpn") {
        if (pathways != 1)
          throw std::invalid_argument("fpn presets have exactly one pathway");
        use_fpn = true;
        config = fpg::default_config(det);
        config.width = width;
      } else {
        config = fpg::fpg_preset(pathways, width, det);
      }
      return;
    }
    throw std::invalid_argument("unknown preset family: '" + family + "'");
  }

  fpg::ArchGraph build() const {
    if (use_fpn)
      return fpg::build_fpn(config.width, config.backbone, config.detector);
    return fpg::build_fpg(config);
  }
};

void add_config_options(CLI::App* cmd, ConfigSource& source) {
  cmd->add_option("--preset", source.preset,
                  "fpg:<p>@<w>, fpn:1@<w>, or ablation:<full|no_ad|no_au|"
                  "no_su|no_as|contracted>");
  cmd->add_option("--config", source.config_path, "JSON config file");
  cmd->add_option("--detector", source.detector,
                  "retinanet (P3-P7) or rcnn (P2-P6); applies to --preset")
      ->check(CLI::IsMember({"retinanet", "rcnn"}));
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    const int s = std::stoi(text);
    return {s, s};
  }
  return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) values.push_back(std::stoi(item));
  return values;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
}

double giga(std::uint64_t v) { return v / 1e9; }
double mega(std::uint64_t v) { return v / 1e6; }

int run_build(ConfigSource& source, const std::string& out_path) {
  fpg::ArchGraph graph = source.build();
  if (auto errors = fpg::validate(graph); !errors.empty()) {
    for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    return 1;
  }
  std::size_t pyramid_nodes = 0;
  for (const auto& node : graph.nodes)
    if (node.role == fpg::NodeRole::pyramid) ++pyramid_nodes;
  std::printf("valid graph: %zu nodes (%zu pyramid), %zu edges, levels "
              "P%d-P%d, width %d\n",
              graph.nodes.size(), pyramid_nodes, graph.edges.size(),
              graph.config.min_level, graph.config.max_level,
              graph.config.width);
  if (!out_path.empty()) write_file(out_path, fpg::graph_to_json(graph));
  return 0;
}

int run_validate(ConfigSource& source, const std::string& graph_path) {
  fpg::ArchGraph graph;
  if (!graph_path.empty()) {
    std::ifstream in(graph_path);
    if (!in)
      throw std::invalid_argument("cannot open graph file: " + graph_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    graph = fpg::graph_from_json(buffer.str());
  } else {
    graph = source.build();
  }
  const auto errors = fpg::validate(graph);
  if (errors.empty()) {
    std::printf("valid\n");
    return 0;
  }
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  return 1;
}

int run_shapes(ConfigSource& source, const std::string& input,
               bool all_nodes) {
  const auto [h, w] = parse_size(input);
  fpg::ArchGraph graph = source.build();
  fpg::ShapeTable shapes = fpg::infer_shapes(graph, h, w);
  if (all_nodes) {
    for (const auto& node : graph.topo_order()) {
      const fpg::Shape& s = shapes.at(node);
      std::printf("%-8s %4d x %4d x %4d\n", fpg::node_name(node).c_str(), s.c,
                  s.h, s.w);
    }
    return 0;
  }
  for (const auto& out : graph.outputs) {
    const fpg::Shape& s = shapes.at(out);
    std::printf("P%d: %d x %d x %d\n", out.level, s.c, s.h, s.w);
  }
  return 0;
}

int run_cost(ConfigSource& source, const std::string& input, bool breakdown,
             bool elementwise, bool check) {
  if (check) {
    // The reference figures are defined at 640x640.
    const auto result = fpg::golden::reference_check();
    for (const auto& line : result.lines) {
      std::printf("%-4s %-46s expected %9.3f  actual %9.3f  err %5.2f%% "
                  "(tol %.0f%%)\n",
                  line.pass ? "ok" : "FAIL", line.label.c_str(),
                  line.expected, line.actual, 100.0 * line.rel_err,
                  100.0 * line.tolerance);
    }
    std::printf("%s\n", result.all_pass ? "reference check passed"
                                        : "reference check FAILED");
    return result.all_pass ? 0 : 2;
  }

  const auto [h, w] = parse_size(input);
  fpg::ArchGraph graph = source.build();
  fpg::CostOptions options{.count_elementwise = elementwise};
  fpg::DetectorCost cost = fpg::detector_cost(graph, h, w, options);
  std::printf("input %dx%d\n", h, w);
  std::printf("backbone: %10.3f GFLOPs  %8.3f MParams\n",
              giga(cost.backbone.flops), mega(cost.backbone.params));
  std::printf("pyramid:  %10.3f GFLOPs  %8.3f MParams\n",
              giga(cost.pyramid.flops), mega(cost.pyramid.params));
  std::printf("head:     %10.3f GFLOPs  %8.3f MParams\n",
              giga(cost.head.flops), mega(cost.head.params));
  std::printf("total:    %10.3f GFLOPs  %8.3f MParams\n",
              giga(cost.total.flops), mega(cost.total.params));
  if (breakdown) {
    fpg::ShapeTable shapes = fpg::infer_shapes(graph, h, w);
    fpg::CostReport report = fpg::graph_cost(graph, shapes, options);
    std::printf("pyramid breakdown by connection kind:\n");
    for (fpg::EdgeKind kind :
         {fpg::EdgeKind::backbone_lateral, fpg::EdgeKind::same_up,
          fpg::EdgeKind::across_same, fpg::EdgeKind::across_up,
          fpg::EdgeKind::across_down, fpg::EdgeKind::across_skip,
          fpg::EdgeKind::top_down, fpg::EdgeKind::output_conv}) {
      fpg::Cost c = report.kind_total(kind);
      std::size_t count = 0;
      for (const auto& [edge, unused] : report.per_edge)
        if (edge.kind == kind) ++count;
      if (count == 0) continue;
      std::printf("  %-16s %3zu edges  %10.3f GFLOPs  %8.3f MParams\n",
                  fpg::to_string(kind).c_str(), count, giga(c.flops),
                  mega(c.params));
    }
  }
  return 0;
}

int run_sweep(const std::string& pathways, const std::string& widths,
              const std::string& detector, const std::string& input,
              const std::string& out_path) {
  const auto [h, w] = parse_size(input);
  std::vector<std::pair<int, int>> pairs;
  for (int p : parse_int_list(pathways)) {
    for (int width : parse_int_list(widths)) pairs.emplace_back(p, width);
  }
  const auto rows =
      fpg::sweep(pairs, fpg::detector_preset_from(detector), h, w);
  const std::string csv = fpg::sweep_csv(rows);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file(out_path, csv);
  }
  return 0;
}

int run_export(ConfigSource& source, const std::string& dot_path,
               const std::string& json_path) {
  if (dot_path.empty() && json_path.empty())
    throw std::invalid_argument("export needs --dot and/or --json");
  fpg::ArchGraph graph = source.build();
  if (!dot_path.empty()) write_file(dot_path, fpg::graph_to_dot(graph));
  if (!json_path.empty()) write_file(json_path, fpg::graph_to_json(graph));
  return 0;
}

fpg::TensorNCHW make_input(int batch, int channels, int h, int w,
                           std::uint64_t seed) {
  fpg::TensorNCHW input(batch, channels, h, w);
  std::mt19937_64 rng(seed);
  for (double& v : input.data()) {
    v = 0.2 * (static_cast<double>(rng() >> 11) *
               (1.0 / 9007199254740992.0)) -
        0.1;
  }
  return input;
}

int run_forward(ConfigSource& source, const std::string& input, int channels,
                std::uint64_t seed) {
  const auto [h, w] = parse_size(input);
  fpg::ExecutableNet net = fpg::instantiate(source.build(), seed);
  fpg::TensorNCHW x = make_input(1, channels, h, w, seed + 1);
  fpg::ForwardResult result = fpg::forward(net, x);
  for (const auto& [level, tensor] : result.outputs) {
    std::printf("P%d: (%d, %d, %d, %d) checksum=%.11e\n", level, tensor.n(),
                tensor.c(), tensor.h(), tensor.w(), fpg::sum_all(tensor));
  }
  std::printf("macs=%llu params=%zu\n",
              static_cast<unsigned long long>(result.macs),
              fpg::param_count(net));
  return 0;
}

int run_gradcheck(ConfigSource& source, const std::string& input,
                  int channels, std::uint64_t seed, int samples, double eps) {
  const auto [h, w] = parse_size(input);
  fpg::ExecutableNet net = fpg::instantiate(source.build(), seed);
  fpg::TensorNCHW x = make_input(1, channels, h, w, seed + 1);
  const auto report =
      fpg::gradcheck(net, x, static_cast<std::size_t>(samples), eps, seed + 2);
  const bool pass = report.samples > 0 && report.max_rel_err < 1e-4;
  std::printf("gradcheck: %s  max_rel_err=%.3e  samples=%zu  rejected=%zu\n",
              pass ? "PASS" : "FAIL", report.max_rel_err, report.samples,
              report.rejected);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature pyramid grid construction, costing, and execution"};
  app.require_subcommand(1);

  ConfigSource source;
  std::string input = "640x640";
  std::string out_path, graph_path, dot_path, json_path;
  std::string pathways = "3,5,7,9", widths = "128,256";
  bool breakdown = false, elementwise = false, check = false;
  bool all_nodes = false;
  int channels = 3, samples = 40;
  std::uint64_t seed = 1;
  double eps = 1e-5;

  CLI::App* build = app.add_subcommand("build", "Build and validate a graph");
  add_config_options(build, source);
  build->add_option("--out", out_path, "Write the graph as JSON");

  CLI::App* validate =
      app.add_subcommand("validate", "Validate a config or graph JSON");
  add_config_options(validate, source);
  validate->add_option("--graph", graph_path, "Graph JSON to validate");

  CLI::App* shapes = app.add_subcommand("shapes", "Per-level output shapes");
  add_config_options(shapes, source);
  shapes->add_option("--input", input, "Input size HxW");
  shapes->add_flag("--nodes", all_nodes, "Print every node");

  CLI::App* cost = app.add_subcommand("cost", "FLOPs/params accounting");
  add_config_options(cost, source);
  cost->add_option("--input", input, "Input size HxW");
  cost->add_flag("--breakdown", breakdown, "Per-connection-kind totals");
  cost->add_flag("--elementwise", elementwise,
                 "Also count per-element work (sums, relu, bn, pool, "
                 "interpolation)");
  cost->add_flag("--check", check,
                 "Compare against the published reference figures (640x640); "
                 "exit 2 on failure");

  CLI::App* sweep = app.add_subcommand("sweep", "Cost sweep over (p, w)");
  sweep->add_option("--pathways", pathways, "Comma-separated pathway counts");
  sweep->add_option("--widths", widths, "Comma-separated widths");
  sweep->add_option("--detector", source.detector, "retinanet or rcnn")
      ->check(CLI::IsMember({"retinanet", "rcnn"}));
  sweep->add_option("--input", input, "Input size HxW");
  sweep->add_option("--out", out_path, "Write CSV here instead of stdout");

  CLI::App* exp = app.add_subcommand("export", "Export DOT and/or JSON");
  add_config_options(exp, source);
  exp->add_option("--dot", dot_path, "Write Graphviz DOT");
  exp->add_option("--json", json_path, "Write graph JSON");

  CLI::App* fwd = app.add_subcommand("forward", "Run the toy executor");
  add_config_options(fwd, source);
  fwd->add_option("--input", input, "Input size HxW");
  fwd->add_option("--channels", channels, "Input channels");
  fwd->add_option("--seed", seed, "Parameter/input seed");

  CLI::App* grad = app.add_subcommand("gradcheck",
                                      "Finite-difference gradient check");
  add_config_options(grad, source);
  grad->add_option("--input", input, "Input size HxW");
  grad->add_option("--channels", channels, "Input channels");
  grad->add_option("--seed", seed, "Parameter/input seed");
  grad->add_option("--samples", samples, "Parameters to sample");
  grad->add_option("--eps", eps, "Central-difference step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed())
      return run_sweep(pathways, widths, source.detector, input, out_path);
    if (validate->parsed() && !graph_path.empty())
      return run_validate(source, graph_path);
    if (cost->parsed() && check)
      return run_cost(source, input, breakdown, elementwise, check);
    source.resolve();
    if (build->parsed()) return run_build(source, out_path);
    if (validate->parsed()) return run_validate(source, graph_path);
    if (shapes->parsed()) return run_shapes(source, input, all_nodes);
    if (cost->parsed())
      return run_cost(source, input, breakdown, elementwise, check);
    if (exp->parsed()) return run_export(source, dot_path, json_path);
    if (fwd->parsed()) return run_forward(source, input, channels, seed);
    if (grad->parsed())
      return run_gradcheck(source, input, channels, seed, samples, eps);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
