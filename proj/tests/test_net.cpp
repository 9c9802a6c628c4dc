// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/net.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "fpg/config.hpp"
#include "fpg/cost.hpp"
#include "fpg/graph.hpp"
#include "fpg/shapes.hpp"

using namespace fpg;

namespace {

TensorNCHW random_input(int n, int c, int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TensorNCHW t(n, c, h, w);
  for (double& v : t.data())
    v = (static_cast<double>(rng() >> 11) / 9007199254740992.0) * 2.0 - 1.0;
  return t;
}

}  // namespace

TEST_CASE("executed macs and params match the analytic model exactly") {
  SUBCASE("contracted grid, retinanet levels") {
    ArchConfig config = fpg_preset(2, 8);
    ArchGraph graph = build_fpg(config);
    ExecutableNet net = instantiate(graph, 42);
    TensorNCHW input = random_input(1, 3, 128, 128, 0);
    CountResult counted = count_macs(net, input);
    Cost analytic = graph_cost(graph, infer_shapes(graph, 128, 128)).total;
    CHECK(counted.macs == analytic.flops);
    CHECK(counted.params == analytic.params);
    CHECK(param_count(net) == analytic.params);
  }
  SUBCASE("fpn, rcnn levels") {
    ArchGraph graph = build_fpn(8, resnet50(), DetectorPreset::rcnn);
    ExecutableNet net = instantiate(graph, 7);
    TensorNCHW input = random_input(1, 3, 128, 128, 1);
    CountResult counted = count_macs(net, input);
    Cost analytic = graph_cost(graph, infer_shapes(graph, 128, 128)).total;
    CHECK(counted.macs == analytic.flops);
    CHECK(counted.params == analytic.params);
  }
  SUBCASE("macs scale with batch size") {
    ArchGraph graph = build_fpg(fpg_preset(1, 8));
    ExecutableNet net = instantiate(graph, 3);
    std::uint64_t one = count_macs(net, random_input(1, 3, 128, 128, 2)).macs;
    std::uint64_t two = count_macs(net, random_input(2, 3, 128, 128, 2)).macs;
    CHECK(two == 2 * one);
  }
}

TEST_CASE("instantiation and forward are bit-deterministic in the seed") {
  ArchGraph graph = build_fpg(fpg_preset(2, 8));
  TensorNCHW input = random_input(1, 3, 128, 128, 9);

  ExecutableNet a = instantiate(graph, 1234);
  ExecutableNet b = instantiate(graph, 1234);
  ForwardResult ra = forward(a, input);
  ForwardResult rb = forward(b, input);
  REQUIRE(ra.outputs.size() == 5);
  for (const auto& [level, tensor] : ra.outputs)
    CHECK(tensor == rb.outputs.at(level));

  ExecutableNet c = instantiate(graph, 1235);
  ForwardResult rc = forward(c, input);
  bool any_diff = false;
  for (const auto& [level, tensor] : ra.outputs)
    if (!(tensor == rc.outputs.at(level))) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("edge storage order does not affect execution") {
  ArchGraph graph = build_fpg(fpg_preset(2, 8));
  ArchGraph shuffled = graph;
  std::mt19937_64 rng(99);
  std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng);
  REQUIRE_FALSE(shuffled.edges == graph.edges);

  TensorNCHW input = random_input(1, 3, 128, 128, 5);
  ForwardResult a = forward(instantiate(graph, 77), input);
  ForwardResult b = forward(instantiate(shuffled, 77), input);
  for (const auto& [level, tensor] : a.outputs)
    CHECK(tensor == b.outputs.at(level));
}

TEST_CASE("zeroed parameters produce exactly zero outputs") {
  ArchGraph graph = build_fpg(fpg_preset(1, 8));
  ExecutableNet net = instantiate(graph, 4);
  for (std::size_t i = 0; i < param_count(net); ++i) set_param(net, i, 0.0);
  ForwardResult result = forward(net, random_input(1, 3, 128, 128, 6));
  for (const auto& [level, tensor] : result.outputs) {
    for (double v : tensor.data()) CHECK(v == 0.0);
  }
}

TEST_CASE("without relu and offsets the net is exactly homogeneous") {
  ArchGraph graph = build_fpg(fpg_preset(2, 8));
  ExecutableNet net = instantiate(graph, 21, NetOptions{.linear_mode = true});
  for (EdgeParams& p : net.params) {
    std::fill(p.bias.begin(), p.bias.end(), 0.0);
    std::fill(p.beta.begin(), p.beta.end(), 0.0);
  }
  TensorNCHW x = random_input(1, 3, 128, 128, 8);
  TensorNCHW x2 = x;
  for (double& v : x2.data()) v *= 2.0;

  ForwardResult base = forward(net, x);
  ForwardResult doubled = forward(net, x2);
  for (const auto& [level, tensor] : base.outputs) {
    const TensorNCHW& big = doubled.outputs.at(level);
    REQUIRE(big.same_shape(tensor));
    for (std::size_t i = 0; i < tensor.size(); ++i)
      CHECK(big.data()[i] == 2.0 * tensor.data()[i]);  // doubling is exact
  }
}

TEST_CASE("forward output shapes agree with shape inference") {
  ArchGraph graph = build_fpg(fpg_preset(2, 8, DetectorPreset::rcnn));
  ExecutableNet net = instantiate(graph, 10);
  ForwardResult result = forward(net, random_input(2, 3, 128, 64, 11));
  ShapeTable shapes = infer_shapes(graph, 128, 64);
  for (const NodeRef& out : graph.outputs) {
    const TensorNCHW& tensor = result.outputs.at(out.level);
    const Shape& expect = shapes.at(out);
    CHECK(tensor.n() == 2);
    CHECK(tensor.c() == expect.c);
    CHECK(tensor.h() == expect.h);
    CHECK(tensor.w() == expect.w);
  }
}

TEST_CASE("forward rejects bad inputs; instantiate rejects bad graphs") {
  ArchGraph graph = build_fpg(fpg_preset(1, 8));
  ExecutableNet net = instantiate(graph, 2);
  CHECK_THROWS_AS(forward(net, random_input(1, 3, 100, 128, 0)),
                  std::invalid_argument);

  ArchGraph broken = graph;
  broken.nodes.push_back(broken.nodes.front());
  CHECK_THROWS_AS(instantiate(broken, 2), std::invalid_argument);
}

TEST_CASE("output-conv bias gradients equal the seeded output area") {
  ArchConfig config = fpg_preset(1, 8, DetectorPreset::rcnn);
  ArchGraph graph = build_fpg(config);
  ExecutableNet net = instantiate(graph, 15);
  TensorNCHW input = random_input(1, 3, 128, 128, 16);

  // L = sum of outputs: d L / d bias_c of the level-l output conv is the
  // number of positions in that output map.
  Gradients grads = gradients(net, input);
  ShapeTable shapes = infer_shapes(graph, 128, 128);
  for (std::size_t i = 0; i < net.graph.edges.size(); ++i) {
    const Edge& edge = net.graph.edges[i];
    if (edge.kind != EdgeKind::output_conv) continue;
    const Shape& s = shapes.at(edge.dst);
    for (double g : grads.edges[i].bias)
      CHECK(g == static_cast<double>(s.h) * s.w);
  }

  // Seeded loss: constant seeds scale the bias gradients exactly.
  std::map<int, TensorNCHW> seeds;
  ForwardResult result = forward(net, input);
  for (const auto& [level, tensor] : result.outputs)
    seeds.emplace(level,
                  TensorNCHW(tensor.n(), tensor.c(), tensor.h(), tensor.w(),
                             2.5));
  Gradients seeded = gradients(net, input, seeds);
  for (std::size_t i = 0; i < net.graph.edges.size(); ++i) {
    const Edge& edge = net.graph.edges[i];
    if (edge.kind != EdgeKind::output_conv) continue;
    const Shape& s = shapes.at(edge.dst);
    for (double g : seeded.edges[i].bias)
      CHECK(g == 2.5 * s.h * s.w);
  }
}

TEST_CASE("gradients are deterministic and cover the input") {
  ArchGraph graph = build_fpg(fpg_preset(1, 8, DetectorPreset::rcnn));
  ExecutableNet net = instantiate(graph, 18);
  TensorNCHW input = random_input(1, 3, 64, 64, 19);
  Gradients a = gradients(net, input);
  Gradients b = gradients(net, input);
  CHECK(a.input == b.input);
  REQUIRE(a.edges.size() == net.graph.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].weight == b.edges[i].weight);
    CHECK(a.edges[i].bias == b.edges[i].bias);
  }
  CHECK(a.input.same_shape(input));

  bool any_nonzero = false;
  for (double v : a.input.data())
    if (v != 0.0) any_nonzero = true;
  CHECK(any_nonzero);
}

TEST_CASE("flat parameter view round-trips") {
  ArchGraph graph = build_fpg(fpg_preset(1, 8, DetectorPreset::rcnn));
  ExecutableNet net = instantiate(graph, 23);
  const std::size_t n = param_count(net);
  REQUIRE(n > 0);
  const double before = get_param(net, n / 2);
  set_param(net, n / 2, before + 1.0);
  CHECK(get_param(net, n / 2) == before + 1.0);
  CHECK_THROWS_AS(get_param(net, n), std::out_of_range);
}

TEST_CASE("analytic gradients pass a finite-difference spot check") {
  ArchConfig config = fpg_preset(1, 8, DetectorPreset::rcnn);
  ArchGraph graph = build_fpg(config);
  ExecutableNet net = instantiate(graph, 31);
  TensorNCHW input = random_input(1, 3, 64, 64, 32);
  GradcheckReport report = gradcheck(net, input, 12, 1e-5, 33);
  CHECK(report.samples == 12);
  CHECK(report.max_rel_err < 1e-4);
}
