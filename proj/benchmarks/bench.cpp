// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the analytic paths (construction, validation, shape
// inference, costing) and the toy executor.

#include <benchmark/benchmark.h>

#include <random>

#include "fpg/config.hpp"
#include "fpg/cost.hpp"
#include "fpg/graph.hpp"
#include "fpg/net.hpp"
#include "fpg/shapes.hpp"

namespace {

fpg::TensorNCHW random_input(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  fpg::TensorNCHW t(1, 3, h, w);
  for (double& v : t.data())
    v = (static_cast<double>(rng() >> 11) / 9007199254740992.0) * 2.0 - 1.0;
  return t;
}

void bm_build_fpg(benchmark::State& state) {
  const fpg::ArchConfig config = fpg::fpg_preset(9, 256);
  for (auto _ : state) {
    fpg::ArchGraph graph = fpg::build_fpg(config);
    benchmark::DoNotOptimize(graph.edges.data());
  }
}
BENCHMARK(bm_build_fpg);

void bm_validate(benchmark::State& state) {
  const fpg::ArchGraph graph = fpg::build_fpg(fpg::fpg_preset(9, 256));
  for (auto _ : state) {
    auto errors = fpg::validate(graph);
    benchmark::DoNotOptimize(errors);
  }
}
BENCHMARK(bm_validate);

void bm_infer_shapes(benchmark::State& state) {
  const fpg::ArchGraph graph = fpg::build_fpg(fpg::fpg_preset(9, 256));
  for (auto _ : state) {
    fpg::ShapeTable shapes = fpg::infer_shapes(graph, 640, 640);
    benchmark::DoNotOptimize(shapes.by_node);
  }
}
BENCHMARK(bm_infer_shapes);

void bm_graph_cost(benchmark::State& state) {
  const fpg::ArchGraph graph = fpg::build_fpg(fpg::fpg_preset(9, 256));
  const fpg::ShapeTable shapes = fpg::infer_shapes(graph, 640, 640);
  for (auto _ : state) {
    fpg::CostReport report = fpg::graph_cost(graph, shapes);
    benchmark::DoNotOptimize(report.total);
  }
}
BENCHMARK(bm_graph_cost);

void bm_detector_cost(benchmark::State& state) {
  const fpg::ArchConfig config = fpg::fpg_preset(9, 256);
  for (auto _ : state) {
    fpg::DetectorCost cost = fpg::detector_cost(config, 640, 640);
    benchmark::DoNotOptimize(cost.total);
  }
}
BENCHMARK(bm_detector_cost);

void bm_forward(benchmark::State& state) {
  fpg::ArchConfig config = fpg::fpg_preset(2, 8, fpg::DetectorPreset::rcnn);
  fpg::ExecutableNet net = fpg::instantiate(fpg::build_fpg(config), 1);
  const fpg::TensorNCHW input = random_input(64, 64, 2);
  for (auto _ : state) {
    fpg::ForwardResult result = fpg::forward(net, input);
    benchmark::DoNotOptimize(result.outputs);
  }
}
BENCHMARK(bm_forward);

void bm_gradients(benchmark::State& state) {
  fpg::ArchConfig config = fpg::fpg_preset(2, 8, fpg::DetectorPreset::rcnn);
  fpg::ExecutableNet net = fpg::instantiate(fpg::build_fpg(config), 1);
  const fpg::TensorNCHW input = random_input(64, 64, 2);
  for (auto _ : state) {
    fpg::Gradients grads = fpg::gradients(net, input);
    benchmark::DoNotOptimize(grads.edges.data());
  }
}
BENCHMARK(bm_gradients);

}  // namespace

BENCHMARK_MAIN();
