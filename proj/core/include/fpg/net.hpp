// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fpg/graph.hpp"
#include "fpg/tensor.hpp"

namespace fpg {

/// Learnable scalars of one edge operator. Convs get weight + bias; batch
/// norm gets scale/shift (learnable) plus running mean/var (buffers, not
/// counted as params).
struct EdgeParams {
  TensorNCHW weight;  // (out_ch, in_ch, k, k); empty if no conv step
  std::vector<double> bias;
  std::vector<double> gamma, beta;  // empty if no bn step
  std::vector<double> mean, var;    // bn buffers
};

struct NetOptions {
  /// Replace every ReLU by identity. Useful for linearity-based tests.
  bool linear_mode = false;
};

/// An instantiated, runnable pyramid. Edges are held in canonical order
/// (see edge_canonical_less), so parameter assignment and execution do not
/// depend on the storage order of the source graph.
struct ExecutableNet {
  ArchGraph graph;  // edges sorted canonically
  NetOptions options;
  std::vector<EdgeParams> params;  // parallel to graph.edges
};

/// Deterministic instantiation: identical (graph, seed) pairs produce
/// bit-identical parameters. Conv weights and biases are uniform in
/// [-0.1, 0.1]; batch norm starts as the identity (gamma 1, beta 0,
/// mean 0, var 1).
ExecutableNet instantiate(const ArchGraph& graph, std::uint64_t seed,
                          const NetOptions& options = {});

struct ForwardResult {
  /// Output feature map per pyramid level.
  std::map<int, TensorNCHW> outputs;
  /// Convolution MACs actually executed (pyramid edges only; the backbone
  /// stub is conv-free).
  std::uint64_t macs = 0;
};

/// Runs the net on an NCHW input. The backbone is a fixed, parameter-free
/// stub: each backbone node is the input average-pooled to the node's
/// stride with channels tiled to the stage width. Input H and W must be
/// positive multiples of 2^max_level.
ForwardResult forward(const ExecutableNet& net, const TensorNCHW& input);

struct CountResult {
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
};

/// Instrumented forward pass: executed conv MACs plus the number of
/// learnable scalars in the net. For batch-1 inputs this matches graph_cost
/// on the same graph and input shape by construction (MACs scale with the
/// batch; the analytic model is per image).
CountResult count_macs(const ExecutableNet& net, const TensorNCHW& input);

struct EdgeGrads {
  TensorNCHW weight;
  std::vector<double> bias;
  std::vector<double> gamma, beta;
};

struct Gradients {
  std::vector<EdgeGrads> edges;  // parallel to net.graph.edges
  TensorNCHW input;
};

/// Reverse-mode gradients of L = sum over levels of <seed_l, output_l>.
/// With no seeds every output gets an all-ones seed, i.e. L is the plain
/// sum of all output elements.
Gradients gradients(const ExecutableNet& net, const TensorNCHW& input);
Gradients gradients(const ExecutableNet& net, const TensorNCHW& input,
                    const std::map<int, TensorNCHW>& output_seeds);

/// Flat parameter view over all edges in canonical order (conv weight,
/// bias, gamma, beta per edge; bn buffers excluded).
std::size_t param_count(const ExecutableNet& net);
double get_param(const ExecutableNet& net, std::size_t index);
void set_param(ExecutableNet& net, std::size_t index, double value);
double grad_param(const ExecutableNet& net, const Gradients& grads,
                  std::size_t index);

struct GradcheckReport {
  /// Max relative error over verified samples, |ga-gf| / max(|ga|,|gf|);
  /// pairs below `tiny_floor` in magnitude are required to agree within
  /// 1e-10 absolutely instead (central differences drown in roundoff
  /// there) and do not enter max_rel_err.
  double max_rel_err = 0.0;
  std::size_t samples = 0;
  std::size_t rejected = 0;  // perturbation crossed a ReLU/pool kink
  double tiny_floor = 1e-6;
};

/// Central-difference check of `gradients` on `samples` randomly chosen
/// parameters. Perturbations that flip any ReLU sign or pooling argmax
/// (detected via an activation-pattern fingerprint at theta +/- eps) are
/// rejected and resampled, since the loss is not differentiable there.
GradcheckReport gradcheck(ExecutableNet& net, const TensorNCHW& input,
                          std::size_t samples, double eps, std::uint64_t seed);

}  // namespace fpg
