// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

#include "fpg/shapes.hpp"

namespace fpg {

namespace {

using NodeKey = std::tuple<NodeRole, int, int>;

NodeKey key_of(const NodeRef& node) {
  return {node.role, node.pathway, node.level};
}

/// 53-bit uniform in [-0.1, 0.1]; written out explicitly (rather than via
/// std::uniform_real_distribution) so streams are identical across standard
/// library implementations.
double next_uniform(std::mt19937_64& rng) {
  const double unit =
      static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return 0.2 * unit - 0.1;
}

const OpStep* conv_step(const Edge& edge) {
  for (const OpStep& step : edge.op.steps) {
    if (step.type == OpType::conv) return &step;
  }
  return nullptr;
}

bool has_step(const Edge& edge, OpType type) {
  return std::any_of(edge.op.steps.begin(), edge.op.steps.end(),
                     [&](const OpStep& s) { return s.type == type; });
}

/// FNV-1a accumulator for the activation pattern (ReLU signs, pooling
/// argmax choices). Two parameter settings with equal fingerprints induce
/// the same piecewise-linear region, so central differences are safe.
struct Fingerprint {
  std::uint64_t hash = 1469598103934665603ull;
  void mix(std::uint64_t v) {
    hash ^= v;
    hash *= 1099511628211ull;
  }
};

struct Workspace {
  std::map<NodeKey, TensorNCHW> values;
  // Inputs to every op step of every edge, for the backward pass.
  std::vector<std::vector<TensorNCHW>> edge_step_inputs;
  // Inputs to each avgpool of every backbone stub chain.
  std::map<NodeKey, std::vector<TensorNCHW>> backbone_chains;
  std::uint64_t macs = 0;
  bool keep = false;          // retain caches for backward
  Fingerprint* fp = nullptr;  // optional activation fingerprint
};

void fingerprint_relu(Fingerprint* fp, const TensorNCHW& x) {
  if (!fp) return;
  std::uint64_t word = 0;
  int bits = 0;
  for (double v : x.data()) {
    word = (word << 1) | (v > 0.0 ? 1u : 0u);
    if (++bits == 64) {
      fp->mix(word);
      word = 0;
      bits = 0;
    }
  }
  if (bits > 0) fp->mix(word | (1ull << 63));
}

void fingerprint_maxpool(Fingerprint* fp, const TensorNCHW& x) {
  if (!fp) return;
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int oy = 0; oy < x.h() / 2; ++oy) {
        for (int ox = 0; ox < x.w() / 2; ++ox) {
          int arg = 0;
          double best = x.at(in, ic, 2 * oy, 2 * ox);
          for (int d = 1; d < 4; ++d) {
            const double v = x.at(in, ic, 2 * oy + d / 2, 2 * ox + d % 2);
            if (v > best) {
              best = v;
              arg = d;
            }
          }
          fp->mix(static_cast<std::uint64_t>(arg) + 2);
        }
      }
    }
  }
}

TensorNCHW eval_edge(const ExecutableNet& net, std::size_t edge_index,
                     const TensorNCHW& src_value, Workspace& ws) {
  const Edge& edge = net.graph.edges[edge_index];
  const EdgeParams& params = net.params[edge_index];
  TensorNCHW x = src_value;
  auto& cache = ws.edge_step_inputs[edge_index];
  for (const OpStep& step : edge.op.steps) {
    if (ws.keep) cache.push_back(x);
    switch (step.type) {
      case OpType::identity:
        break;
      case OpType::relu:
        if (!net.options.linear_mode) {
          fingerprint_relu(ws.fp, x);
          x = relu(x);
        }
        break;
      case OpType::conv:
        x = conv2d(x, params.weight, params.bias, step.stride, &ws.macs);
        break;
      case OpType::bn:
        x = bn_infer(x, params.gamma, params.beta, params.mean, params.var);
        break;
      case OpType::nearest_up2:
        x = nearest_up2(x);
        break;
      case OpType::maxpool2:
        fingerprint_maxpool(ws.fp, x);
        x = maxpool2(x);
        break;
      case OpType::avgpool2:
        x = avgpool2(x);
        break;
    }
  }
  return x;
}

void backprop_edge(const ExecutableNet& net, std::size_t edge_index,
                   const TensorNCHW& gy, Workspace& ws, EdgeGrads& grads,
                   TensorNCHW& gsrc) {
  const Edge& edge = net.graph.edges[edge_index];
  const EdgeParams& params = net.params[edge_index];
  const auto& cache = ws.edge_step_inputs[edge_index];
  TensorNCHW g = gy;
  for (std::size_t s = edge.op.steps.size(); s-- > 0;) {
    const OpStep& step = edge.op.steps[s];
    const TensorNCHW& x = cache[s];
    switch (step.type) {
      case OpType::identity:
        break;
      case OpType::relu:
        if (!net.options.linear_mode) g = relu_backward(x, g);
        break;
      case OpType::conv: {
        TensorNCHW gx;
        conv2d_backward(x, params.weight, step.stride, g, &gx, &grads.weight,
                        &grads.bias);
        g = std::move(gx);
        break;
      }
      case OpType::bn: {
        TensorNCHW gx;
        bn_infer_backward(x, params.gamma, params.mean, params.var, g, &gx,
                          &grads.gamma, &grads.beta);
        g = std::move(gx);
        break;
      }
      case OpType::nearest_up2:
        g = nearest_up2_backward(g);
        break;
      case OpType::maxpool2:
        g = maxpool2_backward(x, g);
        break;
      case OpType::avgpool2:
        g = avgpool2_backward(x, g);
        break;
    }
  }
  add_inplace(gsrc, g);
}

TensorNCHW backbone_stub(const ExecutableNet& net, const NodeRef& node,
                         const TensorNCHW& input, Workspace& ws) {
  TensorNCHW x = input;
  std::vector<TensorNCHW> chain;
  for (int s = 0; s < node.level; ++s) {
    if (ws.keep) chain.push_back(x);
    x = avgpool2(x);
  }
  if (ws.keep) ws.backbone_chains[key_of(node)] = std::move(chain);
  return tile_channels(x, node.channels);
}

void run_forward(const ExecutableNet& net, const TensorNCHW& input,
                 Workspace& ws) {
  if (auto errors = check_input(net.graph.config, input.h(), input.w());
      !errors.empty()) {
    std::string message;
    for (const std::string& e : errors) {
      if (!message.empty()) message += "; ";
      message += e;
    }
    throw std::invalid_argument(message);
  }
  ws.edge_step_inputs.assign(net.graph.edges.size(), {});

  // Incoming edge indices per node, in canonical fusion order. Edges are
  // stored canonically sorted, so storage order is already fusion order.
  std::map<NodeKey, std::vector<std::size_t>> incoming;
  for (std::size_t i = 0; i < net.graph.edges.size(); ++i)
    incoming[key_of(net.graph.edges[i].dst)].push_back(i);

  for (const NodeRef& node : net.graph.topo_order()) {
    if (node.role == NodeRole::backbone) {
      ws.values[key_of(node)] = backbone_stub(net, node, input, ws);
      continue;
    }
    TensorNCHW acc;
    for (std::size_t edge_index : incoming[key_of(node)]) {
      const Edge& edge = net.graph.edges[edge_index];
      TensorNCHW v =
          eval_edge(net, edge_index, ws.values.at(key_of(edge.src)), ws);
      if (acc.empty()) {
        acc = std::move(v);
      } else {
        add_inplace(acc, v);
      }
    }
    if (acc.empty())
      throw std::runtime_error("node " + node_name(node) + " has no inputs");
    ws.values[key_of(node)] = std::move(acc);
  }
}

std::size_t edge_param_size(const EdgeParams& p) {
  return p.weight.size() + p.bias.size() + p.gamma.size() + p.beta.size();
}

/// Maps a flat parameter index to (edge, field, offset). Fields are ordered
/// weight, bias, gamma, beta within each edge.
struct ParamSlot {
  std::size_t edge = 0;
  int field = 0;  // 0 weight, 1 bias, 2 gamma, 3 beta
  std::size_t offset = 0;
};

ParamSlot locate_param(const ExecutableNet& net, std::size_t index) {
  for (std::size_t e = 0; e < net.params.size(); ++e) {
    const EdgeParams& p = net.params[e];
    const std::size_t sizes[4] = {p.weight.size(), p.bias.size(),
                                  p.gamma.size(), p.beta.size()};
    for (int field = 0; field < 4; ++field) {
      if (index < sizes[field]) return {e, field, index};
      index -= sizes[field];
    }
  }
  throw std::out_of_range("parameter index out of range");
}

}  // namespace

ExecutableNet instantiate(const ArchGraph& graph, std::uint64_t seed,
                          const NetOptions& options) {
  if (auto errors = validate(graph); !errors.empty())
    throw std::invalid_argument("invalid graph: " + errors.front());

  ExecutableNet net;
  net.graph = graph;
  net.options = options;
  std::sort(net.graph.edges.begin(), net.graph.edges.end(),
            edge_canonical_less);

  std::mt19937_64 rng(seed);
  net.params.resize(net.graph.edges.size());
  for (std::size_t i = 0; i < net.graph.edges.size(); ++i) {
    const Edge& edge = net.graph.edges[i];
    EdgeParams& p = net.params[i];
    if (const OpStep* conv = conv_step(edge)) {
      p.weight = TensorNCHW(edge.dst.channels, edge.src.channels,
                            conv->kernel, conv->kernel);
      for (double& v : p.weight.data()) v = next_uniform(rng);
      p.bias.resize(edge.dst.channels);
      for (double& v : p.bias) v = next_uniform(rng);
    }
    if (has_step(edge, OpType::bn)) {
      p.gamma.assign(edge.dst.channels, 1.0);
      p.beta.assign(edge.dst.channels, 0.0);
      p.mean.assign(edge.dst.channels, 0.0);
      p.var.assign(edge.dst.channels, 1.0);
    }
  }
  return net;
}

ForwardResult forward(const ExecutableNet& net, const TensorNCHW& input) {
  Workspace ws;
  run_forward(net, input, ws);
  ForwardResult result;
  result.macs = ws.macs;
  for (const NodeRef& out : net.graph.outputs)
    result.outputs[out.level] = std::move(ws.values.at(key_of(out)));
  return result;
}

CountResult count_macs(const ExecutableNet& net, const TensorNCHW& input) {
  Workspace ws;
  run_forward(net, input, ws);
  return {ws.macs, static_cast<std::uint64_t>(param_count(net))};
}

Gradients gradients(const ExecutableNet& net, const TensorNCHW& input) {
  return gradients(net, input, {});
}

Gradients gradients(const ExecutableNet& net, const TensorNCHW& input,
                    const std::map<int, TensorNCHW>& output_seeds) {
  Workspace ws;
  ws.keep = true;
  run_forward(net, input, ws);

  Gradients out;
  out.edges.resize(net.graph.edges.size());
  out.input = TensorNCHW(input.n(), input.c(), input.h(), input.w());

  std::map<NodeKey, TensorNCHW> node_grads;
  for (const NodeRef& node : net.graph.nodes) {
    const TensorNCHW& v = ws.values.at(key_of(node));
    node_grads[key_of(node)] = TensorNCHW(v.n(), v.c(), v.h(), v.w());
  }
  for (const NodeRef& out_node : net.graph.outputs) {
    TensorNCHW& g = node_grads.at(key_of(out_node));
    auto it = output_seeds.find(out_node.level);
    if (it == output_seeds.end()) {
      g = TensorNCHW(g.n(), g.c(), g.h(), g.w(), 1.0);
    } else {
      if (!it->second.same_shape(g))
        throw std::invalid_argument("output seed shape mismatch at level " +
                                    std::to_string(out_node.level));
      g = it->second;
    }
  }

  std::map<NodeKey, std::vector<std::size_t>> incoming;
  for (std::size_t i = 0; i < net.graph.edges.size(); ++i)
    incoming[key_of(net.graph.edges[i].dst)].push_back(i);

  std::vector<NodeRef> order = net.graph.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeRef& node = *it;
    const TensorNCHW& g = node_grads.at(key_of(node));
    if (node.role == NodeRole::backbone) {
      // Stub adjoint: untile the channels, then undo each avgpool.
      const auto& chain = ws.backbone_chains.at(key_of(node));
      const int pooled_c = chain.empty() ? input.c() : chain.back().c();
      TensorNCHW gx = tile_channels_backward(pooled_c, g);
      for (std::size_t s = chain.size(); s-- > 0;)
        gx = avgpool2_backward(chain[s], gx);
      add_inplace(out.input, gx);
      continue;
    }
    for (std::size_t edge_index : incoming[key_of(node)]) {
      const Edge& edge = net.graph.edges[edge_index];
      backprop_edge(net, edge_index, g, ws, out.edges[edge_index],
                    node_grads.at(key_of(edge.src)));
    }
  }
  return out;
}

std::size_t param_count(const ExecutableNet& net) {
  std::size_t total = 0;
  for (const EdgeParams& p : net.params) total += edge_param_size(p);
  return total;
}

double get_param(const ExecutableNet& net, std::size_t index) {
  ParamSlot slot = locate_param(net, index);
  const EdgeParams& p = net.params[slot.edge];
  switch (slot.field) {
    case 0: return p.weight.data()[slot.offset];
    case 1: return p.bias[slot.offset];
    case 2: return p.gamma[slot.offset];
    default: return p.beta[slot.offset];
  }
}

void set_param(ExecutableNet& net, std::size_t index, double value) {
  ParamSlot slot = locate_param(net, index);
  EdgeParams& p = net.params[slot.edge];
  switch (slot.field) {
    case 0: p.weight.data()[slot.offset] = value; break;
    case 1: p.bias[slot.offset] = value; break;
    case 2: p.gamma[slot.offset] = value; break;
    default: p.beta[slot.offset] = value; break;
  }
}

double grad_param(const ExecutableNet& net, const Gradients& grads,
                  std::size_t index) {
  ParamSlot slot = locate_param(net, index);
  const EdgeGrads& g = grads.edges[slot.edge];
  switch (slot.field) {
    case 0: return g.weight.empty() ? 0.0 : g.weight.data()[slot.offset];
    case 1: return g.bias.empty() ? 0.0 : g.bias[slot.offset];
    case 2: return g.gamma.empty() ? 0.0 : g.gamma[slot.offset];
    default: return g.beta.empty() ? 0.0 : g.beta[slot.offset];
  }
}

namespace {

double loss_and_fingerprint(const ExecutableNet& net, const TensorNCHW& input,
                            std::uint64_t* fingerprint) {
  Workspace ws;
  Fingerprint fp;
  ws.fp = &fp;
  run_forward(net, input, ws);
  double loss = 0.0;
  for (const NodeRef& out : net.graph.outputs)
    loss += sum_all(ws.values.at(key_of(out)));
  if (fingerprint) *fingerprint = fp.hash;
  return loss;
}

}  // namespace

GradcheckReport gradcheck(ExecutableNet& net, const TensorNCHW& input,
                          std::size_t samples, double eps,
                          std::uint64_t seed) {
  GradcheckReport report;
  const std::size_t total = param_count(net);
  if (total == 0) return report;

  Gradients analytic = gradients(net, input);
  std::uint64_t base_fp = 0;
  (void)loss_and_fingerprint(net, input, &base_fp);

  std::mt19937_64 rng(seed);
  const std::size_t max_attempts = samples * 20 + 100;
  std::size_t attempts = 0;
  while (report.samples < samples && attempts < max_attempts) {
    ++attempts;
    const std::size_t index = rng() % total;
    const double old = get_param(net, index);

    std::uint64_t fp_plus = 0, fp_minus = 0;
    set_param(net, index, old + eps);
    const double loss_plus = loss_and_fingerprint(net, input, &fp_plus);
    set_param(net, index, old - eps);
    const double loss_minus = loss_and_fingerprint(net, input, &fp_minus);
    set_param(net, index, old);

    if (fp_plus != base_fp || fp_minus != base_fp) {
      ++report.rejected;  // crossed a kink; the comparison is meaningless
      continue;
    }

    const double fd = (loss_plus - loss_minus) / (2.0 * eps);
    const double ga = grad_param(net, analytic, index);
    const double denom = std::max(std::abs(ga), std::abs(fd));
    ++report.samples;
    if (denom < report.tiny_floor) {
      // Too small for central differences; demand absolute agreement.
      if (std::abs(ga - fd) > 1e-10) report.max_rel_err = 1.0;
    } else {
      report.max_rel_err =
          std::max(report.max_rel_err, std::abs(ga - fd) / denom);
    }
  }
  return report;
}

}  // namespace fpg
