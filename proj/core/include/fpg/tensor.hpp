// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace fpg {

/// Dense double-precision NCHW tensor. Small and simple on purpose: the
/// executor exists to cross-check the analytic model at toy sizes, not to
/// be fast.
class TensorNCHW {
 public:
  TensorNCHW() = default;
  TensorNCHW(int n, int c, int h, int w, double value = 0.0);

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int in, int ic, int iy, int ix) {
    return data_[((static_cast<std::size_t>(in) * c_ + ic) * h_ + iy) * w_ +
                 ix];
  }
  double at(int in, int ic, int iy, int ix) const {
    return data_[((static_cast<std::size_t>(in) * c_ + ic) * h_ + iy) * w_ +
                 ix];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const TensorNCHW& o) const {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }
  bool operator==(const TensorNCHW&) const = default;

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

/// 2-D convolution with kernel k x k, stride 1 or 2, zero padding k/2
/// (so stride 1 preserves H x W and stride 2 halves it exactly for even
/// inputs). `weight` is laid out (out_ch, in_ch, k, k) in an NCHW tensor;
/// `bias` may be empty. If `macs` is non-null it is incremented by
/// k*k*in_ch*out_ch*out_h*out_w per batch element.
TensorNCHW conv2d(const TensorNCHW& x, const TensorNCHW& weight,
                  const std::vector<double>& bias, int stride,
                  std::uint64_t* macs = nullptr);

/// Gradients of conv2d. `gx`, `gw`, `gb` are accumulated into (they must
/// either be empty or already have the right shape).
void conv2d_backward(const TensorNCHW& x, const TensorNCHW& weight,
                     int stride, const TensorNCHW& gy, TensorNCHW* gx,
                     TensorNCHW* gw, std::vector<double>* gb);

TensorNCHW relu(const TensorNCHW& x);
TensorNCHW relu_backward(const TensorNCHW& x, const TensorNCHW& gy);

/// Inference-mode batch norm: y = gamma * (x - mean) / sqrt(var + eps) + beta,
/// all per channel.
TensorNCHW bn_infer(const TensorNCHW& x, const std::vector<double>& gamma,
                    const std::vector<double>& beta,
                    const std::vector<double>& mean,
                    const std::vector<double>& var, double eps = 1e-5);
void bn_infer_backward(const TensorNCHW& x, const std::vector<double>& gamma,
                       const std::vector<double>& mean,
                       const std::vector<double>& var, const TensorNCHW& gy,
                       TensorNCHW* gx, std::vector<double>* ggamma,
                       std::vector<double>* gbeta, double eps = 1e-5);

/// 2x2 window, stride 2 (inputs must have even H and W). Max ties go to the
/// first element in row-major window order, which keeps gradients
/// deterministic.
TensorNCHW maxpool2(const TensorNCHW& x);
TensorNCHW maxpool2_backward(const TensorNCHW& x, const TensorNCHW& gy);
TensorNCHW avgpool2(const TensorNCHW& x);
TensorNCHW avgpool2_backward(const TensorNCHW& x, const TensorNCHW& gy);

/// Nearest-neighbour x2 upsampling and its adjoint (2x2 block sum).
TensorNCHW nearest_up2(const TensorNCHW& x);
TensorNCHW nearest_up2_backward(const TensorNCHW& gy);

/// Repeats channels cyclically to reach `c_out` (out[c] = in[c % c_in]).
TensorNCHW tile_channels(const TensorNCHW& x, int c_out);
TensorNCHW tile_channels_backward(int c_in, const TensorNCHW& gy);

void add_inplace(TensorNCHW& acc, const TensorNCHW& t);
double sum_all(const TensorNCHW& t);

}  // namespace fpg
