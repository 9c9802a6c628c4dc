// Copyright 2026 The FPG Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "fpg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpg {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

TensorNCHW::TensorNCHW(int n, int c, int h, int w, double value)
    : n_(n), c_(c), h_(h), w_(w) {
  require(n >= 0 && c >= 0 && h >= 0 && w >= 0,
          "tensor dims must be non-negative");
  data_.assign(static_cast<std::size_t>(n) * c * h * w, value);
}

TensorNCHW conv2d(const TensorNCHW& x, const TensorNCHW& weight,
                  const std::vector<double>& bias, int stride,
                  std::uint64_t* macs) {
  require(stride == 1 || stride == 2, "conv2d stride must be 1 or 2");
  require(weight.h() == weight.w(), "conv2d kernel must be square");
  require(weight.c() == x.c(), "conv2d in-channel mismatch");
  const int k = weight.h();
  require(k % 2 == 1, "conv2d kernel must be odd");
  const int pad = k / 2;
  const int out_c = weight.n();
  require(bias.empty() || static_cast<int>(bias.size()) == out_c,
          "conv2d bias size mismatch");
  const int out_h = (x.h() + stride - 1) / stride;
  const int out_w = (x.w() + stride - 1) / stride;

  TensorNCHW y(x.n(), out_c, out_h, out_w);
  for (int in = 0; in < x.n(); ++in) {
    for (int oc = 0; oc < out_c; ++oc) {
      const double b = bias.empty() ? 0.0 : bias[oc];
      for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
          double acc = b;
          for (int ic = 0; ic < x.c(); ++ic) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= x.h()) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= x.w()) continue;
                acc += x.at(in, ic, iy, ix) * weight.at(oc, ic, ky, kx);
              }
            }
          }
          y.at(in, oc, oy, ox) = acc;
        }
      }
    }
  }
  if (macs) {
    *macs += static_cast<std::uint64_t>(k) * k * x.c() * out_c * out_h *
             out_w * x.n();
  }
  return y;
}

void conv2d_backward(const TensorNCHW& x, const TensorNCHW& weight,
                     int stride, const TensorNCHW& gy, TensorNCHW* gx,
                     TensorNCHW* gw, std::vector<double>* gb) {
  const int k = weight.h();
  const int pad = k / 2;
  if (gx && gx->empty()) *gx = TensorNCHW(x.n(), x.c(), x.h(), x.w());
  if (gw && gw->empty())
    *gw = TensorNCHW(weight.n(), weight.c(), weight.h(), weight.w());
  if (gb && gb->empty()) gb->assign(weight.n(), 0.0);

  for (int in = 0; in < x.n(); ++in) {
    for (int oc = 0; oc < weight.n(); ++oc) {
      for (int oy = 0; oy < gy.h(); ++oy) {
        for (int ox = 0; ox < gy.w(); ++ox) {
          const double g = gy.at(in, oc, oy, ox);
          if (gb) (*gb)[oc] += g;
          for (int ic = 0; ic < x.c(); ++ic) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= x.h()) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= x.w()) continue;
                if (gw) gw->at(oc, ic, ky, kx) += g * x.at(in, ic, iy, ix);
                if (gx) gx->at(in, ic, iy, ix) += g * weight.at(oc, ic, ky, kx);
              }
            }
          }
        }
      }
    }
  }
}

TensorNCHW relu(const TensorNCHW& x) {
  TensorNCHW y = x;
  for (double& v : y.data()) v = std::max(v, 0.0);
  return y;
}

TensorNCHW relu_backward(const TensorNCHW& x, const TensorNCHW& gy) {
  TensorNCHW gx = gy;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    if (x.data()[i] <= 0.0) gx.data()[i] = 0.0;
  }
  return gx;
}

TensorNCHW bn_infer(const TensorNCHW& x, const std::vector<double>& gamma,
                    const std::vector<double>& beta,
                    const std::vector<double>& mean,
                    const std::vector<double>& var, double eps) {
  require(static_cast<int>(gamma.size()) == x.c() &&
              gamma.size() == beta.size() && gamma.size() == mean.size() &&
              gamma.size() == var.size(),
          "bn parameter size mismatch");
  TensorNCHW y = x;
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      const double scale = gamma[ic] / std::sqrt(var[ic] + eps);
      const double shift = beta[ic] - mean[ic] * scale;
      for (int iy = 0; iy < x.h(); ++iy) {
        for (int ix = 0; ix < x.w(); ++ix) {
          y.at(in, ic, iy, ix) = x.at(in, ic, iy, ix) * scale + shift;
        }
      }
    }
  }
  return y;
}

void bn_infer_backward(const TensorNCHW& x, const std::vector<double>& gamma,
                       const std::vector<double>& mean,
                       const std::vector<double>& var, const TensorNCHW& gy,
                       TensorNCHW* gx, std::vector<double>* ggamma,
                       std::vector<double>* gbeta, double eps) {
  if (gx && gx->empty()) *gx = TensorNCHW(x.n(), x.c(), x.h(), x.w());
  if (ggamma && ggamma->empty()) ggamma->assign(gamma.size(), 0.0);
  if (gbeta && gbeta->empty()) gbeta->assign(gamma.size(), 0.0);
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      const double inv_std = 1.0 / std::sqrt(var[ic] + eps);
      for (int iy = 0; iy < x.h(); ++iy) {
        for (int ix = 0; ix < x.w(); ++ix) {
          const double g = gy.at(in, ic, iy, ix);
          if (gx) gx->at(in, ic, iy, ix) += g * gamma[ic] * inv_std;
          if (ggamma)
            (*ggamma)[ic] += g * (x.at(in, ic, iy, ix) - mean[ic]) * inv_std;
          if (gbeta) (*gbeta)[ic] += g;
        }
      }
    }
  }
}

TensorNCHW maxpool2(const TensorNCHW& x) {
  require(x.h() % 2 == 0 && x.w() % 2 == 0, "maxpool2 needs even H and W");
  TensorNCHW y(x.n(), x.c(), x.h() / 2, x.w() / 2);
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int oy = 0; oy < y.h(); ++oy) {
        for (int ox = 0; ox < y.w(); ++ox) {
          double best = x.at(in, ic, 2 * oy, 2 * ox);
          best = std::max(best, x.at(in, ic, 2 * oy, 2 * ox + 1));
          best = std::max(best, x.at(in, ic, 2 * oy + 1, 2 * ox));
          best = std::max(best, x.at(in, ic, 2 * oy + 1, 2 * ox + 1));
          y.at(in, ic, oy, ox) = best;
        }
      }
    }
  }
  return y;
}

TensorNCHW maxpool2_backward(const TensorNCHW& x, const TensorNCHW& gy) {
  TensorNCHW gx(x.n(), x.c(), x.h(), x.w());
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int oy = 0; oy < gy.h(); ++oy) {
        for (int ox = 0; ox < gy.w(); ++ox) {
          // First maximum in row-major window order receives the gradient.
          int by = 2 * oy, bx = 2 * ox;
          double best = x.at(in, ic, by, bx);
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              if (x.at(in, ic, 2 * oy + dy, 2 * ox + dx) > best) {
                best = x.at(in, ic, 2 * oy + dy, 2 * ox + dx);
                by = 2 * oy + dy;
                bx = 2 * ox + dx;
              }
            }
          }
          gx.at(in, ic, by, bx) += gy.at(in, ic, oy, ox);
        }
      }
    }
  }
  return gx;
}

TensorNCHW avgpool2(const TensorNCHW& x) {
  require(x.h() % 2 == 0 && x.w() % 2 == 0, "avgpool2 needs even H and W");
  TensorNCHW y(x.n(), x.c(), x.h() / 2, x.w() / 2);
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int oy = 0; oy < y.h(); ++oy) {
        for (int ox = 0; ox < y.w(); ++ox) {
          y.at(in, ic, oy, ox) =
              0.25 * (x.at(in, ic, 2 * oy, 2 * ox) +
                      x.at(in, ic, 2 * oy, 2 * ox + 1) +
                      x.at(in, ic, 2 * oy + 1, 2 * ox) +
                      x.at(in, ic, 2 * oy + 1, 2 * ox + 1));
        }
      }
    }
  }
  return y;
}

TensorNCHW avgpool2_backward(const TensorNCHW& x, const TensorNCHW& gy) {
  TensorNCHW gx(x.n(), x.c(), x.h(), x.w());
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int oy = 0; oy < gy.h(); ++oy) {
        for (int ox = 0; ox < gy.w(); ++ox) {
          const double g = 0.25 * gy.at(in, ic, oy, ox);
          gx.at(in, ic, 2 * oy, 2 * ox) += g;
          gx.at(in, ic, 2 * oy, 2 * ox + 1) += g;
          gx.at(in, ic, 2 * oy + 1, 2 * ox) += g;
          gx.at(in, ic, 2 * oy + 1, 2 * ox + 1) += g;
        }
      }
    }
  }
  return gx;
}

TensorNCHW nearest_up2(const TensorNCHW& x) {
  TensorNCHW y(x.n(), x.c(), x.h() * 2, x.w() * 2);
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int oy = 0; oy < y.h(); ++oy) {
        for (int ox = 0; ox < y.w(); ++ox) {
          y.at(in, ic, oy, ox) = x.at(in, ic, oy / 2, ox / 2);
        }
      }
    }
  }
  return y;
}

TensorNCHW nearest_up2_backward(const TensorNCHW& gy) {
  require(gy.h() % 2 == 0 && gy.w() % 2 == 0,
          "nearest_up2_backward needs even H and W");
  TensorNCHW gx(gy.n(), gy.c(), gy.h() / 2, gy.w() / 2);
  for (int in = 0; in < gy.n(); ++in) {
    for (int ic = 0; ic < gy.c(); ++ic) {
      for (int oy = 0; oy < gy.h(); ++oy) {
        for (int ox = 0; ox < gy.w(); ++ox) {
          gx.at(in, ic, oy / 2, ox / 2) += gy.at(in, ic, oy, ox);
        }
      }
    }
  }
  return gx;
}

TensorNCHW tile_channels(const TensorNCHW& x, int c_out) {
  require(x.c() > 0 && c_out > 0, "tile_channels needs positive channels");
  TensorNCHW y(x.n(), c_out, x.h(), x.w());
  for (int in = 0; in < x.n(); ++in) {
    for (int oc = 0; oc < c_out; ++oc) {
      for (int iy = 0; iy < x.h(); ++iy) {
        for (int ix = 0; ix < x.w(); ++ix) {
          y.at(in, oc, iy, ix) = x.at(in, oc % x.c(), iy, ix);
        }
      }
    }
  }
  return y;
}

TensorNCHW tile_channels_backward(int c_in, const TensorNCHW& gy) {
  TensorNCHW gx(gy.n(), c_in, gy.h(), gy.w());
  for (int in = 0; in < gy.n(); ++in) {
    for (int oc = 0; oc < gy.c(); ++oc) {
      for (int iy = 0; iy < gy.h(); ++iy) {
        for (int ix = 0; ix < gy.w(); ++ix) {
          gx.at(in, oc % c_in, iy, ix) += gy.at(in, oc, iy, ix);
        }
      }
    }
  }
  return gx;
}

void add_inplace(TensorNCHW& acc, const TensorNCHW& t) {
  require(acc.same_shape(t), "add_inplace shape mismatch");
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += t.data()[i];
}

double sum_all(const TensorNCHW& t) {
  double total = 0.0;
  for (double v : t.data()) total += v;
  return total;
}

}  // namespace fpg
