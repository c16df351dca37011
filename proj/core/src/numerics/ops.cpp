#include "quantcal/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include "quantcal/errors.hpp"

namespace quantcal {
namespace {

struct ConvGeometry {
  std::size_t c_in, h, w, c_out, k, h_out, w_out;
};

ConvGeometry conv_geometry(const Shape& input, const Shape& kernel, std::size_t padding) {
  if (input.size() != 3) throw DimensionError("conv2d: input must be [C,H,W], got " + shape_string(input));
  if (kernel.size() != 4) {
    throw DimensionError("conv2d: kernel must be [C_out,C_in,k,k], got " + shape_string(kernel));
  }
  if (kernel[1] != input[0]) {
    throw DimensionError("conv2d: kernel expects " + std::to_string(kernel[1]) + " input channels, input has " +
                         std::to_string(input[0]));
  }
  if (kernel[2] != kernel[3]) throw DimensionError("conv2d: kernel must be square");
  const std::size_t k = kernel[2];
  if (input[1] + 2 * padding < k || input[2] + 2 * padding < k) {
    throw DimensionError("conv2d: kernel larger than padded input");
  }
  return {input[0], input[1], input[2], kernel[0], k, input[1] + 2 * padding - k + 1,
          input[2] + 2 * padding - k + 1};
}

// Output rows/cols [lo, hi) whose tap at offset `d` stays inside [0, extent).
inline void valid_range(std::ptrdiff_t d, std::size_t extent, std::size_t out_extent, std::size_t& lo,
                        std::size_t& hi) {
  const auto e = static_cast<std::ptrdiff_t>(extent);
  const auto o = static_cast<std::ptrdiff_t>(out_extent);
  lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -d));
  hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(e - d, 0, o));
  if (hi < lo) hi = lo;
}

Tape& tape_of(Var a) {
  if (!a.tape) throw UsageError("variable is not attached to a tape");
  return *a.tape;
}

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw UsageError("operands recorded on different tapes");
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, std::size_t padding) {
  const auto g = conv_geometry(input.shape(), kernel.shape(), padding);
  Tensor out({g.c_out, g.h_out, g.w_out}, 0.0);
  const double* in = input.data().data();
  const double* ker = kernel.data().data();
  double* o = out.data().data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);

  for (std::size_t co = 0; co < g.c_out; ++co) {
    double* oc = o + co * g.h_out * g.w_out;
    for (std::size_t ci = 0; ci < g.c_in; ++ci) {
      const double* ic = in + ci * g.h * g.w;
      const double* kc = ker + (co * g.c_in + ci) * g.k * g.k;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t y0, y1;
        valid_range(dy, g.h, g.h_out, y0, y1);
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t x0, x1;
          valid_range(dx, g.w, g.w_out, x0, x1);
          const double wgt = kc[ky * g.k + kx];
          if (wgt == 0.0) continue;
          for (std::size_t y = y0; y < y1; ++y) {
            double* orow = oc + y * g.w_out;
            const double* irow = ic + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + dy) * g.w + dx;
            for (std::size_t x = x0; x < x1; ++x) orow[x] += wgt * irow[x];
          }
        }
      }
    }
  }
  return out;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape,
                         std::size_t padding) {
  const auto g = conv_geometry(input_shape, kernel.shape(), padding);
  Tensor grad_in(input_shape, 0.0);
  const double* go = grad_out.data().data();
  const double* ker = kernel.data().data();
  double* gi = grad_in.data().data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);

  for (std::size_t co = 0; co < g.c_out; ++co) {
    const double* goc = go + co * g.h_out * g.w_out;
    for (std::size_t ci = 0; ci < g.c_in; ++ci) {
      double* gic = gi + ci * g.h * g.w;
      const double* kc = ker + (co * g.c_in + ci) * g.k * g.k;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t y0, y1;
        valid_range(dy, g.h, g.h_out, y0, y1);
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t x0, x1;
          valid_range(dx, g.w, g.w_out, x0, x1);
          const double wgt = kc[ky * g.k + kx];
          for (std::size_t y = y0; y < y1; ++y) {
            const double* grow = goc + y * g.w_out;
            double* irow = gic + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + dy) * g.w + dx;
            for (std::size_t x = x0; x < x1; ++x) irow[x] += wgt * grow[x];
          }
        }
      }
    }
  }
  return grad_in;
}

void conv2d_accumulate_grad_kernel(const Tensor& grad_out, const Tensor& input, std::size_t padding,
                                   Tensor& grad_kernel) {
  const auto g = conv_geometry(input.shape(), grad_kernel.shape(), padding);
  const double* go = grad_out.data().data();
  const double* in = input.data().data();
  double* gk = grad_kernel.data().data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);

  for (std::size_t co = 0; co < g.c_out; ++co) {
    const double* goc = go + co * g.h_out * g.w_out;
    for (std::size_t ci = 0; ci < g.c_in; ++ci) {
      const double* ic = in + ci * g.h * g.w;
      double* kc = gk + (co * g.c_in + ci) * g.k * g.k;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        std::size_t y0, y1;
        valid_range(dy, g.h, g.h_out, y0, y1);
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
          std::size_t x0, x1;
          valid_range(dx, g.w, g.w_out, x0, x1);
          double acc = 0.0;
          for (std::size_t y = y0; y < y1; ++y) {
            const double* grow = goc + y * g.w_out;
            const double* irow = ic + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + dy) * g.w + dx;
            for (std::size_t x = x0; x < x1; ++x) acc += grow[x] * irow[x];
          }
          kc[ky * g.k + kx] += acc;
        }
      }
    }
  }
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = tape_of(a);
  Tensor out = t.value(a) + t.value(b);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), rg, [a = a.id, b = b.id](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    for (std::size_t id : {a, b}) {
      if (!tp.requires_grad(id)) continue;
      Tensor& gi = tp.grad_buffer(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = tape_of(a);
  require_same_shape(t.value(a), t.value(b), "mul");
  Tensor out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= t.value(b)[i];
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), rg, [a = a.id, b = b.id](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_buffer(a);
      const Tensor& vb = tp.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_buffer(b);
      const Tensor& va = tp.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  return t.record(Tensor::scalar(t.value(a).sum()), t.requires_grad(a), [a = a.id](Tape& tp, std::size_t self) {
    const double g = tp.grad_buffer(self)[0];
    for (auto& v : tp.grad_buffer(a).data()) v += g;
  });
}

Var conv2d(Var input, Var kernel, std::size_t padding) {
  require_same_tape(input, kernel);
  Tape& t = tape_of(input);
  Tensor out = conv2d(t.value(input), t.value(kernel), padding);
  const bool rg = t.requires_grad(input) || t.requires_grad(kernel);
  return t.record(std::move(out), rg, [in = input.id, k = kernel.id, padding](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    if (tp.requires_grad(k)) conv2d_accumulate_grad_kernel(g, tp.value(in), padding, tp.grad_buffer(k));
    if (tp.requires_grad(in)) {
      Tensor gi = conv2d_grad_input(g, tp.value(k), tp.value(in).shape(), padding);
      Tensor& acc = tp.grad_buffer(in);
      for (std::size_t i = 0; i < gi.size(); ++i) acc[i] += gi[i];
    }
  });
}

Var add_channel_bias(Var input, Var bias) {
  require_same_tape(input, bias);
  Tape& t = tape_of(input);
  const Tensor& x = t.value(input);
  const Tensor& b = t.value(bias);
  if (x.rank() != 3 || b.size() != x.dim(0)) {
    throw DimensionError("add_channel_bias: bias of size " + std::to_string(b.size()) + " for input " +
                         shape_string(x.shape()));
  }
  const std::size_t plane = x.dim(1) * x.dim(2);
  Tensor out = x;
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] += b[c];
  }
  const bool rg = t.requires_grad(input) || t.requires_grad(bias);
  return t.record(std::move(out), rg, [in = input.id, bi = bias.id, plane](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    if (tp.requires_grad(in)) {
      Tensor& gi = tp.grad_buffer(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
    if (tp.requires_grad(bi)) {
      Tensor& gb = tp.grad_buffer(bi);
      for (std::size_t c = 0; c < gb.size(); ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += g[c * plane + i];
        gb[c] += acc;
      }
    }
  });
}

Var silu(Var input) {
  Tape& t = tape_of(input);
  Tensor out = t.value(input);
  for (auto& v : out.data()) v = v * sigmoid(v);
  return t.record(std::move(out), t.requires_grad(input), [in = input.id](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    const Tensor& x = tp.value(in);
    Tensor& gi = tp.grad_buffer(in);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = sigmoid(x[i]);
      gi[i] += g[i] * s * (1.0 + x[i] * (1.0 - s));
    }
  });
}

Var avg_pool2(Var input) {
  Tape& t = tape_of(input);
  const Tensor& x = t.value(input);
  if (x.rank() != 3 || x.dim(1) % 2 != 0 || x.dim(2) % 2 != 0) {
    throw DimensionError("avg_pool2: input must be [C,H,W] with even H and W, got " + shape_string(x.shape()));
  }
  const std::size_t c = x.dim(0), h = x.dim(1) / 2, w = x.dim(2) / 2;
  Tensor out({c, h, w}, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx)
        out.at(ch, y, xx) = 0.25 * (x.at(ch, 2 * y, 2 * xx) + x.at(ch, 2 * y, 2 * xx + 1) +
                                    x.at(ch, 2 * y + 1, 2 * xx) + x.at(ch, 2 * y + 1, 2 * xx + 1));
  return t.record(std::move(out), t.requires_grad(input), [in = input.id, c, h, w](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    Tensor& gi = tp.grad_buffer(in);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) {
          const double v = 0.25 * g.at(ch, y, xx);
          gi.at(ch, 2 * y, 2 * xx) += v;
          gi.at(ch, 2 * y, 2 * xx + 1) += v;
          gi.at(ch, 2 * y + 1, 2 * xx) += v;
          gi.at(ch, 2 * y + 1, 2 * xx + 1) += v;
        }
  });
}

Var upsample2(Var input) {
  Tape& t = tape_of(input);
  const Tensor& x = t.value(input);
  if (x.rank() != 3) throw DimensionError("upsample2: input must be [C,H,W]");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out({c, 2 * h, 2 * w}, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx) out.at(ch, y, xx) = x.at(ch, y / 2, xx / 2);
  return t.record(std::move(out), t.requires_grad(input), [in = input.id, c, h, w](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    Tensor& gi = tp.grad_buffer(in);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < 2 * h; ++y)
        for (std::size_t xx = 0; xx < 2 * w; ++xx) gi.at(ch, y / 2, xx / 2) += g.at(ch, y, xx);
  });
}

Var concat_channels(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = tape_of(a);
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  if (va.rank() != 3 || vb.rank() != 3 || va.dim(1) != vb.dim(1) || va.dim(2) != vb.dim(2)) {
    throw DimensionError("concat_channels: incompatible shapes " + shape_string(va.shape()) + " and " +
                         shape_string(vb.shape()));
  }
  std::vector<double> data;
  data.reserve(va.size() + vb.size());
  data.insert(data.end(), va.values().begin(), va.values().end());
  data.insert(data.end(), vb.values().begin(), vb.values().end());
  Tensor out({va.dim(0) + vb.dim(0), va.dim(1), va.dim(2)}, std::move(data));
  const std::size_t split = va.size();
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), rg, [a = a.id, b = b.id, split](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad_buffer(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_buffer(a);
      for (std::size_t i = 0; i < split; ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_buffer(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[split + i];
    }
  });
}

Var linear(Var weight, Var input, Var bias) {
  require_same_tape(weight, input);
  require_same_tape(weight, bias);
  Tape& t = tape_of(weight);
  const Tensor& w = t.value(weight);
  const Tensor& x = t.value(input);
  const Tensor& b = t.value(bias);
  if (w.rank() != 2 || w.dim(1) != x.size() || b.size() != w.dim(0)) {
    throw DimensionError("linear: weight " + shape_string(w.shape()) + ", input " + shape_string(x.shape()) +
                         ", bias " + shape_string(b.shape()));
  }
  const std::size_t n_out = w.dim(0), n_in = w.dim(1);
  Tensor out({n_out}, 0.0);
  for (std::size_t o = 0; o < n_out; ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < n_in; ++i) acc += w[o * n_in + i] * x[i];
    out[o] = acc;
  }
  const bool rg = t.requires_grad(weight) || t.requires_grad(input) || t.requires_grad(bias);
  return t.record(std::move(out), rg,
                  [wi = weight.id, xi = input.id, bi = bias.id, n_out, n_in](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad_buffer(self);
                    if (tp.requires_grad(bi)) {
                      Tensor& gb = tp.grad_buffer(bi);
                      for (std::size_t o = 0; o < n_out; ++o) gb[o] += g[o];
                    }
                    if (tp.requires_grad(wi)) {
                      Tensor& gw = tp.grad_buffer(wi);
                      const Tensor& x = tp.value(xi);
                      for (std::size_t o = 0; o < n_out; ++o)
                        for (std::size_t i = 0; i < n_in; ++i) gw[o * n_in + i] += g[o] * x[i];
                    }
                    if (tp.requires_grad(xi)) {
                      Tensor& gx = tp.grad_buffer(xi);
                      const Tensor& w = tp.value(wi);
                      for (std::size_t o = 0; o < n_out; ++o)
                        for (std::size_t i = 0; i < n_in; ++i) gx[i] += g[o] * w[o * n_in + i];
                    }
                  });
}

}  // namespace quantcal
