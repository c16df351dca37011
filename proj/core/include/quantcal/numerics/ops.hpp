#pragma once

#include <cstddef>

#include "quantcal/numerics/tape.hpp"
#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

// Plain tensor kernels.

/// Same-stride 2D cross-correlation of a [C_in,H,W] input with a
/// [C_out,C_in,k,k] kernel. Output is [C_out, H+2p-k+1, W+2p-k+1].
Tensor conv2d(const Tensor& input, const Tensor& kernel, std::size_t padding);

/// Gradient of conv2d with respect to its input.
Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape,
                         std::size_t padding);
/// Gradient of conv2d with respect to its kernel, accumulated into `grad_kernel`.
void conv2d_accumulate_grad_kernel(const Tensor& grad_out, const Tensor& input, std::size_t padding,
                                   Tensor& grad_kernel);

// Differentiable ops recorded on the tape of their first argument.

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var sum(Var a);
Var conv2d(Var input, Var kernel, std::size_t padding);
/// Adds bias[c] to every pixel of channel c of a [C,H,W] tensor.
Var add_channel_bias(Var input, Var bias);
/// x * sigmoid(x)
Var silu(Var input);
/// 2x2 mean pooling of a [C,H,W] tensor; H and W must be even.
Var avg_pool2(Var input);
/// Nearest-neighbour 2x upsampling of a [C,H,W] tensor.
Var upsample2(Var input);
/// Concatenates two [C,H,W] tensors along the channel axis.
Var concat_channels(Var a, Var b);
/// weight[out,in] * x[in] + bias[out]
Var linear(Var weight, Var input, Var bias);

}  // namespace quantcal
