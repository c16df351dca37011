#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quantcal/numerics/tape.hpp"
#include "quantcal/qnet/embedding.hpp"
#include "quantcal/qnet/regressor.hpp"

namespace quantcal {

/// Shape of the encoder-decoder backbone.
///
/// `channels[i]` is the width of encoder stage i; every stage but the
/// bottleneck is followed by 2x2 mean pooling, so images must be divisible by
/// 2^channels.size(). The decoder mirrors the encoder and concatenates the
/// matching encoder features before each convolution.
struct ArchConfig {
  std::vector<std::size_t> channels{16, 32};
  std::size_t kernel_size = 3;
  QuantileEmbeddingConfig embedding;

  std::size_t down_stages() const noexcept { return channels.size(); }
  void validate() const;
  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor value;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// The quantile-conditioned regressor f(y, q).
///
/// q is encoded sinusoidally, passed through a two-layer SiLU MLP, and each
/// backbone stage adds a learned per-channel projection of that embedding to
/// its convolution output before the activation.
class QuantileModel : public QuantileRegressor {
 public:
  /// He-style fan-in initialisation, reproducible from `seed`.
  QuantileModel(ArchConfig arch, std::uint64_t seed);
  /// Adopts existing parameters; names and shapes must match the architecture.
  QuantileModel(ArchConfig arch, std::vector<NamedTensor> params);

  const ArchConfig& arch() const noexcept { return arch_; }
  std::span<const NamedTensor> parameters() const noexcept { return params_; }
  std::span<NamedTensor> parameters() noexcept { return params_; }
  std::vector<Tensor> parameter_values() const;
  void set_parameter_values(std::span<const Tensor> values);
  std::size_t parameter_count() const noexcept;

  /// Records the forward pass on `tape`. `params` are the tape handles
  /// returned by attach(), in parameters() order.
  Var forward(Tape& tape, std::span<const Var> params, const Tensor& y, double q) const;
  std::vector<Var> attach(Tape& tape, bool trainable) const;

  /// Embedding vector (after the MLP) for level q.
  std::vector<double> embed(double q) const;

  Tensor predict(const Tensor& y, double q) const override;

  /// Throws UsageError when y is not [1,H,W] with H, W divisible by 2^stages.
  void check_input(const Tensor& y) const;

 private:
  ArchConfig arch_;
  std::vector<NamedTensor> params_;
};

/// Expected parameter names and shapes for an architecture, in storage order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const ArchConfig& arch);

QuantileModel init_model(const ArchConfig& arch, std::uint64_t seed);

}  // namespace quantcal
