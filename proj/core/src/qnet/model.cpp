#include "quantcal/qnet/model.hpp"

#include <cmath>
#include <random>

#include "quantcal/errors.hpp"
#include "quantcal/numerics/ops.hpp"
#include "quantcal/numerics/random.hpp"

namespace quantcal {
namespace {

// Indices into the parameter list.
constexpr std::size_t kEmbedW1 = 0, kEmbedB1 = 1, kEmbedW2 = 2, kEmbedB2 = 3, kFirstStage = 4;
constexpr std::size_t kPerStage = 4;  // conv weight, conv bias, film weight, film bias

struct StageSpec {
  std::string name;
  std::size_t in, out;
};

// enc0..enc{n-1}, mid, dec{n-1}..dec0
std::vector<StageSpec> stage_specs(const ArchConfig& arch) {
  const auto& ch = arch.channels;
  const std::size_t n = ch.size();
  std::vector<StageSpec> specs;
  for (std::size_t i = 0; i < n; ++i) specs.push_back({"enc" + std::to_string(i), i == 0 ? 1 : ch[i - 1], ch[i]});
  specs.push_back({"mid", ch[n - 1], ch[n - 1]});
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t below = (i == n - 1) ? ch[n - 1] : ch[i + 1];
    specs.push_back({"dec" + std::to_string(i), below + ch[i], ch[i]});
  }
  return specs;
}

}  // namespace

void ArchConfig::validate() const {
  if (channels.empty()) throw ConfigError("architecture needs at least one encoder stage");
  for (auto c : channels)
    if (c == 0) throw ConfigError("channel counts must be positive");
  if (kernel_size == 0 || kernel_size % 2 == 0) throw ConfigError("kernel_size must be odd");
  embedding.validate();
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const ArchConfig& arch) {
  arch.validate();
  const std::size_t d = arch.embedding.dim, h = arch.embedding.mlp_hidden, k = arch.kernel_size;
  std::vector<std::pair<std::string, Shape>> layout{
      {"embed.fc1.weight", {h, d}},
      {"embed.fc1.bias", {h}},
      {"embed.fc2.weight", {d, h}},
      {"embed.fc2.bias", {d}},
  };
  for (const auto& s : stage_specs(arch)) {
    layout.push_back({s.name + ".conv.weight", {s.out, s.in, k, k}});
    layout.push_back({s.name + ".conv.bias", {s.out}});
    layout.push_back({s.name + ".film.weight", {s.out, d}});
    layout.push_back({s.name + ".film.bias", {s.out}});
  }
  layout.push_back({"out.conv.weight", {1, arch.channels[0], 1, 1}});
  layout.push_back({"out.conv.bias", {1}});
  return layout;
}

QuantileModel::QuantileModel(ArchConfig arch, std::uint64_t seed) : arch_(std::move(arch)) {
  Rng rng(derive_seed(seed, "init"));
  for (auto& [name, shape] : parameter_layout(arch_)) {
    Tensor t(shape, 0.0);
    const bool is_weight = name.ends_with(".weight");
    if (is_weight) {
      std::size_t fan_in = 1;
      for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
      for (auto& v : t.data()) v = dist(rng);
    }
    params_.push_back({name, std::move(t)});
  }
}

QuantileModel::QuantileModel(ArchConfig arch, std::vector<NamedTensor> params)
    : arch_(std::move(arch)), params_(std::move(params)) {
  const auto layout = parameter_layout(arch_);
  if (layout.size() != params_.size()) {
    throw DimensionError("model expects " + std::to_string(layout.size()) + " parameter tensors, got " +
                         std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].first != params_[i].name || layout[i].second != params_[i].value.shape()) {
      throw DimensionError("parameter " + std::to_string(i) + " expected " + layout[i].first +
                           shape_string(layout[i].second) + ", got " + params_[i].name +
                           shape_string(params_[i].value.shape()));
    }
  }
}

std::vector<Tensor> QuantileModel::parameter_values() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void QuantileModel::set_parameter_values(std::span<const Tensor> values) {
  if (values.size() != params_.size()) throw DimensionError("set_parameter_values: count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require_same_shape(params_[i].value, values[i], "set_parameter_values");
    params_[i].value = values[i];
  }
}

std::size_t QuantileModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<Var> QuantileModel::attach(Tape& tape, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(trainable ? tape.parameter(p.value) : tape.constant(p.value));
  return vars;
}

void QuantileModel::check_input(const Tensor& y) const {
  if (y.rank() != 3 || y.dim(0) != 1) {
    throw UsageError("model input must be [1,H,W], got " + shape_string(y.shape()));
  }
  const std::size_t factor = std::size_t{1} << arch_.down_stages();
  if (y.dim(1) % factor != 0 || y.dim(2) % factor != 0 || y.dim(1) == 0 || y.dim(2) == 0) {
    throw UsageError("image size " + shape_string(y.shape()) + " not divisible by " + std::to_string(factor));
  }
}

Var QuantileModel::forward(Tape& tape, std::span<const Var> p, const Tensor& y, double q) const {
  require_quantile_level(q, "forward");
  check_input(y);
  if (p.size() != params_.size()) throw UsageError("forward: wrong number of parameter handles");

  const std::size_t pad = arch_.kernel_size / 2;
  const std::size_t n = arch_.down_stages();

  Var raw = tape.constant(Tensor({arch_.embedding.dim}, sinusoidal_encoding(q, arch_.embedding)));
  Var hidden = silu(linear(p[kEmbedW1], raw, p[kEmbedB1]));
  Var emb = linear(p[kEmbedW2], hidden, p[kEmbedB2]);
  Var emb_act = silu(emb);

  std::size_t stage = 0;
  auto block = [&](Var x) {
    const std::size_t base = kFirstStage + kPerStage * stage++;
    Var h = add_channel_bias(conv2d(x, p[base], pad), p[base + 1]);
    Var shift = linear(p[base + 2], emb_act, p[base + 3]);
    return silu(add_channel_bias(h, shift));
  };

  Var x = tape.constant(y);
  std::vector<Var> skips;
  for (std::size_t i = 0; i < n; ++i) {
    x = block(x);
    skips.push_back(x);
    x = avg_pool2(x);
  }
  x = block(x);
  for (std::size_t i = n; i-- > 0;) x = block(concat_channels(upsample2(x), skips[i]));

  const std::size_t out_w = kFirstStage + kPerStage * stage;
  return add_channel_bias(conv2d(x, p[out_w], 0), p[out_w + 1]);
}

std::vector<double> QuantileModel::embed(double q) const {
  Tape tape;
  const auto p = attach(tape, false);
  Var raw = tape.constant(Tensor({arch_.embedding.dim}, sinusoidal_encoding(q, arch_.embedding)));
  Var emb = linear(p[kEmbedW2], silu(linear(p[kEmbedW1], raw, p[kEmbedB1])), p[kEmbedB2]);
  return emb.value().values();
}

Tensor QuantileModel::predict(const Tensor& y, double q) const {
  Tape tape;
  const auto p = attach(tape, false);
  return tape.value(forward(tape, p, y, q));
}

QuantileModel init_model(const ArchConfig& arch, std::uint64_t seed) { return QuantileModel(arch, seed); }

}  // namespace quantcal
