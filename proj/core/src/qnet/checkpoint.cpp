#include "quantcal/qnet/checkpoint.hpp"

#include <fstream>

#include "quantcal/binary_io.hpp"

namespace quantcal {

void write_checkpoint(std::ostream& os, const QuantileModel& model) {
  const auto& arch = model.arch();
  binio::write_bytes(os, "QUTC");
  binio::write_u32(os, kCheckpointVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(arch.channels.size()));
  for (auto c : arch.channels) binio::write_u32(os, static_cast<std::uint32_t>(c));
  binio::write_u32(os, static_cast<std::uint32_t>(arch.kernel_size));
  binio::write_u32(os, static_cast<std::uint32_t>(arch.embedding.dim));
  binio::write_u32(os, static_cast<std::uint32_t>(arch.embedding.mlp_hidden));
  binio::write_f64(os, arch.embedding.base_frequency);

  const auto params = model.parameters();
  binio::write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    binio::write_u32(os, static_cast<std::uint32_t>(p.name.size()));
    binio::write_bytes(os, p.name);
    binio::write_u32(os, static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) binio::write_u32(os, static_cast<std::uint32_t>(d));
    for (double v : p.value.data()) binio::write_f64(os, v);
  }
  if (!os) throw IoError("failed writing checkpoint");
}

QuantileModel read_checkpoint(std::istream& is) {
  binio::expect_magic(is, "QUTC", "checkpoint");
  const auto version = binio::read_u32(is, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  ArchConfig arch;
  const auto n_stages = binio::read_u32(is, "stage count");
  if (n_stages == 0 || n_stages > 16) throw IoError("checkpoint: implausible stage count");
  arch.channels.clear();
  for (std::uint32_t i = 0; i < n_stages; ++i) arch.channels.push_back(binio::read_u32(is, "channels"));
  arch.kernel_size = binio::read_u32(is, "kernel size");
  arch.embedding.dim = binio::read_u32(is, "embedding dim");
  arch.embedding.mlp_hidden = binio::read_u32(is, "embedding hidden");
  arch.embedding.base_frequency = binio::read_f64(is, "base frequency");

  const auto n_tensors = binio::read_u32(is, "tensor count");
  std::vector<NamedTensor> params;
  params.reserve(n_tensors);
  for (std::uint32_t t = 0; t < n_tensors; ++t) {
    const auto name_len = binio::read_u32(is, "name length");
    if (name_len > 4096) throw IoError("checkpoint: implausible parameter name length");
    std::string name = binio::read_bytes(is, name_len, "parameter name");
    const auto rank = binio::read_u32(is, "rank");
    if (rank > 8) throw IoError("checkpoint: implausible tensor rank");
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(binio::read_u32(is, "dims"));
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = binio::read_f64(is, "tensor data");
    params.push_back({std::move(name), Tensor(std::move(shape), std::move(data))});
  }
  return QuantileModel(std::move(arch), std::move(params));
}

void save_checkpoint(const std::filesystem::path& path, const QuantileModel& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(os, model);
}

QuantileModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(is);
}

}  // namespace quantcal
