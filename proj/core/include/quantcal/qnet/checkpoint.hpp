#pragma once

#include <filesystem>
#include <iosfwd>

#include "quantcal/qnet/model.hpp"

namespace quantcal {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint layout, all integers u32 and all reals f64, little-endian:
///
///   "QUTC" | version
///   | n_stages | channels[n_stages] | kernel_size | embed_dim | mlp_hidden | base_frequency
///   | n_tensors
///   | per tensor: name_len | name bytes | rank | dims[rank] | data[prod(dims)]
void write_checkpoint(std::ostream& os, const QuantileModel& model);
QuantileModel read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const QuantileModel& model);
QuantileModel load_checkpoint(const std::filesystem::path& path);

}  // namespace quantcal
