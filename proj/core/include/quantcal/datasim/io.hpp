#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "quantcal/datasim/split.hpp"
#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

inline constexpr std::uint32_t kTensorFileVersion = 1;

/// "QTNS" | u32 version | u32 rank | u32 dims[rank] | f64 payload, little-endian.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

struct ManifestRow {
  std::size_t sample_id = 0;
  std::string x_path;  ///< relative to the manifest's directory
  std::string y_path;
  std::string forward_model;
  double param = 0.0;
  Split split = Split::train;
};

/// CSV with header sample_id,x_path,y_path,forward_model,param,split.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

}  // namespace quantcal
