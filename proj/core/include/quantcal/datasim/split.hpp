#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace quantcal {

enum class Split { train, calibration, validation };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct SplitSpec {
  double train = 0.75;
  double calibration = 1.0 / 6.0;
  double validation = 1.0 / 12.0;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> validation;
};

/// Shuffles 0..n-1 with the spec seed and cuts it into three disjoint,
/// exhaustive, ascending index lists. Train and calibration sizes are
/// round(n * fraction); validation takes the remainder. Throws ConfigError
/// when a split would be empty or the fractions are invalid.
SplitIndices split_dataset(std::size_t n, const SplitSpec& spec);

}  // namespace quantcal
