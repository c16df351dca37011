#pragma once

#include <cstddef>
#include <cstdint>

#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

/// Deterministic synthetic image [1,H,W] in [0,1]: a smooth gradient
/// background overlaid with random ellipses and bars, contrast-stretched so
/// that at least 10% of pixels are above 0.8 and at least 10% below 0.2.
/// Throws DomainError when H or W is below 16.
Tensor gen_phantom(std::uint64_t seed, std::size_t height, std::size_t width);

}  // namespace quantcal
