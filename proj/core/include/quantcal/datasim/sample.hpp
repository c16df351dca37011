#pragma once

#include <string>
#include <vector>

#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

/// Ground truth x and measurement y, both [1,H,W] in [0,1].
struct PairedSample {
  Tensor x;
  Tensor y;
  std::string forward_model;  ///< "gaussian", "gaussian-hetero", "poisson", "mri-undersample"
  double param = 0.0;         ///< sigma, per-image scale, lambda, or acceleration
};

using PairedDataset = std::vector<PairedSample>;

}  // namespace quantcal
