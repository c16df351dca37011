#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "quantcal/datasim/sample.hpp"

namespace quantcal {

enum class Task { gaussian, gaussian_hetero, poisson, mri_undersample };

std::string_view task_name(Task t);
Task parse_task(std::string_view name);

struct SimulationConfig {
  Task task = Task::gaussian;
  std::size_t height = 32;
  std::size_t width = 32;
  double sigma_max = 0.3;           ///< gaussian: max std; gaussian-hetero: max proportionality scale
  double lambda_min = 50.0;         ///< poisson
  double lambda_max = 100.0;
  double acceleration = 4.0;        ///< mri-undersample
  double center_fraction = 0.08;
  std::uint64_t seed = 0;
};

/// Sample `index` of the simulated dataset. Each index draws its phantom and
/// noise from its own RNG stream, so samples are independent of each other
/// and of the dataset size.
PairedSample simulate_sample(const SimulationConfig& config, std::size_t index);

PairedDataset simulate_dataset(const SimulationConfig& config, std::size_t n);

}  // namespace quantcal
