#include "quantcal/datasim/simulate.hpp"

#include "quantcal/datasim/forward_models.hpp"
#include "quantcal/datasim/phantom.hpp"
#include "quantcal/errors.hpp"
#include "quantcal/numerics/random.hpp"

namespace quantcal {

std::string_view task_name(Task t) {
  switch (t) {
    case Task::gaussian: return "gaussian";
    case Task::gaussian_hetero: return "gaussian-hetero";
    case Task::poisson: return "poisson";
    case Task::mri_undersample: return "mri-undersample";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  for (Task t : {Task::gaussian, Task::gaussian_hetero, Task::poisson, Task::mri_undersample})
    if (task_name(t) == name) return t;
  throw ConfigError("unknown task \"" + std::string(name) + "\"");
}

PairedSample simulate_sample(const SimulationConfig& config, std::size_t index) {
  const std::uint64_t stream = derive_seed(config.seed, index);
  PairedSample s;
  s.x = gen_phantom(derive_seed(stream, "phantom"), config.height, config.width);
  s.forward_model = std::string(task_name(config.task));
  Rng rng(derive_seed(stream, "noise"));
  switch (config.task) {
    case Task::gaussian: {
      auto m = add_gaussian_noise(s.x, config.sigma_max, rng);
      s.y = std::move(m.y);
      s.param = m.param;
      break;
    }
    case Task::gaussian_hetero: {
      auto m = add_heteroscedastic_noise(s.x, config.sigma_max, rng);
      s.y = std::move(m.y);
      s.param = m.param;
      break;
    }
    case Task::poisson: {
      auto m = add_poisson_noise(s.x, config.lambda_min, config.lambda_max, rng);
      s.y = std::move(m.y);
      s.param = m.param;
      break;
    }
    case Task::mri_undersample:
      s.y = undersample_kspace(s.x, config.acceleration, config.center_fraction, derive_seed(stream, "mask"));
      s.param = config.acceleration;
      break;
  }
  return s;
}

PairedDataset simulate_dataset(const SimulationConfig& config, std::size_t n) {
  PairedDataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(simulate_sample(config, i));
  return out;
}

}  // namespace quantcal
