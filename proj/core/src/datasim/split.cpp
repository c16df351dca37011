#include "quantcal/datasim/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quantcal/errors.hpp"
#include "quantcal/numerics/random.hpp"

namespace quantcal {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::calibration: return "calibration";
    case Split::validation: return "validation";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "calibration") return Split::calibration;
  if (name == "validation") return Split::validation;
  throw IoError("unknown split label \"" + std::string(name) + "\"");
}

SplitIndices split_dataset(std::size_t n, const SplitSpec& spec) {
  if (n < 3) throw ConfigError("split_dataset: need at least 3 samples");
  if (!(spec.train > 0 && spec.calibration > 0 && spec.validation > 0)) {
    throw ConfigError("split_dataset: fractions must be positive");
  }
  if (std::abs(spec.train + spec.calibration + spec.validation - 1.0) > 1e-6) {
    throw ConfigError("split_dataset: fractions must sum to 1");
  }
  const double nd = static_cast<double>(n);
  const auto n_train = static_cast<std::size_t>(std::llround(nd * spec.train));
  const auto n_calib = static_cast<std::size_t>(std::llround(nd * spec.calibration));
  if (n_train == 0 || n_calib == 0 || n_train + n_calib >= n) {
    throw ConfigError("split_dataset: rounding leaves an empty split for n=" + std::to_string(n));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "split"));
  std::shuffle(order.begin(), order.end(), rng);

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.calibration.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                         order.begin() + static_cast<std::ptrdiff_t>(n_train + n_calib));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_calib), order.end());
  for (auto* v : {&out.train, &out.calibration, &out.validation}) std::sort(v->begin(), v->end());
  return out;
}

}  // namespace quantcal
