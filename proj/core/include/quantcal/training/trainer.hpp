#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "quantcal/datasim/sample.hpp"
#include "quantcal/qnet/model.hpp"

namespace quantcal {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double q_min = 0.005;
  double q_max = 0.995;
  std::size_t checkpoint_every = 0;  ///< 0 disables intermediate checkpoints
  /// Stop after this many optimizer steps (0 = run all epochs). The epoch in
  /// progress is still recorded in the stats.
  std::size_t max_steps = 0;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;       ///< 1-based
  double mean_pinball = 0.0;   ///< mean per-sample pinball loss over the epoch
  double val_mse = 0.0;        ///< median-query MSE on the validation set, NaN if none
};

struct TrainStats {
  std::vector<EpochStats> epochs;
  std::size_t steps = 0;
};

using CheckpointFn = std::function<void(std::size_t epoch, const QuantileModel& model)>;

/// Minimises the pinball loss with Adam. Every sample in every step gets its
/// own uniformly drawn quantile level from a stream keyed by (seed, epoch,
/// step, slot), so results do not depend on thread scheduling.
///
/// Throws UsageError for an empty training set and NanLossError if a
/// non-finite loss or gradient appears.
TrainStats train(QuantileModel& model, const PairedDataset& train_set, const PairedDataset& validation_set,
                 const TrainConfig& config, const CheckpointFn& on_checkpoint = {});

/// Mean over images of mean((f(y, 0.5) - x)^2).
double median_mse(const QuantileRegressor& model, const PairedDataset& set);

/// epoch,mean_pinball,val_mse
void write_train_stats_csv(const std::filesystem::path& path, const TrainStats& stats);

}  // namespace quantcal
