#include "quantcal/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "quantcal/datasim/io.hpp"
#include "quantcal/errors.hpp"
#include "quantcal/numerics/adam.hpp"
#include "quantcal/numerics/parallel.hpp"
#include "quantcal/numerics/random.hpp"
#include "quantcal/training/pinball.hpp"

namespace quantcal {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (!(q_min > 0.0 && q_min < q_max && q_max < 1.0)) throw ConfigError("train: need 0 < q_min < q_max < 1");
}

double median_mse(const QuantileRegressor& model, const PairedDataset& set) {
  if (set.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> per_image(set.size());
  parallel_for(set.size(), [&](std::size_t i) {
    const Tensor pred = model.predict(set[i].y, 0.5);
    double acc = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) acc += (pred[k] - set[i].x[k]) * (pred[k] - set[i].x[k]);
    per_image[i] = acc / static_cast<double>(pred.size());
  });
  return std::accumulate(per_image.begin(), per_image.end(), 0.0) / static_cast<double>(set.size());
}

TrainStats train(QuantileModel& model, const PairedDataset& train_set, const PairedDataset& validation_set,
                 const TrainConfig& config, const CheckpointFn& on_checkpoint) {
  config.validate();
  if (train_set.empty()) throw UsageError("train: training set is empty");
  for (const auto& s : train_set) model.check_input(s.y);

  std::vector<Tensor> params = model.parameter_values();
  AdamState adam(AdamOptions{.lr = config.lr}, params);
  TrainStats stats;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  struct SampleResult {
    double loss = 0.0;
    std::vector<Tensor> grads;
  };

  bool done = false;
  for (std::size_t epoch = 1; epoch <= config.epochs && !done; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(config.seed, epoch);
    Rng shuffle_rng(derive_seed(epoch_seed, "shuffle"));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    for (std::size_t start = 0; start < order.size() && !done; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      const std::uint64_t step_seed = derive_seed(epoch_seed, stats.steps);
      std::vector<SampleResult> results(count);

      parallel_for(count, [&](std::size_t slot) {
        const PairedSample& s = train_set[order[start + slot]];
        Rng q_rng(derive_seed(step_seed, slot));
        const double q = sample_quantile(q_rng, config.q_min, config.q_max);
        Tape tape;
        const auto vars = model.attach(tape, true);
        Var loss = pinball_loss(model.forward(tape, vars, s.y, q), s.x, q);
        tape.backward(loss);
        results[slot].loss = tape.value(loss).item();
        results[slot].grads.reserve(vars.size());
        for (const auto& v : vars) results[slot].grads.push_back(tape.grad(v));
      });

      std::vector<Tensor> grads = std::move(results[0].grads);
      double batch_loss = results[0].loss;
      for (std::size_t slot = 1; slot < count; ++slot) {
        batch_loss += results[slot].loss;
        for (std::size_t p = 0; p < grads.size(); ++p) {
          auto dst = grads[p].data();
          auto src = results[slot].grads[p].data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
      }
      const double inv = 1.0 / static_cast<double>(count);
      for (auto& g : grads) {
        for (auto& v : g.data()) v *= inv;
        if (!g.all_finite()) {
          throw NanLossError("train: non-finite gradient at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(stats.steps));
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw NanLossError("train: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(stats.steps) + " (batch starting at position " + std::to_string(start) +
                           ")");
      }

      adam_update(params, grads, adam);
      model.set_parameter_values(params);
      loss_sum += batch_loss;
      loss_count += count;
      ++stats.steps;
      if (config.max_steps != 0 && stats.steps >= config.max_steps) done = true;
    }

    stats.epochs.push_back({epoch, loss_sum / static_cast<double>(loss_count), median_mse(model, validation_set)});
    if (on_checkpoint && config.checkpoint_every != 0 && epoch % config.checkpoint_every == 0) {
      on_checkpoint(epoch, model);
    }
  }
  return stats;
}

void write_train_stats_csv(const std::filesystem::path& path, const TrainStats& stats) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "epoch,mean_pinball,val_mse\n";
  for (const auto& e : stats.epochs) {
    os << e.epoch << ',' << format_double(e.mean_pinball) << ','
       << (std::isnan(e.val_mse) ? std::string("nan") : format_double(e.val_mse)) << '\n';
  }
}

}  // namespace quantcal
