#include "wnet/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <thread>

#include "wnet/error.hpp"
#include "wnet/nn/checkpoint.hpp"
#include "wnet/rng.hpp"
#include "wnet/train/adam.hpp"

namespace wnet::train {

Sample make_sample(const ImageTile& tile, const PointSet& points, const DensityConfig& cfg) {
  points.check_bounds(tile.height(), tile.width());
  return Sample{tile,
                nn::Targets{render_binary_target(points, tile.height(), tile.width(), cfg),
                            render_density(points, tile.height(), tile.width(), cfg)}};
}

nn::LossBreakdown mean_loss(const nn::WNetModel& model, const std::vector<Sample>& samples,
                            const nn::LossConfig& cfg, nn::Precision precision) {
  nn::LossBreakdown sum;
  for (const Sample& s : samples) {
    const auto l = nn::evaluate_loss(model, s.tile, s.targets, cfg, precision);
    sum.bce += l.bce;
    sum.l1 += l.l1;
    sum.total += l.total;
  }
  const double n = static_cast<double>(std::max<std::size_t>(samples.size(), 1));
  return {sum.bce / n, sum.l1 / n, sum.total / n};
}

namespace {

// Per-sample gradients for one batch, computed by up to `threads` workers.
// Results are reduced in batch order so the sum never depends on scheduling.
std::vector<nn::Gradients> batch_gradients(const nn::WNetModel& model, const std::vector<Sample>& data,
                                           const std::vector<std::size_t>& batch, const nn::LossConfig& loss,
                                           nn::Precision precision, int threads) {
  std::vector<std::optional<nn::Gradients>> slots(batch.size());
  std::vector<std::exception_ptr> errors(batch.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < batch.size(); i += stride) {
      try {
        const Sample& s = data[batch[i]];
        slots[i] = nn::backward(model, s.tile, s.targets, loss, precision);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, batch.size()));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<nn::Gradients> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

nn::ParamStore average(const std::vector<nn::Gradients>& grads) {
  nn::ParamStore sum = grads.front().grads.zeros_like();
  for (const auto& g : grads) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      auto& dst = sum.items()[i].values;
      const auto& src = g.grads.items()[i].values;
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(grads.size());
  for (auto& p : sum.items()) {
    for (double& v : p.values) v *= inv;
  }
  return sum;
}

double calibrate_ratio(const nn::WNetModel& model, const std::vector<Sample>& data,
                       const std::vector<std::size_t>& batch, nn::Precision precision) {
  if (!model.has_stage2()) return 1.0;
  nn::LossConfig probe;
  probe.l1_ratio = 1.0;
  double bce = 0.0, l1 = 0.0;
  for (std::size_t i : batch) {
    const auto l = nn::evaluate_loss(model, data[i].tile, data[i].targets, probe, precision);
    bce += l.bce;
    l1 += l.l1;
  }
  return bce / std::max(l1, 1e-8);
}

}  // namespace

TrainResult train(const nn::WNetModel& model, const std::vector<Sample>& train_set, const std::vector<Sample>& val,
                  const TrainConfig& cfg, const nn::LossConfig& loss_cfg, const std::filesystem::path& out_dir,
                  const TrainHooks& hooks) {
  cfg.validate();
  TrainResult result{model, model, TrainState::initial(cfg), loss_cfg, std::nullopt, std::nullopt};
  if (cfg.max_epochs == 0 || train_set.empty()) return result;
  const std::vector<Sample>& val_set = val.empty() ? train_set : val;

  std::ofstream log;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    result.log = out_dir / "train.log";
    log.open(*result.log, std::ios::trunc);
    if (!log) throw Error(ErrorKind::io, "cannot open " + result.log->string());
    log.precision(10);
  }

  nn::WNetModel& current = result.final_model;
  Adam adam(current.params);
  const std::size_t n_params = current.params.size();
  const auto stage2_mask = std::make_unique<bool[]>(n_params);
  for (std::size_t i = 0; i < n_params; ++i) stage2_mask[i] = current.params.items()[i].name.starts_with("stage2.");
  TrainState& state = result.state;
  double best_recorded = std::numeric_limits<double>::infinity();
  const std::int64_t interval = check_interval(cfg, train_set.size());
  nn::LossBreakdown since_check;
  std::int64_t steps_since_check = 0;

  auto run_check = [&] {
    const auto v = mean_loss(current, val_set, result.loss, cfg.precision);
    const double n = static_cast<double>(std::max<std::int64_t>(steps_since_check, 1));
    CheckRecord rec{state.step, state.current_lr, since_check.bce / n, since_check.l1 / n, since_check.total / n,
                    v.total};
    since_check = {};
    steps_since_check = 0;
    state.history.push_back(rec);
    if (log.is_open()) {
      log << rec.step << '\t' << rec.lr << '\t' << rec.bce << '\t' << rec.l1 << '\t' << rec.total << '\t'
          << rec.val_total << '\n';
      log.flush();
    }
    if (hooks.on_check) hooks.on_check(rec);
    if (v.total < best_recorded) {
      best_recorded = v.total;
      result.best_model = current;
      if (!out_dir.empty()) {
        result.checkpoint = out_dir / "model.ckpt";
        nn::save_checkpoint(*result.checkpoint, current,
                            {result.loss.l1_ratio, static_cast<std::uint64_t>(state.step), v.total});
      }
    }
    state = lr_schedule_tick(std::move(state), v.total, cfg);
  };

  bool done = false;
  for (int epoch = 0; epoch < cfg.max_epochs && !done; ++epoch) {
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed * 0x2545f4914f6cdd1dULL + static_cast<std::uint64_t>(epoch) + 1);
    rng.shuffle(order);

    std::int64_t seen = 0;
    std::int64_t next_check = interval;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      if (!result.loss.l1_ratio) result.loss.l1_ratio = calibrate_ratio(current, train_set, batch, cfg.precision);

      const auto grads = batch_gradients(current, train_set, batch, result.loss, cfg.precision, cfg.num_threads);
      for (const auto& g : grads) {
        since_check.bce += g.loss.bce / static_cast<double>(grads.size());
        since_check.l1 += g.loss.l1 / static_cast<double>(grads.size());
        since_check.total += g.loss.total / static_cast<double>(grads.size());
      }
      const bool warming = state.step < cfg.stage2_warmup_steps;
      adam.step(current.params, average(grads), state.current_lr,
                warming ? std::span<const bool>(stage2_mask.get(), n_params) : std::span<const bool>{});
      ++state.step;
      ++steps_since_check;
      seen += static_cast<std::int64_t>(batch.size());

      if (seen >= next_check) {
        run_check();
        while (next_check <= seen) next_check += interval;
      }
      if (cfg.max_steps > 0 && state.step >= cfg.max_steps) {
        done = true;
        break;
      }
    }
  }
  if (steps_since_check > 0) run_check();
  return result;
}

}  // namespace wnet::train
