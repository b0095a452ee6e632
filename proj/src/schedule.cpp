#include "codeseq/schedule.hpp"

#include <numeric>

#include "codeseq/error.hpp"

namespace codeseq {

std::vector<SchedulePhase> parse_schedule(std::string_view text) {
  std::vector<SchedulePhase> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ArgumentError("schedule entry '" + std::string(item) + "' is not task:epochs");
    }
    SchedulePhase phase;
    phase.task = parse_task(item.substr(0, colon));
    const std::string epochs(item.substr(colon + 1));
    if (epochs.empty() || epochs.find_first_not_of("0123456789") != std::string::npos) {
      throw ArgumentError("bad epoch count in schedule entry '" + std::string(item) + "'");
    }
    phase.epochs = std::stoul(epochs);
    out.push_back(phase);
    start = comma + 1;
  }
  if (out.empty()) throw ArgumentError("empty schedule");
  return out;
}

std::string schedule_to_string(const std::vector<SchedulePhase>& schedule) {
  std::string out;
  for (const SchedulePhase& p : schedule) {
    if (!out.empty()) out += ',';
    out += std::string(to_string(p.task)) + ":" + std::to_string(p.epochs);
  }
  return out;
}

std::vector<SchedulePhase> default_schedule() {
  return {{Task::kCap, 10}, {Task::kMass, 30}, {Task::kMng, 30}};
}

std::vector<PhaseLog> run_pretraining(Seq2SeqModel& model, const std::vector<MethodFeatures>& methods,
                                      const Vocabulary& vocab, const Budgets& budgets,
                                      const PretrainConfig& config, const EpochCallback& on_epoch) {
  if (methods.empty()) throw ArgumentError("no methods to pre-train on");
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  const std::size_t batches = (methods.size() + config.batch_size - 1) / config.batch_size;
  OptimizerConfig opt = config.optimizer;
  if (opt.total_steps == 0) {
    std::size_t epochs = 0;
    for (const SchedulePhase& p : config.schedule) epochs += p.epochs;
    opt.total_steps = epochs * batches;
  }
  Trainer trainer(model, opt, config.seed);

  std::vector<PhaseLog> logs;
  for (std::size_t phase = 0; phase < config.schedule.size(); ++phase) {
    const SchedulePhase& p = config.schedule[phase];
    PhaseLog log;
    log.task = p.task;
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
      std::vector<PretrainInstance> instances =
          make_instances(p.task, methods, vocab, budgets, config.seed, epoch, config.mask_ratio);
      Rng rng(derive_seed(config.seed, "order", to_string(p.task), epoch));
      rng.shuffle(instances);
      double sum = 0.0;
      for (std::size_t b = 0; b < batches; ++b) {
        const auto first = instances.begin() + static_cast<long>(b * config.batch_size);
        const auto last = instances.begin() + static_cast<long>(std::min(instances.size(), (b + 1) * config.batch_size));
        sum += trainer.train_step(std::vector<PretrainInstance>(first, last));
      }
      log.epoch_losses.push_back(sum / static_cast<double>(batches));
      if (on_epoch) on_epoch(phase, epoch, log.epoch_losses.back());
    }
    logs.push_back(std::move(log));
  }
  model.set_training(false);
  return logs;
}

}  // namespace codeseq
