#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "codeseq/model.hpp"
#include "codeseq/pretrain.hpp"
#include "codeseq/train.hpp"

namespace codeseq {

struct SchedulePhase {
  Task task = Task::kCap;
  std::size_t epochs = 0;

  bool operator==(const SchedulePhase&) const = default;
};

// "cap:10,mass:30,mng:30". Throws ArgumentError.
std::vector<SchedulePhase> parse_schedule(std::string_view text);
std::string schedule_to_string(const std::vector<SchedulePhase>& schedule);
std::vector<SchedulePhase> default_schedule();

struct PretrainConfig {
  std::vector<SchedulePhase> schedule = default_schedule();
  std::size_t batch_size = 32;
  OptimizerConfig optimizer;  // total_steps 0 is filled in from the schedule
  std::uint64_t seed = 0;
  double mask_ratio = 0.5;
};

struct PhaseLog {
  Task task = Task::kCap;
  std::vector<double> epoch_losses;  // mean training loss per epoch
};

// Progress hook: (phase index, epoch, mean loss of that epoch).
using EpochCallback = std::function<void(std::size_t, std::size_t, double)>;

// Runs the phases in order with one optimizer. Each epoch draws fresh
// instances (make_instances with the epoch index) and visits them in a
// seeded order.
std::vector<PhaseLog> run_pretraining(Seq2SeqModel& model, const std::vector<MethodFeatures>& methods,
                                      const Vocabulary& vocab, const Budgets& budgets,
                                      const PretrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace codeseq
