#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixsum/augmentor.hpp"
#include "mixsum/dataset.hpp"
#include "mixsum/losses.hpp"
#include "mixsum/model.hpp"

namespace mixsum {

enum class TrainMode { ce_only, ce_supcon_n, sum, sum_bt, mixsum, lisf };

TrainMode parse_train_mode(const std::string& name);
std::string train_mode_name(TrainMode mode);
/// Ablation-table row label (L_ce, L_ce+L_sup(N), ...).
std::string train_mode_label(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::mixsum;
  int batch_size = 8;
  double max_lr = 1e-3;
  double warmup_fraction = 0.1;
  int epochs = 30;
  uint64_t seed = 0;
  bool shuffle = true;
  LossConfig loss;

  void validate() const;
};

/// Linear ramp 0 -> max_lr over the warmup steps, then linear decay to 0 at
/// total_steps.
double lr_schedule(long step, long total_steps, long warmup_steps,
                   double max_lr);

/// Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8.
class AdamState {
 public:
  explicit AdamState(const ModelParams& params);

  void step(ModelParams& params, const ParamStore& grads, double lr);
  long step_count() const { return step_count_; }

 private:
  ParamStore m_;
  ParamStore v_;
  long step_count_ = 0;
};

struct StepRecord {
  long step = 0;
  int epoch = 0;
  double lr = 0.0;
  double ce = 0.0;
  double supcon = 0.0;
  double total = 0.0;
  int texts_consumed = 0;
  double proj_grad_norm = 0.0;  // l2 norm over the MLP-head gradients
  bool skipped = false;         // degenerate batch
};

struct TrainOutput {
  ModelParams params;
  std::vector<StepRecord> history;
};

/// Runs the mode's augment/encode/loss/update loop over the training set.
/// summarize is required for sum/sum_bt/mixsum/lisf; bt for bt-backed modes.
TrainOutput train(const Dataset& train_set, const EncoderConfig& encoder,
                  const TrainConfig& config, const SummaryFn* summarize,
                  const BtStore* bt);

/// Argmax accuracy; logit ties resolve toward the lower class index.
double evaluate(const ModelParams& params, const Dataset& test_set);

/// Line-delimited JSON history records.
void write_history(const std::string& path,
                   const std::vector<StepRecord>& history);

}  // namespace mixsum
