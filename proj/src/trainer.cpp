#include "mixsum/trainer.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mixsum/errors.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

TrainMode parse_train_mode(const std::string& name) {
  if (name == "ce-only") return TrainMode::ce_only;
  if (name == "ce-supcon-n") return TrainMode::ce_supcon_n;
  if (name == "sum") return TrainMode::sum;
  if (name == "sum-bt") return TrainMode::sum_bt;
  if (name == "mixsum") return TrainMode::mixsum;
  if (name == "lisf") return TrainMode::lisf;
  throw ValidationError("train.mode: unknown value '" + name + "'");
}

std::string train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::ce_only: return "ce-only";
    case TrainMode::ce_supcon_n: return "ce-supcon-n";
    case TrainMode::sum: return "sum";
    case TrainMode::sum_bt: return "sum-bt";
    case TrainMode::mixsum: return "mixsum";
    case TrainMode::lisf: return "lisf";
  }
  throw ValidationError("invalid train mode");
}

std::string train_mode_label(TrainMode mode) {
  switch (mode) {
    case TrainMode::ce_only: return "L_ce";
    case TrainMode::ce_supcon_n: return "L_ce+L_sup(N)";
    case TrainMode::sum: return "L_ce+L_sup(Sum)";
    case TrainMode::sum_bt: return "L_ce+L_sup(Sum+BT)";
    case TrainMode::mixsum: return "Mixsum";
    case TrainMode::lisf: return "Mixsum(LISF)";
  }
  throw ValidationError("invalid train mode");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train.epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("train.batch_size must be >= 1");
  if ((mode == TrainMode::mixsum || mode == TrainMode::lisf) && batch_size < 2) {
    throw ValidationError("train.batch_size must be >= 2 in mixsum modes");
  }
  if (!(max_lr > 0.0)) throw ValidationError("train.max_lr must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) {
    throw ValidationError("train.warmup_fraction must be in [0, 1)");
  }
  loss.validate();
}

double lr_schedule(long step, long total_steps, long warmup_steps,
                   double max_lr) {
  if (step < 0 || step > total_steps) {
    throw ValidationError("lr_schedule: step outside [0, total_steps]");
  }
  if (warmup_steps < 0 || warmup_steps >= total_steps) {
    throw ValidationError("lr_schedule: warmup_steps outside [0, total_steps)");
  }
  if (warmup_steps > 0 && step <= warmup_steps) {
    return max_lr * static_cast<double>(step) /
           static_cast<double>(warmup_steps);
  }
  return max_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup_steps);
}

AdamState::AdamState(const ModelParams& params)
    : m_(zero_grads(params)), v_(zero_grads(params)) {}

void AdamState::step(ModelParams& params, const ParamStore& grads, double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++step_count_;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count_));
  for (size_t i = 0; i < params.store.tensors().size(); ++i) {
    auto& p = params.store.tensors()[i].value;
    const auto& g = grads.tensors()[i].value;
    if (!g.allFinite()) {
      throw RuntimeFailure("non-finite gradient in parameter '" +
                           params.store.tensors()[i].name + "'");
    }
    auto& m = m_.tensors()[i].value;
    auto& v = v_.tensors()[i].value;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.array().square().matrix();
    p.array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
}

namespace {

struct ForwardState {
  std::vector<EncodeCache> encode_caches;     // one per encoded text
  std::vector<ProjectCache> project_caches;   // one per batch position
  std::vector<Eigen::VectorXd> z;             // per batch position
  std::vector<ClassifyResult> classify;       // per batch position
  std::vector<Eigen::VectorXd> probs;
  std::vector<Eigen::VectorXd> features;      // g, when supcon is active
  // lisf: positions map onto encode caches; augmented positions pull from
  // two summary caches each.
  std::vector<std::pair<int, int>> lisf_sources;
  int encodes = 0;
};

bool uses_supcon(TrainMode mode) { return mode != TrainMode::ce_only; }

bool uses_partner(TrainMode mode) {
  return mode == TrainMode::mixsum || mode == TrainMode::lisf;
}

AugmentedBatch build_batch(const Batch& batch, TrainMode mode,
                           int num_classes, const SummaryFn* summarize,
                           const BtStore* bt, Rng& pairing_rng) {
  auto need_summarizer = [&]() -> const SummaryFn& {
    if (!summarize) {
      throw ValidationError("mode " + train_mode_name(mode) +
                            " requires a summarizer");
    }
    return *summarize;
  };
  auto need_bt = [&]() -> const BtStore& {
    if (!bt) {
      throw ValidationError("mode " + train_mode_name(mode) +
                            " requires a back-translation store");
    }
    return *bt;
  };
  switch (mode) {
    case TrainMode::ce_only:
    case TrainMode::ce_supcon_n: {
      AugmentedBatch out;
      out.mode = AugMode::none;
      out.batch_n = static_cast<int>(batch.examples.size());
      for (const Example& ex : batch.examples) {
        out.texts.push_back(ex.text);
        out.ids.push_back(ex.id);
        out.labels_primary.push_back(one_hot(ex.label, num_classes));
      }
      return out;
    }
    case TrainMode::sum:
      return augment_sum(batch, need_summarizer(), num_classes);
    case TrainMode::sum_bt:
      return augment_sum_bt(batch, need_summarizer(), need_bt(), num_classes);
    case TrainMode::mixsum:
    case TrainMode::lisf:
      return augment_mixsum(batch, need_summarizer(), pairing_rng,
                            num_classes);
  }
  throw ValidationError("invalid train mode");
}

ForwardState forward_batch(const AugmentedBatch& aug, TrainMode mode,
                           const ModelParams& params) {
  ForwardState fs;
  const int n = aug.batch_n;
  const int m = static_cast<int>(aug.texts.size());
  bool supcon = uses_supcon(mode);

  if (mode == TrainMode::lisf) {
    // Encode N originals then N summaries; the augmented feature is the
    // midpoint of the two paired summary features.
    fs.encode_caches.resize(2 * n);
    std::vector<Eigen::VectorXd> z_enc(2 * n);
    for (int i = 0; i < n; ++i) {
      z_enc[i] = encode(aug.texts[i], params, &fs.encode_caches[i]);
    }
    for (int i = 0; i < n; ++i) {
      z_enc[n + i] =
          encode(aug.summaries[i], params, &fs.encode_caches[n + i]);
    }
    fs.encodes = 2 * n;
    fs.z.resize(2 * n);
    for (int i = 0; i < n; ++i) {
      fs.z[i] = z_enc[i];
      fs.lisf_sources.emplace_back(i, i);
    }
    for (int i = 0; i < n; ++i) {
      int j = aug.partner[i];
      fs.z[n + i] = lisf_mix(z_enc[n + i], z_enc[n + j]);
      fs.lisf_sources.emplace_back(n + i, n + j);
    }
  } else {
    fs.encode_caches.resize(m);
    fs.z.resize(m);
    for (int i = 0; i < m; ++i) {
      fs.z[i] = encode(aug.texts[i], params, &fs.encode_caches[i]);
    }
    fs.encodes = m;
  }

  const int positions = static_cast<int>(fs.z.size());
  fs.classify.resize(positions);
  fs.probs.resize(positions);
  if (supcon) {
    fs.project_caches.resize(positions);
    fs.features.resize(positions);
  }
  for (int i = 0; i < positions; ++i) {
    fs.classify[i] = classify(fs.z[i], params);
    fs.probs[i] = fs.classify[i].probs;
    if (supcon) {
      fs.features[i] =
          project_contrastive(fs.z[i], params, &fs.project_caches[i]);
    }
  }
  return fs;
}

}  // namespace

TrainOutput train(const Dataset& train_set, const EncoderConfig& encoder,
                  const TrainConfig& config, const SummaryFn* summarize,
                  const BtStore* bt) {
  config.validate();
  EncoderConfig enc_cfg = encoder;
  enc_cfg.num_classes = train_set.num_classes;
  enc_cfg.validate();
  train_set.validate();
  if (train_set.examples.empty()) {
    throw ValidationError("training set is empty");
  }

  TrainOutput out;
  out.params = init_params(enc_cfg, derive_seed(config.seed, 0x1217));
  AdamState adam(out.params);
  Rng pairing_rng(derive_seed(config.seed, 0x90a1));

  const long batches_per_epoch =
      static_cast<long>((train_set.size() + config.batch_size - 1) /
                        config.batch_size);
  const long total_steps = batches_per_epoch * config.epochs;
  const long warmup_steps =
      static_cast<long>(config.warmup_fraction * total_steps);

  const double lambda = config.loss.lambda;
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto batches =
        make_batches(train_set, config.batch_size,
                     derive_seed(config.seed, 0xe70c + epoch), config.shuffle);
    for (const Batch& batch : batches) {
      double lr = lr_schedule(step, total_steps, warmup_steps, config.max_lr);
      StepRecord record;
      record.step = step;
      record.epoch = epoch;
      record.lr = lr;

      AugmentedBatch aug;
      ForwardState fs;
      try {
        aug = build_batch(batch, config.mode, enc_cfg.num_classes, summarize,
                          bt, pairing_rng);
        fs = forward_batch(aug, config.mode, out.params);
        record.texts_consumed = fs.encodes;

        std::vector<Eigen::VectorXd> dprobs;
        std::vector<Eigen::VectorXd> dfeatures;
        double ce = 0.0, supcon = 0.0, ce_weight = 1.0, sup_weight = 0.0;
        if (config.mode == TrainMode::ce_only) {
          ce = cross_entropy_loss(fs.probs, aug.labels_primary, config.loss,
                                  &dprobs);
          record.ce = ce;
          record.total = ce;
        } else {
          if (uses_partner(config.mode)) {
            ce = mixsum_ce_loss(fs.probs, aug.labels_primary,
                                aug.labels_partner, config.loss, &dprobs);
            supcon = mixsum_supcon_loss(fs.features, aug.labels_primary,
                                        aug.labels_partner, config.loss.tau,
                                        &dfeatures);
          } else {
            std::vector<int> labels;
            for (const auto& y : aug.labels_primary) {
              labels.push_back(one_hot_index(y));
            }
            ce = cross_entropy_loss(fs.probs, aug.labels_primary, config.loss,
                                    &dprobs);
            supcon = sup_contrastive_loss(fs.features, labels,
                                          config.loss.tau, &dfeatures);
          }
          LossBreakdown breakdown = total_loss(ce, supcon, lambda);
          record.ce = breakdown.ce;
          record.supcon = breakdown.supcon;
          record.total = breakdown.total;
          ce_weight = lambda;
          sup_weight = 1.0 - lambda;
        }

        ParamStore grads = zero_grads(out.params);
        const int positions = static_cast<int>(fs.z.size());
        std::vector<Eigen::VectorXd> dz(
            positions, Eigen::VectorXd::Zero(enc_cfg.backbone_dim));
        for (int i = 0; i < positions; ++i) {
          Eigen::VectorXd dlogits =
              softmax_backward(fs.probs[i], ce_weight * dprobs[i]);
          classify_backward(fs.z[i], dlogits, out.params, grads, dz[i]);
          if (!fs.features.empty()) {
            Eigen::VectorXd dg = sup_weight * dfeatures[i];
            project_backward(fs.project_caches[i], fs.z[i], dg, out.params,
                             grads, dz[i]);
          }
        }
        if (config.mode == TrainMode::lisf) {
          const int n = aug.batch_n;
          std::vector<Eigen::VectorXd> dz_enc(
              2 * n, Eigen::VectorXd::Zero(enc_cfg.backbone_dim));
          for (int i = 0; i < n; ++i) dz_enc[i] = dz[i];
          for (int i = 0; i < n; ++i) {
            auto [a, b] = fs.lisf_sources[n + i];
            dz_enc[a] += 0.5 * dz[n + i];
            dz_enc[b] += 0.5 * dz[n + i];
          }
          for (int i = 0; i < 2 * n; ++i) {
            encode_backward(fs.encode_caches[i], dz_enc[i], out.params, grads);
          }
        } else {
          for (int i = 0; i < positions; ++i) {
            encode_backward(fs.encode_caches[i], dz[i], out.params, grads);
          }
        }

        double proj_sq = grads.at("mlp_w1").squaredNorm() +
                         grads.at("mlp_b1").squaredNorm() +
                         grads.at("mlp_w2").squaredNorm() +
                         grads.at("mlp_b2").squaredNorm();
        record.proj_grad_norm = std::sqrt(proj_sq);

        adam.step(out.params, grads, lr);
      } catch (const DegenerateBatchError&) {
        record.skipped = true;
      }
      out.history.push_back(record);
      ++step;
    }
  }
  return out;
}

double evaluate(const ModelParams& params, const Dataset& test_set) {
  if (test_set.examples.empty()) {
    throw ValidationError("evaluation set is empty");
  }
  size_t correct = 0;
  for (const Example& ex : test_set.examples) {
    Eigen::VectorXd z = encode(ex.text, params);
    ClassifyResult result = classify(z, params);
    int best = 0;
    for (long c = 1; c < result.logits.size(); ++c) {
      if (result.logits(c) > result.logits(best)) best = static_cast<int>(c);
    }
    if (best == ex.label) ++correct;
  }
  return static_cast<double>(correct) /
         static_cast<double>(test_set.examples.size());
}

void write_history(const std::string& path,
                   const std::vector<StepRecord>& history) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write history: " + path);
  for (const StepRecord& r : history) {
    nlohmann::json j{{"step", r.step},
                     {"epoch", r.epoch},
                     {"lr", r.lr},
                     {"ce", r.ce},
                     {"supcon", r.supcon},
                     {"total", r.total},
                     {"texts_consumed", r.texts_consumed},
                     {"proj_grad_norm", r.proj_grad_norm},
                     {"skipped", r.skipped}};
    out << j.dump() << '\n';
  }
}

}  // namespace mixsum
