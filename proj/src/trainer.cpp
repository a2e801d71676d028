#include "kstt/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "kstt/autograd.hpp"
#include "kstt/errors.hpp"
#include "kstt/ops.hpp"

namespace kstt {

void TrainConfig::validate() const {
  if (rec_batch == 0 || kg_batch == 0) throw ConfigError("batch sizes must be at least 1");
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (lr <= 0.0) throw ConfigError("lr must be positive");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be non-negative");
}

void write_epoch_log_line(std::ostream& out, const EpochLog& entry) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.3f\n", entry.epoch, entry.kg_loss, entry.rec_loss,
                entry.wall_seconds);
  out << buf;
}

Trainer::Trainer(KsttModel& model, TrainConfig config)
    : model_(model),
      config_(config),
      rng_(config.seed),
      kg_optimizer_(model.params().with_prefix("kg."), AdamConfig{config.lr}),
      rec_optimizer_(model.params().entries(), AdamConfig{config.lr}) {
  config_.validate();
}

double Trainer::kg_epoch() {
  const auto& graph = model_.graph();
  std::vector<Triplet> triplets = graph.triplets();
  if (triplets.empty()) return 0.0;
  std::shuffle(triplets.begin(), triplets.end(), rng_);
  const auto params = model_.params().with_prefix("kg.");
  double total = 0.0;
  for (std::size_t begin = 0; begin < triplets.size(); begin += config_.kg_batch) {
    const std::size_t end = std::min(triplets.size(), begin + config_.kg_batch);
    std::vector<KgSample> batch;
    batch.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back({triplets[i], negative_sample(triplets[i], graph, rng_).tail});
    }
    GradTape tape;
    Tensor kg = kg_loss(batch, model_.kg());
    total += kg.item();
    Tensor loss = joint_loss(Tensor::scalar(0.0), scale(kg, 1.0 / static_cast<double>(batch.size())), params,
                             config_.lambda);
    tape.backward(loss);
    clip_grad_norm(params, config_.clip_norm);
    kg_optimizer_.step();
  }
  return total / static_cast<double>(triplets.size());
}

double Trainer::rec_epoch(const std::vector<PrefixSample>& samples) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_);
  const auto& params = model_.params().entries();
  const ForwardMode mode{true, &rng_};
  double total = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += config_.rec_batch) {
    const std::size_t end = std::min(order.size(), begin + config_.rec_batch);
    GradTape tape;
    Tensor items = model_.item_embeddings(mode);
    std::vector<Tensor> losses;
    losses.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& sample = samples[order[i]];
      Tensor y_hat = softmax(predict_scores(model_.encode_session(sample, items, mode), items));
      Tensor l = config_.rec_loss == RecLossKind::Binary ? rec_loss_binary(y_hat, sample.target)
                                                         : rec_loss(y_hat, sample.target);
      losses.push_back(reshape(l, {1, 1}));
    }
    Tensor rec = sum(concat_cols(losses));
    total += rec.item();
    Tensor loss = joint_loss(scale(rec, 1.0 / static_cast<double>(end - begin)), Tensor::scalar(0.0), params,
                             config_.lambda);
    tape.backward(loss);
    clip_grad_norm(params, config_.clip_norm);
    rec_optimizer_.step();
  }
  return total / static_cast<double>(samples.size());
}

std::vector<EpochLog> Trainer::train(const std::vector<PrefixSample>& samples, const EpochCallback& on_epoch) {
  if (samples.empty()) throw ContractError("no training samples");
  std::vector<EpochLog> log;
  for (std::size_t epoch = 1; epoch <= config_.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochLog entry;
    entry.epoch = epoch;
    if (config_.kg_phase) entry.kg_loss = kg_epoch();
    entry.rec_loss = rec_epoch(samples);
    entry.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return log;
}

}  // namespace kstt
