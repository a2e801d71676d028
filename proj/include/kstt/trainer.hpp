#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kstt/model.hpp"
#include "kstt/session.hpp"

namespace kstt {

enum class RecLossKind { Categorical, Binary };

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t rec_batch = 256;
  std::size_t kg_batch = 512;
  double lr = 0.001;
  double lambda = 1e-5;
  std::uint64_t seed = 42;
  double clip_norm = 5.0;  // 0 disables clipping
  bool kg_phase = true;
  RecLossKind rec_loss = RecLossKind::Categorical;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double kg_loss = 0.0;   // mean per triplet pair, 0 when the phase is off
  double rec_loss = 0.0;  // mean per prefix sample
  double wall_seconds = 0.0;
};

// "epoch<TAB>kg_loss<TAB>rec_loss<TAB>wall_seconds"
void write_epoch_log_line(std::ostream& out, const EpochLog& entry);

// Each epoch runs a KG phase (TransR loss over shuffled triplets, one
// corrupted tail each, on the kg.* parameters) and then a recommendation
// phase (GCN + temporal transformer + softmax over the catalog, on all
// parameters). Both phases add lambda * ||params||^2 and take Adam steps
// with their own moment estimates.
class Trainer {
 public:
  using EpochCallback = std::function<void(const EpochLog&)>;

  Trainer(KsttModel& model, TrainConfig config);

  std::vector<EpochLog> train(const std::vector<PrefixSample>& samples, const EpochCallback& on_epoch = {});

  // One KG-phase pass over all triplets; returns the mean per-pair loss.
  double kg_epoch();
  // One recommendation-phase pass; returns the mean per-sample loss.
  double rec_epoch(const std::vector<PrefixSample>& samples);

 private:
  KsttModel& model_;
  TrainConfig config_;
  std::mt19937_64 rng_;
  Adam kg_optimizer_;
  Adam rec_optimizer_;
};

}  // namespace kstt
