#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kstt/gnn.hpp"
#include "kstt/kg.hpp"
#include "kstt/optim.hpp"
#include "kstt/session.hpp"
#include "kstt/time_encoder.hpp"
#include "kstt/transformer.hpp"

namespace kstt {

struct ModelConfig {
  std::size_t dim = 100;
  std::size_t gcn_layers = 2;
  double gcn_slope = 0.2;
  double dropout = 0.1;
  std::size_t heads = 2;
  std::size_t layers = 1;
  std::size_t ffn_dim = 0;
  Readout readout = Readout::Last;
  TimeEncoding time_encoder = TimeEncoding::Bucket;
  std::size_t tbe_buckets = 32;
  std::size_t mte_frequencies = 4;
  std::size_t mte_harmonics = 0;
  std::size_t max_session_length = 50;

  TransformerConfig transformer() const;
  TimeEncoderConfig time() const;
  void validate() const;
};

// Knowledge-enhanced item encoder + temporal transformer session encoder.
//
// Parameter registration order (and so checkpoint order): kg.*, gcn.*,
// time.*, tf<l>.*.
class KsttModel {
 public:
  KsttModel(std::shared_ptr<const KnowledgeGraph> graph, ModelConfig config, std::uint64_t seed);

  const KnowledgeGraph& graph() const { return *graph_; }
  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const KgParams& kg() const { return kg_; }
  const GcnStack& gcn() const { return gcn_; }
  const TimeEncoder& time_encoder() const { return time_; }
  const SessionEncoder& encoder() const { return encoder_; }

  // Post-GCN embeddings of the catalog items, [num_items x d].
  Tensor item_embeddings(ForwardMode mode = {}) const;

  // Session representation [1 x d]. Only the most recent
  // max_session_length clicks are encoded.
  Tensor encode_session(std::span<const std::size_t> items, std::span<const std::int64_t> times,
                        std::int64_t t_hat, const Tensor& item_embeddings, ForwardMode mode = {}) const;
  Tensor encode_session(const PrefixSample& sample, const Tensor& item_embeddings, ForwardMode mode = {}) const {
    return encode_session(sample.items, sample.times, sample.target_time, item_embeddings, mode);
  }

 private:
  std::shared_ptr<const KnowledgeGraph> graph_;
  ModelConfig config_;
  ParamStore params_;
  KgParams kg_;
  GcnStack gcn_;
  TimeEncoder time_;
  SessionEncoder encoder_;
};

// Score of item i is dot(session, item_embeddings[i]); returns [M].
Tensor predict_scores(const Tensor& session, const Tensor& item_embeddings);

// -ln(max(y_hat[target], 1e-12))
Tensor rec_loss(const Tensor& y_hat, std::size_t target);
// -sum_i [y_i ln y_hat_i + (1 - y_i) ln(1 - y_hat_i)] with one-hot y.
Tensor rec_loss_binary(const Tensor& y_hat, std::size_t target);

// rec + kg + lambda * sum of squared entries of `params`.
Tensor joint_loss(const Tensor& rec, const Tensor& kg, const std::vector<NamedTensor>& params, double lambda);

}  // namespace kstt
