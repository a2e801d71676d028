#include "kstt/model.hpp"

#include <random>

#include "kstt/errors.hpp"
#include "kstt/ops.hpp"

namespace kstt {

namespace {
constexpr double kProbabilityFloor = 1e-12;
}

TransformerConfig ModelConfig::transformer() const {
  TransformerConfig t;
  t.dim = dim;
  t.heads = heads;
  t.layers = layers;
  t.ffn_dim = ffn_dim;
  t.dropout = dropout;
  t.readout = readout;
  return t;
}

TimeEncoderConfig ModelConfig::time() const {
  TimeEncoderConfig t;
  t.method = time_encoder;
  t.dim = dim;
  t.buckets = tbe_buckets;
  t.mte_frequencies = mte_frequencies;
  t.mte_harmonics = mte_harmonics;
  return t;
}

void ModelConfig::validate() const {
  if (dim == 0) throw ConfigError("dim must be positive");
  if (gcn_layers < 1 || gcn_layers > 4) throw ConfigError("gcn_layers must be in 1..4");
  if (gcn_slope <= 0.0 || gcn_slope >= 1.0) throw ConfigError("gcn_slope must be in (0, 1)");
  if (max_session_length == 0) throw ConfigError("max_session_length must be positive");
  transformer().validate();
  if (time_encoder == TimeEncoding::Mercer) time().harmonics();
  if (time_encoder == TimeEncoding::Bucket && tbe_buckets == 0) throw ConfigError("tbe_buckets must be positive");
}

KsttModel::KsttModel(std::shared_ptr<const KnowledgeGraph> graph, ModelConfig config, std::uint64_t seed)
    : graph_(std::move(graph)), config_(config) {
  config_.validate();
  if (graph_->num_items() == 0) throw ContractError("model needs a non-empty item catalog");
  std::mt19937_64 rng(seed);
  kg_ = KgParams::create(params_, *graph_, config_.dim, rng);
  gcn_ = GcnStack::create(params_, config_.gcn_layers, config_.dim, config_.gcn_slope, rng);
  time_ = TimeEncoder::create(config_.time(), params_, rng);
  encoder_ = SessionEncoder::create(config_.transformer(), params_, rng);
}

Tensor KsttModel::item_embeddings(ForwardMode mode) const {
  Tensor all = propagate(graph_->adjacency(), kg_.entities, gcn_, config_.dropout,
                         mode.dropout_active() ? mode.rng : nullptr);
  return slice_rows(all, 0, graph_->num_items());
}

Tensor KsttModel::encode_session(std::span<const std::size_t> items, std::span<const std::int64_t> times,
                                 std::int64_t t_hat, const Tensor& item_embeddings, ForwardMode mode) const {
  if (items.empty()) throw ContractError("cannot encode an empty session");
  if (items.size() > config_.max_session_length) {
    const std::size_t drop = items.size() - config_.max_session_length;
    items = items.subspan(drop);
    times = times.subspan(drop);
  }
  Tensor behaviors = behavior_embed(items, times, t_hat, item_embeddings, time_);
  return encoder_.encode(behaviors, mode);
}

Tensor predict_scores(const Tensor& session, const Tensor& item_embeddings) {
  const std::size_t d = item_embeddings.cols();
  if (session.size() != d) {
    throw DimensionError("predict_scores: session " + shape_string(session.shape()) + " vs items " +
                         shape_string(item_embeddings.shape()));
  }
  return reshape(matmul(item_embeddings, reshape(session, {d, 1})), {item_embeddings.rows()});
}

Tensor rec_loss(const Tensor& y_hat, std::size_t target) {
  if (target >= y_hat.size()) {
    throw ContractError("target " + std::to_string(target) + " outside catalog of " + std::to_string(y_hat.size()));
  }
  return scale(log(element(y_hat, target), kProbabilityFloor), -1.0);
}

Tensor rec_loss_binary(const Tensor& y_hat, std::size_t target) {
  if (target >= y_hat.size()) {
    throw ContractError("target " + std::to_string(target) + " outside catalog of " + std::to_string(y_hat.size()));
  }
  // Positive term for the target, negative terms ln(1 - y_hat_i) for the rest.
  Tensor positive = log(element(y_hat, target), kProbabilityFloor);
  Tensor complement = log(add_scalar(scale(y_hat, -1.0), 1.0), kProbabilityFloor);
  Tensor negatives = sum(complement) - element(complement, target);
  return scale(positive + negatives, -1.0);
}

Tensor joint_loss(const Tensor& rec, const Tensor& kg, const std::vector<NamedTensor>& params, double lambda) {
  if (lambda < 0.0) throw ContractError("regularization weight must be non-negative");
  Tensor total = rec + kg;
  if (params.empty()) return total;
  std::vector<Tensor> norms;
  norms.reserve(params.size());
  for (const auto& p : params) norms.push_back(reshape(sum_squares(p.tensor), {1, 1}));
  return total + scale(sum(concat_cols(norms)), lambda);
}

}  // namespace kstt
