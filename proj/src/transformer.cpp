#include "kstt/transformer.hpp"

#include <cmath>

#include "kstt/errors.hpp"
#include "kstt/ops.hpp"

namespace kstt {

Readout parse_readout(const std::string& name) {
  if (name == "last") return Readout::Last;
  if (name == "mean") return Readout::Mean;
  throw ConfigError("unknown readout '" + name + "' (expected last|mean)");
}

void TransformerConfig::validate() const {
  if (dim == 0 || heads == 0 || layers == 0) throw ConfigError("transformer dim, heads and layers must be positive");
  if (dim % heads != 0) {
    throw ConfigError("model dim " + std::to_string(dim) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
}

namespace {

Tensor xavier(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> init(-bound, bound);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = init(rng);
  return Tensor({rows, cols}, std::move(v));
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return add_row(matmul(x, w), b); }

}  // namespace

TransformerLayerWeights TransformerLayerWeights::create(ParamStore& store, const std::string& prefix,
                                                        const TransformerConfig& config, std::mt19937_64& rng) {
  const std::size_t d = config.dim, h = config.hidden();
  auto mat = [&](const char* name, std::size_t r, std::size_t c) { return store.add(prefix + name, xavier(r, c, rng)); };
  auto vec = [&](const char* name, std::size_t n, double v) { return store.add(prefix + name, Tensor::full({n}, v)); };
  TransformerLayerWeights w;
  w.wq = mat("wq", d, d);
  w.bq = vec("bq", d, 0.0);
  w.wk = mat("wk", d, d);
  w.bk = vec("bk", d, 0.0);
  w.wv = mat("wv", d, d);
  w.bv = vec("bv", d, 0.0);
  w.wo = mat("wo", d, d);
  w.bo = vec("bo", d, 0.0);
  w.w1 = mat("w1", d, h);
  w.b1 = vec("b1", h, 0.0);
  w.w2 = mat("w2", h, d);
  w.b2 = vec("b2", d, 0.0);
  w.ln1_gain = vec("ln1_gain", d, 1.0);
  w.ln1_bias = vec("ln1_bias", d, 0.0);
  w.ln2_gain = vec("ln2_gain", d, 1.0);
  w.ln2_bias = vec("ln2_bias", d, 0.0);
  return w;
}

Tensor multi_head_attention(const Tensor& input, const TransformerLayerWeights& weights, std::size_t heads,
                            std::vector<Tensor>* attention) {
  const std::size_t d = input.cols();
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("model dim " + std::to_string(d) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor q = linear(input, weights.wq, weights.bq);
  Tensor k = linear(input, weights.wk, weights.bk);
  Tensor v = linear(input, weights.wv, weights.bv);
  std::vector<Tensor> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = heads == 1 ? q : slice_cols(q, h * dh, dh);
    Tensor kh = heads == 1 ? k : slice_cols(k, h * dh, dh);
    Tensor vh = heads == 1 ? v : slice_cols(v, h * dh, dh);
    Tensor weights_h = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt));
    if (attention != nullptr) attention->push_back(weights_h.detach());
    outputs.push_back(matmul(weights_h, vh));
  }
  Tensor merged = heads == 1 ? outputs.front() : concat_cols(outputs);
  return linear(merged, weights.wo, weights.bo);
}

Tensor transformer_layer(const Tensor& input, const TransformerLayerWeights& weights,
                         const TransformerConfig& config, ForwardMode mode, std::vector<Tensor>* attention) {
  auto drop = [&](const Tensor& x) {
    return mode.dropout_active() ? dropout(x, config.dropout, *mode.rng) : x;
  };
  Tensor attended = drop(multi_head_attention(input, weights, config.heads, attention));
  Tensor x1 = layer_norm(input + attended, weights.ln1_gain, weights.ln1_bias);
  Tensor ffn = linear(relu(linear(x1, weights.w1, weights.b1)), weights.w2, weights.b2);
  return layer_norm(x1 + drop(ffn), weights.ln2_gain, weights.ln2_bias);
}

Tensor behavior_embed(std::span<const std::size_t> items, std::span<const std::int64_t> click_times,
                      std::int64_t t_hat, const Tensor& item_embeddings, const TimeEncoder& time_encoder) {
  if (items.empty()) throw ContractError("behavior_embed on an empty session");
  if (items.size() != click_times.size()) throw DimensionError("behavior_embed: items and click times differ in length");
  std::vector<double> deltas(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] >= item_embeddings.rows()) throw LookupError("no embedding for item index " + std::to_string(items[i]));
    if (click_times[i] > t_hat) {
      throw ContractError("click at " + std::to_string(click_times[i]) + " lies after prediction time " +
                          std::to_string(t_hat));
    }
    deltas[i] = static_cast<double>(t_hat - click_times[i]);
  }
  Tensor rows = gather_rows(item_embeddings, items);
  if (time_encoder.config().method == TimeEncoding::None) return rows;
  return rows + time_encoder.encode(deltas);
}

SessionEncoder SessionEncoder::create(const TransformerConfig& config, ParamStore& store, std::mt19937_64& rng) {
  config.validate();
  SessionEncoder enc;
  enc.config_ = config;
  for (std::size_t l = 0; l < config.layers; ++l) {
    enc.layers_.push_back(TransformerLayerWeights::create(store, "tf" + std::to_string(l) + ".", config, rng));
  }
  return enc;
}

Tensor SessionEncoder::encode(const Tensor& behaviors, ForwardMode mode, std::vector<Tensor>* attention) const {
  if (behaviors.rank() != 2 || behaviors.rows() == 0) throw ContractError("encode on an empty session");
  Tensor h = behaviors;
  for (const auto& layer : layers_) h = transformer_layer(h, layer, config_, mode, attention);
  if (config_.readout == Readout::Mean) return mean_rows(h);
  return slice_rows(h, h.rows() - 1, 1);
}

}  // namespace kstt
