#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kstt/optim.hpp"
#include "kstt/tensor.hpp"
#include "kstt/time_encoder.hpp"

namespace kstt {

enum class Readout { Last, Mean };
Readout parse_readout(const std::string& name);  // last|mean

struct TransformerConfig {
  std::size_t dim = 100;
  std::size_t heads = 2;
  std::size_t layers = 1;
  std::size_t ffn_dim = 0;  // 0 means 4 * dim
  double dropout = 0.1;
  Readout readout = Readout::Last;

  std::size_t hidden() const { return ffn_dim == 0 ? 4 * dim : ffn_dim; }
  void validate() const;
};

// Training mode enables dropout; evaluation mode is deterministic.
struct ForwardMode {
  bool training = false;
  std::mt19937_64* rng = nullptr;
  bool dropout_active() const { return training && rng != nullptr; }
};

struct TransformerLayerWeights {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor w1, b1, w2, b2;
  Tensor ln1_gain, ln1_bias, ln2_gain, ln2_bias;

  // Xavier-uniform matrices, zero biases, unit gains.
  static TransformerLayerWeights create(ParamStore& store, const std::string& prefix,
                                        const TransformerConfig& config, std::mt19937_64& rng);
};

// Scaled dot-product self-attention per head, heads concatenated and
// projected. No mask. If `attention` is non-null it receives one [n x n]
// weight matrix per head.
Tensor multi_head_attention(const Tensor& input, const TransformerLayerWeights& weights, std::size_t heads,
                            std::vector<Tensor>* attention = nullptr);

// x1 = LN(x + Drop(MHA(x))); out = LN(x1 + Drop(FFN(x1))), FFN with inner ReLU.
Tensor transformer_layer(const Tensor& input, const TransformerLayerWeights& weights,
                         const TransformerConfig& config, ForwardMode mode = {},
                         std::vector<Tensor>* attention = nullptr);

// Row i = item_embeddings[items[i]] + time_encoder(t_hat - click_times[i]).
// Throws LookupError for out-of-range items and ContractError when a click
// lies after t_hat.
Tensor behavior_embed(std::span<const std::size_t> items, std::span<const std::int64_t> click_times,
                      std::int64_t t_hat, const Tensor& item_embeddings, const TimeEncoder& time_encoder);

class SessionEncoder {
 public:
  SessionEncoder() = default;
  static SessionEncoder create(const TransformerConfig& config, ParamStore& store, std::mt19937_64& rng);

  // Runs the layer stack over behavior embeddings [n x d] and reads out a
  // [1 x d] session representation.
  Tensor encode(const Tensor& behaviors, ForwardMode mode = {},
                std::vector<Tensor>* attention = nullptr) const;

  const TransformerConfig& config() const { return config_; }
  const std::vector<TransformerLayerWeights>& layers() const { return layers_; }

 private:
  TransformerConfig config_;
  std::vector<TransformerLayerWeights> layers_;
};

}  // namespace kstt
