#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "kstt/gnn.hpp"
#include "kstt/kg.hpp"
#include "kstt/model.hpp"
#include "kstt/ops.hpp"
#include "kstt/time_encoder.hpp"
#include "kstt/transformer.hpp"

namespace kstt::testing {

// A scalar function of some leaf tensors, ready for check_gradients.
struct GradProblem {
  std::vector<Tensor> inputs;
  std::function<Tensor()> f;
};

struct GradCase {
  std::string name;
  std::function<GradProblem(std::uint64_t seed)> make;
};

// Values bounded away from zero, so kinked ops are not probed at the kink.
inline Tensor away_from_zero(Shape shape, std::mt19937_64& rng) {
  Tensor t = random_tensor(std::move(shape), rng, 0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (auto& v : t.data())
    if (sign(rng)) v = -v;
  return t;
}

// Contracts an arbitrary tensor with fixed random weights, so every output
// entry reaches the loss with a distinct coefficient.
inline Tensor weighted_sum(const Tensor& x, const Tensor& weights) { return sum(mul(x, weights)); }

inline GradProblem unary_problem(Shape shape, std::mt19937_64& rng, std::function<Tensor(const Tensor&)> op,
                                 bool avoid_zero = false) {
  Tensor x = avoid_zero ? away_from_zero(shape, rng) : random_tensor(shape, rng);
  Tensor probe = op(x.detach());
  Tensor w = random_tensor(probe.shape(), rng);
  return {{x}, [x, w, op] { return weighted_sum(op(x), w); }};
}

inline std::shared_ptr<const KnowledgeGraph> tiny_graph(std::mt19937_64& rng, std::size_t items = 6) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < items; ++i) names.push_back("v" + std::to_string(i));
  Catalog catalog(names);
  std::uniform_int_distribution<std::size_t> pick(0, items - 1);
  std::vector<Session> sessions;
  for (int s = 0; s < 4; ++s) {
    Session session{"s" + std::to_string(s), {}};
    for (int t = 0; t < 4; ++t) session.events.push_back({names[pick(rng)], 1000 + 60 * t});
    sessions.push_back(session);
  }
  AttributeMap attributes;
  for (std::size_t i = 0; i < items; ++i) attributes[names[i]] = {{"cat", "c" + std::to_string(i % 3)}};
  return std::make_shared<const KnowledgeGraph>(build_graph(catalog, sessions, attributes));
}

inline ModelConfig tiny_model_config(TimeEncoding encoding) {
  ModelConfig config;
  config.dim = 12;  // four MTE blocks of width 3
  config.heads = 2;
  config.ffn_dim = 16;
  config.gcn_layers = 2;
  config.dropout = 0.1;
  config.time_encoder = encoding;
  config.tbe_buckets = 16;
  return config;
}

// Full joint loss of one prefix sample of the given length: GCN item
// embeddings, temporal transformer, softmax cross-entropy, KG loss and the
// regularizer. Dropout masks are drawn from a generator reseeded on every
// evaluation, so the function is deterministic.
inline GradProblem end_to_end_problem(std::uint64_t seed, std::size_t length, TimeEncoding encoding) {
  std::mt19937_64 rng(seed);
  auto graph = tiny_graph(rng);
  auto model = std::make_shared<KsttModel>(graph, tiny_model_config(encoding), seed);
  std::uniform_int_distribution<std::size_t> item(0, graph->num_items() - 1);
  std::uniform_int_distribution<std::int64_t> gap(1, 50000);
  PrefixSample sample;
  std::int64_t t = 1'600'000'000;
  for (std::size_t i = 0; i < length; ++i) {
    sample.items.push_back(item(rng));
    sample.times.push_back(t);
    t += gap(rng);
  }
  sample.target = item(rng);
  sample.target_time = t;
  std::vector<KgSample> kg_batch;
  for (std::size_t i = 0; i < 3 && i < graph->triplets().size(); ++i) {
    const Triplet& pos = graph->triplets()[i * 5 % graph->triplets().size()];
    kg_batch.push_back({pos, negative_sample(pos, *graph, rng).tail});
  }
  std::vector<Tensor> inputs;
  for (const auto& p : model->params().entries()) inputs.push_back(p.tensor);
  const std::uint64_t mask_seed = seed * 31 + length;
  auto f = [model, sample, kg_batch, mask_seed] {
    std::mt19937_64 masks(mask_seed);
    const ForwardMode mode{true, &masks};
    Tensor items = model->item_embeddings(mode);
    Tensor y_hat = softmax(predict_scores(model->encode_session(sample, items, mode), items));
    return joint_loss(rec_loss(y_hat, sample.target), kg_loss(kg_batch, model->kg()),
                      model->params().entries(), 1e-3);
  };
  return {inputs, f};
}

inline std::vector<GradCase> op_gradient_cases() {
  std::vector<GradCase> cases;
  auto add_case = [&](std::string name, std::function<GradProblem(std::mt19937_64&)> make) {
    cases.push_back({std::move(name), [make](std::uint64_t seed) {
                       std::mt19937_64 rng(seed);
                       return make(rng);
                     }});
  };

  add_case("matmul", [](auto& rng) {
    Tensor a = random_tensor({3, 4}, rng), b = random_tensor({4, 2}, rng), w = random_tensor({3, 2}, rng);
    return GradProblem{{a, b}, [=] { return weighted_sum(matmul(a, b), w); }};
  });
  add_case("transpose", [](auto& rng) { return unary_problem({3, 5}, rng, [](const Tensor& x) { return transpose(x); }); });
  add_case("add", [](auto& rng) {
    Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 3}, rng), w = random_tensor({2, 3}, rng);
    return GradProblem{{a, b}, [=] { return weighted_sum(a + b, w); }};
  });
  add_case("sub", [](auto& rng) {
    Tensor a = random_tensor({4}, rng), b = random_tensor({4}, rng), w = random_tensor({4}, rng);
    return GradProblem{{a, b}, [=] { return weighted_sum(a - b, w); }};
  });
  add_case("mul", [](auto& rng) {
    Tensor a = random_tensor({3, 3}, rng), b = random_tensor({3, 3}, rng), w = random_tensor({3, 3}, rng);
    return GradProblem{{a, b}, [=] { return weighted_sum(mul(a, b), w); }};
  });
  add_case("scale", [](auto& rng) { return unary_problem({5}, rng, [](const Tensor& x) { return scale(x, -2.5); }); });
  add_case("add_scalar", [](auto& rng) { return unary_problem({2, 2}, rng, [](const Tensor& x) { return add_scalar(x, 0.7); }); });
  add_case("add_row", [](auto& rng) {
    Tensor a = random_tensor({3, 4}, rng), r = random_tensor({4}, rng), w = random_tensor({3, 4}, rng);
    return GradProblem{{a, r}, [=] { return weighted_sum(add_row(a, r), w); }};
  });
  add_case("relu", [](auto& rng) { return unary_problem({4, 3}, rng, [](const Tensor& x) { return relu(x); }, true); });
  add_case("leaky_relu", [](auto& rng) {
    return unary_problem({4, 3}, rng, [](const Tensor& x) { return leaky_relu(x, 0.2); }, true);
  });
  add_case("softplus", [](auto& rng) {
    return unary_problem({6}, rng, [](const Tensor& x) { return softplus(scale(x, 8.0)); });
  });
  add_case("log", [](auto& rng) {
    return unary_problem({5}, rng, [](const Tensor& x) { return log(add_scalar(scale(x, 0.5), 1.2)); });
  });
  add_case("softmax", [](auto& rng) { return unary_problem({6}, rng, [](const Tensor& x) { return softmax(scale(x, 3.0)); }); });
  add_case("softmax_rows", [](auto& rng) {
    return unary_problem({3, 4}, rng, [](const Tensor& x) { return softmax_rows(scale(x, 3.0)); });
  });
  add_case("row_l2_normalize", [](auto& rng) {
    return unary_problem({4, 5}, rng, [](const Tensor& x) { return row_l2_normalize(x); });
  });
  add_case("layer_norm", [](auto& rng) {
    Tensor x = random_tensor({3, 6}, rng), g = random_tensor({6}, rng, 0.5, 1.5), b = random_tensor({6}, rng);
    Tensor w = random_tensor({3, 6}, rng);
    return GradProblem{{x, g, b}, [=] { return weighted_sum(layer_norm(x, g, b), w); }};
  });
  add_case("sum", [](auto& rng) {
    Tensor x = random_tensor({3, 2}, rng);
    return GradProblem{{x}, [=] { return mul(sum(x), sum(x)); }};
  });
  add_case("mean", [](auto& rng) {
    Tensor x = random_tensor({7}, rng);
    return GradProblem{{x}, [=] { return mul(mean(x), mean(x)); }};
  });
  add_case("sum_squares", [](auto& rng) {
    Tensor x = random_tensor({2, 5}, rng);
    return GradProblem{{x}, [=] { return sum_squares(x); }};
  });
  add_case("element", [](auto& rng) {
    Tensor x = random_tensor({2, 3}, rng);
    return GradProblem{{x}, [=] { return mul(element(x, 4), element(x, 1)); }};
  });
  add_case("gather_rows", [](auto& rng) {
    Tensor table = random_tensor({5, 3}, rng), w = random_tensor({4, 3}, rng);
    const std::vector<std::size_t> idx{4, 1, 4, 0};
    return GradProblem{{table}, [=] { return weighted_sum(gather_rows(table, idx), w); }};
  });
  add_case("slice_rows", [](auto& rng) {
    return unary_problem({5, 3}, rng, [](const Tensor& x) { return slice_rows(x, 1, 3); });
  });
  add_case("slice_cols", [](auto& rng) {
    return unary_problem({3, 6}, rng, [](const Tensor& x) { return slice_cols(x, 2, 3); });
  });
  add_case("concat_cols", [](auto& rng) {
    Tensor a = random_tensor({3, 2}, rng), b = random_tensor({3, 4}, rng), w = random_tensor({3, 6}, rng);
    return GradProblem{{a, b}, [=] { return weighted_sum(concat_cols({a, b}), w); }};
  });
  add_case("mean_rows", [](auto& rng) { return unary_problem({4, 3}, rng, [](const Tensor& x) { return mean_rows(x); }); });
  add_case("reshape", [](auto& rng) { return unary_problem({2, 6}, rng, [](const Tensor& x) { return reshape(x, {3, 4}); }); });
  add_case("dropout", [](auto& rng) {
    const std::uint64_t mask_seed = rng();
    return unary_problem({4, 4}, rng, [mask_seed](const Tensor& x) {
      std::mt19937_64 masks(mask_seed);
      return dropout(x, 0.3, masks);
    });
  });

  add_case("transr_score", [](auto& rng) {
    KgParams p;
    p.entities = random_tensor({4, 3}, rng);
    p.relations = random_tensor({2, 3}, rng);
    p.projections = {random_tensor({3, 3}, rng), random_tensor({3, 3}, rng)};
    const EntityId h{0}, t{2};
    const RelationId r{1, RelationKind::Semantic};
    return GradProblem{{p.entities, p.relations, p.projections[0], p.projections[1]},
                       [=] { return transr_score(h, r, t, p); }};
  });
  add_case("kg_loss", [](auto& rng) {
    KgParams p;
    p.entities = random_tensor({5, 4}, rng);
    p.relations = random_tensor({2, 4}, rng);
    p.projections = {random_tensor({4, 4}, rng), random_tensor({4, 4}, rng)};
    const std::vector<KgSample> batch{
        {{{0}, {0}, {1}}, {2}},
        {{{1}, {1, RelationKind::Semantic}, {3}}, {4}},
        {{{2}, {0}, {0}}, {1}},
    };
    return GradProblem{{p.entities, p.relations, p.projections[0], p.projections[1]},
                       [=] { return kg_loss(batch, p); }};
  });
  add_case("gcn_layer", [](auto& rng) {
    Tensor g = Tensor::matrix({{0.5, 0.5, 0, 0}, {0, 1, 0, 0}, {1.0 / 3, 0, 1.0 / 3, 1.0 / 3}, {0, 0, 0.5, 0.5}});
    Tensor e = random_tensor({4, 3}, rng), w = random_tensor({3, 3}, rng), out = random_tensor({4, 3}, rng);
    return GradProblem{{e, w}, [=] { return weighted_sum(gcn_layer(e, g, w, 0.2), out); }};
  });
  add_case("propagate", [](auto& rng) {
    Tensor g = Tensor::matrix({{1, 0, 0}, {0.5, 0.5, 0}, {0, 0.5, 0.5}});
    GcnStack stack;
    stack.weights = {random_tensor({3, 3}, rng), random_tensor({3, 3}, rng)};
    Tensor e = random_tensor({3, 3}, rng), out = random_tensor({3, 3}, rng);
    return GradProblem{{e, stack.weights[0], stack.weights[1]},
                       [=] { return weighted_sum(propagate(g, e, stack), out); }};
  });
  add_case("encode_tbe", [](auto& rng) {
    Tensor table = random_tensor({8, 3}, rng), out = random_tensor({4, 3}, rng);
    const std::vector<double> deltas{0.0, 5.0, 7.0, 300.0};
    return GradProblem{{table}, [=] { return weighted_sum(encode_tbe(deltas, table), out); }};
  });
  add_case("encode_t2v", [](auto& rng) {
    Tensor w = random_tensor({5}, rng, 0.1, 5.0), b = random_tensor({5}, rng), out = random_tensor({4, 5}, rng);
    const std::vector<double> deltas{0.0, 120.0, 900.0, 20000.0};
    return GradProblem{{w, b}, [=] { return weighted_sum(encode_t2v(deltas, w, b), out); }};
  });
  add_case("encode_mte", [](auto& rng) {
    Tensor periods = random_tensor({2}, rng, 0.05, 2.0);
    Tensor coef = random_tensor({2, 5}, rng, 0.05, 0.5);
    Tensor out = random_tensor({4, 10}, rng);
    const std::vector<double> deltas{0.0, 77.0, 4500.0, 90000.0};
    return GradProblem{{periods, coef}, [=] { return weighted_sum(encode_mte(deltas, periods, coef), out); }};
  });
  add_case("multi_head_attention", [](auto& rng) {
    TransformerConfig cfg;
    cfg.dim = 4;
    cfg.heads = 2;
    ParamStore store;
    auto w = TransformerLayerWeights::create(store, "a.", cfg, rng);
    Tensor x = random_tensor({3, 4}, rng), out = random_tensor({3, 4}, rng);
    std::vector<Tensor> inputs{x, w.wq, w.bq, w.wk, w.bk, w.wv, w.bv, w.wo, w.bo};
    return GradProblem{inputs, [=] { return weighted_sum(multi_head_attention(x, w, 2), out); }};
  });
  add_case("transformer_layer_x2", [](auto& rng) {
    TransformerConfig cfg;
    cfg.dim = 4;
    cfg.heads = 2;
    cfg.ffn_dim = 6;
    cfg.layers = 2;
    ParamStore store;
    auto l0 = TransformerLayerWeights::create(store, "l0.", cfg, rng);
    auto l1 = TransformerLayerWeights::create(store, "l1.", cfg, rng);
    Tensor x = random_tensor({3, 4}, rng), out = random_tensor({3, 4}, rng);
    std::vector<Tensor> inputs{x};
    for (const auto& p : store.entries()) inputs.push_back(p.tensor);
    return GradProblem{inputs, [=] {
                         return weighted_sum(transformer_layer(transformer_layer(x, l0, cfg), l1, cfg), out);
                       }};
  });
  add_case("rec_loss", [](auto& rng) {
    Tensor z = random_tensor({6}, rng);
    return GradProblem{{z}, [=] { return rec_loss(softmax(z), 3); }};
  });
  add_case("rec_loss_binary", [](auto& rng) {
    Tensor z = random_tensor({6}, rng);
    return GradProblem{{z}, [=] { return rec_loss_binary(softmax(z), 1); }};
  });
  add_case("joint_loss", [](auto& rng) {
    Tensor a = random_tensor({2, 2}, rng), b = random_tensor({3}, rng), r = random_tensor({1}, rng);
    const std::vector<NamedTensor> params{{"a", a}, {"b", b}};
    return GradProblem{{a, b, r}, [=] {
                         return joint_loss(sum_squares(r), sum(mul(a, a)), params, 0.3);
                       }};
  });
  return cases;
}

}  // namespace kstt::testing
