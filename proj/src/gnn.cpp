#include "kstt/gnn.hpp"

#include <cmath>

#include "kstt/errors.hpp"
#include "kstt/ops.hpp"

namespace kstt {

GcnStack GcnStack::create(ParamStore& store, std::size_t num_layers, std::size_t dim, double slope,
                          std::mt19937_64& rng) {
  if (num_layers < 1) throw ConfigError("gcn_layers must be at least 1");
  const double bound = std::sqrt(6.0 / static_cast<double>(2 * dim));
  std::uniform_real_distribution<double> init(-bound, bound);
  GcnStack stack;
  stack.slope = slope;
  for (std::size_t l = 0; l < num_layers; ++l) {
    std::vector<double> w(dim * dim);
    for (auto& x : w) x = init(rng);
    stack.weights.push_back(store.add("gcn.w" + std::to_string(l), Tensor({dim, dim}, std::move(w))));
  }
  return stack;
}

Tensor gcn_layer(const Tensor& embeddings, const Tensor& adjacency, const Tensor& weight, double slope) {
  if (adjacency.rank() != 2 || adjacency.rows() != adjacency.cols() || adjacency.cols() != embeddings.rows()) {
    throw DimensionError("gcn_layer: adjacency " + shape_string(adjacency.shape()) + " vs embeddings " +
                         shape_string(embeddings.shape()));
  }
  return row_l2_normalize(leaky_relu(matmul(adjacency, matmul(embeddings, weight)), slope));
}

Tensor propagate(const Tensor& adjacency, const Tensor& embeddings, const GcnStack& stack, double dropout,
                 std::mt19937_64* rng) {
  if (stack.num_layers() == 0) throw ContractError("propagate needs at least one GCN layer");
  Tensor h = embeddings;
  for (const auto& w : stack.weights) {
    if (rng != nullptr) h = kstt::dropout(h, dropout, *rng);
    h = gcn_layer(h, adjacency, w, stack.slope);
  }
  return h;
}

}  // namespace kstt
