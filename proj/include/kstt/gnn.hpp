#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "kstt/kg.hpp"
#include "kstt/optim.hpp"
#include "kstt/tensor.hpp"

namespace kstt {

// Stacked graph convolutions e' = norm(LeakyReLU(G E W)), square W per layer.
struct GcnStack {
  std::vector<Tensor> weights;  // num_layers x [d x d]
  double slope = 0.2;

  // Registers gcn.w<l>, Xavier-uniform.
  static GcnStack create(ParamStore& store, std::size_t num_layers, std::size_t dim, double slope,
                         std::mt19937_64& rng);
  std::size_t num_layers() const { return weights.size(); }
};

Tensor gcn_layer(const Tensor& embeddings, const Tensor& adjacency, const Tensor& weight, double slope);

// Applies every layer of the stack in order. When `rng` is given, inverted
// dropout with ratio `dropout` is applied to each layer's input.
Tensor propagate(const Tensor& adjacency, const Tensor& embeddings, const GcnStack& stack,
                 double dropout = 0.0, std::mt19937_64* rng = nullptr);

inline Tensor propagate(const KnowledgeGraph& graph, const Tensor& embeddings, const GcnStack& stack,
                        double dropout = 0.0, std::mt19937_64* rng = nullptr) {
  return propagate(graph.adjacency(), embeddings, stack, dropout, rng);
}

}  // namespace kstt
