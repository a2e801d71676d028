#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kstt/tensor.hpp"

namespace kstt {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Ordered registry of the learnable tensors of a model. Every tensor is
// registered exactly once; the order is the checkpoint order.
class ParamStore {
 public:
  // Marks `tensor` as requiring gradients and returns the stored handle.
  Tensor add(std::string name, Tensor tensor);

  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;

  // Handles for a subset of parameters, by name prefix.
  std::vector<NamedTensor> with_prefix(const std::string& prefix) const;

  double squared_norm() const;
  // Order-sensitive hash of every value; used to detect mutation.
  std::uint64_t checksum() const;

 private:
  std::vector<NamedTensor> entries_;
};

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. One moment pair per parameter.
class Adam {
 public:
  Adam(std::vector<NamedTensor> params, AdamConfig config = {});

  // Applies one update from the current gradients, then drops them.
  // Throws ContractError if a parameter has no gradient.
  void step();

  std::int64_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<NamedTensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig config_;
  std::int64_t step_ = 0;
};

// Rescales gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping. Parameters without gradients are skipped.
double clip_grad_norm(const std::vector<NamedTensor>& params, double max_norm);

}  // namespace kstt
