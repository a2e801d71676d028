#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "kstt/tensor.hpp"

namespace kstt {

// Records differentiable operations for one forward pass.
//
// Constructing a GradTape makes it the active tape of the calling thread
// until it is destroyed. Ops whose inputs require gradients append a
// backward rule to the active tape; with no active tape they run as plain
// forward computations. backward() replays the rules in reverse order.
//
//   GradTape tape;
//   Tensor loss = sum(matmul(x, w));
//   tape.backward(loss);   // w.grad() now holds d loss / d w
class GradTape {
 public:
  using BackwardFn = std::function<void(const detail::TensorImpl& out)>;

  GradTape();
  ~GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  // Leaf gradients accumulate across calls; intermediate gradients are
  // reset before each replay.
  void backward(const Tensor& loss);

  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  static GradTape* active();

  void record(const Tensor& out, BackwardFn fn);

 private:
  struct Entry {
    std::shared_ptr<detail::TensorImpl> out;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
  GradTape* previous_;
};

// Backward on the thread's active tape.
void backward(const Tensor& loss);

// True when an op on these inputs must be recorded.
bool should_record(std::initializer_list<const Tensor*> inputs);

}  // namespace kstt
