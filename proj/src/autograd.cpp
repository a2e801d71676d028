#include "kstt/autograd.hpp"

#include "kstt/errors.hpp"

namespace kstt {

namespace {
thread_local GradTape* current_tape = nullptr;
}  // namespace

GradTape::GradTape() : previous_(current_tape) { current_tape = this; }

GradTape::~GradTape() { current_tape = previous_; }

GradTape* GradTape::active() { return current_tape; }

void GradTape::record(const Tensor& out, BackwardFn fn) {
  out.impl()->requires_grad = true;
  out.impl()->is_leaf = false;
  entries_.push_back(Entry{out.impl(), std::move(fn)});
}

void GradTape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward() on a loss that does not depend on any parameter");
  }
  for (auto& entry : entries_) entry.out->grad.clear();

  auto& seed = loss.impl()->grad;
  if (seed.empty()) seed.assign(1, 0.0);
  seed[0] += 1.0;

  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->out->grad.empty()) continue;  // does not reach the loss
    it->fn(*it->out);
  }
}

void backward(const Tensor& loss) {
  auto* tape = GradTape::active();
  if (tape == nullptr) throw ContractError("backward() called with no active GradTape");
  tape->backward(loss);
}

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (GradTape::active() == nullptr) return false;
  for (const auto* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

}  // namespace kstt
