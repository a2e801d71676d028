#include "kstt/optim.hpp"

#include <bit>
#include <cmath>

#include "kstt/errors.hpp"

namespace kstt {

Tensor ParamStore::add(std::string name, Tensor tensor) {
  if (contains(name)) throw ContractError("parameter registered twice: " + name);
  tensor.set_requires_grad(true);
  entries_.push_back({std::move(name), tensor});
  return tensor;
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

const Tensor& ParamStore::get(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.tensor;
  throw LookupError("no parameter named " + name);
}

std::vector<NamedTensor> ParamStore::with_prefix(const std::string& prefix) const {
  std::vector<NamedTensor> out;
  for (const auto& e : entries_)
    if (e.name.starts_with(prefix)) out.push_back(e);
  return out;
}

double ParamStore::squared_norm() const {
  double total = 0.0;
  for (const auto& e : entries_)
    for (double v : e.tensor.data()) total += v * v;
  return total;
}

std::uint64_t ParamStore::checksum() const {
  // FNV-1a over the raw bit patterns.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& e : entries_) {
    for (char c : e.name) mix(static_cast<unsigned char>(c));
    for (double v : e.tensor.data()) mix(std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

Adam::Adam(std::vector<NamedTensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void Adam::step() {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) throw ContractError("Adam step: parameter '" + p.name + "' has no gradient");
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& param = params_[k].tensor;
    auto grad = param.grad();
    auto data = param.data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < data.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      data[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
    param.clear_grad();
  }
}

double clip_grad_norm(const std::vector<NamedTensor>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto p : params) {
      if (!p.tensor.has_grad()) continue;
      for (double& g : p.tensor.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

}  // namespace kstt
