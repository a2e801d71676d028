#include "kstt/ops.hpp"

#include <algorithm>
#include <cmath>

#include "kstt/autograd.hpp"
#include "kstt/errors.hpp"

namespace kstt {

namespace {

using detail::TensorImpl;

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + " needs a matrix, got " + shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

// Accumulates into impl->grad only when the input takes part in differentiation.
inline bool wants_grad(TensorImpl& impl) {
  if (!impl.requires_grad) return false;
  impl.ensure_grad();
  return true;
}

// Elementwise unary op with derivative computed from (input, output).
template <class Fwd, class Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<double> out(x.size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  Tensor result = make_result(x.shape(), std::move(out));
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl(), deriv](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        xi->grad[i] += o.grad[i] * deriv(xi->data[i], o.data[i]);
      }
    });
  }
  return result;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &B[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  Tensor result = make_result({m, n}, std::move(out));
  if (should_record({&a, &b})) {
    GradTape::active()->record(result, [ai = a.impl(), bi = b.impl(), m, k, n](const TensorImpl& o) {
      const auto& G = o.grad;
      if (wants_grad(*ai)) {
        // dA = G * B^T
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            const double* brow = &bi->data[p * n];
            const double* grow = &G[i * n];
            for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            ai->grad[i * k + p] += acc;
          }
        }
      }
      if (wants_grad(*bi)) {
        // dB = A^T * G
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double av = ai->data[i * k + p];
            if (av == 0.0) continue;
            double* brow = &bi->grad[p * n];
            const double* grow = &G[i * n];
            for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
          }
        }
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  auto A = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = A[i * n + j];
  Tensor result = make_result({n, m}, std::move(out));
  if (should_record({&a})) {
    GradTape::active()->record(result, [ai = a.impl(), m, n](const TensorImpl& o) {
      if (!wants_grad(*ai)) return;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ai->grad[i * n + j] += o.grad[j * m + i];
    });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  Tensor result = make_result(a.shape(), std::move(out));
  if (should_record({&a, &b})) {
    GradTape::active()->record(result, [ai = a.impl(), bi = b.impl()](const TensorImpl& o) {
      if (wants_grad(*ai))
        for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i];
      if (wants_grad(*bi))
        for (std::size_t i = 0; i < o.grad.size(); ++i) bi->grad[i] += o.grad[i];
    });
  }
  return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
  Tensor result = make_result(a.shape(), std::move(out));
  if (should_record({&a, &b})) {
    GradTape::active()->record(result, [ai = a.impl(), bi = b.impl()](const TensorImpl& o) {
      if (wants_grad(*ai))
        for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i];
      if (wants_grad(*bi))
        for (std::size_t i = 0; i < o.grad.size(); ++i) bi->grad[i] -= o.grad[i];
    });
  }
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  Tensor result = make_result(a.shape(), std::move(out));
  if (should_record({&a, &b})) {
    GradTape::active()->record(result, [ai = a.impl(), bi = b.impl()](const TensorImpl& o) {
      if (wants_grad(*ai))
        for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i] * bi->data[i];
      if (wants_grad(*bi))
        for (std::size_t i = 0; i < o.grad.size(); ++i) bi->grad[i] += o.grad[i] * ai->data[i];
    });
  }
  return result;
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
  return unary(
      a, [value](double x) { return x + value; }, [](double, double) { return 1.0; });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  require_matrix(a, "add_row");
  const std::size_t m = a.rows(), n = a.cols();
  if (row.size() != n || row.rank() > 2 || (row.rank() == 2 && row.rows() != 1)) {
    throw DimensionError("add_row: cannot broadcast " + shape_string(row.shape()) + " over " +
                         shape_string(a.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += row.at(j);
  Tensor result = make_result(a.shape(), std::move(out));
  if (should_record({&a, &row})) {
    GradTape::active()->record(result, [ai = a.impl(), ri = row.impl(), m, n](const TensorImpl& o) {
      if (wants_grad(*ai))
        for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i];
      if (wants_grad(*ri))
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) ri->grad[j] += o.grad[i * n + j];
    });
  }
  return result;
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      x, [slope](double v) { return v >= 0.0 ? v : slope * v; },
      [slope](double v, double) { return v >= 0.0 ? 1.0 : slope; });
}

Tensor softplus(const Tensor& x) {
  return unary(
      x,
      [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
      [](double v, double) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      });
}

Tensor log(const Tensor& x, double floor) {
  return unary(
      x, [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double v, double) { return v > floor ? 1.0 / v : 0.0; });
}

namespace {

void softmax_inplace(const double* in, double* out, std::size_t n) {
  double mx = in[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - mx);
    total += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= total;
}

Tensor softmax_blocks(const Tensor& x, std::size_t rows, std::size_t n) {
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) softmax_inplace(&x.data()[r * n], &out[r * n], n);
  Tensor result = make_result(x.shape(), std::move(out));
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl(), rows, n](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* y = &o.data[r * n];
        const double* g = &o.grad[r * n];
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += y[j] * g[j];
        for (std::size_t j = 0; j < n; ++j) xi->grad[r * n + j] += y[j] * (g[j] - dot);
      }
    });
  }
  return result;
}

}  // namespace

Tensor softmax(const Tensor& x) {
  if (x.rank() != 1) throw DimensionError("softmax needs a vector, got " + shape_string(x.shape()));
  return softmax_blocks(x, 1, x.size());
}

Tensor softmax_rows(const Tensor& x) {
  require_matrix(x, "softmax_rows");
  return softmax_blocks(x, x.rows(), x.cols());
}

Tensor row_l2_normalize(const Tensor& x, double eps) {
  require_matrix(x, "row_l2_normalize");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  std::vector<double> denom(m);
  for (std::size_t i = 0; i < m; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) sq += x.at(i, j) * x.at(i, j);
    denom[i] = std::max(std::sqrt(sq), eps);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x.at(i, j) / denom[i];
  }
  Tensor result = make_result(x.shape(), std::move(out));
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl(), denom = std::move(denom), m, n, eps](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t i = 0; i < m; ++i) {
        const double* y = &o.data[i * n];
        const double* g = &o.grad[i * n];
        double* dx = &xi->grad[i * n];
        if (denom[i] > eps) {
          double dot = 0.0;
          for (std::size_t j = 0; j < n; ++j) dot += y[j] * g[j];
          for (std::size_t j = 0; j < n; ++j) dx[j] += (g[j] - y[j] * dot) / denom[i];
        } else {
          for (std::size_t j = 0; j < n; ++j) dx[j] += g[j] / eps;
        }
      }
    });
  }
  return result;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  require_matrix(x, "layer_norm");
  const std::size_t m = x.rows(), n = x.cols();
  if (gain.size() != n || bias.size() != n) {
    throw DimensionError("layer_norm: gain/bias " + shape_string(gain.shape()) + "/" +
                         shape_string(bias.shape()) + " vs input " + shape_string(x.shape()));
  }
  std::vector<double> xhat(x.size()), inv_std(m), out(x.size());
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x.at(i, j);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (x.at(i, j) - mu) * inv_std[i];
      out[i * n + j] = gain.at(j) * xhat[i * n + j] + bias.at(j);
    }
  }
  Tensor result = make_result(x.shape(), std::move(out));
  if (should_record({&x, &gain, &bias})) {
    GradTape::active()->record(
        result, [xi = x.impl(), gi = gain.impl(), bi = bias.impl(), xhat = std::move(xhat),
                 inv_std = std::move(inv_std), m, n](const TensorImpl& o) {
          const bool dx = wants_grad(*xi);
          const bool dg = wants_grad(*gi);
          const bool db = wants_grad(*bi);
          std::vector<double> dxhat(n);
          for (std::size_t i = 0; i < m; ++i) {
            const double* g = &o.grad[i * n];
            const double* xh = &xhat[i * n];
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              if (dg) gi->grad[j] += g[j] * xh[j];
              if (db) bi->grad[j] += g[j];
              dxhat[j] = g[j] * gi->data[j];
              mean_d += dxhat[j];
              mean_dx += dxhat[j] * xh[j];
            }
            if (!dx) continue;
            mean_d /= static_cast<double>(n);
            mean_dx /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
              xi->grad[i * n + j] += inv_std[i] * (dxhat[j] - mean_d - xh[j] * mean_dx);
            }
          }
        });
  }
  return result;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor result = make_result({}, {total});
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl()](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (auto& g : xi->grad) g += o.grad[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor sum_squares(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v * v;
  Tensor result = make_result({}, {total});
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl()](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t i = 0; i < xi->data.size(); ++i) xi->grad[i] += 2.0 * xi->data[i] * o.grad[0];
    });
  }
  return result;
}

Tensor element(const Tensor& x, std::size_t i) {
  if (i >= x.size()) {
    throw DimensionError("element " + std::to_string(i) + " out of range for " + shape_string(x.shape()));
  }
  Tensor result = make_result({}, {x.at(i)});
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl(), i](const TensorImpl& o) {
      if (wants_grad(*xi)) xi->grad[i] += o.grad[0];
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices) {
  require_matrix(table, "gather_rows");
  const std::size_t rows = table.rows(), n = table.cols();
  if (indices.empty()) throw DimensionError("gather_rows: empty index list");
  std::vector<double> out(indices.size() * n);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[r]) + " out of range for " +
                           shape_string(table.shape()));
    }
    std::copy_n(&table.data()[indices[r] * n], n, &out[r * n]);
  }
  Tensor result = make_result({indices.size(), n}, std::move(out));
  if (should_record({&table})) {
    GradTape::active()->record(
        result, [ti = table.impl(), idx = std::vector<std::size_t>(indices.begin(), indices.end()),
                 n](const TensorImpl& o) {
          if (!wants_grad(*ti)) return;
          for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t j = 0; j < n; ++j) ti->grad[idx[r] * n + j] += o.grad[r * n + j];
        });
  }
  return result;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  require_matrix(x, "slice_rows");
  const std::size_t n = x.cols();
  if (count == 0 || begin + count > x.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") outside " + shape_string(x.shape()));
  }
  std::vector<double> out(x.data().begin() + static_cast<std::ptrdiff_t>(begin * n),
                          x.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * n));
  Tensor result = make_result({count, n}, std::move(out));
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl(), begin, n](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t i = 0; i < o.grad.size(); ++i) xi->grad[begin * n + i] += o.grad[i];
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  require_matrix(x, "slice_cols");
  const std::size_t m = x.rows(), n = x.cols();
  if (count == 0 || begin + count > n) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") outside " + shape_string(x.shape()));
  }
  std::vector<double> out(m * count);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = x.at(i, begin + j);
  Tensor result = make_result({m, count}, std::move(out));
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl(), begin, count, m, n](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < count; ++j) xi->grad[i * n + begin + j] += o.grad[i * count + j];
    });
  }
  return result;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts.front().rows();
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.rows() != m) {
      throw DimensionError("concat_cols: " + shape_string(p.shape()) + " does not have " +
                           std::to_string(m) + " rows");
    }
    offsets.push_back(n);
    n += p.cols();
  }
  std::vector<double> out(m * n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t w = parts[k].cols();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) out[i * n + offsets[k] + j] = parts[k].at(i, j);
  }
  Tensor result = make_result({m, n}, std::move(out));
  bool record = false;
  for (const auto& p : parts) record = record || should_record({&p});
  if (record) {
    std::vector<std::shared_ptr<TensorImpl>> impls;
    for (const auto& p : parts) impls.push_back(p.impl());
    GradTape::active()->record(result, [impls = std::move(impls), offsets = std::move(offsets), m, n](const TensorImpl& o) {
      for (std::size_t k = 0; k < impls.size(); ++k) {
        auto& pi = *impls[k];
        if (!wants_grad(pi)) continue;
        const std::size_t w = pi.shape[1];
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j) pi.grad[i * w + j] += o.grad[i * n + offsets[k] + j];
      }
    });
  }
  return result;
}

Tensor mean_rows(const Tensor& x) {
  require_matrix(x, "mean_rows");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += x.at(i, j) / static_cast<double>(m);
  Tensor result = make_result({1, n}, std::move(out));
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl(), m, n](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) xi->grad[i * n + j] += o.grad[j] / static_cast<double>(m);
    });
  }
  return result;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  Tensor result = make_result(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  if (should_record({&x})) {
    GradTape::active()->record(result, [xi = x.impl()](const TensorImpl& o) {
      if (!wants_grad(*xi)) return;
      for (std::size_t i = 0; i < o.grad.size(); ++i) xi->grad[i] += o.grad[i];
    });
  }
  return result;
}

Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw ContractError("dropout ratio must be below 1");
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> mask(x.size());
  for (auto& v : mask) v = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

}  // namespace kstt
