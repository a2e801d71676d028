#include "kstt/time_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kstt/autograd.hpp"
#include "kstt/errors.hpp"
#include "kstt/ops.hpp"

namespace kstt {

namespace {

constexpr double kMinCoefficient = 1e-12;
constexpr double kWeekHours = 7.0 * 24.0;
constexpr double kWeekDays = 7.0;

}  // namespace

TimeEncoding parse_time_encoding(const std::string& name) {
  if (name == "none") return TimeEncoding::None;
  if (name == "tbe") return TimeEncoding::Bucket;
  if (name == "t2v") return TimeEncoding::Time2Vec;
  if (name == "mte") return TimeEncoding::Mercer;
  throw ConfigError("unknown time encoder '" + name + "' (expected none|tbe|t2v|mte)");
}

std::string to_string(TimeEncoding method) {
  switch (method) {
    case TimeEncoding::None: return "none";
    case TimeEncoding::Bucket: return "tbe";
    case TimeEncoding::Time2Vec: return "t2v";
    case TimeEncoding::Mercer: return "mte";
  }
  return "?";
}

std::size_t TimeEncoderConfig::harmonics() const {
  if (mte_frequencies == 0) throw ConfigError("mte_frequencies must be positive");
  if (mte_harmonics > 0) {
    if (mte_frequencies * (2 * mte_harmonics + 1) != dim) {
      throw ConfigError("MTE layout " + std::to_string(mte_frequencies) + " x (2*" + std::to_string(mte_harmonics) +
                        "+1) does not equal dim " + std::to_string(dim));
    }
    return mte_harmonics;
  }
  if (dim % mte_frequencies != 0 || (dim / mte_frequencies) % 2 == 0) {
    throw ConfigError("dim " + std::to_string(dim) + " is not mte_frequencies (" + std::to_string(mte_frequencies) +
                      ") times an odd block size");
  }
  return (dim / mte_frequencies - 1) / 2;
}

std::size_t time_bucket(double seconds, std::size_t buckets) {
  if (buckets == 0) throw ConfigError("time bucket count must be positive");
  const double t = std::max(seconds, 1.0);
  // ilogb is exactly floor(log2(t)) for finite t >= 1.
  const auto index = static_cast<std::size_t>(std::ilogb(t));
  return std::min(index, buckets - 1);
}

Tensor encode_tbe(std::span<const double> deltas, const Tensor& table) {
  std::vector<std::size_t> rows(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) rows[i] = time_bucket(deltas[i], table.rows());
  return gather_rows(table, rows);
}

Tensor encode_t2v(std::span<const double> deltas, const Tensor& w, const Tensor& b) {
  const std::size_t d = w.size();
  if (b.size() != d || d == 0) {
    throw DimensionError("t2v: weights " + shape_string(w.shape()) + " vs bias " + shape_string(b.shape()));
  }
  const std::size_t n = deltas.size();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = deltas[i] / kT2vTimeUnit;
    out[i * d] = w.at(0) * t + b.at(0);
    for (std::size_t k = 1; k < d; ++k) out[i * d + k] = std::sin(w.at(k) * t + b.at(k));
  }
  Tensor result = make_result({n, d}, std::move(out));
  if (should_record({&w, &b})) {
    GradTape::active()->record(
        result, [wi = w.impl(), bi = b.impl(), ts = std::vector<double>(deltas.begin(), deltas.end()),
                 d](const detail::TensorImpl& o) {
          const bool dw = wi->requires_grad, db = bi->requires_grad;
          if (dw) wi->ensure_grad();
          if (db) bi->ensure_grad();
          for (std::size_t i = 0; i < ts.size(); ++i) {
            const double t = ts[i] / kT2vTimeUnit;
            const double* g = &o.grad[i * d];
            if (dw) wi->grad[0] += g[0] * t;
            if (db) bi->grad[0] += g[0];
            for (std::size_t k = 1; k < d; ++k) {
              const double c = std::cos(wi->data[k] * t + bi->data[k]) * g[k];
              if (dw) wi->grad[k] += c * t;
              if (db) bi->grad[k] += c;
            }
          }
        });
  }
  return result;
}

Tensor encode_mte(std::span<const double> deltas, const Tensor& periods, const Tensor& coefficients) {
  if (coefficients.rank() != 2 || coefficients.rows() != periods.size() || coefficients.cols() % 2 == 0) {
    throw DimensionError("mte: coefficients " + shape_string(coefficients.shape()) + " vs periods " +
                         shape_string(periods.shape()));
  }
  const std::size_t k = periods.size();
  const std::size_t block = coefficients.cols();
  const std::size_t harmonics = (block - 1) / 2;
  const std::size_t d = k * block;
  const std::size_t n = deltas.size();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = deltas[i] / kMteTimeUnit;
    for (std::size_t m = 0; m < k; ++m) {
      double* row = &out[i * d + m * block];
      auto root = [&](std::size_t slot) { return std::sqrt(std::max(coefficients.at(m, slot), kMinCoefficient)); };
      row[0] = root(0);
      for (std::size_t j = 1; j <= harmonics; ++j) {
        const double phase = static_cast<double>(j) * std::numbers::pi * t / periods.at(m);
        row[2 * j - 1] = root(2 * j - 1) * std::cos(phase);
        row[2 * j] = root(2 * j) * std::sin(phase);
      }
    }
  }
  Tensor result = make_result({n, d}, std::move(out));
  if (should_record({&periods, &coefficients})) {
    GradTape::active()->record(
        result, [pi = periods.impl(), ci = coefficients.impl(), ts = std::vector<double>(deltas.begin(), deltas.end()),
                 k, block, harmonics, d](const detail::TensorImpl& o) {
          const bool dp = pi->requires_grad, dc = ci->requires_grad;
          if (dp) pi->ensure_grad();
          if (dc) ci->ensure_grad();
          for (std::size_t i = 0; i < ts.size(); ++i) {
            const double t = ts[i] / kMteTimeUnit;
            for (std::size_t m = 0; m < k; ++m) {
              const double* g = &o.grad[i * d + m * block];
              const double* c = &ci->data[m * block];
              double* gc = dc ? &ci->grad[m * block] : nullptr;
              const double omega = pi->data[m];
              // d sqrt(c)/dc = 1 / (2 sqrt(c)) where the clamp is inactive.
              auto droot = [&](std::size_t slot) { return c[slot] > kMinCoefficient ? 0.5 / std::sqrt(c[slot]) : 0.0; };
              auto root = [&](std::size_t slot) { return std::sqrt(std::max(c[slot], kMinCoefficient)); };
              if (dc) gc[0] += g[0] * droot(0);
              for (std::size_t j = 1; j <= harmonics; ++j) {
                const double rate = static_cast<double>(j) * std::numbers::pi * t;
                const double phase = rate / omega;
                const double cs = std::cos(phase), sn = std::sin(phase);
                if (dc) {
                  gc[2 * j - 1] += g[2 * j - 1] * droot(2 * j - 1) * cs;
                  gc[2 * j] += g[2 * j] * droot(2 * j) * sn;
                }
                if (dp) {
                  // d phase / d omega = -rate / omega^2
                  const double dphase = -rate / (omega * omega);
                  pi->grad[m] += g[2 * j - 1] * root(2 * j - 1) * (-sn) * dphase +
                                 g[2 * j] * root(2 * j) * cs * dphase;
                }
              }
            }
          }
        });
  }
  return result;
}

TimeEncoder TimeEncoder::create(const TimeEncoderConfig& config, ParamStore& store, std::mt19937_64& rng) {
  TimeEncoder enc;
  enc.config_ = config;
  const std::size_t d = config.dim;
  switch (config.method) {
    case TimeEncoding::None:
      break;
    case TimeEncoding::Bucket: {
      if (config.buckets == 0) throw ConfigError("tbe_buckets must be positive");
      const double bound = 1.0 / std::sqrt(static_cast<double>(d));
      std::uniform_real_distribution<double> init(-bound, bound);
      std::vector<double> v(config.buckets * d);
      for (auto& x : v) x = init(rng);
      enc.table_ = store.add("time.buckets", Tensor({config.buckets, d}, std::move(v)));
      break;
    }
    case TimeEncoding::Time2Vec: {
      // Linear term grows one unit per week; sine periods are log-uniform
      // between ten minutes and one week.
      std::uniform_real_distribution<double> log_period(std::log(1.0 / 6.0), std::log(kWeekHours));
      std::vector<double> w(d);
      w[0] = 1.0 / kWeekHours;
      for (std::size_t i = 1; i < d; ++i) w[i] = 2.0 * std::numbers::pi / std::exp(log_period(rng));
      enc.w_ = store.add("time.t2v_w", Tensor::vector(std::move(w)));
      enc.b_ = store.add("time.t2v_b", Tensor::zeros({d}));
      break;
    }
    case TimeEncoding::Mercer: {
      const std::size_t harmonics = config.harmonics();
      const std::size_t k = config.mte_frequencies;
      std::uniform_real_distribution<double> period(1.0 / kMteTimeUnit, kWeekDays);
      std::vector<double> p(k);
      for (auto& x : p) x = period(rng);
      enc.periods_ = store.add("time.mte_period", Tensor::vector(std::move(p)));
      enc.coefficients_ = store.add("time.mte_coef",
                                    Tensor::full({k, 2 * harmonics + 1}, 1.0 / static_cast<double>(d)));
      break;
    }
  }
  return enc;
}

Tensor TimeEncoder::encode(std::span<const double> deltas) const {
  switch (config_.method) {
    case TimeEncoding::None: return Tensor::zeros({deltas.size(), config_.dim});
    case TimeEncoding::Bucket: return encode_tbe(deltas, table_);
    case TimeEncoding::Time2Vec: return encode_t2v(deltas, w_, b_);
    case TimeEncoding::Mercer: return encode_mte(deltas, periods_, coefficients_);
  }
  throw ConfigError("unhandled time encoder");
}

}  // namespace kstt
