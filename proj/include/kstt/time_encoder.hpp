#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>

#include "kstt/optim.hpp"
#include "kstt/tensor.hpp"

namespace kstt {

enum class TimeEncoding { None, Bucket, Time2Vec, Mercer };

TimeEncoding parse_time_encoding(const std::string& name);  // none|tbe|t2v|mte
std::string to_string(TimeEncoding method);

struct TimeEncoderConfig {
  TimeEncoding method = TimeEncoding::Bucket;
  std::size_t dim = 100;
  std::size_t buckets = 32;
  std::size_t mte_frequencies = 4;
  // Harmonics per frequency; 0 derives it from dim = frequencies * (2J + 1).
  std::size_t mte_harmonics = 0;

  // Resolved harmonic count; throws ConfigError when the layout does not fit dim.
  std::size_t harmonics() const;
};

// clamp(floor(log2(max(seconds, 1))), 0, buckets - 1)
std::size_t time_bucket(double seconds, std::size_t buckets);

// Row i is row bucket(deltas[i]) of the trainable [B x d] table.
Tensor encode_tbe(std::span<const double> deltas, const Tensor& table);

// Parameters live in time units where typical session gaps are O(1), so
// the L2 penalty and the conditioning of w and omega stay moderate.
inline constexpr double kT2vTimeUnit = 3600.0;   // w in radians per hour
inline constexpr double kMteTimeUnit = 86400.0;  // periods in days

// Row i: [w0 t + b0, sin(w1 t + b1), ..., sin(w_{d-1} t + b_{d-1})] with t = deltas[i] / kT2vTimeUnit.
Tensor encode_t2v(std::span<const double> deltas, const Tensor& w, const Tensor& b);

// Row i concatenates, for each period omega_m (days), the block
//   [sqrt(c_m0), sqrt(c_m1) cos(pi t/omega_m), sqrt(c_m2) sin(pi t/omega_m), ...,
//    sqrt(c_m,2J-1) cos(J pi t/omega_m), sqrt(c_m,2J) sin(J pi t/omega_m)]
// with t = deltas[i] / kMteTimeUnit. `coefficients` is [k x (2J + 1)], `periods` is [k]. Coefficients below
// 1e-12 are clamped (zero gradient there).
Tensor encode_mte(std::span<const double> deltas, const Tensor& periods, const Tensor& coefficients);

// Maps time intervals (prediction time minus click time) to d-dim vectors.
class TimeEncoder {
 public:
  TimeEncoder() = default;
  // Registers the parameters of the chosen method under "time.".
  static TimeEncoder create(const TimeEncoderConfig& config, ParamStore& store, std::mt19937_64& rng);

  // [n x d]; all zeros for TimeEncoding::None.
  Tensor encode(std::span<const double> deltas) const;

  const TimeEncoderConfig& config() const { return config_; }
  const Tensor& bucket_table() const { return table_; }
  const Tensor& t2v_weights() const { return w_; }
  const Tensor& t2v_bias() const { return b_; }
  const Tensor& mte_periods() const { return periods_; }
  const Tensor& mte_coefficients() const { return coefficients_; }

 private:
  TimeEncoderConfig config_;
  Tensor table_, w_, b_, periods_, coefficients_;
};

}  // namespace kstt
