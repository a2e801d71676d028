#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gradcheck.hpp"
#include "kstt/errors.hpp"
#include "kstt/ops.hpp"
#include "kstt/time_encoder.hpp"

using namespace kstt;
using kstt::testing::check_gradients;
using kstt::testing::random_tensor;

namespace {

// Independent bucket oracle: count doublings.
std::size_t bucket_by_doubling(double seconds, std::size_t buckets) {
  std::size_t b = 0;
  double bound = 2.0;
  while (seconds >= bound && b + 1 < buckets) {
    ++b;
    bound *= 2.0;
  }
  return b;
}

double dot_rows(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.at(i) * b.at(i);
  return s;
}

}  // namespace

TEST(TimeBucket, Examples) {
  EXPECT_EQ(time_bucket(8.0, 32), 3u);
  EXPECT_EQ(time_bucket(0.0, 32), 0u);
  EXPECT_EQ(time_bucket(0.4, 32), 0u);
  EXPECT_EQ(time_bucket(1e9, 32), 29u);  // 2^29 <= 1e9 < 2^30
  EXPECT_EQ(time_bucket(1e12, 32), 31u);
  EXPECT_EQ(time_bucket(1e9, 16), 15u);
}

TEST(TimeBucket, MatchesDoublingOracleUpToOneMillion) {
  for (int t = 1; t <= 1'000'000; ++t) {
    ASSERT_EQ(time_bucket(t, 32), bucket_by_doubling(t, 32)) << t;
  }
}

TEST(EncodeTbe, PiecewiseConstantAndDiscontinuous) {
  std::mt19937_64 rng(1);
  Tensor table = random_tensor({32, 4}, rng);
  const std::vector<double> deltas{8.0, 15.999, 16.0};
  Tensor out = encode_tbe(deltas, table);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(out.at(0, c), out.at(1, c));
    EXPECT_EQ(out.at(0, c), table.at(3, c));
    EXPECT_EQ(out.at(2, c), table.at(4, c));
  }
  double jump = 0;
  for (std::size_t c = 0; c < 4; ++c) jump = std::max(jump, std::abs(out.at(2, c) - out.at(1, c)));
  EXPECT_GT(jump, 1e-3);
}

TEST(EncodeTbe, GradientFlowsOnlyIntoSelectedBuckets) {
  std::mt19937_64 rng(2);
  Tensor table = random_tensor({8, 3}, rng);
  table.set_requires_grad(true);
  const std::vector<double> deltas{1.0, 5.0, 6.0};
  {
    GradTape tape;
    tape.backward(sum(encode_tbe(deltas, table)));
  }
  for (std::size_t r = 0; r < 8; ++r) {
    const double expected = r == 0 ? 1.0 : r == 2 ? 2.0 : 0.0;
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(table.grad()[r * 3 + c], expected);
  }
}

TEST(EncodeT2v, ZeroTimeAndZeroBiasGiveZeros) {
  std::mt19937_64 rng(3);
  Tensor w = random_tensor({6}, rng), b = Tensor::zeros({6});
  const std::vector<double> zero{0.0};
  Tensor out = encode_t2v(zero, w, b);
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(EncodeT2v, SineComponentsBoundedAndLinearComponentExact) {
  std::mt19937_64 rng(4);
  Tensor w = random_tensor({9}, rng, -50, 50), b = random_tensor({9}, rng, -10, 10);
  std::uniform_real_distribution<double> t(0, 1e7);
  std::vector<double> deltas(500);
  for (auto& d : deltas) d = t(rng);
  Tensor out = encode_t2v(deltas, w, b);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    EXPECT_NEAR(out.at(i, 0), w.at(0) * deltas[i] / kT2vTimeUnit + b.at(0), 1e-9);
    for (std::size_t k = 1; k < 9; ++k) {
      EXPECT_GE(out.at(i, k), -1.0);
      EXPECT_LE(out.at(i, k), 1.0);
    }
  }
}

TEST(EncodeT2v, ComponentWithAngularRateTwoPiOverPIsPeriodic) {
  const double period_hours = 5.0;
  Tensor w = Tensor::vector({0.0, 2 * std::numbers::pi / period_hours}), b = Tensor::vector({0.0, 0.3});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0, 1e5);
  for (int i = 0; i < 100; ++i) {
    const double s = t(rng);
    const std::vector<double> pair{s, s + period_hours * kT2vTimeUnit};
    Tensor out = encode_t2v(pair, w, b);
    EXPECT_LT(std::abs(out.at(0, 1) - out.at(1, 1)), 1e-9);
  }
}

TEST(EncodeT2v, ContinuousInTime) {
  Tensor w = Tensor::vector({0.01, 3.0, 0.2}), b = Tensor::vector({0.1, 0.2, 0.3});
  const std::vector<double> pair{1000.0, 1000.0 + 1e-6};
  Tensor out = encode_t2v(pair, w, b);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_LT(std::abs(out.at(0, k) - out.at(1, k)), 1e-8);
}

TEST(EncodeMte, ZeroTimeLayout) {
  Tensor periods = Tensor::vector({0.5, 2.0});
  Tensor coef = Tensor::matrix({{0.04, 0.09, 0.16, 0.25, 0.36}, {1, 4, 9, 16, 25}});
  const std::vector<double> zero{0.0};
  Tensor out = encode_mte(zero, periods, coef);
  ASSERT_EQ(out.shape(), (Shape{1, 10}));
  const double expected[] = {0.2, 0.3, 0.0, 0.5, 0.0, 1, 2, 0, 4, 0};
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(out.at(i), expected[i], 1e-15);
}

TEST(EncodeMte, BlockIsTwoOmegaPeriodic) {
  std::mt19937_64 rng(6);
  Tensor periods = Tensor::vector({0.37});
  Tensor coef = random_tensor({1, 7}, rng, 0.1, 1.0);
  std::uniform_real_distribution<double> t(0, 1e6);
  for (int i = 0; i < 100; ++i) {
    const double s = t(rng);
    const std::vector<double> pair{s, s + 2 * 0.37 * kMteTimeUnit};
    Tensor out = encode_mte(pair, periods, coef);
    for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(out.at(0, c), out.at(1, c), 1e-9);
  }
}

TEST(EncodeMte, InnerProductIsTranslationInvariant) {
  std::mt19937_64 rng(7);
  Tensor periods = Tensor::vector({1.3});
  Tensor coef = Tensor::full({1, 9}, 0.2);
  std::uniform_real_distribution<double> t(0, 5e5), shift(-2e5, 2e5);
  for (int i = 0; i < 100; ++i) {
    const double t1 = t(rng), t2 = t(rng), s = shift(rng);
    const std::vector<double> a{t1, t2}, b{t1 + s, t2 + s};
    Tensor ea = encode_mte(a, periods, coef), eb = encode_mte(b, periods, coef);
    const double ip_a = dot_rows(slice_rows(ea, 0, 1), slice_rows(ea, 1, 1));
    const double ip_b = dot_rows(slice_rows(eb, 0, 1), slice_rows(eb, 1, 1));
    EXPECT_LE(std::abs(ip_a - ip_b) / std::max(std::abs(ip_a), 1.0), 1e-9);
  }
}

TEST(EncodeMte, CoefficientsAreClampedWithZeroGradient) {
  Tensor periods = Tensor::vector({1.0});
  Tensor coef = Tensor::matrix({{-1.0, 0.25, 0.25}});
  coef.set_requires_grad(true);
  const std::vector<double> zero{0.0};
  GradTape tape;
  Tensor out = encode_mte(zero, periods, coef);
  EXPECT_NEAR(out.at(0), 1e-6, 1e-18);
  tape.backward(sum(out));
  EXPECT_EQ(coef.grad()[0], 0.0);
  EXPECT_NEAR(coef.grad()[1], 1.0, 1e-12);  // d sqrt(c)/dc at 0.25
}

TEST(TimeEncoderConfig, HarmonicLayout) {
  TimeEncoderConfig c;
  c.method = TimeEncoding::Mercer;
  c.dim = 100;
  EXPECT_EQ(c.harmonics(), 12u);
  c.dim = 20;
  EXPECT_EQ(c.harmonics(), 2u);
  c.dim = 28;
  EXPECT_EQ(c.harmonics(), 3u);
  c.dim = 24;
  EXPECT_THROW(c.harmonics(), ConfigError);
  c.dim = 20;
  c.mte_harmonics = 3;
  EXPECT_THROW(c.harmonics(), ConfigError);
  c.mte_harmonics = 2;
  EXPECT_EQ(c.harmonics(), 2u);
}

TEST(TimeEncoder, EveryMethodReturnsDimColumns) {
  for (auto method : {TimeEncoding::None, TimeEncoding::Bucket, TimeEncoding::Time2Vec, TimeEncoding::Mercer}) {
    TimeEncoderConfig c;
    c.method = method;
    c.dim = 20;
    ParamStore store;
    std::mt19937_64 rng(1);
    auto enc = TimeEncoder::create(c, store, rng);
    const std::vector<double> deltas{0, 3, 7200, 1e6};
    Tensor out = enc.encode(deltas);
    EXPECT_EQ(out.shape(), (Shape{4, 20})) << to_string(method);
    if (method == TimeEncoding::None) {
      EXPECT_EQ(store.size(), 0u);
      for (double v : out.data()) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(TimeEncoder, InitialParameters) {
  std::mt19937_64 rng(2);
  TimeEncoderConfig c;
  c.dim = 20;
  c.method = TimeEncoding::Bucket;
  ParamStore s1;
  auto tbe = TimeEncoder::create(c, s1, rng);
  EXPECT_EQ(tbe.bucket_table().shape(), (Shape{32, 20}));
  for (double v : tbe.bucket_table().data()) EXPECT_LE(std::abs(v), 1 / std::sqrt(20.0));

  c.method = TimeEncoding::Time2Vec;
  ParamStore s2;
  auto t2v = TimeEncoder::create(c, s2, rng);
  EXPECT_NEAR(t2v.t2v_weights().at(0), 1.0 / 168.0, 1e-15);
  for (std::size_t i = 1; i < 20; ++i) {
    const double period = 2 * std::numbers::pi / t2v.t2v_weights().at(i);
    EXPECT_GE(period, 1.0 / 6.0 - 1e-12);
    EXPECT_LE(period, 168.0 + 1e-9);
  }
  for (double v : t2v.t2v_bias().data()) EXPECT_EQ(v, 0.0);

  c.method = TimeEncoding::Mercer;
  ParamStore s3;
  auto mte = TimeEncoder::create(c, s3, rng);
  EXPECT_EQ(mte.mte_coefficients().shape(), (Shape{4, 5}));
  for (double v : mte.mte_coefficients().data()) EXPECT_DOUBLE_EQ(v, 1.0 / 20.0);
  for (double v : mte.mte_periods().data()) {
    EXPECT_GE(v, 1.0 / 86400.0);
    EXPECT_LE(v, 7.0);
  }
}

TEST(TimeEncoder, ParseNames) {
  EXPECT_EQ(parse_time_encoding("tbe"), TimeEncoding::Bucket);
  EXPECT_EQ(parse_time_encoding("none"), TimeEncoding::None);
  EXPECT_EQ(to_string(parse_time_encoding("mte")), "mte");
  EXPECT_THROW(parse_time_encoding("pos"), ConfigError);
}

TEST(TimeEncoder, T2vAndMteGradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    Tensor w = random_tensor({6}, rng, -3, 3), b = random_tensor({6}, rng);
    Tensor periods = random_tensor({2}, rng, 0.1, 3.0), coef = random_tensor({2, 3}, rng, 0.01, 1.0);
    const std::vector<double> deltas{0.0, 30.0, 5000.0, 86400.0};
    Tensor pw = random_tensor({4, 6}, rng);
    auto r1 = check_gradients([&] { return sum(mul(encode_t2v(deltas, w, b), pw)); }, {w, b});
    auto r2 = check_gradients([&] { return sum(mul(encode_mte(deltas, periods, coef), pw)); }, {periods, coef});
    EXPECT_LE(r1.max_relative_error, 1e-4) << "t2v seed " << seed << " " << r1.worst;
    EXPECT_LE(r2.max_relative_error, 1e-4) << "mte seed " << seed << " " << r2.worst;
  }
}
