#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "specpercept/quantize.hpp"

using namespace specpercept;

TEST_CASE("two-center soft assignment is a scaled tanh") {
  // With centers -1 and 1 the softmax weights collapse algebraically to
  // (exp(4sz) - 1) / (exp(4sz) + 1) = tanh(2sz).
  const int n = 100000;
  for (double s : {1.0, 10.0, 100.0}) {
    QuantizerSpec spec;
    spec.s = s;
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double z = -3.0 + 6.0 * i / n;
      worst = std::max(worst, std::fabs(soft_quantize(z, spec) - std::tanh(2.0 * s * z)));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("soft assignment fixed points and extremes") {
  const QuantizerSpec spec;
  CHECK(soft_quantize(0.0, spec) == 0.0);
  CHECK(soft_quantize(50.0, spec) == 1.0);
  CHECK(soft_quantize(-50.0, spec) == -1.0);
  CHECK(soft_quantize(1000.0, spec) == 1.0);
  CHECK(soft_quantize(-1e9, spec) == -1.0);
  CHECK(std::isfinite(soft_quantize(7.7, spec)));  // naive softmax underflows here
}

TEST_CASE("soft assignment matches an inline softmax with three centers") {
  QuantizerSpec spec;
  spec.centers = {0.0, 0.5, 1.0};
  spec.s = 10.0;
  for (double z : {0.5, 0.2, -0.1, 0.87}) {
    double wsum = 0.0, acc = 0.0;
    for (double c : spec.centers) {
      const double w = std::exp(-spec.s * (z - c) * (z - c));
      wsum += w;
      acc += w * c;
    }
    CHECK(soft_quantize(z, spec) == Catch::Approx(acc / wsum).margin(1e-14));
  }
}

TEST_CASE("soft assignment is monotone in the input") {
  QuantizerSpec spec;
  spec.s = 4.0;
  double prev = soft_quantize(-2.0, spec);
  for (int i = 1; i <= 400; ++i) {
    const double z = -2.0 + 4.0 * i / 400.0;
    const double cur = soft_quantize(z, spec);
    CHECK(cur >= prev);
    if (z > -0.5 && z < 0.5) CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("soft assignment derivative matches the tanh form") {
  const QuantizerSpec spec;  // s = 10
  for (double z : {0.0, 0.05, -0.12}) {
    const double h = 1e-7;
    const double fd = (soft_quantize(z + h, spec) - soft_quantize(z - h, spec)) / (2.0 * h);
    const double c = std::cosh(2.0 * spec.s * z);
    CHECK(fd == Catch::Approx(2.0 * spec.s / (c * c)).epsilon(1e-5));
    CHECK(fd > 0.0);
  }
}

TEST_CASE("hard assignment snaps to the nearest center, ties downward") {
  const QuantizerSpec spec;
  CHECK(hard_quantize(0.3, spec) == 1.0);
  CHECK(hard_quantize(-0.3, spec) == -1.0);
  CHECK(hard_quantize(0.0, spec) == -1.0);  // midpoint goes to the lower center
  CHECK(hard_quantize(5.0, spec) == 1.0);

  QuantizerSpec three;
  three.centers = {0.0, 0.5, 1.0};
  CHECK(hard_quantize(0.24, three) == 0.0);
  CHECK(hard_quantize(0.25, three) == 0.0);
  CHECK(hard_quantize(0.26, three) == 0.5);
  CHECK(hard_quantize(0.75, three) == 0.5);
  CHECK(hard_quantize(0.76, three) == 1.0);
}

TEST_CASE("grid overloads apply the scalar maps elementwise") {
  std::mt19937_64 rng(40);
  const Grid z = random_grid(8, 9, rng, -2.0, 2.0);
  const QuantizerSpec spec;
  const Grid soft = soft_quantize(z, spec);
  const Grid hard = hard_quantize(z, spec);
  REQUIRE(soft.same_shape(z));
  REQUIRE(hard.same_shape(z));
  for (size_t i = 0; i < z.data.size(); ++i) {
    CHECK(soft.data[i] == soft_quantize(z.data[i], spec));
    CHECK(hard.data[i] == hard_quantize(z.data[i], spec));
  }
}

TEST_CASE("sharp soft assignment approaches the hard one") {
  QuantizerSpec spec;
  spec.s = 1000.0;
  std::mt19937_64 rng(41);
  for (int i = 0; i < 500; ++i) {
    // Sample away from the decision midpoint at 0.
    double z = 0.05 + 2.95 * uniform01(rng);
    if (rng() & 1) z = -z;
    CHECK(std::fabs(soft_quantize(z, spec) - hard_quantize(z, spec)) < 1e-6);
  }
}

TEST_CASE("quantizer spec validation") {
  QuantizerSpec one;
  one.centers = {0.0};
  CHECK_THROWS_AS(one.validate(), ParamError);

  QuantizerSpec dup;
  dup.centers = {0.0, 0.0};
  CHECK_THROWS_AS(dup.validate(), ParamError);

  QuantizerSpec desc;
  desc.centers = {1.0, -1.0};
  CHECK_THROWS_AS(desc.validate(), ParamError);

  QuantizerSpec flat;
  flat.s = 0.0;
  CHECK_THROWS_AS(flat.validate(), ParamError);
  flat.s = -2.0;
  CHECK_THROWS_AS(flat.validate(), ParamError);
}

TEST_CASE("entropy bound arithmetic is exact") {
  const EntropyInputs def;
  CHECK(entropy_bound(def) == 32768.0);
  CHECK(bits_per_pixel(entropy_bound(def), def.width, def.height) == 0.5);
  CHECK(compression_ratio(0.5) == 48.0);

  EntropyInputs four = def;
  four.num_centers = 4;
  CHECK(entropy_bound(four) == 65536.0);
  CHECK(bits_per_pixel(entropy_bound(four), 256, 256) == 1.0);

  EntropyInputs flat;
  flat.width = 16;
  flat.height = 16;
  flat.layers = 0;
  flat.channels = 1;
  flat.num_centers = 2;
  CHECK(entropy_bound(flat) == 256.0);

  CHECK(bits_per_pixel(0.0, 256, 256) == 0.0);
}

TEST_CASE("entropy input validation") {
  EntropyInputs odd;
  odd.width = 100;  // not divisible by 2^4
  CHECK_THROWS_AS(entropy_bound(odd), ParamError);

  EntropyInputs deep;
  deep.layers = 31;
  CHECK_THROWS_AS(entropy_bound(deep), ParamError);

  EntropyInputs neg;
  neg.layers = -1;
  CHECK_THROWS_AS(entropy_bound(neg), ParamError);

  EntropyInputs mono;
  mono.num_centers = 1;
  CHECK_THROWS_AS(entropy_bound(mono), ParamError);

  EntropyInputs empty;
  empty.width = 0;
  CHECK_THROWS_AS(entropy_bound(empty), ParamError);

  CHECK_THROWS_AS(bits_per_pixel(1.0, 0, 256), ParamError);
  CHECK_THROWS_AS(compression_ratio(0.0), ParamError);
  CHECK_THROWS_AS(compression_ratio(-0.5), ParamError);
}

TEST_CASE("empirical entropy of quantized data") {
  const QuantizerSpec spec;

  const Grid ones(16, 16, 1.0);
  CHECK(empirical_entropy(ones, spec) == 0.0);

  // A seeded fair coin lands near one bit per element.
  std::mt19937_64 rng(42);
  Grid coin(64, 64);
  for (double& v : coin.data) v = (rng() & 1) ? 1.0 : -1.0;
  const double h = empirical_entropy(coin, spec);
  CHECK(h > 4096.0 * 0.99);
  CHECK(h <= 4096.0);

  // Never exceeds the corresponding configuration bound.
  EntropyInputs flat;
  flat.width = 64;
  flat.height = 64;
  flat.layers = 0;
  flat.channels = 1;
  flat.num_centers = 2;
  CHECK(h <= entropy_bound(flat));

  Grid off = coin;
  off.data[7] = 0.5;
  CHECK_THROWS_AS(empirical_entropy(off, spec), ParamError);

  const Grid empty(0, 0);
  CHECK(empirical_entropy(empty, spec) == 0.0);

  // Quantizing first always satisfies the exact-center contract.
  const Grid z = random_grid(32, 32, 43u, -2.0, 2.0);
  CHECK_NOTHROW(empirical_entropy(hard_quantize(z, spec), spec));
}
