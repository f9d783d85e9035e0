#include <cmath>
#include <random>

#include "detach/poissonized.hpp"
#include "doctest.h"

using namespace detach;

TEST_CASE("full detachment probability") {
  CHECK(full_detachment_prob(0.0, 7) == 1.0);
  CHECK(full_detachment_prob(1.0, 1) == doctest::Approx(2.0 / std::exp(1.0)));
  CHECK(full_detachment_prob(50.0, 50) == doctest::Approx(std::pow(2.0 / std::exp(1.0), 50)));
  double previous = 0.0;
  for (std::uint64_t k = 1; k <= 200; ++k) {
    const double p = full_detachment_prob(3.0, k);
    CHECK(p >= previous);
    previous = p;
  }
  // The log is -lambda^2/(2k) + O(lambda^3/k^2): lambda = k^0.25 tends to 1,
  // lambda = sqrt(k) tends to e^{-1/2}.
  double along = 0.0;
  for (const double k : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    const double p = full_detachment_prob(std::pow(k, 0.25), static_cast<std::uint64_t>(k));
    CHECK(p > along);
    along = p;
  }
  CHECK(along > 0.999);
  CHECK(full_detachment_prob(1000.0, 1000000) == doctest::Approx(std::exp(-0.5)).epsilon(1e-3));
}

TEST_CASE("probability of no lonely bus") {
  CHECK(no_lonely_prob(2.0, 1) == doctest::Approx(1.0 - 2.0 * std::exp(-2.0)));
  CHECK(no_lonely_prob(2.0, 2) == doctest::Approx(std::pow(1.0 - std::exp(-1.0), 2)));
  CHECK(no_lonely_prob(0.0, 5) == 1.0);
  for (const double lambda : {0.1, 1.0, 5.0, 40.0}) {
    double previous = 2.0;
    for (std::uint64_t k = 1; k <= 400; ++k) {
      const double p = no_lonely_prob(lambda, k);
      CHECK(p <= previous);
      CHECK(p == doctest::Approx(std::pow(no_lonely_rate(lambda / k), lambda)));
      previous = p;
    }
  }
}

TEST_CASE("the rate function is nondecreasing") {
  double previous = 0.0;
  for (int i = 1; i <= 20000; ++i) {
    const double f = no_lonely_rate(i * 0.001);
    CHECK(f >= previous);
    previous = f;
  }
  CHECK(no_lonely_rate(0.5) < no_lonely_rate(1.0));
  CHECK(no_lonely_rate(1.0) < no_lonely_rate(2.0));
  CHECK_THROWS_AS(no_lonely_rate(0.0), DomainError);
}

TEST_CASE("binomial dominance criterion") {
  CHECK(najnudel_dominates({3, 0.4}, {3, 0.5}));
  CHECK_FALSE(najnudel_dominates({2, 0.5}, {3, 0.3}));
  CHECK(najnudel_dominates({2, 0.5}, {4, 0.5}));
  CHECK(najnudel_dominates({1, 1.0}, {1, 1.0}));
  CHECK(najnudel_dominates({2, 0.0}, {2, 0.0}));
  CHECK(najnudel_dominates({5, 0.0}, {2, 0.3}));
  CHECK_FALSE(najnudel_dominates({5, 0.1}, {2, 1.0}));
  CHECK_FALSE(najnudel_dominates({1, 0.1}, {3, 0.0}));
  CHECK_THROWS_AS(BinomialSpec(3, 1.5), DomainError);
}

TEST_CASE("cdf verifier agrees with the criterion") {
  CHECK(dominance_cdf_check({3, 0.4}, {3, 0.5}));
  CHECK_FALSE(dominance_cdf_check({2, 0.5}, {3, 0.3}));
  CHECK(dominance_cdf_check({2, 0.5}, {4, 0.5}));
  CHECK(dominance_cdf_check({1, 1.0}, {1, 1.0}));
  CHECK(dominance_cdf_check({2, 0.0}, {2, 0.0}));
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  for (std::uint64_t m = 1; m <= 8; ++m) {
    for (std::uint64_t n = 1; n <= 8; ++n) {
      for (const double q : grid) {
        for (const double p : grid) {
          REQUIRE(najnudel_dominates({m, q}, {n, p}) == dominance_cdf_check({m, q}, {n, p}));
        }
      }
    }
  }
}

TEST_CASE("poissonian lonely counts are stochastically increasing") {
  CHECK(poissonian_lonely_dominance(1.0, 1, 2));
  CHECK(poissonian_lonely_dominance(5.0, 2, 10));
  CHECK(poissonian_lonely_dominance(0.1, 3, 4));
  for (const auto& [lambda, k1, k2] : {std::tuple{5.0, 2, 10}, std::tuple{0.1, 3, 4}, std::tuple{1.0, 1, 2}}) {
    CHECK(dominance_cdf_check(poissonian_lonely_law(lambda, k1), poissonian_lonely_law(lambda, k2)));
  }
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> lam(0.01, 50.0);
  std::uniform_int_distribution<std::uint64_t> kk(1, 200);
  for (int i = 0; i < 1000; ++i) {
    const double lambda = lam(gen);
    std::uint64_t a = kk(gen), b = kk(gen);
    if (a == b) ++b;
    if (a > b) std::swap(a, b);
    REQUIRE(poissonian_lonely_dominance(lambda, a, b));
  }
  CHECK_THROWS_AS(poissonian_lonely_dominance(1.0, 3, 3), DomainError);
}
