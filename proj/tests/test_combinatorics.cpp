#include <cmath>

#include "detach/combinatorics.hpp"
#include "doctest.h"

using namespace detach;

TEST_CASE("falling factorial") {
  CHECK(falling_factorial(5, 3) == 60);
  CHECK(falling_factorial(17, 0) == 1);
  CHECK(falling_factorial(0, 0) == 1);
  CHECK(falling_factorial(2, 3) == 0);
  CHECK(falling_factorial(-2, 2) == 6);
}

TEST_CASE("log falling ratio") {
  CHECK(log_falling_ratio(5, 1).log_value == 0.0);
  CHECK(log_falling_ratio(3, 3).log_value == doctest::Approx(std::log(2.0 / 9.0)).epsilon(1e-12));
  CHECK(log_falling_ratio(2, 2).log_value == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(log_falling_ratio(3, 4), DomainError);

  for (std::uint64_t k = 1; k <= 40; ++k) {
    for (std::uint64_t n = 1; n <= k; ++n) {
      const double exact = to_double(falling_ratio(k, n));
      const double viaLog = log_falling_ratio(k, n).value();
      CHECK(std::abs(viaLog - exact) <= 1e-12 * exact);
    }
  }
}

TEST_CASE("to_double rounds to nearest") {
  CHECK(to_double(Rational(1, 3)) == 1.0 / 3.0);
  CHECK(to_double(Rational(2, 3)) == 2.0 / 3.0);
  CHECK(to_double(Rational(-1, 10)) == -0.1);
  CHECK(to_string(Rational(4, 2)) == "2");
  CHECK(to_string(Rational(2, 9)) == "2/9");
}

TEST_CASE("stirling numbers of the second kind") {
  CHECK(stirling2(4, 2) == 7);
  CHECK(stirling2(3, 5) == 0);
  CHECK(stirling2(0, 0) == 1);
  CHECK(stirling2(5, 0) == 0);
  for (std::uint32_t a = 1; a <= 30; ++a) {
    CHECK(stirling2(a, a) == 1);
    CHECK(stirling2(a, 1) == 1);
  }
  CHECK(stirling2(10, 3) == 9330);
}

TEST_CASE("stirling table recurrence, summation formula and bounds") {
  const StirlingTable t(61);
  for (std::uint32_t a = 1; a <= 60; ++a) {
    for (std::uint32_t b = 1; b <= a; ++b) {
      if (b < a) REQUIRE(t(a, b) == b * t(a - 1, b) + t(a - 1, b - 1));
      // S(a+1, b+1) = sum_{j=b}^{a} (b+1)^{a-j} S(j, b)
      Integer sum = 0;
      for (std::uint32_t j = b; j <= a; ++j) {
        Integer pw;
        mpz_ui_pow_ui(pw.get_mpz_t(), b + 1, a - j);
        sum += pw * t(j, b);
      }
      REQUIRE(sum == t(a + 1, b + 1));
      // Bounds for 1 <= b < a:
      // (1/2)(b^2+b+2) b^{a-b-1} - 1 <= S(a,b) <= (1/2) C(a,b) b^{a-b}
      if (b < a) {
        Integer lower_pow, upper_pow;
        mpz_ui_pow_ui(lower_pow.get_mpz_t(), b, a - b - 1);
        mpz_ui_pow_ui(upper_pow.get_mpz_t(), b, a - b);
        const Rational lower = Rational(Integer(b * b + b + 2) * lower_pow, 2) - 1;
        const Rational upper(binomial(a, b) * upper_pow, 2);
        REQUIRE(Rational(t(a, b)) >= lower);
        REQUIRE(Rational(t(a, b)) <= upper);
      }
    }
  }
}

TEST_CASE("shared table grows on demand") {
  const auto small = shared_stirling_table(10);
  const auto large = shared_stirling_table(150);
  CHECK(large->max() >= 150);
  CHECK((*small)(4, 2) == 7);
  CHECK((*large)(4, 2) == 7);
}

TEST_CASE("terminating 2F0 series") {
  CHECK(two_f_zero(2, 1, Rational(1, 2)) == 2);
  CHECK(two_f_zero(2, 2, Rational(1, 2)) == Rational(7, 2));
  const Rational z(3, 7);
  CHECK(two_f_zero(1, 1, z) == 1 + z);
  for (std::uint64_t n = 1; n <= 8; ++n) {
    for (std::uint64_t l = 1; l <= 8; ++l) {
      CHECK(two_f_zero(n, l, z) == two_f_zero(l, n, z));
      const double exact = to_double(two_f_zero(n, l, Rational(1, 5)));
      const double viaLog = two_f_zero_log(n, l, 0.2).value();
      CHECK(viaLog == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("log-sum-exp") {
  LogSumExp acc;
  CHECK(acc.result().is_zero());
  acc.add(std::log(0.25));
  acc.add(std::log(0.5));
  acc.add(LogProb::zero());
  CHECK(acc.result().value() == doctest::Approx(0.75));
  CHECK((LogProb::from_value(0.5) * LogProb::zero()).is_zero());
  CHECK_THROWS_AS(LogProb::from_value(-1.0), DomainError);
}
