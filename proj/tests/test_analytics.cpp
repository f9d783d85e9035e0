#include <cmath>

#include "detach/analytics.hpp"
#include "doctest.h"

using namespace detach;
namespace ex = detach::exact;

TEST_CASE("single-time detachment probability") {
  CHECK(ex::pi_detached({1, 5}) == 1);
  CHECK(ex::pi_detached({3, 2}) == 0);
  CHECK(ex::pi_detached({3, 3}) == Rational(2, 9));
  CHECK(pi_detached({3, 3}) == 2.0 / 9.0);
  CHECK(pi_detached({3, 2}) == 0.0);
  CHECK(pi_detached({300, 1000}) == doctest::Approx(log_falling_ratio(1000, 300).value()));
  CHECK_THROWS_AS(ProcessParams(0, 3), DomainError);
}

TEST_CASE("pi is strictly increasing in k") {
  for (std::uint64_t n = 2; n <= 12; ++n) {
    for (std::uint64_t k = n; k < 60; ++k) {
      CHECK(ex::pi_detached({n, k}) < ex::pi_detached({n, k + 1}));
    }
  }
}

TEST_CASE("detachment time probability") {
  CHECK(ex::detachment_time_prob({1, 7}) == 0);
  CHECK(ex::detachment_time_prob({2, 2}) == Rational(1, 2));
  CHECK(ex::detachment_time_prob({3, 4}) == Rational(3, 16));
  CHECK(ex::detachment_time_prob({4, 6}) == Rational(1, 9));
  CHECK(detachment_time_prob({3, 4}) == 3.0 / 16.0);
  CHECK(detachment_time_prob({250, 5000}) ==
        doctest::Approx(250.0 * 249.0 / (5000.0 * 5000.0) *
                        std::exp(log_falling_ratio(4998, 248).log_value +
                                 248 * std::log(4998.0 / 5000.0)))
            .epsilon(1e-10));
}

TEST_CASE("birthday bounds bracket log pi") {
  const auto b100 = log_pi_bounds({2, 100});
  CHECK(b100.lower <= std::log(0.99));
  CHECK(std::log(0.99) <= b100.upper);
  for (std::uint64_t n = 2; n <= 500; ++n) {
    for (std::uint64_t k = n; k <= 500; ++k) {
      const auto b = log_pi_bounds({n, k});
      const double lp = log_falling_ratio(k, n).log_value;
      REQUIRE(b.lower <= lp);
      REQUIRE(lp <= b.upper);
    }
  }
  CHECK_THROWS_AS(log_pi_bounds({5, 4}), DomainError);
}

TEST_CASE("two-time identities") {
  CHECK(ex::joint_detached(1, 3, 2) == 1);
  CHECK(ex::joint_detached(2, 2, 1) == Rational(4, 9));
  CHECK(ex::joint_detached(2, 3, 1) == Rational(5, 8));
  CHECK(ex::joint_detached(2, 2, 2) == Rational(7, 16));
  CHECK(ex::cond_detached(2, 2, 3) == Rational(8, 9));
  CHECK(ex::cond_detached(2, 3, 4) == Rational(15, 16));
  CHECK(ex::cond_detached(1, 4, 9) == 1);
  CHECK(ex::cond_detached_given_not(2, 2, 3) == Rational(4, 9));
  CHECK(ex::cond_detached_given_not(2, 1, 2) == Rational(1, 2));
  CHECK(ex::cond_detached_given_not(3, 3, 4) == Rational(27, 112));
  CHECK_THROWS_AS(ex::joint_detached(3, 2, 1), DomainError);
  CHECK_THROWS_AS(ex::cond_detached(2, 3, 3), DomainError);

  for (std::uint64_t n = 1; n <= 6; ++n) {
    for (std::uint64_t k = n; k <= 8; ++k) {
      for (std::uint64_t l = 1; l <= 6; ++l) {
        REQUIRE(ex::joint_detached(n, k, l) ==
                ex::pi_detached({n, k}) * ex::cond_detached(n, k, k + l));
      }
    }
  }
}

TEST_CASE("two-time identities in floating point") {
  CHECK(joint_detached(2, 2, 1) == doctest::Approx(4.0 / 9.0));
  CHECK(cond_detached(300, 400, 900) ==
        doctest::Approx(joint_detached(300, 400, 500) / pi_detached({300, 400})).epsilon(1e-9));
  CHECK(cond_detached_given_not(300, 400, 900) > 0.0);
}

TEST_CASE("three-time identities") {
  CHECK(ex::triple_detached(2, 2, 3, 4) == Rational(5, 12));
  CHECK(ex::sandwich_prob(2, 2, 3, 4) == Rational(1, 48));
  CHECK(ex::triple_detached(1, 2, 3, 4) == 1);
  CHECK(ex::sandwich_prob(1, 2, 3, 4) == 0);
  CHECK(ex::triple_detached(2, 2, 3, 5) == Rational(92, 225));
  CHECK(ex::triple_detached(3, 3, 4, 5) == Rational(21, 125));
  CHECK(ex::sandwich_prob(3, 3, 4, 5) == Rational(1, 125));
  CHECK(sandwich_prob(2, 2, 3, 4) == doctest::Approx(1.0 / 48.0));
  CHECK(sandwich_prob(250, 300, 400, 600) >= 0.0);
}

TEST_CASE("permanent detachment law") {
  CHECK(ex::tau_cdf({1, 1}) == 1);
  CHECK(ex::tau_cdf({5, 4}) == 0);
  for (std::uint64_t k = 1; k <= 1000; ++k) {
    Rational expect(k - 1, k + 1);
    expect.canonicalize();
    REQUIRE(ex::tau_cdf({2, k}) == expect);
  }
  CHECK(tau_cdf({2, 3}) == 0.5);
  CHECK(ex::tau_cdf({3, 5}) == Rational(2, 7));
  for (std::uint64_t n : {2, 5, 10}) {
    const double k = 1e6;
    const double s = tau_survival({n, 1000000});
    CHECK(std::abs(k * s / static_cast<double>(n * (n - 1)) - 1.0) < 0.01);
  }
}

TEST_CASE("inverse exponential limit") {
  CHECK(ie_cdf(1.0) == doctest::Approx(0.36787944117144233));
  CHECK(ie_cdf(0.5) == doctest::Approx(std::exp(-2.0)));
  CHECK(ie_cdf(1e12) == doctest::Approx(1.0));
  CHECK(ie_cdf(INFINITY) == 1.0);
  CHECK_THROWS_AS(ie_cdf(0.0), DomainError);
  double best_x = 0.0, best = -1.0;
  for (int i = 1; i <= 5000; ++i) {
    const double x = i * 0.001;
    if (ie_density(x) > best) {
      best = ie_density(x);
      best_x = x;
    }
  }
  CHECK(best_x == doctest::Approx(0.5));
}

TEST_CASE("expected number of detachment states") {
  CHECK(expected_detachment_states(2, 1) == 0.0);
  CHECK(ex::expected_detachment_states(2, 3) == Rational(7, 6));
  CHECK(ex::expected_detachment_states(3, 4) == Rational(43, 72));
  CHECK(expected_detachment_states(3, 4) == doctest::Approx(43.0 / 72.0));
  // Log-space recurrence against direct per-term evaluation.
  const std::uint64_t n = 300, k = 150000;
  long double direct = 0.0L;
  for (std::uint64_t j = n; j <= k; j += 1) direct += log_falling_ratio(j, n).value();
  CHECK(expected_detachment_states(n, k) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-11));
  double previous = 0.0;
  for (std::uint64_t kk = 300; kk <= 3000; kk += 100) {
    const double e = expected_detachment_states(n, kk);
    CHECK(e >= previous);
    previous = e;
  }
}

TEST_CASE("critical scale") {
  CHECK(critical_k(100, 0.0) == doctest::Approx(812.22).epsilon(1e-5));
  CHECK(critical_limit(0.0) == 0.125);
  const auto w = critical_window(1000, 1.0);
  CHECK(w.limit_c_of_y == doctest::Approx(std::exp(-1.0) / 8.0));
  CHECK(w.k_of_n_y > 0.0);
  // n = e^e rounded: log log n is close to 1.
  const double ln = std::log(15.0);
  CHECK(critical_k(15, 2.0) == doctest::Approx(225.0 / (2.0 * (2.0 * ln - 2.0 * std::log(ln) + 2.0))));
  CHECK_THROWS_AS(critical_k(2, 1.0), DomainError);
}

TEST_CASE("lonely passenger moments") {
  const auto m22 = ex::lonely_moments({2, 2});
  CHECK(m22.mean == 1);
  CHECK(m22.variance == 1);
  const auto m33 = ex::lonely_moments({3, 3});
  CHECK(m33.mean == Rational(4, 3));
  CHECK(m33.variance == Rational(8, 9));
  const auto m1 = ex::lonely_moments({1, 9});
  CHECK(m1.mean == 1);
  CHECK(m1.variance == 0);
  CHECK_THROWS_AS(ex::lonely_moments({3, 1}).concentration_ratio(), DomainError);
  CHECK_THROWS_AS(lonely_moments({3, 1}).concentration_ratio(), DomainError);
  const auto big = lonely_moments({10000, 1086});
  CHECK(big.mean == doctest::Approx(10000.0 * std::pow(1.0 - 1.0 / 1086.0, 9999.0)).epsilon(1e-10));
  CHECK(big.variance >= 0.0);
  const auto edge = lonely_moments({1000, 1000});
  const auto edge_exact = ex::lonely_moments({200, 200});
  CHECK(lonely_moments({200, 200}).mean == doctest::Approx(to_double(edge_exact.mean)));
  CHECK(edge.mean > 0.0);
}

TEST_CASE("support size law") {
  CHECK(ex::support_tail(2, 2, 1) == 1);
  CHECK(ex::support_tail(3, 3, 2) == Rational(8, 9));
  CHECK(ex::support_tail(3, 3, 3) == Rational(2, 9));
  CHECK_THROWS_AS(ex::support_tail(3, 2, 3), DomainError);

  const auto p22 = ex::support_pmf({2, 2});
  REQUIRE(p22.size() == 2);
  CHECK(p22[0] == Rational(1, 2));
  CHECK(p22[1] == Rational(1, 2));
  CHECK(ex::support_pmf({1, 4}) == std::vector<Rational>{1});
  const auto p32 = ex::support_pmf({3, 2});
  CHECK(p32[0] == Rational(1, 4));
  CHECK(p32[1] == Rational(3, 4));

  for (std::uint64_t n = 1; n <= 12; ++n) {
    for (std::uint64_t k = 1; k <= 12; ++k) {
      const auto alt = ex::support_pmf({n, k});
      const auto chain = ex::support_pmf_birth_chain({n, k});
      REQUIRE(alt == chain);
      Rational total = 0, mean = 0, second = 0;
      for (std::size_t r = 0; r < alt.size(); ++r) {
        total += alt[r];
        mean += alt[r] * static_cast<unsigned long>(r + 1);
        second += alt[r] * static_cast<unsigned long>((r + 1) * (r + 1));
      }
      REQUIRE(total == 1);
      const auto mom = ex::support_moments({n, k});
      REQUIRE(mom.mean == mean);
      REQUIRE(mom.variance == second - mean * mean);
      REQUIRE(ex::support_gf({n, k}, 1) == 1);
      if (n >= 2) {
        for (std::uint64_t m = 1; m <= std::min(n, k); ++m) {
          Rational tail = 0;
          for (std::size_t r = m - 1; r < alt.size(); ++r) tail += alt[r];
          REQUIRE(ex::support_tail(n, k, m) == tail);
        }
      }
    }
  }
}

TEST_CASE("support generating function matches the pmf") {
  // G(z) = sum_r P(N = r) z^r at several rational points.
  for (std::uint64_t n = 1; n <= 6; ++n) {
    for (std::uint64_t k = 1; k <= 6; ++k) {
      const auto pmf = ex::support_pmf({n, k});
      for (const Rational z : {Rational(0), Rational(1, 3), Rational(5, 7), Rational(2)}) {
        Rational expect = 0, zp = z;
        for (const auto& p : pmf) {
          expect += p * zp;
          zp *= z;
        }
        REQUIRE(ex::support_gf({n, k}, z) == expect);
      }
    }
  }
  CHECK(ex::support_gf({3, 2}, 0) == 0);
  CHECK(support_gf({2, 2}, 0.5) == doctest::Approx(0.5 * 0.5 + 0.5 * 0.25));
}

TEST_CASE("support moments in floating point") {
  const auto m = ex::support_moments({2, 2});
  CHECK(m.mean == Rational(3, 2));
  CHECK(m.variance == Rational(1, 4));
  CHECK(ex::support_moments({3, 3}).mean == Rational(19, 9));
  CHECK(ex::support_moments({3, 3}).variance == Rational(26, 81));
  const auto big = support_moments({400, 300});
  const auto pmf = support_pmf({400, 300});
  double mean = 0.0, second = 0.0, total = 0.0;
  for (std::size_t r = 0; r < pmf.size(); ++r) {
    total += pmf[r];
    mean += pmf[r] * static_cast<double>(r + 1);
    second += pmf[r] * static_cast<double>((r + 1) * (r + 1));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(big.mean == doctest::Approx(mean).epsilon(1e-10));
  CHECK(big.variance == doctest::Approx(second - mean * mean).epsilon(1e-6));
  CHECK(support_tail(400, 300, 1) == doctest::Approx(1.0));
}

TEST_CASE("beta limits") {
  CHECK(minmax_limit_cdf(1, 0.3, Extreme::min) == doctest::Approx(0.3));
  CHECK(minmax_limit_cdf(2, 0.5, Extreme::max) == doctest::Approx(0.25));
  CHECK_THROWS_AS(minmax_limit_cdf(2, 1.5, Extreme::max), DomainError);
  const auto s = beta_limit_stats(3);
  CHECK(s.mean_range == doctest::Approx(0.5));
  CHECK(s.mean_min == doctest::Approx(0.25));
  CHECK(s.mean_max == doctest::Approx(0.75));
  CHECK(s.sd == doctest::Approx(0.25 * std::sqrt(3.0 / 5.0)));
}

TEST_CASE("finite-dimensional limit values") {
  CHECK(fidi_limit_value(FidiKind::single, 1.0) == doctest::Approx(0.6065306597));
  CHECK(fidi_limit_value(FidiKind::cond_detached, 1.0, 2.0) == doctest::Approx(std::exp(-0.125)));
  CHECK(fidi_limit_value(FidiKind::cond_detached, 1.0, 1.0 + 1e-9) == doctest::Approx(1.0));
  CHECK(fidi_limit_value(FidiKind::joint, 1.0, 2.0) ==
        doctest::Approx(fidi_limit_value(FidiKind::single, 1.0) *
                        fidi_limit_value(FidiKind::cond_detached, 1.0, 2.0)));
  const double c = 1.0, d = 2.0;
  const double pc = std::exp(-1.0 / (2 * c)), pd = std::exp(-1.0 / (2 * d));
  const double joint = fidi_limit_value(FidiKind::joint, c, d);
  CHECK(fidi_limit_value(FidiKind::cond_given_not, c, d) == doctest::Approx((pd - joint) / (1 - pc)));
  CHECK_THROWS_AS(fidi_limit_value(FidiKind::cond_detached, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(fidi_limit_value(FidiKind::single, 0.0), DomainError);
}

TEST_CASE("two-time probabilities approach their scaling limits") {
  for (const auto [c, d] : {std::pair{1.0, 2.0}, std::pair{1.0, 4.0}, std::pair{2.0, 3.0}}) {
    const std::uint64_t n = 200;
    const auto k1 = static_cast<std::uint64_t>(c * n * n), k2 = static_cast<std::uint64_t>(d * n * n);
    CHECK(std::abs(cond_detached(n, k1, k2) - fidi_limit_value(FidiKind::cond_detached, c, d)) <
          5.0 / n);
    CHECK(std::abs(pi_detached({n, k1}) - fidi_limit_value(FidiKind::single, c)) < 5.0 / n);
  }
}
