#include "detach/analytics.hpp"
#include "detach/oracle.hpp"
#include "doctest.h"

using namespace detach;
using namespace detach::oracle;

namespace {

Rational q(long a, long b) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

// CDF of a law on nonnegative integers, evaluated at 0..top.
std::vector<Rational> cdf_of(const std::map<std::uint64_t, Rational>& law, std::uint64_t top) {
  std::vector<Rational> out(top + 1);
  Rational acc = 0;
  for (std::uint64_t t = 0; t <= top; ++t) {
    if (auto it = law.find(t); it != law.end()) acc += it->second;
    out[t] = acc;
  }
  return out;
}

bool dominated(const std::map<std::uint64_t, Rational>& lower,
               const std::map<std::uint64_t, Rational>& upper, std::uint64_t top) {
  const auto a = cdf_of(lower, top), b = cdf_of(upper, top);
  for (std::uint64_t t = 0; t <= top; ++t) {
    if (b[t] > a[t]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single-time enumeration examples") {
  const auto p22 = enumerate_single_time(2, 2);
  CHECK(p22.mass.size() == 2);
  CHECK(p22.mass.at({0, 1, 4}) == q(1, 2));
  CHECK(p22.mass.at({2, 2, 2}) == q(1, 2));
  const auto p13 = enumerate_single_time(1, 3);
  CHECK(p13.mass.size() == 1);
  CHECK(p13.mass.at({1, 1, 1}) == 1);
  const auto p33 = enumerate_single_time(3, 3);
  const auto lonely = p33.marginal([](const SingleTimeOutcome& o) { return o.lonely; });
  CHECK(lonely.mass.at(3) == q(2, 9));
  CHECK(lonely.mass.at(1) == q(18, 27));
  CHECK(lonely.mass.at(0) == q(1, 9));
  CHECK(p33.total() == 1);
  CHECK_THROWS_AS(enumerate_single_time(8, 8, 1000), BudgetExceeded);
}

TEST_CASE("two- and three-time enumeration examples") {
  CHECK(enumerate_two_time(2, 2, 1).joint_detached == q(4, 9));
  CHECK(enumerate_two_time(1, 4, 3).joint_detached == 1);
  CHECK(enumerate_two_time(2, 3, 1).joint_detached == q(5, 8));
  CHECK(enumerate_two_time(3, 3, 1).into_detachment == q(3, 16));
  const auto t = enumerate_three_time(2, 2, 3, 4);
  CHECK(t.triple == q(5, 12));
  CHECK(t.sandwich == q(1, 48));
  const auto one = enumerate_three_time(1, 2, 3, 5);
  CHECK(one.triple == 1);
  CHECK(one.sandwich == 0);
  const auto t3 = enumerate_three_time(3, 3, 4, 5);
  CHECK(t3.triple == exact::triple_detached(3, 3, 4, 5));
  CHECK(t3.sandwich == exact::sandwich_prob(3, 3, 4, 5));
  CHECK(t3.path.total() == 1);
}

TEST_CASE("truncated product brackets the permanent detachment law") {
  const auto a = tau_cdf_truncated(2, 3, 1000);
  CHECK(a.exact == q(1, 2));
  CHECK(a.truncated >= a.exact);
  CHECK(to_double(a.truncated - a.exact) < 1e-2);
  const auto one = tau_cdf_truncated(1, 1, 50);
  CHECK(one.truncated == 1);
  const auto b = tau_cdf_truncated(3, 5, 10000);
  CHECK(b.exact == q(2, 7));
  CHECK(b.truncated >= b.exact);
  CHECK(to_double(b.truncated - b.exact) < 1e-2);
  const auto c = tau_cdf_truncated(3, 5, 100);
  CHECK(c.truncated > b.truncated);
  CHECK_THROWS_AS(tau_cdf_truncated(3, 5, 5), DomainError);
}

TEST_CASE("single-time marginals equal the closed forms") {
  for (std::uint64_t n = 1; n <= 5; ++n) {
    for (std::uint64_t k = 1; k <= 6; ++k) {
      const auto pmf = enumerate_single_time(n, k);
      REQUIRE(pmf.total() == 1);
      const Rational pi = pmf.probability([n](const auto& o) { return o.lonely == n; });
      REQUIRE(pi == exact::pi_detached({n, k}));

      Rational lm = 0, l2 = 0, nm = 0, n2 = 0;
      std::vector<Rational> support(std::min(n, k));
      for (const auto& [o, m] : pmf.mass) {
        lm += m * o.lonely;
        l2 += m * (o.lonely * o.lonely);
        nm += m * o.support;
        n2 += m * (o.support * o.support);
        support.at(o.support - 1) += m;
      }
      const auto lonely = exact::lonely_moments({n, k});
      REQUIRE(lonely.mean == lm);
      REQUIRE(lonely.variance == l2 - lm * lm);
      REQUIRE(exact::support_pmf({n, k}) == support);
      const auto sm = exact::support_moments({n, k});
      REQUIRE(sm.mean == nm);
      REQUIRE(sm.variance == n2 - nm * nm);
      if (n >= 2) {
        for (std::uint64_t m = 1; m <= std::min(n, k); ++m) {
          const Rational tail = pmf.probability([m](const auto& o) { return o.support >= m; });
          REQUIRE(exact::support_tail(n, k, m) == tail);
        }
      }
      if (k >= 2) {
        REQUIRE(enumerate_two_time(n, k - 1, 1).into_detachment ==
                exact::detachment_time_prob({n, k}));
      }
    }
  }
}

TEST_CASE("two-time enumeration equals the closed forms") {
  for (std::uint64_t n = 1; n <= 4; ++n) {
    for (std::uint64_t k = 1; k <= 5; ++k) {
      for (std::uint64_t l = 1; l <= 3; ++l) {
        const auto r = enumerate_two_time(n, k, l);
        REQUIRE(r.path.total() == 1);
        if (k >= n) {
          REQUIRE(r.joint_detached == exact::joint_detached(n, k, l));
          REQUIRE(r.cond_detached == exact::cond_detached(n, k, k + l));
        } else {
          REQUIRE(r.joint_detached == 0);
        }
        if (n >= 2 && k + l >= n) {
          REQUIRE(r.cond_given_not == exact::cond_detached_given_not(n, k, k + l));
        }
      }
    }
  }
}

TEST_CASE("lonely and support counts are stochastically increasing") {
  for (std::uint64_t n = 1; n <= 5; ++n) {
    std::map<std::uint64_t, Rational> prev_l, prev_n;
    Rational prev_any = -1;
    for (std::uint64_t k = 1; k <= 6; ++k) {
      const auto pmf = enumerate_single_time(n, k);
      const auto l = pmf.marginal([](const auto& o) { return o.lonely; }).mass;
      const auto s = pmf.marginal([](const auto& o) { return o.support; }).mass;
      const Rational any = pmf.probability([](const auto& o) { return o.lonely >= 1; });
      if (k > 1) {
        REQUIRE(dominated(prev_l, l, n));
        REQUIRE(dominated(prev_n, s, n));
        if (n >= 2) REQUIRE(any > prev_any);
      }
      prev_l = l;
      prev_n = s;
      prev_any = any;
    }
  }
}

TEST_CASE("lonely count given support size is ordered in the support size") {
  for (std::uint64_t n = 1; n <= 4; ++n) {
    // Conditional laws L_k | N_k = a for every k <= 5 and feasible a.
    std::vector<std::tuple<std::uint64_t, std::uint64_t, std::map<std::uint64_t, Rational>>> laws;
    for (std::uint64_t k = 1; k <= 5; ++k) {
      const auto pmf = enumerate_single_time(n, k);
      for (std::uint64_t a = 1; a <= std::min(n, k); ++a) {
        const Rational pa = pmf.probability([a](const auto& o) { return o.support == a; });
        std::map<std::uint64_t, Rational> law;
        for (const auto& [o, m] : pmf.mass) {
          if (o.support == a) law[o.lonely] += m / pa;
        }
        laws.emplace_back(k, a, law);
      }
    }
    for (const auto& [k, a, la] : laws) {
      for (const auto& [k2, b, lb] : laws) {
        if (a <= b) REQUIRE(dominated(la, lb, n));
      }
    }
  }
}
