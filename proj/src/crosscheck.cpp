#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "detach/analytics.hpp"
#include "detach/harness.hpp"
#include "detach/oracle.hpp"
#include "detach/poissonized.hpp"
#include "detach/simulator.hpp"

namespace detach::harness {

namespace {

using Law = std::map<std::uint64_t, Rational>;

Cell I(std::uint64_t v) { return static_cast<std::int64_t>(v); }
const Cell kBlank{};

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// CDF of `upper` lies below the CDF of `lower` everywhere on 0..top.
bool dominated(const Law& lower, const Law& upper, std::uint64_t top) {
  Rational a = 0, b = 0;
  for (std::uint64_t t = 0; t <= top; ++t) {
    if (auto it = lower.find(t); it != lower.end()) a += it->second;
    if (auto it = upper.find(t); it != upper.end()) b += it->second;
    if (b > a) return false;
  }
  return true;
}

class Tally {
 public:
  Tally(ExperimentReport& r, std::string group) : r_(r), group_(std::move(group)) {}

  void compare(const std::string& quantity, std::uint64_t n, std::uint64_t k, Cell l, Cell m,
               const Rational& from_oracle, const Rational& closed_form) {
    const bool equal = from_oracle == closed_form;
    ++cases_;
    if (!equal) ++failures_;
    r_.table.add({quantity, I(n), I(k), std::move(l), std::move(m), to_string(from_oracle),
                  to_string(closed_form), I(equal ? 1 : 0)});
  }

  void finish() {
    r_.verdicts.push_back({group_ + "_mismatches", failures_ == 0, static_cast<double>(failures_),
                           "== 0 of " + std::to_string(cases_) + " exact comparisons"});
  }

 private:
  ExperimentReport& r_;
  std::string group_;
  std::uint64_t cases_ = 0, failures_ = 0;
};

}  // namespace

ExperimentReport oracle_verify(std::uint64_t n_max, std::uint64_t k_max, std::uint64_t l_max) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.spec.name = "oracle_verify";
  r.spec.parameters = {{"n_max", n_max}, {"k_max", k_max}, {"l_max", l_max}};
  r.table.columns = {"quantity", "n", "k", "l", "m", "oracle", "closed_form", "equal"};

  Tally single(r, "single_time");
  const Rational z(1, 3);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    for (std::uint64_t k = 1; k <= k_max; ++k) {
      const auto pmf = oracle::enumerate_single_time(n, k);
      single.compare("pmf_total", n, k, kBlank, kBlank, pmf.total(), Rational(1));
      single.compare("pi", n, k, kBlank, kBlank,
                     pmf.probability([n](const auto& o) { return o.lonely == n; }),
                     exact::pi_detached({n, k}));
      Rational lm = 0, l2 = 0, nm = 0, n2 = 0, gf = 0;
      Law support;
      for (const auto& [o, m] : pmf.mass) {
        lm += m * o.lonely;
        l2 += m * (o.lonely * o.lonely);
        nm += m * o.support;
        n2 += m * (o.support * o.support);
        support[o.support] += m;
        Rational zp = 1;
        for (std::uint64_t i = 0; i < o.support; ++i) zp *= z;
        gf += m * zp;
      }
      const auto lonely = exact::lonely_moments({n, k});
      single.compare("lonely_mean", n, k, kBlank, kBlank, lm, lonely.mean);
      single.compare("lonely_variance", n, k, kBlank, kBlank, l2 - lm * lm, lonely.variance);
      const auto pmf_closed = exact::support_pmf({n, k});
      for (std::uint64_t s = 1; s <= pmf_closed.size(); ++s) {
        single.compare("support_pmf", n, k, kBlank, I(s), support[s], pmf_closed[s - 1]);
      }
      const auto sm = exact::support_moments({n, k});
      single.compare("support_mean", n, k, kBlank, kBlank, nm, sm.mean);
      single.compare("support_variance", n, k, kBlank, kBlank, n2 - nm * nm, sm.variance);
      single.compare("support_gf_z=1/3", n, k, kBlank, kBlank, gf, exact::support_gf({n, k}, z));
      if (n >= 2) {
        for (std::uint64_t m = 1; m <= std::min(n, k); ++m) {
          single.compare("support_tail", n, k, kBlank, I(m),
                         pmf.probability([m](const auto& o) { return o.support >= m; }),
                         exact::support_tail(n, k, m));
        }
      }
      if (k >= 2) {
        single.compare("detachment_time_prob", n, k, kBlank, kBlank,
                       oracle::enumerate_two_time(n, k - 1, 1).into_detachment,
                       exact::detachment_time_prob({n, k}));
      }
    }
  }
  single.finish();

  Tally two(r, "two_time");
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    for (std::uint64_t k = 1; k <= k_max; ++k) {
      for (std::uint64_t l = 1; l <= l_max; ++l) {
        const auto t = oracle::enumerate_two_time(n, k, l);
        if (k >= n) {
          two.compare("joint_detached", n, k, I(l), kBlank, t.joint_detached,
                      exact::joint_detached(n, k, l));
          two.compare("cond_detached", n, k, I(l), kBlank, t.cond_detached,
                      exact::cond_detached(n, k, k + l));
        } else {
          two.compare("joint_detached", n, k, I(l), kBlank, t.joint_detached, Rational(0));
        }
        if (n >= 2 && k + l >= n) {
          two.compare("cond_detached_given_not", n, k, I(l), kBlank, t.cond_given_not,
                      exact::cond_detached_given_not(n, k, k + l));
        }
      }
    }
  }
  two.finish();

  Tally three(r, "three_time");
  for (std::uint64_t n = 1; n <= std::min<std::uint64_t>(n_max, 4); ++n) {
    for (std::uint64_t k = n; k <= std::min<std::uint64_t>(k_max, 4); ++k) {
      for (std::uint64_t g1 = 1; g1 <= 2; ++g1) {
        for (std::uint64_t g2 = 1; g2 <= 2; ++g2) {
          const auto t = oracle::enumerate_three_time(n, k, k + g1, k + g1 + g2);
          three.compare("triple_detached", n, k, I(g1), I(g2), t.triple,
                        exact::triple_detached(n, k, k + g1, k + g1 + g2));
          three.compare("sandwich", n, k, I(g1), I(g2), t.sandwich,
                        exact::sandwich_prob(n, k, k + g1, k + g1 + g2));
        }
      }
    }
  }
  three.finish();

  r.assumptions.push_back("columns l and m hold the gaps between observation times, or the support level m");
  r.wall_seconds = elapsed(start);
  return r;
}

ExperimentReport dominance_checks(std::uint64_t seed, std::uint64_t random_triples,
                                  std::uint64_t n_max) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.spec.name = "dominance";
  r.spec.parameters = {{"seed", seed}, {"random_triples", random_triples}, {"n_max", n_max}};
  r.table.columns = {"check", "cases", "failures"};
  auto record = [&r](const std::string& check, std::uint64_t cases, std::uint64_t failures,
                     const std::string& what) {
    r.table.add({check, I(cases), I(failures)});
    r.verdicts.push_back({check, failures == 0, static_cast<double>(failures),
                          "== 0 of " + std::to_string(cases) + " " + what});
  };

  {
    std::uint64_t cases = 0, failures = 0;
    for (std::uint64_t m = 1; m <= 8; ++m) {
      for (std::uint64_t n = 1; n <= 8; ++n) {
        for (int qi = 1; qi <= 19; ++qi) {
          for (int pi = 1; pi <= 19; ++pi) {
            const BinomialSpec y(m, qi / 20.0), x(n, pi / 20.0);
            ++cases;
            if (najnudel_dominates(y, x) != dominance_cdf_check(y, x)) ++failures;
          }
        }
      }
    }
    record("binomial_criterion_vs_cdf", cases, failures, "grid pairs disagree");
  }
  {
    RngStream rng(seed, 0);
    std::uint64_t failures = 0;
    for (std::uint64_t i = 0; i < random_triples; ++i) {
      const double lambda = std::exp(std::log(0.01) + rng.uniform() * std::log(1e4));
      const std::uint64_t k1 = 1 + rng.below(100);
      const std::uint64_t k2 = k1 + 1 + rng.below(100);
      if (!poissonian_lonely_dominance(lambda, k1, k2)) ++failures;
    }
    record("poissonian_lonely_dominance", random_triples, failures, "random (lambda, k1 < k2) fail");
  }
  {
    std::uint64_t cases = 0, failures = 0;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      Law prev_l, prev_s;
      Rational prev_any = -1;
      for (std::uint64_t k = 1; k <= n_max + 1; ++k) {
        const auto pmf = oracle::enumerate_single_time(n, k);
        const Law l = pmf.marginal([](const auto& o) { return o.lonely; }).mass;
        const Law s = pmf.marginal([](const auto& o) { return o.support; }).mass;
        const Rational any = pmf.probability([](const auto& o) { return o.lonely >= 1; });
        if (k > 1) {
          cases += 2;
          if (!dominated(prev_l, l, n)) ++failures;
          if (!dominated(prev_s, s, n)) ++failures;
          if (n >= 2) {
            ++cases;
            if (!(any > prev_any)) ++failures;
          }
        }
        prev_l = l;
        prev_s = s;
        prev_any = any;
      }
    }
    record("oracle_consecutive_dominance", cases, failures, "exact orderings fail");
  }
  {
    std::uint64_t cases = 0, failures = 0;
    for (std::uint64_t n = 1; n <= std::min<std::uint64_t>(n_max, 4); ++n) {
      std::vector<std::pair<std::uint64_t, Law>> laws;  // (support level, L | N = level)
      for (std::uint64_t k = 1; k <= n_max; ++k) {
        const auto pmf = oracle::enumerate_single_time(n, k);
        for (std::uint64_t a = 1; a <= std::min(n, k); ++a) {
          const Rational pa = pmf.probability([a](const auto& o) { return o.support == a; });
          Law law;
          for (const auto& [o, m] : pmf.mass) {
            if (o.support == a) law[o.lonely] += m / pa;
          }
          laws.emplace_back(a, std::move(law));
        }
      }
      for (const auto& [a, la] : laws) {
        for (const auto& [b, lb] : laws) {
          if (a > b) continue;
          ++cases;
          if (!dominated(la, lb, n)) ++failures;
        }
      }
    }
    record("oracle_conditional_dominance", cases, failures, "exact orderings fail");
  }
  r.references.push_back({"lonely_count_monotone", 1.0, Provenance::paper,
                          "L_k is stochastically dominated by L_{k+1}"});
  r.references.push_back({"support_size_monotone", 1.0, Provenance::paper,
                          "N_k is stochastically dominated by N_{k+1}"});
  r.assumptions.push_back("random triples: lambda log-uniform on [0.01, 100], k1 uniform on 1..100, k2 - k1 uniform on 1..100");
  r.wall_seconds = elapsed(start);
  return r;
}

}  // namespace detach::harness
