#pragma once

// Brute-force ground truth for tiny instances. Every configuration path is
// enumerated with its exact integer weight; no floating point is involved.

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "detach/combinatorics.hpp"

namespace detach::oracle {

inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact law on labelled outcomes; masses are canonical and sum to 1.
template <typename Outcome>
struct ExactPmf {
  std::map<Outcome, Rational> mass;

  Rational total() const {
    Rational t = 0;
    for (const auto& [o, m] : mass) t += m;
    return t;
  }

  /// Probability of the outcomes satisfying `pred`.
  template <typename Pred>
  Rational probability(Pred pred) const {
    Rational t = 0;
    for (const auto& [o, m] : mass) {
      if (pred(o)) t += m;
    }
    return t;
  }

  /// Law of f(outcome).
  template <typename F>
  auto marginal(F f) const {
    ExactPmf<decltype(f(mass.begin()->first))> out;
    for (const auto& [o, m] : mass) out.mass[f(o)] += m;
    return out;
  }
};

/// (L, N, clumping) at one time.
struct SingleTimeOutcome {
  std::uint64_t lonely;
  std::uint64_t support;
  std::uint64_t clump;
  auto operator<=>(const SingleTimeOutcome&) const = default;
};

/// (L, N) at each of several observation times.
struct PathOutcome {
  std::vector<std::uint64_t> lonely;
  std::vector<std::uint64_t> support;
  auto operator<=>(const PathOutcome&) const = default;
};

/// All k^n equiprobable assignments at time k.
ExactPmf<SingleTimeOutcome> enumerate_single_time(std::uint64_t n, std::uint64_t k,
                                                  std::uint64_t budget = kEnumerationBudget);

/// Joint law of (L, N) at increasing times t_0 < t_1 < ... . The state at t_0
/// is uniform; between consecutive times each passenger either stays (weight
/// t_{i-1}) or joins one of the new buses (weight 1 each).
ExactPmf<PathOutcome> enumerate_path(std::uint64_t n, const std::vector<std::uint64_t>& times,
                                     std::uint64_t budget = kEnumerationBudget);

struct TwoTimeResult {
  ExactPmf<PathOutcome> path;      // times k, k + l
  Rational joint_detached;         // P(L_k = L_{k+l} = n)
  Rational pi_first;               // P(L_k = n)
  Rational pi_second;              // P(L_{k+l} = n)
  Rational cond_detached;          // P(L_{k+l} = n | L_k = n), 0 if undefined
  Rational cond_given_not;         // P(L_{k+l} = n | L_k < n), 0 if undefined
  Rational into_detachment;        // P(L_k < n, L_{k+l} = n)
};

TwoTimeResult enumerate_two_time(std::uint64_t n, std::uint64_t k, std::uint64_t l,
                                 std::uint64_t budget = kEnumerationBudget);

struct ThreeTimeResult {
  ExactPmf<PathOutcome> path;
  Rational triple;    // detached at k1, k2, k3
  Rational sandwich;  // detached at k1 and k3 but not k2
};

ThreeTimeResult enumerate_three_time(std::uint64_t n, std::uint64_t k1, std::uint64_t k2,
                                     std::uint64_t k3, std::uint64_t budget = kEnumerationBudget);

struct TruncatedTau {
  Rational truncated;  // pi_{n,k} prod_{i=k+1}^{K} ((i-1)/i)^n (n+i-1)/(i-1)
  Rational exact;      // C(k, n) / C(k+n-1, n)
};

/// Truncated infinite product for P(tau <= k); it decreases in K towards the
/// closed form, so `truncated >= exact`.
TruncatedTau tau_cdf_truncated(std::uint64_t n, std::uint64_t k, std::uint64_t K);

}  // namespace detach::oracle
