#pragma once

// Closed-form probabilities, moments, limit values and critical scales of the
// detachment process. Every quantity comes in two flavours:
//
//   detach::exact::f(...)  -> Rational, bit-exact, meant for small n and k
//   detach::f(...)         -> double; evaluates the exact form and rounds when
//                             all parameters fit the exact budget, otherwise
//                             works in log space.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "detach/combinatorics.hpp"

namespace detach {

/// n passengers observed at time (bus count) k.
struct ProcessParams {
  std::uint64_t n;
  std::uint64_t k;

  ProcessParams(std::uint64_t n_, std::uint64_t k_) : n(n_), k(k_) {
    if (n == 0) throw DomainError("ProcessParams: n must be >= 1");
    if (k == 0) throw DomainError("ProcessParams: k must be >= 1");
  }
};

/// Parameters up to this bound are evaluated through exact rationals by the
/// floating-point entry points.
inline constexpr std::uint64_t kExactBudget = 200;

inline bool within_exact_budget(std::uint64_t n, std::uint64_t k_max,
                                std::uint64_t budget = kExactBudget) {
  return n <= budget && k_max <= budget;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

struct ExactMoments {
  Rational mean;
  Rational variance;
};

/// Mean M, variance V of the lonely-passenger count and the ratio V / M^2.
struct LonelyMoments {
  double mean = 0.0;
  double variance = 0.0;
  /// Throws DomainError when the mean is zero (k == 1, n >= 2).
  double concentration_ratio() const;
};

struct ExactLonelyMoments {
  Rational mean;
  Rational variance;
  Rational concentration_ratio() const;
};

struct LogBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Scale k(n, y) = n^2 / (2 (2 log n - 2 log log n + y)) and its limit
/// c(y) = e^{-y} / 8 for the expected number of detached states.
struct CriticalWindow {
  std::uint64_t n = 0;
  double y = 0.0;
  double k_of_n_y = 0.0;
  double limit_c_of_y = 0.0;
};

enum class Extreme { min, max };

enum class FidiKind { single, cond_detached, cond_given_not, joint };

struct BetaLimitStats {
  double mean_min = 0.0;    // 1 / (n + 1)
  double mean_max = 0.0;    // n / (n + 1)
  double mean_range = 0.0;  // (n - 1) / (n + 1)
  double sd = 0.0;          // shared by min and max
};

namespace exact {

Rational pi_detached(ProcessParams p);
Rational detachment_time_prob(ProcessParams p);
Rational joint_detached(std::uint64_t n, std::uint64_t k, std::uint64_t l);
Rational cond_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2);
Rational cond_detached_given_not(std::uint64_t n, std::uint64_t k1, std::uint64_t k2);
Rational triple_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3);
Rational sandwich_prob(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3);
Rational tau_cdf(ProcessParams p);
Rational expected_detachment_states(std::uint64_t n, std::uint64_t k);
ExactLonelyMoments lonely_moments(ProcessParams p);
Rational support_tail(std::uint64_t n, std::uint64_t k, std::uint64_t m);
/// Entry r-1 holds P(N_k = r), r = 1..min(n, k). Alternating-sum form.
std::vector<Rational> support_pmf(ProcessParams p);
/// Same law from the forward birth chain (sitting passengers one by one).
std::vector<Rational> support_pmf_birth_chain(ProcessParams p);
Rational support_gf(ProcessParams p, const Rational& z);
ExactMoments support_moments(ProcessParams p);

}  // namespace exact

LogProb log_pi_detached(ProcessParams p);
double pi_detached(ProcessParams p);
double detachment_time_prob(ProcessParams p);
LogBounds log_pi_bounds(ProcessParams p);

LogProb log_joint_detached(std::uint64_t n, std::uint64_t k, std::uint64_t l);
double joint_detached(std::uint64_t n, std::uint64_t k, std::uint64_t l);
LogProb log_cond_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2);
double cond_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2);
double cond_detached_given_not(std::uint64_t n, std::uint64_t k1, std::uint64_t k2);
double triple_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3);
double sandwich_prob(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3);

/// P(tau <= k) = C(k, n) / C(k + n - 1, n).
LogProb log_tau_cdf(ProcessParams p);
double tau_cdf(ProcessParams p);
/// 1 - tau_cdf, without cancellation for large k.
double tau_survival(ProcessParams p);

/// e^{-1/x}, the inverse exponential IE(1) distribution function.
double ie_cdf(double x);
/// x^{-2} e^{-1/x}; its unique mode is at x = 1/2.
double ie_density(double x);

/// e(n, k) = sum_{j=n}^{k} (j)_n / j^n. Terms come from a log-space
/// recurrence re-anchored to the direct sum every few thousand steps and are
/// accumulated in long double.
double expected_detachment_states(std::uint64_t n, std::uint64_t k);

double critical_k(std::uint64_t n, double y);
double critical_limit(double y);
CriticalWindow critical_window(std::uint64_t n, double y);

LonelyMoments lonely_moments(ProcessParams p);

double support_tail(std::uint64_t n, std::uint64_t k, std::uint64_t m);
std::vector<double> support_pmf(ProcessParams p);
double support_gf(ProcessParams p, double z);
Moments support_moments(ProcessParams p);

/// k -> infinity limit laws of m_k / k (Beta(1, n)) and M_k / k (Beta(n, 1)).
double minmax_limit_cdf(std::uint64_t n, double x, Extreme which);
BetaLimitStats beta_limit_stats(std::uint64_t n);

/// Scaling limits of the detached-state indicator at times c n^2 and d n^2.
/// `d` is ignored for FidiKind::single.
double fidi_limit_value(FidiKind kind, double c, double d = 0.0);

}  // namespace detach
