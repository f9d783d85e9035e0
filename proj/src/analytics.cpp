#include "detach/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace detach {

namespace {

Rational power(const Rational& base, std::uint64_t e) {
  Integer num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational out(num, den);
  out.canonicalize();
  return out;
}

Rational ratio(std::uint64_t a, std::uint64_t b) {
  Rational out(Integer(static_cast<unsigned long>(a)), Integer(static_cast<unsigned long>(b)));
  out.canonicalize();
  return out;
}

Rational ratio(const Integer& a, const Integer& b) {
  Rational out(a, b);
  out.canonicalize();
  return out;
}

Integer upow(std::uint64_t base, std::uint64_t e) {
  Integer out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, e);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void check_multi_time(std::uint64_t n, std::uint64_t k1, std::uint64_t k2) {
  require(n >= 1, "n must be >= 1");
  require(k1 >= n, "requires k1 >= n");
  require(k2 > k1, "requires k2 > k1");
}

// n log(k1 / k2) for k1 < k2, accurate when k1 / k2 is close to 1.
double log_time_ratio_pow(std::uint64_t n, std::uint64_t k1, std::uint64_t k2) {
  return static_cast<double>(n) *
         std::log1p(-static_cast<double>(k2 - k1) / static_cast<double>(k2));
}

// (1 - j/k)^e evaluated as exp(e log1p(-j/k)), with 0^0 = 1.
double pow_one_minus(std::uint64_t e, double j, double k) {
  if (e == 0) return 1.0;
  if (j >= k) return 0.0;
  return std::exp(static_cast<double>(e) * std::log1p(-j / k));
}

}  // namespace

double LonelyMoments::concentration_ratio() const {
  if (mean == 0.0) throw DomainError("concentration ratio undefined: mean is zero");
  return variance / (mean * mean);
}

Rational ExactLonelyMoments::concentration_ratio() const {
  if (mean == 0) throw DomainError("concentration ratio undefined: mean is zero");
  Rational out = variance / (mean * mean);
  out.canonicalize();
  return out;
}

// ---------------------------------------------------------------------------
// Exact rationals

namespace exact {

Rational pi_detached(ProcessParams p) { return falling_ratio(p.k, p.n); }

Rational detachment_time_prob(ProcessParams p) {
  if (p.n == 1 || p.k < p.n) return 0;
  Integer num = falling_factorial(static_cast<std::int64_t>(p.k) - 2, p.n - 2);
  num *= static_cast<unsigned long>(p.n * (p.n - 1));
  return ratio(num, upow(p.k, p.n));
}

Rational joint_detached(std::uint64_t n, std::uint64_t k, std::uint64_t l) {
  require(n >= 1 && l >= 1, "joint_detached: requires n >= 1 and l >= 1");
  require(k >= n, "joint_detached: requires k >= n");
  Rational out = ratio(falling_factorial(static_cast<std::int64_t>(k), n), upow(k + l, n));
  out *= two_f_zero(n, l, ratio(1, k));
  out.canonicalize();
  return out;
}

Rational cond_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2) {
  check_multi_time(n, k1, k2);
  Rational out = power(ratio(k1, k2), n) * two_f_zero(n, k2 - k1, ratio(1, k1));
  out.canonicalize();
  return out;
}

Rational cond_detached_given_not(std::uint64_t n, std::uint64_t k1, std::uint64_t k2) {
  require(n >= 2, "cond_detached_given_not: requires n >= 2");
  require(k2 >= n, "cond_detached_given_not: requires k2 >= n");
  require(k1 >= 1 && k1 < k2, "cond_detached_given_not: requires 1 <= k1 < k2");
  const Rational pi2 = pi_detached({n, k2});
  if (k1 < n) return pi2;
  const Rational pi1 = pi_detached({n, k1});
  require(pi1 != 1, "cond_detached_given_not: conditioning event has probability zero");
  Rational out = (pi2 - joint_detached(n, k1, k2 - k1)) / (1 - pi1);
  out.canonicalize();
  return out;
}

Rational triple_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) {
  check_multi_time(n, k1, k2);
  require(k3 > k2, "triple_detached: requires k3 > k2");
  Rational out = ratio(falling_factorial(static_cast<std::int64_t>(k1), n), upow(k2, n)) *
                 two_f_zero(n, k2 - k1, ratio(1, k1)) * power(ratio(k2, k3), n) *
                 two_f_zero(n, k3 - k2, ratio(1, k2));
  out.canonicalize();
  return out;
}

Rational sandwich_prob(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) {
  check_multi_time(n, k1, k2);
  require(k3 > k2, "sandwich_prob: requires k3 > k2");
  const Rational inv1 = ratio(1, k1);
  Rational bracket = two_f_zero(n, k3 - k1, inv1) -
                     two_f_zero(n, k2 - k1, inv1) * two_f_zero(n, k3 - k2, ratio(1, k2));
  Rational out = ratio(falling_factorial(static_cast<std::int64_t>(k1), n), upow(k3, n)) * bracket;
  out.canonicalize();
  return out;
}

Rational tau_cdf(ProcessParams p) {
  if (p.k < p.n) return 0;
  return ratio(binomial(static_cast<std::int64_t>(p.k), static_cast<std::int64_t>(p.n)),
               binomial(static_cast<std::int64_t>(p.k + p.n - 1), static_cast<std::int64_t>(p.n)));
}

Rational expected_detachment_states(std::uint64_t n, std::uint64_t k) {
  require(n >= 1, "expected_detachment_states: n must be >= 1");
  Rational acc = 0;
  for (std::uint64_t j = n; j <= k; ++j) acc += falling_ratio(j, n);
  acc.canonicalize();
  return acc;
}

ExactLonelyMoments lonely_moments(ProcessParams p) {
  const auto [n, k] = p;
  const Rational mean = n * power(ratio(k - 1, k), n - 1);
  Rational pair = 0;  // A_{n,k}: two given buses each hold exactly one passenger
  if (n >= 2 && k >= 2) {
    pair = ratio(n * (n - 1), k * k) * power(ratio(k - 2, k), n - 2);
  }
  Rational variance = mean + Rational(Integer(static_cast<unsigned long>(k * (k - 1)))) * pair -
                      mean * mean;
  variance.canonicalize();
  return {mean, variance};
}

Rational support_tail(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  require(n >= 1 && k >= 1, "support_tail: requires n, k >= 1");
  require(m >= 1 && m <= std::min(n, k), "support_tail: requires 1 <= m <= min(n, k)");
  Rational bracket = ratio(Integer(1), upow(k, m));
  if (n - 1 >= m) {
    const auto table = shared_stirling_table(static_cast<std::uint32_t>(n - 1));
    for (std::uint64_t u = m; u <= n - 1; ++u) {
      bracket += ratio((*table)(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(m - 1)),
                       upow(k, u + 1));
    }
  }
  Rational out = Rational(falling_factorial(static_cast<std::int64_t>(k), m)) * bracket;
  out.canonicalize();
  return out;
}

std::vector<Rational> support_pmf(ProcessParams p) {
  const auto [n, k] = p;
  const std::uint64_t top = std::min(n, k);
  std::vector<Rational> out(top);
  const Integer k_pow = upow(k, n - 1);
  for (std::uint64_t r = 1; r <= top; ++r) {
    Integer alt = 0;  // sum_j (-1)^{r-j} C(r-1, j-1) j^{n-1}
    for (std::uint64_t j = 1; j <= r; ++j) {
      Integer term = binomial(static_cast<std::int64_t>(r - 1), static_cast<std::int64_t>(j - 1)) *
                     upow(j, n - 1);
      if ((r - j) % 2 == 0) {
        alt += term;
      } else {
        alt -= term;
      }
    }
    alt *= binomial(static_cast<std::int64_t>(k - 1), static_cast<std::int64_t>(r - 1));
    out[r - 1] = ratio(alt, k_pow);
  }
  return out;
}

std::vector<Rational> support_pmf_birth_chain(ProcessParams p) {
  const auto [n, k] = p;
  const std::uint64_t top = std::min(n, k);
  std::vector<Rational> dist(top + 1);  // index = occupied count
  dist[1] = 1;
  for (std::uint64_t seated = 1; seated < n; ++seated) {
    std::vector<Rational> next(top + 1);
    for (std::uint64_t m = 1; m <= std::min(seated, top); ++m) {
      if (dist[m] == 0) continue;
      next[m] += dist[m] * ratio(m, k);
      if (m < top) next[m + 1] += dist[m] * ratio(k - m, k);
    }
    for (auto& q : next) q.canonicalize();
    dist = std::move(next);
  }
  return {dist.begin() + 1, dist.end()};
}

Rational support_gf(ProcessParams p, const Rational& z) {
  const auto [n, k] = p;
  Rational acc = 0;
  const Rational one_minus = 1 - z;
  for (std::uint64_t j = 1; j <= k; ++j) {
    acc += Rational(binomial(static_cast<std::int64_t>(k - 1), static_cast<std::int64_t>(j - 1))) *
           power(ratio(j, k), n - 1) * power(z, j) * power(one_minus, k - j);
  }
  acc.canonicalize();
  return acc;
}

ExactMoments support_moments(ProcessParams p) {
  const auto [n, k] = p;
  const Rational a = power(ratio(k - 1, k), n - 1);
  const Rational mean = Rational(Integer(static_cast<unsigned long>(k))) * (1 - power(ratio(k - 1, k), n));
  Rational variance = 0;
  if (k >= 2) {
    const Rational b = power(ratio(k - 2, k), n - 1);
    const Rational km1(Integer(static_cast<unsigned long>(k - 1)));
    const Rational km2(Integer(static_cast<unsigned long>(k - 2)));
    variance = km1 * (a - km1 * a * a + km2 * b);
  }
  ExactMoments out{mean, variance};
  out.mean.canonicalize();
  out.variance.canonicalize();
  return out;
}

}  // namespace exact

// ---------------------------------------------------------------------------
// Floating point / log domain

LogProb log_pi_detached(ProcessParams p) {
  if (p.k < p.n) return LogProb::zero();
  return log_falling_ratio(p.k, p.n);
}

double pi_detached(ProcessParams p) {
  if (within_exact_budget(p.n, p.k)) return to_double(exact::pi_detached(p));
  return log_pi_detached(p).value();
}

double detachment_time_prob(ProcessParams p) {
  if (p.n == 1 || p.k < p.n) return 0.0;
  if (within_exact_budget(p.n, p.k)) return to_double(exact::detachment_time_prob(p));
  const double n = static_cast<double>(p.n), k = static_cast<double>(p.k);
  long double log_p = std::log(n) + std::log(n - 1.0) - 2.0 * std::log(k);
  for (std::uint64_t j = 2; j < p.n; ++j) {
    log_p += std::log1p(-static_cast<long double>(j) / static_cast<long double>(p.k));
  }
  return std::exp(static_cast<double>(log_p));
}

LogBounds log_pi_bounds(ProcessParams p) {
  require(p.n >= 2, "log_pi_bounds: requires n >= 2");
  require(p.k >= p.n, "log_pi_bounds: requires k >= n");
  const long double n = p.n, k = p.k;
  const long double first = n * (n - 1) / (2 * k);
  const long double second = n * (n - 1) * (2 * n - 1) / (12 * k * k);
  const long double third = n * n * (n - 1) * (n - 1) / (12 * k * k * (k - n + 1));
  return {static_cast<double>(-first - second - third), static_cast<double>(-first - second)};
}

LogProb log_joint_detached(std::uint64_t n, std::uint64_t k, std::uint64_t l) {
  require(n >= 1 && l >= 1, "joint_detached: requires n >= 1 and l >= 1");
  require(k >= n, "joint_detached: requires k >= n");
  return LogProb{log_falling_ratio(k, n).log_value + log_time_ratio_pow(n, k, k + l)} *
         two_f_zero_log(n, l, 1.0 / static_cast<double>(k));
}

double joint_detached(std::uint64_t n, std::uint64_t k, std::uint64_t l) {
  if (within_exact_budget(n, k + l)) return to_double(exact::joint_detached(n, k, l));
  return log_joint_detached(n, k, l).value();
}

LogProb log_cond_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2) {
  check_multi_time(n, k1, k2);
  return LogProb{log_time_ratio_pow(n, k1, k2)} *
         two_f_zero_log(n, k2 - k1, 1.0 / static_cast<double>(k1));
}

double cond_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2) {
  if (within_exact_budget(n, k2)) return to_double(exact::cond_detached(n, k1, k2));
  return log_cond_detached(n, k1, k2).value();
}

double cond_detached_given_not(std::uint64_t n, std::uint64_t k1, std::uint64_t k2) {
  if (within_exact_budget(n, k2)) return to_double(exact::cond_detached_given_not(n, k1, k2));
  require(n >= 2, "cond_detached_given_not: requires n >= 2");
  require(k2 >= n, "cond_detached_given_not: requires k2 >= n");
  require(k1 >= 1 && k1 < k2, "cond_detached_given_not: requires 1 <= k1 < k2");
  const double pi2 = log_pi_detached({n, k2}).value();
  if (k1 < n) return pi2;
  const LogProb pi1 = log_pi_detached({n, k1});
  const double joint = log_joint_detached(n, k1, k2 - k1).value();
  return (pi2 - joint) / -std::expm1(pi1.log_value);
}

double triple_detached(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) {
  if (within_exact_budget(n, k3)) return to_double(exact::triple_detached(n, k1, k2, k3));
  require(k3 > k2, "triple_detached: requires k3 > k2");
  return (log_pi_detached({n, k1}) * log_cond_detached(n, k1, k2) * log_cond_detached(n, k2, k3))
      .value();
}

double sandwich_prob(std::uint64_t n, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) {
  if (within_exact_budget(n, k3)) return to_double(exact::sandwich_prob(n, k1, k2, k3));
  const double diff = log_joint_detached(n, k1, k3 - k1).value() - triple_detached(n, k1, k2, k3);
  return std::max(0.0, diff);
}

LogProb log_tau_cdf(ProcessParams p) {
  if (p.k < p.n) return LogProb::zero();
  const long double spread = static_cast<long double>(p.n - 1);
  long double sum = 0.0L;
  for (std::uint64_t i = 0; i < p.n; ++i) {
    sum += std::log1p(-spread / static_cast<long double>(p.k + p.n - 1 - i));
  }
  return LogProb{static_cast<double>(sum)};
}

double tau_cdf(ProcessParams p) {
  if (within_exact_budget(p.n, p.k)) return to_double(exact::tau_cdf(p));
  return log_tau_cdf(p).value();
}

double tau_survival(ProcessParams p) {
  if (p.k < p.n) return 1.0;
  return -std::expm1(log_tau_cdf(p).log_value);
}

double ie_cdf(double x) {
  require(x > 0.0, "ie_cdf: requires x > 0");
  if (std::isinf(x)) return 1.0;
  return std::exp(-1.0 / x);
}

double ie_density(double x) {
  require(x > 0.0, "ie_density: requires x > 0");
  return std::exp(-1.0 / x) / (x * x);
}

double expected_detachment_states(std::uint64_t n, std::uint64_t k) {
  require(n >= 1, "expected_detachment_states: n must be >= 1");
  if (k < n) return 0.0;
  if (within_exact_budget(n, k)) return to_double(exact::expected_detachment_states(n, k));
  constexpr std::uint64_t kAnchorEvery = 1 << 16;
  const long double nn = static_cast<long double>(n);
  long double acc = 0.0L;
  long double log_term = 0.0L;
  for (std::uint64_t j = n; j <= k; ++j) {
    if ((j - n) % kAnchorEvery == 0) {
      log_term = log_falling_ratio(j, n).log_value;
    } else {
      // log pi_{n,j} - log pi_{n,j-1} = -log1p(-n/j) + n log1p(-1/j)
      const long double jj = static_cast<long double>(j);
      log_term += -std::log1p(-nn / jj) + nn * std::log1p(-1.0L / jj);
    }
    acc += std::exp(log_term);
  }
  return static_cast<double>(acc);
}

double critical_k(std::uint64_t n, double y) {
  require(n >= 3, "critical_k: requires n >= 3");
  const double ln = std::log(static_cast<double>(n));
  const double denom = 2.0 * (2.0 * ln - 2.0 * std::log(ln) + y);
  require(denom > 0.0, "critical_k: denominator must be positive");
  return static_cast<double>(n) * static_cast<double>(n) / denom;
}

double critical_limit(double y) { return std::exp(-y) / 8.0; }

CriticalWindow critical_window(std::uint64_t n, double y) {
  return {n, y, critical_k(n, y), critical_limit(y)};
}

LonelyMoments lonely_moments(ProcessParams p) {
  if (within_exact_budget(p.n, p.k)) {
    const auto m = exact::lonely_moments(p);
    return {to_double(m.mean), to_double(m.variance)};
  }
  const auto [n, k] = p;
  if (n == 1) return {1.0, 0.0};
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  const double mean = nd * pow_one_minus(n - 1, 1.0, kd);
  double pair = 0.0;
  if (k >= 2) pair = nd * (nd - 1.0) / (kd * kd) * pow_one_minus(n - 2, 2.0, kd);
  return {mean, mean + kd * (kd - 1.0) * pair - mean * mean};
}

std::vector<double> support_pmf(ProcessParams p) {
  if (within_exact_budget(p.n, p.k)) {
    const auto exact_pmf = exact::support_pmf_birth_chain(p);
    std::vector<double> out;
    out.reserve(exact_pmf.size());
    for (const auto& q : exact_pmf) out.push_back(to_double(q));
    return out;
  }
  // Forward birth chain: no alternating sums, so no cancellation.
  const auto [n, k] = p;
  const std::uint64_t top = std::min(n, k);
  const double kd = static_cast<double>(k);
  std::vector<double> dist(top + 1, 0.0);
  dist[1] = 1.0;
  for (std::uint64_t seated = 1; seated < n; ++seated) {
    const std::uint64_t hi = std::min(seated, top);
    for (std::uint64_t m = hi + 1; m-- > 1;) {
      const double stay = dist[m] * (static_cast<double>(m) / kd);
      const double grow = m < top ? dist[m] * ((kd - static_cast<double>(m)) / kd) : 0.0;
      if (m < top) dist[m + 1] += grow;
      dist[m] = stay;
    }
  }
  return {dist.begin() + 1, dist.end()};
}

double support_tail(std::uint64_t n, std::uint64_t k, std::uint64_t m) {
  require(n >= 1 && k >= 1, "support_tail: requires n, k >= 1");
  require(m >= 1 && m <= std::min(n, k), "support_tail: requires 1 <= m <= min(n, k)");
  if (within_exact_budget(n, k)) return to_double(exact::support_tail(n, k, m));
  const auto pmf = support_pmf({n, k});
  long double acc = 0.0L;
  for (std::uint64_t r = pmf.size(); r >= m; --r) acc += pmf[r - 1];
  return static_cast<double>(acc);
}

double support_gf(ProcessParams p, double z) {
  const auto [n, k] = p;
  if (n == 1) return z;
  long double acc = 0.0L;
  const long double kd = static_cast<long double>(k);
  for (std::uint64_t j = 1; j <= k; ++j) {
    const long double log_binom = std::lgamma(kd) - std::lgamma(static_cast<long double>(j)) -
                                  std::lgamma(kd - static_cast<long double>(j) + 1.0L);
    const long double base = std::exp(log_binom + static_cast<long double>(n - 1) *
                                                      std::log(static_cast<long double>(j) / kd));
    acc += base * std::pow(static_cast<long double>(z), static_cast<long double>(j)) *
           std::pow(1.0L - static_cast<long double>(z), static_cast<long double>(k - j));
  }
  return static_cast<double>(acc);
}

Moments support_moments(ProcessParams p) {
  if (within_exact_budget(p.n, p.k)) {
    const auto m = exact::support_moments(p);
    return {to_double(m.mean), to_double(m.variance)};
  }
  const auto [n, k] = p;
  if (n == 1) return {1.0, 0.0};
  const double kd = static_cast<double>(k);
  const double mean = -kd * std::expm1(static_cast<double>(n) * std::log1p(-1.0 / kd));
  const double a = pow_one_minus(n - 1, 1.0, kd);
  const double b = pow_one_minus(n - 1, 2.0, kd);
  return {mean, (kd - 1.0) * (a - (kd - 1.0) * a * a + (kd - 2.0) * b)};
}

double minmax_limit_cdf(std::uint64_t n, double x, Extreme which) {
  require(n >= 1, "minmax_limit_cdf: n must be >= 1");
  require(x >= 0.0 && x <= 1.0, "minmax_limit_cdf: requires x in [0, 1]");
  const double nd = static_cast<double>(n);
  if (which == Extreme::min) return -std::expm1(nd * std::log1p(-x));
  return std::pow(x, nd);
}

BetaLimitStats beta_limit_stats(std::uint64_t n) {
  require(n >= 1, "beta_limit_stats: n must be >= 1");
  const double nd = static_cast<double>(n);
  return {1.0 / (nd + 1.0), nd / (nd + 1.0), (nd - 1.0) / (nd + 1.0),
          std::sqrt(nd / (nd + 2.0)) / (nd + 1.0)};
}

double fidi_limit_value(FidiKind kind, double c, double d) {
  require(c > 0.0, "fidi_limit_value: requires c > 0");
  const double single = std::exp(-1.0 / (2.0 * c));
  if (kind == FidiKind::single) return single;
  require(d > c, "fidi_limit_value: requires 0 < c < d");
  const double cond_exponent = (d - c) / (2.0 * d * d);
  switch (kind) {
    case FidiKind::cond_detached:
      return std::exp(-cond_exponent);
    case FidiKind::joint:
      return std::exp(-1.0 / (2.0 * c) - cond_exponent);
    case FidiKind::cond_given_not:
      return (std::exp(-1.0 / (2.0 * d)) - std::exp(-1.0 / (2.0 * c) - cond_exponent)) /
             (1.0 - single);
    case FidiKind::single:
      break;
  }
  return single;
}

}  // namespace detach
