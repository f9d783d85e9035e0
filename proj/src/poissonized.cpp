#include "detach/poissonized.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace detach {

namespace {

void require_lambda(double lambda) {
  if (!(lambda >= 0.0) || std::isinf(lambda)) throw DomainError("lambda must be finite and >= 0");
}

Rational pow_rational(const Rational& base, std::uint64_t e) {
  Integer num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational out(num, den);
  out.canonicalize();
  return out;
}

// Exact comparison (1-p)^n <= (1-q)^m using the binary values of p and q.
bool zero_atom_leq_exact(double p, std::uint64_t n, double q, std::uint64_t m) {
  const Rational one = 1;
  return pow_rational(one - Rational(p), n) <= pow_rational(one - Rational(q), m);
}

std::vector<Rational> binomial_cdf(const BinomialSpec& s, std::uint64_t top) {
  const Rational p(s.success_prob);
  const Rational q = 1 - p;
  std::vector<Rational> cdf(top + 1);
  Rational acc = 0;
  for (std::uint64_t t = 0; t <= top; ++t) {
    if (t <= s.trials) {
      acc += Rational(binomial(static_cast<std::int64_t>(s.trials), static_cast<std::int64_t>(t))) *
             pow_rational(p, t) * pow_rational(q, s.trials - t);
    }
    cdf[t] = acc;
  }
  return cdf;
}

}  // namespace

double full_detachment_prob(double lambda, std::uint64_t k) {
  require_lambda(lambda);
  if (k == 0) throw DomainError("full_detachment_prob: k must be >= 1");
  const double kd = static_cast<double>(k);
  return std::exp(-lambda + kd * std::log1p(lambda / kd));
}

double no_lonely_prob(double lambda, std::uint64_t k) {
  require_lambda(lambda);
  if (k == 0) throw DomainError("no_lonely_prob: k must be >= 1");
  const double kd = static_cast<double>(k);
  const double x = lambda / kd;
  return std::exp(kd * std::log1p(-x * std::exp(-x)));
}

double no_lonely_rate(double x) {
  if (!(x > 0.0)) throw DomainError("no_lonely_rate: requires x > 0");
  return std::exp(std::log1p(-x * std::exp(-x)) / x);
}

bool najnudel_dominates(const BinomialSpec& y, const BinomialSpec& x) {
  const auto m = y.trials, n = x.trials;
  const double q = y.success_prob, p = x.success_prob;
  if (q == 0.0 || m == 0) return true;
  if (n < m) return false;
  if (p == 1.0) return true;
  if (q == 1.0) return false;
  if (p == 0.0) return false;
  const double lhs = static_cast<double>(n) * std::log1p(-p);
  const double rhs = static_cast<double>(m) * std::log1p(-q);
  const double slack = 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
  if (lhs < rhs - slack) return true;
  if (lhs > rhs + slack) return false;
  return zero_atom_leq_exact(p, n, q, m);
}

bool dominance_cdf_check(const BinomialSpec& y, const BinomialSpec& x) {
  const std::uint64_t top = std::max(x.trials, y.trials);
  const auto cx = binomial_cdf(x, top);
  const auto cy = binomial_cdf(y, top);
  for (std::uint64_t t = 0; t <= top; ++t) {
    if (cx[t] > cy[t]) return false;
  }
  return true;
}

BinomialSpec poissonian_lonely_law(double lambda, std::uint64_t k) {
  require_lambda(lambda);
  if (k == 0) throw DomainError("poissonian_lonely_law: k must be >= 1");
  const double x = lambda / static_cast<double>(k);
  return {k, x * std::exp(-x)};
}

bool poissonian_lonely_dominance(double lambda, std::uint64_t k1, std::uint64_t k2) {
  if (!(lambda > 0.0)) throw DomainError("poissonian_lonely_dominance: requires lambda > 0");
  if (k1 == 0 || k1 >= k2) throw DomainError("poissonian_lonely_dominance: requires 0 < k1 < k2");
  return najnudel_dominates(poissonian_lonely_law(lambda, k1), poissonian_lonely_law(lambda, k2));
}

}  // namespace detach
