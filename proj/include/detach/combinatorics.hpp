#pragma once

// Exact and log-domain combinatorial kernels shared by every other module.

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace detach {

using Integer = mpz_class;
using Rational = mpq_class;

/// Exact probability: a GMP rational, always kept canonical (lowest terms,
/// positive denominator).
using ExactProb = mpq_class;

/// Thrown when an operation is called outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Natural log of a nonnegative quantity. -infinity encodes zero.
struct LogProb {
  double log_value = -std::numeric_limits<double>::infinity();

  static LogProb zero() { return {}; }
  static LogProb one() { return LogProb{0.0}; }
  static LogProb from_value(double v);

  bool is_zero() const { return log_value == -std::numeric_limits<double>::infinity(); }
  double value() const;

  friend LogProb operator*(LogProb a, LogProb b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogProb{a.log_value + b.log_value};
  }
  friend LogProb operator/(LogProb a, LogProb b);
  friend bool operator==(LogProb, LogProb) = default;
};

/// Streaming log-sum-exp over nonnegative terms. Keeps the running maximum so
/// each added term costs one exp; relative error grows like (terms * eps).
class LogSumExp {
 public:
  void add(double log_term);
  void add(LogProb p) { add(p.log_value); }
  LogProb result() const;

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double scaled_sum_ = 0.0;  // sum of exp(term - max_)
};

double to_double(const Rational& q);
std::string to_string(const Rational& q);

/// a(a-1)...(a-r+1); 1 when r == 0. Total on all integers a.
Integer falling_factorial(std::int64_t a, std::uint64_t r);

/// C(a, b) with C(a, b) = 0 when b < 0 or b > a >= 0.
Integer binomial(std::int64_t a, std::int64_t b);

/// (k)_n / k^n as an exact rational; 0 when n > k.
Rational falling_ratio(std::uint64_t k, std::uint64_t n);

/// log((k)_n / k^n) = sum_{j=1}^{n-1} log1p(-j/k). Requires 1 <= n <= k.
/// Summed directly; no log-gamma differencing, so n close to k is safe.
LogProb log_falling_ratio(std::uint64_t k, std::uint64_t n);

/// Dense, row-major table of Stirling numbers of the second kind S(a, b) for
/// 0 <= a, b <= max. Immutable after construction.
class StirlingTable {
 public:
  explicit StirlingTable(std::uint32_t max);

  std::uint32_t max() const { return max_; }
  const Integer& operator()(std::uint32_t a, std::uint32_t b) const;

 private:
  std::uint32_t max_;
  std::vector<Integer> entries_;
};

/// Process-wide cached table covering at least `max`. Grows (by rebuilding)
/// when a larger bound is requested; returned tables are never mutated.
std::shared_ptr<const StirlingTable> shared_stirling_table(std::uint32_t max);

/// S(a, b) via the triangular recurrence (cached table).
Integer stirling2(std::uint32_t a, std::uint32_t b);

/// Terminating 2F0(-n, -l; -; z) = sum_{r=0}^{min(n,l)} C(n,r) (l)_r z^r.
Rational two_f_zero(std::uint64_t n, std::uint64_t l, const Rational& z);

/// Same series for real z > 0, summed in log space (all terms are positive).
/// Relative error is bounded by about (min(n,l)+1) * 4 * eps.
LogProb two_f_zero_log(std::uint64_t n, std::uint64_t l, double z);

}  // namespace detach
