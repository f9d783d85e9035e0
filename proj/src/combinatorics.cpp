#include "detach/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace detach {

LogProb LogProb::from_value(double v) {
  if (!(v >= 0.0)) throw DomainError("LogProb: negative or NaN value");
  if (v == 0.0) return zero();
  return LogProb{std::log(v)};
}

double LogProb::value() const { return is_zero() ? 0.0 : std::exp(log_value); }

LogProb operator/(LogProb a, LogProb b) {
  if (b.is_zero()) throw DomainError("LogProb: division by zero");
  if (a.is_zero()) return LogProb::zero();
  return LogProb{a.log_value - b.log_value};
}

void LogSumExp::add(double log_term) {
  if (log_term == -std::numeric_limits<double>::infinity()) return;
  if (log_term > max_) {
    scaled_sum_ = scaled_sum_ * std::exp(max_ - log_term) + 1.0;
    max_ = log_term;
  } else {
    scaled_sum_ += std::exp(log_term - max_);
  }
}

LogProb LogSumExp::result() const {
  if (scaled_sum_ == 0.0) return LogProb::zero();
  return LogProb{max_ + std::log(scaled_sum_)};
}

double to_double(const Rational& q) {
  // mpq_get_d truncates; pick whichever neighbour is nearer to the exact value.
  const double d = q.get_d();
  if (!std::isfinite(d)) return d;
  const double up = std::nextafter(d, q >= 0 ? HUGE_VAL : -HUGE_VAL);
  if (!std::isfinite(up)) return d;
  const Rational dq(d), uq(up);
  Rational err_d = q - dq, err_u = q - uq;
  return abs(err_u) < abs(err_d) ? up : d;
}

std::string to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_str();
}

Integer falling_factorial(std::int64_t a, std::uint64_t r) {
  if (a >= 0 && r > static_cast<std::uint64_t>(a)) return 0;
  Integer out = 1;
  for (std::uint64_t i = 0; i < r; ++i) {
    const std::int64_t factor = a - static_cast<std::int64_t>(i);
    if (factor >= 0) {
      out *= static_cast<unsigned long>(factor);
    } else {
      out *= static_cast<long>(factor);
    }
  }
  return out;
}

Integer binomial(std::int64_t a, std::int64_t b) {
  if (b < 0) return 0;
  if (a >= 0 && b > a) return 0;
  Integer out;
  mpz_bin_ui(out.get_mpz_t(), Integer(static_cast<long>(a)).get_mpz_t(),
             static_cast<unsigned long>(b));
  return out;
}

Rational falling_ratio(std::uint64_t k, std::uint64_t n) {
  if (k == 0) throw DomainError("falling_ratio: k must be positive");
  if (n > k) return 0;
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), k, n);
  Rational out(falling_factorial(static_cast<std::int64_t>(k), n), den);
  out.canonicalize();
  return out;
}

LogProb log_falling_ratio(std::uint64_t k, std::uint64_t n) {
  if (k == 0) throw DomainError("log_falling_ratio: k must be positive");
  if (n > k) throw DomainError("log_falling_ratio: requires n <= k");
  long double sum = 0.0L;
  const long double kk = static_cast<long double>(k);
  for (std::uint64_t j = 1; j < n; ++j) {
    sum += std::log1p(-static_cast<long double>(j) / kk);
  }
  return LogProb{static_cast<double>(sum)};
}

StirlingTable::StirlingTable(std::uint32_t max)
    : max_(max), entries_(static_cast<std::size_t>(max + 1) * (max + 1)) {
  const std::size_t w = max + 1;
  entries_[0] = 1;
  for (std::uint32_t a = 1; a <= max; ++a) {
    for (std::uint32_t b = 1; b <= a; ++b) {
      entries_[a * w + b] = b * entries_[(a - 1) * w + b] + entries_[(a - 1) * w + (b - 1)];
    }
  }
}

const Integer& StirlingTable::operator()(std::uint32_t a, std::uint32_t b) const {
  if (a > max_ || b > max_) throw std::out_of_range("StirlingTable: index beyond table");
  return entries_[static_cast<std::size_t>(a) * (max_ + 1) + b];
}

std::shared_ptr<const StirlingTable> shared_stirling_table(std::uint32_t max) {
  static std::mutex mutex;
  static std::shared_ptr<const StirlingTable> table;
  std::lock_guard lock(mutex);
  if (!table || table->max() < max) {
    const std::uint32_t size = std::max<std::uint32_t>(64, (max + 63) / 64 * 64);
    table = std::make_shared<const StirlingTable>(size);
  }
  return table;
}

Integer stirling2(std::uint32_t a, std::uint32_t b) {
  if (b > a) return 0;
  return (*shared_stirling_table(a))(a, b);
}

Rational two_f_zero(std::uint64_t n, std::uint64_t l, const Rational& z) {
  const std::uint64_t top = std::min(n, l);
  // c_r = C(n,r) (l)_r, built by the exact integer recurrence.
  std::vector<Integer> coeff(top + 1);
  coeff[0] = 1;
  for (std::uint64_t r = 0; r < top; ++r) {
    Integer next = coeff[r] * static_cast<unsigned long>(n - r);
    next *= static_cast<unsigned long>(l - r);
    mpz_divexact_ui(next.get_mpz_t(), next.get_mpz_t(), static_cast<unsigned long>(r + 1));
    coeff[r + 1] = std::move(next);
  }
  Rational acc = 0;
  for (std::uint64_t r = top + 1; r-- > 0;) {
    acc = acc * z + coeff[r];
  }
  acc.canonicalize();
  return acc;
}

LogProb two_f_zero_log(std::uint64_t n, std::uint64_t l, double z) {
  if (!(z > 0.0)) {
    if (z == 0.0) return LogProb::one();
    throw DomainError("two_f_zero_log: argument must be nonnegative");
  }
  const std::uint64_t top = std::min(n, l);
  const double log_z = std::log(z);
  LogSumExp acc;
  double term = 0.0;
  acc.add(term);
  for (std::uint64_t r = 0; r < top; ++r) {
    term += std::log(static_cast<double>(n - r)) + std::log(static_cast<double>(l - r)) -
            std::log(static_cast<double>(r + 1)) + log_z;
    acc.add(term);
  }
  return acc.result();
}

}  // namespace detach
