#include "detach/oracle.hpp"

#include <limits>
#include <string>

namespace detach::oracle {

namespace {

using u128 = unsigned __int128;

Integer to_integer(u128 v) {
  Integer hi(static_cast<unsigned long>(static_cast<std::uint64_t>(v >> 64)));
  Integer lo(static_cast<unsigned long>(static_cast<std::uint64_t>(v)));
  return (hi << 64) + lo;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  const u128 r = static_cast<u128>(a) * b;
  if (r > std::numeric_limits<std::uint64_t>::max()) throw BudgetExceeded(what);
  return static_cast<std::uint64_t>(r);
}

// Sums exact weights per outcome index; dense when the index space is small.
class Accumulator {
 public:
  explicit Accumulator(std::uint64_t size) {
    if (size <= (std::uint64_t{1} << 22)) dense_.assign(size, 0);
  }
  void add(std::uint64_t index, u128 w) {
    if (!dense_.empty()) {
      dense_[index] += w;
    } else {
      sparse_[index] += w;
    }
  }
  template <typename F>
  void for_each(F f) const {
    if (!dense_.empty()) {
      for (std::uint64_t i = 0; i < dense_.size(); ++i) {
        if (dense_[i] != 0) f(i, dense_[i]);
      }
    } else {
      for (const auto& [i, w] : sparse_) f(i, w);
    }
  }

 private:
  std::vector<u128> dense_;
  std::map<std::uint64_t, u128> sparse_;
};

struct TimeStats {
  std::vector<std::uint64_t> hist;
  std::uint64_t lonely = 0;
  std::uint64_t support = 0;
  std::uint64_t clump = 0;

  void add(std::uint64_t bus) {
    std::uint64_t& h = hist[bus];
    if (h == 0) {
      ++support;
      ++lonely;
    } else if (h == 1) {
      --lonely;
    }
    clump += 2 * h + 1;
    ++h;
  }
  void remove(std::uint64_t bus) {
    std::uint64_t& h = hist[bus];
    --h;
    if (h == 0) {
      --support;
      --lonely;
    } else if (h == 1) {
      ++lonely;
    }
    clump -= 2 * h + 1;
  }
};

// Visits every path with its integer weight. Returns the total weight
// (t_0 t_1 ... t_m)^n, the common denominator.
template <typename Visit>
Integer enumerate_paths(std::uint64_t n, const std::vector<std::uint64_t>& times,
                        std::uint64_t budget, Visit&& visit) {
  if (n == 0) throw DomainError("enumeration requires n >= 1");
  if (times.empty() || times.front() == 0) throw DomainError("enumeration requires times >= 1");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) throw DomainError("enumeration requires increasing times");
  }
  const std::size_t m = times.size();

  // Per-passenger digit: initial bus, then one choice per block (0 = stay).
  std::uint64_t digits = times[0];
  for (std::size_t i = 1; i < m; ++i) {
    digits = checked_mul(digits, times[i] - times[i - 1] + 1, "enumeration budget exceeded");
  }
  std::uint64_t configurations = 1;
  for (std::uint64_t p = 0; p < n; ++p) {
    configurations = checked_mul(configurations, digits, "enumeration budget exceeded");
    if (configurations > budget) {
      throw BudgetExceeded("enumeration budget exceeded: " + std::to_string(digits) + "^" +
                           std::to_string(n) + " > " + std::to_string(budget));
    }
  }

  Integer per_passenger = 1;
  for (const auto t : times) per_passenger *= static_cast<unsigned long>(t);
  Integer total;
  mpz_pow_ui(total.get_mpz_t(), per_passenger.get_mpz_t(), n);
  if (mpz_sizeinbase(total.get_mpz_t(), 2) > 126) {
    throw BudgetExceeded("enumeration weights exceed 126 bits");
  }

  std::vector<std::uint64_t> bus(digits * m);
  std::vector<std::uint64_t> weight(digits);
  for (std::uint64_t d = 0; d < digits; ++d) {
    std::uint64_t rest = d / times[0];
    std::uint64_t current = d % times[0] + 1;
    std::uint64_t w = 1;
    bus[d * m] = current;
    for (std::size_t i = 1; i < m; ++i) {
      const std::uint64_t span = times[i] - times[i - 1];
      const std::uint64_t choice = rest % (span + 1);
      rest /= span + 1;
      if (choice == 0) {
        w *= times[i - 1];
      } else {
        current = times[i - 1] + choice;
      }
      bus[d * m + i] = current;
    }
    weight[d] = w;
  }

  std::vector<TimeStats> stats(m);
  for (std::size_t i = 0; i < m; ++i) {
    stats[i].hist.assign(times[i] + 1, 0);
    for (std::uint64_t p = 0; p < n; ++p) stats[i].add(bus[i]);
  }
  std::vector<std::uint64_t> digit(n, 0);
  std::vector<u128> prefix(n + 1, 1);
  for (std::uint64_t p = 0; p < n; ++p) prefix[p + 1] = prefix[p] * weight[0];

  for (;;) {
    visit(prefix[n], stats);
    std::uint64_t p = n;
    bool done = true;
    while (p-- > 0) {
      const std::uint64_t old = digit[p];
      for (std::size_t i = 0; i < m; ++i) stats[i].remove(bus[old * m + i]);
      const std::uint64_t next = old + 1 == digits ? 0 : old + 1;
      digit[p] = next;
      for (std::size_t i = 0; i < m; ++i) stats[i].add(bus[next * m + i]);
      if (next != 0) {
        done = false;
        break;
      }
    }
    if (done) break;
    for (std::uint64_t q = p; q < n; ++q) prefix[q + 1] = prefix[q] * weight[digit[q]];
  }
  return total;
}

Rational ratio(u128 w, const Integer& total) {
  Rational r(to_integer(w), total);
  r.canonicalize();
  return r;
}

}  // namespace

ExactPmf<SingleTimeOutcome> enumerate_single_time(std::uint64_t n, std::uint64_t k,
                                                  std::uint64_t budget) {
  const std::uint64_t side = n + 1;
  const std::uint64_t clump_side = checked_mul(n, n, "outcome space too large") + 1;
  Accumulator acc(checked_mul(checked_mul(side, side, "outcome space too large"), clump_side,
                              "outcome space too large"));
  const Integer total =
      enumerate_paths(n, {k}, budget, [&](u128 w, const std::vector<TimeStats>& s) {
        acc.add((s[0].lonely * side + s[0].support) * clump_side + s[0].clump, w);
      });
  ExactPmf<SingleTimeOutcome> pmf;
  acc.for_each([&](std::uint64_t idx, u128 w) {
    const std::uint64_t clump = idx % clump_side;
    const std::uint64_t ln = idx / clump_side;
    pmf.mass[{ln / side, ln % side, clump}] = ratio(w, total);
  });
  return pmf;
}

ExactPmf<PathOutcome> enumerate_path(std::uint64_t n, const std::vector<std::uint64_t>& times,
                                     std::uint64_t budget) {
  const std::uint64_t side = n + 1;
  std::uint64_t size = 1;
  for (std::size_t i = 0; i < 2 * times.size(); ++i) {
    size = checked_mul(size, side, "outcome space too large");
  }
  Accumulator acc(size);
  const Integer total =
      enumerate_paths(n, times, budget, [&](u128 w, const std::vector<TimeStats>& s) {
        std::uint64_t idx = 0;
        for (const auto& t : s) idx = (idx * side + t.lonely) * side + t.support;
        acc.add(idx, w);
      });
  ExactPmf<PathOutcome> pmf;
  const std::size_t m = times.size();
  acc.for_each([&](std::uint64_t idx, u128 w) {
    PathOutcome o{std::vector<std::uint64_t>(m), std::vector<std::uint64_t>(m)};
    for (std::size_t i = m; i-- > 0;) {
      o.support[i] = idx % side;
      idx /= side;
      o.lonely[i] = idx % side;
      idx /= side;
    }
    pmf.mass[o] = ratio(w, total);
  });
  return pmf;
}

TwoTimeResult enumerate_two_time(std::uint64_t n, std::uint64_t k, std::uint64_t l,
                                 std::uint64_t budget) {
  if (l == 0) throw DomainError("enumerate_two_time: requires l >= 1");
  TwoTimeResult r;
  r.path = enumerate_path(n, {k, k + l}, budget);
  auto det = [n](const PathOutcome& o, std::size_t i) { return o.lonely[i] == n; };
  r.joint_detached = r.path.probability([&](const auto& o) { return det(o, 0) && det(o, 1); });
  r.pi_first = r.path.probability([&](const auto& o) { return det(o, 0); });
  r.pi_second = r.path.probability([&](const auto& o) { return det(o, 1); });
  r.into_detachment = r.path.probability([&](const auto& o) { return !det(o, 0) && det(o, 1); });
  if (r.pi_first != 0) r.cond_detached = r.joint_detached / r.pi_first;
  if (r.pi_first != 1) r.cond_given_not = r.into_detachment / (1 - r.pi_first);
  return r;
}

ThreeTimeResult enumerate_three_time(std::uint64_t n, std::uint64_t k1, std::uint64_t k2,
                                     std::uint64_t k3, std::uint64_t budget) {
  ThreeTimeResult r;
  r.path = enumerate_path(n, {k1, k2, k3}, budget);
  auto det = [n](const PathOutcome& o, std::size_t i) { return o.lonely[i] == n; };
  r.triple =
      r.path.probability([&](const auto& o) { return det(o, 0) && det(o, 1) && det(o, 2); });
  r.sandwich =
      r.path.probability([&](const auto& o) { return det(o, 0) && !det(o, 1) && det(o, 2); });
  return r;
}

TruncatedTau tau_cdf_truncated(std::uint64_t n, std::uint64_t k, std::uint64_t K) {
  if (n == 0 || k < n) throw DomainError("tau_cdf_truncated: requires 1 <= n <= k");
  if (K <= k) throw DomainError("tau_cdf_truncated: requires K > k");
  Integer num = falling_factorial(static_cast<std::int64_t>(k), n);
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), k, n);
  Integer step_num, step_den;
  for (std::uint64_t i = k + 1; i <= K; ++i) {
    mpz_ui_pow_ui(step_num.get_mpz_t(), i - 1, n);
    step_num *= static_cast<unsigned long>(n + i - 1);
    mpz_ui_pow_ui(step_den.get_mpz_t(), i, n);
    step_den *= static_cast<unsigned long>(i - 1);
    num *= step_num;
    den *= step_den;
  }
  TruncatedTau out;
  out.truncated = Rational(num, den);
  out.truncated.canonicalize();
  out.exact = Rational(binomial(static_cast<std::int64_t>(k), static_cast<std::int64_t>(n)),
                       binomial(static_cast<std::int64_t>(k + n - 1), static_cast<std::int64_t>(n)));
  out.exact.canonicalize();
  return out;
}

}  // namespace detach::oracle
