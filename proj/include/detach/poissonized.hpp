#pragma once

// Poisson number of passengers: bus occupancies become independent Poisson
// variables. Also the binomial stochastic-dominance criterion used to compare
// lonely-count laws at two times.

#include <cstdint>

#include "detach/combinatorics.hpp"

namespace detach {

struct BinomialSpec {
  std::uint64_t trials;
  double success_prob;

  BinomialSpec(std::uint64_t trials_, double p) : trials(trials_), success_prob(p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("BinomialSpec: success_prob must lie in [0, 1]");
  }
};

/// e^{-lambda} (1 + lambda/k)^k
double full_detachment_prob(double lambda, std::uint64_t k);

/// (1 - (lambda/k) e^{-lambda/k})^k
double no_lonely_prob(double lambda, std::uint64_t k);

/// f(x) = (1 - x e^{-x})^{1/x}; no_lonely_prob(lambda, k) = f(lambda/k)^lambda.
double no_lonely_rate(double x);

/// Y ~ Bin(m, q) is dominated by X ~ Bin(n, p) iff n >= m and
/// (1-p)^n <= (1-q)^m. A point mass at zero (q == 0) is dominated by anything.
bool najnudel_dominates(const BinomialSpec& y, const BinomialSpec& x);

/// Brute-force check CDF_X(t) <= CDF_Y(t) for every t, in exact rational
/// arithmetic on the binary values of p and q.
bool dominance_cdf_check(const BinomialSpec& y, const BinomialSpec& x);

/// Law of the lonely count at time k when the passenger count is Poisson(lambda).
BinomialSpec poissonian_lonely_law(double lambda, std::uint64_t k);

/// Whether L_{k1} is dominated by L_{k2} in the Poissonized model (k1 < k2).
bool poissonian_lonely_dominance(double lambda, std::uint64_t k1, std::uint64_t k2);

}  // namespace detach
