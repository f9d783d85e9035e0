#pragma once

// Shared between the registry plumbing and the experiment bodies.

#include <cstdint>
#include <string>
#include <vector>

#include "detach/harness.hpp"

namespace detach::harness::detail {

/// Typed read access to validated parameters.
class Params {
 public:
  explicit Params(const Json& j) : j_(j) {}
  std::uint64_t integer(const std::string& name) const;
  double real(const std::string& name) const;
  std::vector<std::uint64_t> integers(const std::string& name) const;
  std::vector<double> reals(const std::string& name) const;

 private:
  const Json& j_;
};

using RunFn = void (*)(const Params&, ExperimentReport&);

void run_ie_limit(const Params&, ExperimentReport&);
void run_critical_window(const Params&, ExperimentReport&);
void run_fidi_convergence(const Params&, ExperimentReport&);
void run_concentration_phase(const Params&, ExperimentReport&);
void run_poisson_approx(const Params&, ExperimentReport&);
void run_almost_detachment(const Params&, ExperimentReport&);
void run_zero_percent(const Params&, ExperimentReport&);
void run_first_detachment_hist(const Params&, ExperimentReport&);
void run_beta_limits(const Params&, ExperimentReport&);
void run_clumping_drop(const Params&, ExperimentReport&);
void run_large_deviations(const Params&, ExperimentReport&);
void run_tau_tail(const Params&, ExperimentReport&);

/// Seed for grid point i of an experiment with master seed `seed`.
inline std::uint64_t grid_seed(std::uint64_t seed, std::uint64_t i) { return seed + i; }

}  // namespace detach::harness::detail
