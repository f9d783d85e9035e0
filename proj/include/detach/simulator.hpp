#pragma once

// Monte Carlo engine for the detachment process.
//
// At time k every passenger independently moves to the new bus k with
// probability 1/k. States are sparse (only occupied buses are stored) and the
// lonely count, support size and clumping are maintained incrementally.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "detach/combinatorics.hpp"

namespace detach {

/// Reproducible random stream: (master seed, stream index) fully determine
/// the output on a given build.
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/seed_seq";

  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::mt19937_64& engine() { return engine_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [0, bound); bound >= 1.
  std::uint64_t below(std::uint64_t bound);
  /// Bin(trials, p) draw.
  std::uint64_t binomial(std::uint64_t trials, double p);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

struct Observables {
  std::uint64_t k = 0;
  std::uint64_t lonely = 0;   // L
  std::uint64_t support = 0;  // N
  std::uint64_t min_bus = 0;  // m_k
  std::uint64_t max_bus = 0;  // M_k
  std::uint64_t range = 0;    // M_k - m_k
  std::uint64_t clump = 0;    // sum of squared occupancies
  double rc = 0.0;            // log(clump / n)
};

class OccupancyState {
 public:
  /// n passengers, all in bus 1 at time 1.
  explicit OccupancyState(std::uint64_t n);

  std::uint64_t time() const { return k_; }
  std::uint64_t passengers() const { return assignment_.size(); }
  /// Bus of each passenger (0-based passenger index, 1-based bus number).
  const std::vector<std::uint64_t>& assignment() const { return assignment_; }
  /// Occupied buses only.
  const std::map<std::uint64_t, std::uint64_t>& occupancy() const { return occupancy_; }

  std::uint64_t lonely() const { return lonely_; }
  std::uint64_t support() const { return occupancy_.size(); }
  std::uint64_t clump() const { return clump_; }
  bool detached() const { return lonely_ == assignment_.size(); }

  /// Moves one passenger; the bus may be any number in [1, time()].
  void relocate(std::uint64_t passenger, std::uint64_t bus);
  /// Advances the clock without moving anyone.
  void set_time(std::uint64_t k);

  /// Picks `count` distinct passengers uniformly; valid until the next call.
  const std::uint64_t* random_subset(std::uint64_t count, RngStream& rng);

 private:
  std::uint64_t k_ = 1;
  std::vector<std::uint64_t> assignment_;
  std::map<std::uint64_t, std::uint64_t> occupancy_;
  std::uint64_t lonely_ = 0;
  std::uint64_t clump_ = 0;
  std::vector<std::uint64_t> order_;  // scratch permutation for subset draws
};

OccupancyState init_state(std::uint64_t n);

/// Time k -> k + 1.
void step(OccupancyState& state, RngStream& rng);

/// Time k -> k + l in one draw: each passenger stays with probability
/// k / (k + l), otherwise joins a uniform bus among k+1..k+l.
void block_step(OccupancyState& state, std::uint64_t l, RngStream& rng);

Observables observables(const OccupancyState& state);

struct TrajectoryRecord {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t horizon = 0;
  std::optional<std::uint64_t> first_detachment;
  std::optional<std::uint64_t> last_detachment_seen;
  std::uint64_t detachment_state_count = 0;  // #{j <= horizon : L_j = n}
  std::vector<Observables> sampled_series;
  bool censored = true;
};

/// Simulates times 1..horizon. Only relocation events are generated: a
/// passenger that last moved (or was checked) at time j next moves at
/// ceil(j / U), U uniform, since it stays through time m with probability j/m.
/// Cost is O(n log(horizon) log n) regardless of the horizon length.
TrajectoryRecord run_trajectory(std::uint64_t n, std::uint64_t horizon,
                                const std::vector<std::uint64_t>& sample_times, RngStream& rng);

/// First detachment times of the nested passenger sets {1..m}, m = 1..n_max,
/// all driven by one realisation. Entry m-1 is empty when censored.
std::vector<std::optional<std::uint64_t>> first_detachment_prefixes(std::uint64_t n_max,
                                                                    std::uint64_t horizon,
                                                                    RngStream& rng);

/// Draws the permanent detachment time: least k with P(tau <= k) >= U.
std::uint64_t sample_tau_exact(std::uint64_t n, RngStream& rng);

/// Snapshot of the configuration at a single time k. Uses that the state at
/// time k is uniform over all k^n assignments.
struct SingleTimeSample {
  std::uint64_t lonely = 0;
  std::uint64_t support = 0;
  std::uint64_t min_bus = 0;
  std::uint64_t max_bus = 0;
  std::uint64_t clump = 0;
  double rc = 0.0;
};

class SingleTimeSampler {
 public:
  SingleTimeSampler(std::uint64_t n, std::uint64_t k);
  SingleTimeSample draw(RngStream& rng);

 private:
  enum class Mode { binomials, histogram, sorted };
  std::uint64_t n_, k_;
  Mode mode_ = Mode::histogram;
  std::vector<std::uint64_t> buses_;
  std::vector<std::uint32_t> counts_;
};

enum class Estimand {
  first_detachment,
  last_detachment,
  detachment_count,
  detachment_fraction,  // detachment_state_count / horizon
  detached_at,          // 1{L_t = n}
  lonely_at,
  lonely_fraction_at,
  support_at,
  support_fraction_at,
  min_bus_at,
  max_bus_at,
  range_at,
  clump_at,
  rc_at,
};

struct EstimandSpec {
  Estimand kind = Estimand::first_detachment;
  std::uint64_t time = 0;  // used by the *_at estimands
};

std::optional<Estimand> parse_estimand(const std::string& name);
std::string estimand_name(Estimand e);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t replicas = 0;
  std::uint64_t censored = 0;  // replicas without an observed detachment
  double censored_fraction() const {
    return replicas == 0 ? 0.0 : static_cast<double>(censored) / static_cast<double>(replicas);
  }
};

struct McSamples {
  std::vector<double> values;  // per replica, in stream order
  std::vector<char> censored;
};

/// Per-replica values behind mc_estimate; replica i uses stream i.
McSamples mc_samples(std::uint64_t n, std::uint64_t horizon, std::uint64_t replicas,
                     const EstimandSpec& estimand, std::uint64_t seed);

/// Censored replicas enter first/last-detachment estimands with value
/// `horizon` and are counted in McEstimate::censored.
McEstimate mc_estimate(std::uint64_t n, std::uint64_t horizon, std::uint64_t replicas,
                       const EstimandSpec& estimand, std::uint64_t seed);

struct DriftPoint {
  std::uint64_t k = 0;
  double mean_increment = 0.0;  // E[C((k+1) ^ T)] - E[C(k ^ T)]
  double std_error = 0.0;
};

/// Increments of the clumping stopped at T = first time >= ceil(n/2) with a
/// lonely passenger, for k = ceil(n/2)..k_last, from step-by-step simulation.
std::vector<DriftPoint> stopped_clump_drift(std::uint64_t n, std::uint64_t k_last,
                                            std::uint64_t replicas, std::uint64_t seed);

/// Worker count: DETACH_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on worker_count() threads. Callers write
/// results into slot i, so reductions stay independent of scheduling.
void parallel_for(std::uint64_t count, const std::function<void(std::uint64_t)>& body);

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error, summed in index order.
SampleStats sample_stats(const std::vector<double>& values);

}  // namespace detach
