#include "detach/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <queue>
#include <thread>
#include <utility>

#include "detach/analytics.hpp"

namespace detach {

// ---------------------------------------------------------------------------
// RngStream

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6a09e667u};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  // Lemire's multiply-and-reject.
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t RngStream::binomial(std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  if (p > 0.5) return trials - binomial(trials, 1.0 - p);
  const double mean = static_cast<double>(trials) * p;
  if (mean >= 30.0) {
    return std::binomial_distribution<std::uint64_t>(trials, p)(engine_);
  }
  // Sequential inversion from zero; at most ~mean + few iterations.
  const double odds = p / (1.0 - p);
  double mass = std::exp(static_cast<double>(trials) * std::log1p(-p));
  double u = uniform();
  std::uint64_t x = 0;
  while (u > mass && x < trials) {
    u -= mass;
    mass *= odds * static_cast<double>(trials - x) / static_cast<double>(x + 1);
    ++x;
  }
  return x;
}

// ---------------------------------------------------------------------------
// OccupancyState

OccupancyState::OccupancyState(std::uint64_t n)
    : assignment_(n, 1), lonely_(n == 1 ? 1 : 0), clump_(n * n), order_(n) {
  if (n == 0) throw DomainError("OccupancyState: n must be >= 1");
  occupancy_.emplace(1, n);
  std::iota(order_.begin(), order_.end(), std::uint64_t{0});
}

void OccupancyState::relocate(std::uint64_t passenger, std::uint64_t bus) {
  if (bus == 0 || bus > k_) throw DomainError("relocate: bus outside [1, k]");
  const std::uint64_t from = assignment_.at(passenger);
  if (from == bus) return;

  auto it = occupancy_.find(from);
  const std::uint64_t a = it->second;
  if (a == 1) {
    --lonely_;
    occupancy_.erase(it);
  } else {
    if (a == 2) ++lonely_;
    --it->second;
  }
  clump_ -= 2 * a - 1;

  std::uint64_t& b = occupancy_[bus];
  if (b == 0) {
    ++lonely_;
  } else if (b == 1) {
    --lonely_;
  }
  clump_ += 2 * b + 1;
  ++b;
  assignment_[passenger] = bus;
}

void OccupancyState::set_time(std::uint64_t k) {
  if (k < k_) throw DomainError("set_time: time cannot decrease");
  k_ = k;
}

const std::uint64_t* OccupancyState::random_subset(std::uint64_t count, RngStream& rng) {
  const std::uint64_t n = order_.size();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t j = i + rng.below(n - i);
    std::swap(order_[i], order_[j]);
  }
  return order_.data();
}

OccupancyState init_state(std::uint64_t n) { return OccupancyState(n); }

void step(OccupancyState& state, RngStream& rng) {
  const std::uint64_t k = state.time() + 1;
  state.set_time(k);
  const std::uint64_t movers = rng.binomial(state.passengers(), 1.0 / static_cast<double>(k));
  const std::uint64_t* who = state.random_subset(movers, rng);
  for (std::uint64_t i = 0; i < movers; ++i) state.relocate(who[i], k);
}

void block_step(OccupancyState& state, std::uint64_t l, RngStream& rng) {
  if (l == 0) throw DomainError("block_step: l must be >= 1");
  const std::uint64_t k0 = state.time();
  const std::uint64_t k1 = k0 + l;
  state.set_time(k1);
  const std::uint64_t movers =
      rng.binomial(state.passengers(), static_cast<double>(l) / static_cast<double>(k1));
  const std::uint64_t* who = state.random_subset(movers, rng);
  for (std::uint64_t i = 0; i < movers; ++i) state.relocate(who[i], k0 + 1 + rng.below(l));
}

Observables observables(const OccupancyState& state) {
  Observables o;
  o.k = state.time();
  o.lonely = state.lonely();
  o.support = state.support();
  o.min_bus = state.occupancy().begin()->first;
  o.max_bus = state.occupancy().rbegin()->first;
  o.range = o.max_bus - o.min_bus;
  o.clump = state.clump();
  o.rc = std::log(static_cast<double>(o.clump) / static_cast<double>(state.passengers()));
  return o;
}

// ---------------------------------------------------------------------------
// Event-driven trajectories

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

// Next relocation time of a passenger that has stayed through time j.
std::uint64_t next_move_time(std::uint64_t j, RngStream& rng) {
  const double t = std::ceil(static_cast<double>(j) / rng.uniform());
  if (!(t < 0x1.0p62)) return kNever;
  return std::max(j + 1, static_cast<std::uint64_t>(t));
}

using Event = std::pair<std::uint64_t, std::uint64_t>;  // (time, passenger)
using EventQueue = std::priority_queue<Event, std::vector<Event>, std::greater<>>;

EventQueue initial_events(std::uint64_t n, RngStream& rng) {
  std::vector<Event> events;
  events.reserve(n);
  for (std::uint64_t p = 0; p < n; ++p) events.emplace_back(next_move_time(1, rng), p);
  return EventQueue(std::greater<>{}, std::move(events));
}

// Applies every relocation scheduled at time te and reschedules the movers.
void apply_events(OccupancyState& state, EventQueue& queue, std::uint64_t te, RngStream& rng) {
  state.set_time(te);
  while (!queue.empty() && queue.top().first == te) {
    const std::uint64_t p = queue.top().second;
    queue.pop();
    state.relocate(p, te);
    queue.emplace(next_move_time(te, rng), p);
  }
}

}  // namespace

TrajectoryRecord run_trajectory(std::uint64_t n, std::uint64_t horizon,
                                const std::vector<std::uint64_t>& sample_times, RngStream& rng) {
  if (horizon == 0) throw DomainError("run_trajectory: horizon must be >= 1");
  std::vector<std::uint64_t> samples(sample_times);
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  if (!samples.empty() && (samples.front() == 0 || samples.back() > horizon)) {
    throw DomainError("run_trajectory: sample times must lie in [1, horizon]");
  }

  TrajectoryRecord rec;
  rec.n = n;
  rec.seed = rng.seed();
  rec.stream = rng.stream();
  rec.horizon = horizon;
  rec.sampled_series.reserve(samples.size());

  OccupancyState state(n);
  EventQueue queue = initial_events(n, rng);
  std::size_t next_sample = 0;
  std::uint64_t t = 1;
  for (;;) {
    const std::uint64_t te = queue.empty() ? kNever : queue.top().first;
    const std::uint64_t segment_end = std::min(te - 1, horizon);
    // The configuration is constant on [t, segment_end].
    while (next_sample < samples.size() && samples[next_sample] <= segment_end) {
      Observables o = observables(state);
      o.k = samples[next_sample++];
      rec.sampled_series.push_back(o);
    }
    if (state.detached()) {
      if (!rec.first_detachment) rec.first_detachment = t;
      rec.detachment_state_count += segment_end - t + 1;
      rec.last_detachment_seen = segment_end;
    }
    if (te > horizon) break;
    t = te;
    apply_events(state, queue, te, rng);
  }
  rec.censored = !rec.first_detachment.has_value();
  return rec;
}

std::vector<std::optional<std::uint64_t>> first_detachment_prefixes(std::uint64_t n_max,
                                                                    std::uint64_t horizon,
                                                                    RngStream& rng) {
  if (n_max == 0) throw DomainError("first_detachment_prefixes: n_max must be >= 1");
  std::vector<std::optional<std::uint64_t>> first(n_max);
  OccupancyState state(n_max);
  EventQueue queue = initial_events(n_max, rng);
  std::uint64_t resolved = 0;  // prefixes 1..resolved already detached
  std::vector<std::uint64_t> seen;
  std::uint64_t t = 1;
  for (;;) {
    // Longest prefix of passengers sitting in pairwise distinct buses.
    seen.clear();
    std::uint64_t prefix = 0;
    for (const std::uint64_t bus : state.assignment()) {
      if (std::find(seen.begin(), seen.end(), bus) != seen.end()) break;
      seen.push_back(bus);
      ++prefix;
    }
    for (; resolved < prefix; ++resolved) first[resolved] = t;
    if (resolved == n_max) break;
    const std::uint64_t te = queue.top().first;
    if (te > horizon) break;
    t = te;
    apply_events(state, queue, te, rng);
  }
  return first;
}

std::uint64_t sample_tau_exact(std::uint64_t n, RngStream& rng) {
  if (n == 0) throw DomainError("sample_tau_exact: n must be >= 1");
  if (n == 1) return 1;
  const double log_u = std::log(rng.uniform());
  auto reaches = [&](std::uint64_t k) { return log_tau_cdf({n, k}).log_value >= log_u; };
  constexpr std::uint64_t kCap = std::uint64_t{1} << 62;
  std::uint64_t lo = n - 1;  // cdf(lo) = 0 < u
  std::uint64_t hi = n;
  while (!reaches(hi)) {
    if (hi >= kCap) return kCap;
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (reaches(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Single-time sampling

SingleTimeSampler::SingleTimeSampler(std::uint64_t n, std::uint64_t k) : n_(n), k_(k) {
  if (n == 0 || k == 0) throw DomainError("SingleTimeSampler: requires n, k >= 1");
  if (n > 32 * k) {
    mode_ = Mode::binomials;
  } else if (k <= 32 * n) {
    mode_ = Mode::histogram;
    counts_.resize(k);
  } else {
    mode_ = Mode::sorted;
    buses_.resize(n);
  }
}

SingleTimeSample SingleTimeSampler::draw(RngStream& rng) {
  SingleTimeSample s;
  auto tally = [&s](std::uint64_t bus, std::uint64_t count) {
    if (count == 0) return;
    if (s.support == 0) s.min_bus = bus;
    s.max_bus = bus;
    ++s.support;
    if (count == 1) ++s.lonely;
    s.clump += count * count;
  };
  switch (mode_) {
    case Mode::binomials: {
      // Multinomial occupancy via conditional binomials, one bus at a time.
      std::uint64_t remaining = n_;
      for (std::uint64_t b = 1; b <= k_ && remaining > 0; ++b) {
        const std::uint64_t c =
            b == k_ ? remaining : rng.binomial(remaining, 1.0 / static_cast<double>(k_ - b + 1));
        tally(b, c);
        remaining -= c;
      }
      break;
    }
    case Mode::histogram: {
      std::fill(counts_.begin(), counts_.end(), 0);
      // Inlined Lemire draws; this loop dominates large single-time runs.
      auto& eng = rng.engine();
      const std::uint64_t threshold = (0 - k_) % k_;
      for (std::uint64_t p = 0; p < n_; ++p) {
        unsigned __int128 m = static_cast<unsigned __int128>(eng()) * k_;
        while (static_cast<std::uint64_t>(m) < threshold) {
          m = static_cast<unsigned __int128>(eng()) * k_;
        }
        ++counts_[static_cast<std::uint64_t>(m >> 64)];
      }
      for (std::uint64_t b = 0; b < k_; ++b) tally(b + 1, counts_[b]);
      break;
    }
    case Mode::sorted: {
      for (auto& bus : buses_) bus = 1 + rng.below(k_);
      std::sort(buses_.begin(), buses_.end());
      std::size_t i = 0;
      while (i < buses_.size()) {
        std::size_t j = i;
        while (j < buses_.size() && buses_[j] == buses_[i]) ++j;
        tally(buses_[i], j - i);
        i = j;
      }
      break;
    }
  }
  s.rc = std::log(static_cast<double>(s.clump) / static_cast<double>(n_));
  return s;
}

// ---------------------------------------------------------------------------
// Estimation

namespace {

const std::vector<std::pair<Estimand, const char*>>& estimand_names() {
  static const std::vector<std::pair<Estimand, const char*>> names = {
      {Estimand::first_detachment, "first_detachment"},
      {Estimand::last_detachment, "last_detachment"},
      {Estimand::detachment_count, "detachment_count"},
      {Estimand::detachment_fraction, "detachment_fraction"},
      {Estimand::detached_at, "detached_at"},
      {Estimand::lonely_at, "lonely_at"},
      {Estimand::lonely_fraction_at, "lonely_fraction_at"},
      {Estimand::support_at, "support_at"},
      {Estimand::support_fraction_at, "support_fraction_at"},
      {Estimand::min_bus_at, "min_bus_at"},
      {Estimand::max_bus_at, "max_bus_at"},
      {Estimand::range_at, "range_at"},
      {Estimand::clump_at, "clump_at"},
      {Estimand::rc_at, "rc_at"},
  };
  return names;
}

bool needs_time(Estimand e) {
  return e != Estimand::first_detachment && e != Estimand::last_detachment &&
         e != Estimand::detachment_count && e != Estimand::detachment_fraction;
}

}  // namespace

std::optional<Estimand> parse_estimand(const std::string& name) {
  for (const auto& [e, s] : estimand_names()) {
    if (name == s) return e;
  }
  return std::nullopt;
}

std::string estimand_name(Estimand e) {
  for (const auto& [v, s] : estimand_names()) {
    if (v == e) return s;
  }
  return "unknown";
}

McSamples mc_samples(std::uint64_t n, std::uint64_t horizon, std::uint64_t replicas,
                     const EstimandSpec& estimand, std::uint64_t seed) {
  if (replicas < 2) throw DomainError("mc_estimate: requires at least 2 replicas");
  const bool timed = needs_time(estimand.kind);
  if (timed && (estimand.time == 0 || estimand.time > horizon)) {
    throw DomainError("mc_estimate: estimand time must lie in [1, horizon]");
  }
  const std::vector<std::uint64_t> samples =
      timed ? std::vector<std::uint64_t>{estimand.time} : std::vector<std::uint64_t>{};
  std::vector<double> values(replicas);
  std::vector<char> censored(replicas, 0);
  const double nd = static_cast<double>(n);

  parallel_for(replicas, [&](std::uint64_t i) {
    RngStream rng(seed, i);
    const TrajectoryRecord rec = run_trajectory(n, horizon, samples, rng);
    censored[i] = rec.censored ? 1 : 0;
    const Observables* o = timed ? &rec.sampled_series.front() : nullptr;
    double v = 0.0;
    switch (estimand.kind) {
      case Estimand::first_detachment:
        v = static_cast<double>(rec.first_detachment.value_or(horizon));
        break;
      case Estimand::last_detachment:
        v = static_cast<double>(rec.last_detachment_seen.value_or(horizon));
        break;
      case Estimand::detachment_count:
        v = static_cast<double>(rec.detachment_state_count);
        break;
      case Estimand::detachment_fraction:
        v = static_cast<double>(rec.detachment_state_count) / static_cast<double>(horizon);
        break;
      case Estimand::detached_at: v = o->lonely == n ? 1.0 : 0.0; break;
      case Estimand::lonely_at: v = static_cast<double>(o->lonely); break;
      case Estimand::lonely_fraction_at: v = static_cast<double>(o->lonely) / nd; break;
      case Estimand::support_at: v = static_cast<double>(o->support); break;
      case Estimand::support_fraction_at: v = static_cast<double>(o->support) / nd; break;
      case Estimand::min_bus_at: v = static_cast<double>(o->min_bus); break;
      case Estimand::max_bus_at: v = static_cast<double>(o->max_bus); break;
      case Estimand::range_at: v = static_cast<double>(o->range); break;
      case Estimand::clump_at: v = static_cast<double>(o->clump); break;
      case Estimand::rc_at: v = o->rc; break;
    }
    values[i] = v;
  });
  return {std::move(values), std::move(censored)};
}

McEstimate mc_estimate(std::uint64_t n, std::uint64_t horizon, std::uint64_t replicas,
                       const EstimandSpec& estimand, std::uint64_t seed) {
  const McSamples s = mc_samples(n, horizon, replicas, estimand, seed);
  const SampleStats st = sample_stats(s.values);
  McEstimate out;
  out.mean = st.mean;
  out.std_error = st.std_error;
  out.replicas = replicas;
  out.censored = static_cast<std::uint64_t>(std::count(s.censored.begin(), s.censored.end(), 1));
  return out;
}

std::vector<DriftPoint> stopped_clump_drift(std::uint64_t n, std::uint64_t k_last,
                                            std::uint64_t replicas, std::uint64_t seed) {
  if (replicas < 2) throw DomainError("stopped_clump_drift: requires at least 2 replicas");
  const std::uint64_t start = (n + 1) / 2;
  if (k_last < start) throw DomainError("stopped_clump_drift: requires k_last >= ceil(n/2)");
  const std::uint64_t points = k_last - start + 1;
  std::vector<std::vector<double>> increments(points, std::vector<double>(replicas));

  parallel_for(replicas, [&](std::uint64_t r) {
    RngStream rng(seed, r);
    OccupancyState state(n);
    while (state.time() < start) step(state, rng);
    double value = static_cast<double>(state.clump());
    bool stopped = state.lonely() >= 1;
    for (std::uint64_t k = start; k <= k_last; ++k) {
      double next_value = value;
      if (!stopped) {
        step(state, rng);
        next_value = static_cast<double>(state.clump());
        stopped = state.lonely() >= 1;
      }
      increments[k - start][r] = next_value - value;
      value = next_value;
    }
  });

  std::vector<DriftPoint> out;
  out.reserve(points);
  for (std::uint64_t i = 0; i < points; ++i) {
    const SampleStats st = sample_stats(increments[i]);
    out.push_back({start + i, st.mean, st.std_error});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parallel helpers

unsigned worker_count() {
  if (const char* env = std::getenv("DETACH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::uint64_t count, const std::function<void(std::uint64_t)>& body) {
  const std::uint64_t workers = std::min<std::uint64_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    constexpr std::uint64_t kChunk = 64;
    for (;;) {
      const std::uint64_t begin = next.fetch_add(kChunk);
      if (begin >= count) return;
      const std::uint64_t end = std::min(count, begin + kChunk);
      try {
        for (std::uint64_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::uint64_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

SampleStats sample_stats(const std::vector<double>& values) {
  SampleStats st;
  if (values.empty()) return st;
  long double sum = 0.0L;
  for (const double v : values) sum += v;
  const long double mean = sum / static_cast<long double>(values.size());
  st.mean = static_cast<double>(mean);
  if (values.size() < 2) return st;
  long double ss = 0.0L;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const long double var = ss / static_cast<long double>(values.size() - 1);
  st.std_error = static_cast<double>(std::sqrt(var / static_cast<long double>(values.size())));
  return st;
}

}  // namespace detach
