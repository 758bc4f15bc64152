#pragma once
// Reference computations used by the tests. They share no code with the
// library beyond plain data types.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "cbs/curve.hpp"

namespace oracle {

// Arrivals m * ceil((t + offset) / period), integer bits and ns.
struct Stair {
  std::int64_t bits;
  std::int64_t period_ns;
  std::int64_t offset_ns;
};

// min(sum of stairs, link_bits + t) against rate_num / rate_den bits per
// ns after latency_ns. The link runs at 1 bit/ns so every crossing with a
// staircase level falls on an integer ns.
struct Pair {
  std::vector<Stair> stairs;
  std::int64_t link_bits;
  std::int64_t rate_num, rate_den;
  std::int64_t latency_ns;

  double service_rate() const { return static_cast<double>(rate_num) / static_cast<double>(rate_den); }
  double arrival_rate() const {
    double r = 0;
    for (const Stair& x : stairs) r += static_cast<double>(x.bits) / static_cast<double>(x.period_ns);
    return r;
  }
};

// No grid point past this instant can exceed the value at t = 0.
inline std::int64_t horizon_ns(const Pair& p) {
  double burst = 0;
  for (const Stair& x : p.stairs) burst += 3.0 * static_cast<double>(x.bits);  // offsets stay below two periods
  double R = p.service_rate();
  return static_cast<std::int64_t>(burst / R / (1 - p.arrival_rate() / R)) + 2;
}

// Horizontal deviation scanned on a 1 ns grid with right limits. Returns ns.
inline double h_dev_grid(const Pair& p) {
  double R = p.service_rate();
  std::vector<std::int64_t> next;
  std::int64_t acc = 0;
  for (const Stair& x : p.stairs) {
    std::int64_t k = x.offset_ns / x.period_ns + 1;  // jumps at or before 0+
    acc += x.bits * k;
    next.push_back(k * x.period_ns - x.offset_ns);
  }
  double best = 0;
  std::int64_t end = horizon_ns(p);
  for (std::int64_t t = 0; t <= end; ++t) {
    for (size_t i = 0; i < next.size(); ++i)
      if (next[i] == t) {
        acc += p.stairs[i].bits;
        next[i] += p.stairs[i].period_ns;
      }
    std::int64_t a = std::min(acc, p.link_bits + t);
    double d = static_cast<double>(p.latency_ns) + static_cast<double>(a) / R - static_cast<double>(t);
    best = std::max(best, d);
  }
  return best;
}

inline cbs::Rational ns(std::int64_t v) { return cbs::ratio(static_cast<long>(v), 1'000'000'000L); }

// Library curves for the pair, exact up to the grid horizon.
inline cbs::Curve alpha_of(const Pair& p) {
  cbs::Curve a;
  std::int64_t end = horizon_ns(p);
  for (const Stair& x : p.stairs) {
    long periods = static_cast<long>((end + x.offset_ns) / x.period_ns + 2);
    a = cbs::sum(a, cbs::shifted_staircase(static_cast<long>(x.bits), ns(x.period_ns), ns(x.offset_ns), periods));
  }
  return cbs::minimum(a, cbs::affine(static_cast<long>(p.link_bits), cbs::Rational(1'000'000'000L)));
}

inline cbs::Curve beta_of(const Pair& p) {
  cbs::Rational bps(static_cast<long>(p.rate_num) * 1'000'000'000L, static_cast<long>(p.rate_den));
  return cbs::rate_latency(bps, ns(p.latency_ns));
}

// Stable pair: arrival rate at most 70% of the service rate.
inline Pair random_pair(std::mt19937_64& rng) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  Pair p;
  p.rate_num = pick(3, 9);
  p.rate_den = 10;
  p.latency_ns = pick(0, 20'000);
  p.link_bits = pick(672, 12'336);
  double R = p.service_rate();
  int n = static_cast<int>(pick(1, 4));
  for (int i = 0; i < n; ++i) {
    Stair s{pick(512, 12'336), pick(20'000, 100'000), 0};
    s.offset_ns = pick(0, 2 * s.period_ns);
    Pair trial = p;
    trial.stairs.push_back(s);
    if (trial.arrival_rate() <= 0.7 * R) p = trial;
  }
  if (p.stairs.empty()) p.stairs.push_back({512, 20'000, 0});
  return p;
}

// Random curve from the library's constructors, built so that every
// representation stays exact up to the sampled times.
inline cbs::Curve random_curve(std::mt19937_64& rng) {
  using cbs::micros;
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  cbs::Curve c;
  int parts = static_cast<int>(pick(1, 3));
  for (int i = 0; i < parts; ++i) {
    switch (pick(0, 3)) {
      case 0:
        c = cbs::sum(c, cbs::staircase(pick(1, 5000), micros(pick(1, 200)), 2600));
        break;
      case 1:
        c = cbs::sum(c, cbs::affine(pick(0, 5000), cbs::Rational(pick(0, 100'000'000))));
        break;
      case 2:
        c = cbs::sum(c, cbs::rate_latency(cbs::Rational(pick(1, 100'000'000)), micros(pick(0, 100))));
        break;
      default:
        c = cbs::sum(c, cbs::shifted_staircase(pick(1, 5000), micros(pick(1, 200)), micros(pick(0, 300)), 2600));
    }
  }
  return c;
}

// Mix of grid points (likely on jumps) and arbitrary rationals.
inline cbs::Rational random_time(std::mt19937_64& rng) {
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  if (pick(0, 1)) return cbs::micros(pick(1, 2000));
  return cbs::ratio(pick(1, 2'000'000'000), 1'000'000'000'000L);
}

}  // namespace oracle
