#pragma once

#include <array>
#include <vector>

#include "cbs/curve.hpp"

namespace cbs {

inline constexpr int kPriorities = 8;
inline constexpr int kBestEffort = -1;  // priority_map entry for the implicit BE queue

// Preamble, SFD and inter-packet gap added to every Ethernet frame on the wire.
inline constexpr long kWireOverheadBytes = 20;
inline constexpr long kIpgBits = 96;

// Frame bytes (header through FCS) to on-wire bits.
inline Rational on_wire_bits(long frame_bytes) { return Rational((frame_bytes + kWireOverheadBytes) * 8); }

struct QueueConfig {
  Rational idle_slope;        // bit/s
  Rational budget_max_delay;  // s, the pre-configured per-hop guarantee
  Rational max_frame_same;    // bits on the wire
  Rational min_frame_same;    // bits on the wire
  Rational max_frame_lower;   // bits, largest frame of any lower-priority queue incl. best effort

  bool operator==(const QueueConfig&) const = default;
};

struct PortConfig {
  Rational capacity;                 // bit/s
  std::vector<QueueConfig> queues;   // CBS queues, highest priority first
  std::array<int, kPriorities> priority_map;  // priority -> queue index or kBestEffort
  Rational best_effort_max_frame;    // bits

  PortConfig();
  bool operator==(const PortConfig&) const = default;

  int queue_for_priority(int priority) const;
  // Throws ConfigError if an invariant does not hold.
  void validate() const;
};

struct CreditBounds {
  Rational c_max;
  Rational c_min;
};

CreditBounds credit_bounds(const PortConfig& port, size_t queue_index);
Curve cbs_service_curve(const PortConfig& port, size_t queue_index);
Curve cbs_shaping_curve(const PortConfig& port, size_t queue_index);
Curve link_shaping_curve(const Rational& capacity, const Rational& max_frame);

// Service latency c_max / idleSlope of the rate-latency service curve.
Rational service_latency(const PortConfig& port, size_t queue_index);

// Fills max_frame_lower of every queue from the lower queues and the
// best-effort frame size.
void derive_lower_frames(PortConfig& port);

}  // namespace cbs
