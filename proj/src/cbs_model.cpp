#include "cbs/cbs_model.hpp"

#include <string>

namespace cbs {

PortConfig::PortConfig() { priority_map.fill(kBestEffort); }

int PortConfig::queue_for_priority(int priority) const {
  if (priority < 0 || priority >= kPriorities) throw ParameterError("priority out of range");
  return priority_map[static_cast<size_t>(priority)];
}

void PortConfig::validate() const {
  if (capacity <= 0) throw ConfigError("port capacity must be positive");
  if (best_effort_max_frame < 0) throw ConfigError("best-effort frame size must be non-negative");
  Rational total = 0;
  for (size_t i = 0; i < queues.size(); ++i) {
    const QueueConfig& q = queues[i];
    std::string where = "queue " + std::to_string(i) + ": ";
    if (q.idle_slope <= 0 || q.idle_slope >= capacity)
      throw ConfigError(where + "idleSlope must lie strictly between 0 and the port capacity");
    if (q.budget_max_delay <= 0) throw ConfigError(where + "delay budget must be positive");
    if (q.min_frame_same <= 0 || q.max_frame_same < q.min_frame_same)
      throw ConfigError(where + "frame sizes must satisfy max >= min > 0");
    if (q.max_frame_lower < 0) throw ConfigError(where + "lower-priority frame size is negative");
    total += q.idle_slope;
  }
  if (!queues.empty() && total >= capacity) throw ConfigError("sum of idleSlopes must be below the port capacity");
  for (int p : priority_map)
    if (p != kBestEffort && (p < 0 || p >= static_cast<int>(queues.size())))
      throw ConfigError("priority map references a missing queue");
}

CreditBounds credit_bounds(const PortConfig& port, size_t queue_index) {
  if (queue_index >= port.queues.size()) throw ParameterError("queue index out of range");
  const Rational& c = port.capacity;
  Rational higher_cmin = 0, higher_slope = 0;
  for (size_t i = 0; i < queue_index; ++i) {
    const QueueConfig& h = port.queues[i];
    higher_cmin += (h.idle_slope - c) * h.max_frame_same / c;
    higher_slope += h.idle_slope;
  }
  if (higher_slope >= c)
    throw ConfigError("higher-priority idleSlopes reach the port capacity; credit bound undefined");
  const QueueConfig& q = port.queues[queue_index];
  CreditBounds b;
  b.c_min = (q.idle_slope - c) * q.max_frame_same / c;
  b.c_max = q.idle_slope * (higher_cmin - q.max_frame_lower) / (higher_slope - c);
  return b;
}

Rational service_latency(const PortConfig& port, size_t queue_index) {
  return credit_bounds(port, queue_index).c_max / port.queues[queue_index].idle_slope;
}

Curve cbs_service_curve(const PortConfig& port, size_t queue_index) {
  return rate_latency(port.queues[queue_index].idle_slope, service_latency(port, queue_index));
}

Curve cbs_shaping_curve(const PortConfig& port, size_t queue_index) {
  CreditBounds b = credit_bounds(port, queue_index);
  const QueueConfig& q = port.queues[queue_index];
  return affine(b.c_max - b.c_min + q.max_frame_same, q.idle_slope);
}

Curve link_shaping_curve(const Rational& capacity, const Rational& max_frame) {
  if (capacity <= 0) throw ParameterError("link capacity must be positive");
  return affine(max_frame, capacity);
}

void derive_lower_frames(PortConfig& port) {
  Rational lower = port.best_effort_max_frame;
  for (size_t i = port.queues.size(); i-- > 0;) {
    port.queues[i].max_frame_lower = lower;
    lower = max(lower, port.queues[i].max_frame_same);
  }
}

}  // namespace cbs
