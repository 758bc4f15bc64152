#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbs/network.hpp"

namespace cbs {

// Periodic talker: `mif` frames of `max_frame` bits released together at
// phase + k * cmi.
struct PeriodicSource {
  FlowSpec flow;
  Rational phase = 0;
};

// Oracle adversary on one output port: `lead` before every reserved frame
// reaches the port, a best-effort frame of `frame` bits is queued there if
// the port's best-effort queue is empty. The frame ends at the next node.
struct BestEffortInjector {
  std::string from, to;
  Rational frame;
  Rational lead = nanos(1);
};

// Best-effort frames with exponential inter-arrival times along a path.
// Release instants are rounded to whole nanoseconds.
struct MemorylessSource {
  std::string id;
  std::vector<std::string> path;
  Rational frame;
  Rational mean_interval;
  Rational start = 0;
};

// Keeps only the bursts of a periodic flow on one output port. A frame
// goes on to the next hop if another frame of the same flow waits behind it
// when its transmission starts, or if it closes such a run; isolated frames
// are dropped after transmission.
struct BurstFilter {
  std::string flow;
  std::string from, to;
};

// Credit value of one queue, sampled after all events of that instant.
struct CreditProbe {
  QueueRef queue;
  Rational time;
};

struct SimConfig {
  const NetworkModel* network = nullptr;
  std::vector<PeriodicSource> periodic;
  std::vector<BestEffortInjector> injectors;
  std::vector<MemorylessSource> memoryless;
  // Best-effort frames released once at a given time along a path.
  struct OneShot {
    std::vector<std::string> path;
    Rational frame;
    Rational time;
    int priority = -1;  // -1: best effort, else mapped like a reserved flow
  };
  std::vector<OneShot> one_shots;
  std::vector<BurstFilter> burst_filters;
  std::vector<CreditProbe> probes;
  Rational horizon;
  std::uint64_t seed = 1;
  bool validate_credit = false;
  bool record_transmissions = false;
  size_t event_log_limit = 0;  // keep the last n log lines; 0 disables the log

  void validate() const;
};

struct QueueTrace {
  QueueRef queue;
  int priority = 7;  // highest priority mapped to the queue
  Rational max_delay;  // enqueue to start of transmission
  Rational credit_min, credit_max;
  std::uint64_t frames = 0;
  Rational bits;
};

struct FlowTrace {
  std::string id;
  Rational max_e2e;  // release to full reception at the listener
  std::uint64_t received = 0;
};

struct Transmission {
  size_t link;
  int queue;  // -1 for best effort
  std::uint64_t frame_id;
  int flow;  // index into periodic sources, -1 otherwise
  Rational start, end;
};

struct SimTrace {
  std::vector<QueueTrace> queues;
  std::vector<FlowTrace> flows;
  std::vector<Rational> probe_values;  // same order as SimConfig::probes
  std::vector<Transmission> transmissions;
  std::vector<std::string> log;
  std::uint64_t credit_violations = 0;
  std::uint64_t events = 0;

  const QueueTrace& queue(QueueRef q) const;
  // node,port,priority,max_queue_delay_ns,credit_min,credit_max
  std::string queue_csv(const NetworkModel& net) const;
  // flow,max_e2e_ns
  std::string flow_csv() const;
};

SimTrace run(const SimConfig& config);

// Periodic sources for every flow, all phases zero.
std::vector<PeriodicSource> aligned_sources(const std::vector<FlowSpec>& flows);

}  // namespace cbs
