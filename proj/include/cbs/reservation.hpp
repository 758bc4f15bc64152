#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbs/network.hpp"

namespace cbs {

enum class ShapingMode { LinkShaped, NeighborShaped };

std::string to_string(ShapingMode mode);
ShapingMode parse_mode(const std::string& text);  // throws ParameterError

// A queue whose aggregate arrival rate reaches its idleSlope.
class UnstableQueueError : public Error {
 public:
  UnstableQueueError(const std::string& queue, const Rational& arrival_rate, const Rational& service_rate);
  std::string queue;
};

// Identical flows entering a queue the same way. `input_link` is empty for
// flows generated by the node that owns the queue.
struct ArrivalTerm {
  std::optional<size_t> input_link;
  size_t upstream_queue = 0;  // queue index on the input link's port
  Rational burst;             // m = MIF * MFS
  Rational period;            // CMI
  Rational jitter;            // accumulated max - min latency
  long count = 1;
};

// Evaluates per-queue arrival curves and delay bounds. Results are memoized
// by queue, mode and the canonical list of arrival terms, so the model must
// not change during the calculator's lifetime.
class DelayCalculator {
 public:
  DelayCalculator(const NetworkModel& model, ShapingMode mode) : model_(model), mode_(mode) {}

  ShapingMode mode() const { return mode_; }
  Curve arrival(QueueRef q, std::vector<ArrivalTerm> terms, long exact_periods) const;
  // Exact h_dev against the queue's CBS service curve. Throws
  // UnstableQueueError.
  Rational delay(QueueRef q, std::vector<ArrivalTerm> terms);
  size_t cache_size() const;

  static constexpr size_t kCacheLimit = 1 << 18;

 private:
  const NetworkModel& model_;
  ShapingMode mode_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Rational> cache_;
};

// Largest number of exact staircase periods tried before settling for the
// folded (still safe) bound.
inline constexpr long kMaxExactPeriods = 4096;

struct FlowHop {
  QueueRef queue;
  Rational acc_max;  // sum of budgets of the preceding hops
  Rational acc_min;  // sum of l_f / C of the preceding hops
};

struct AdmittedFlow {
  FlowSpec spec;
  std::vector<FlowHop> hops;
};

struct Violation {
  QueueRef queue;
  Rational delay;
  Rational budget;
};

struct Decision {
  bool admitted = false;
  std::vector<Violation> violations;
  std::string reason;
};

// Decentralized admission: budgets are constants, each queue checks its own
// computed worst-case delay against its budget when a flow subscribes.
// Transactions are serialized by the caller.
class ReservationEngine {
 public:
  explicit ReservationEngine(NetworkModel model, ShapingMode mode = ShapingMode::LinkShaped);
  ReservationEngine(const ReservationEngine&) = delete;
  ReservationEngine& operator=(const ReservationEngine&) = delete;

  const NetworkModel& model() const { return model_; }
  ShapingMode mode() const { return calc_.mode(); }

  // Per-hop accumulated latencies seen by the flow. Read-only. Throws
  // ConfigError on a broken path or rate infeasibility.
  std::vector<FlowHop> advertise(const FlowSpec& flow) const;

  Curve queue_arrival(QueueRef q) const;
  Rational worst_case_delay(QueueRef q);
  // Value stored at the last successful mutation (0 for idle queues).
  Rational current_delay(QueueRef q) const;

  Decision subscribe(const FlowSpec& flow);
  void remove(const std::string& flow_id);

  const std::map<std::string, AdmittedFlow>& flows() const { return state_.flows; }
  std::vector<FlowSpec> flow_specs() const;

  // Sorted, human-readable dump for golden comparisons.
  std::string snapshot() const;

 private:
  struct QueueState {
    std::vector<std::string> flows;  // sorted
    Rational delay;
    bool operator==(const QueueState&) const = default;
  };
  struct State {
    std::map<std::string, AdmittedFlow> flows;
    std::map<QueueRef, QueueState> queues;
  };

  std::vector<ArrivalTerm> terms(const State& s, QueueRef q) const;

  NetworkModel model_;
  DelayCalculator calc_;
  State state_;
};

// Builds the arrival term of `flow` at hop `hop` given the jitter it has
// accumulated upstream.
ArrivalTerm make_term(const FlowSpec& flow, const std::vector<QueueRef>& queues, size_t hop,
                      const Rational& jitter);

// Per-queue delays when every budget equals the queue's own computed delay,
// processing queues in dependency order. Throws ConfigError if the queue
// dependency graph has a cycle.
std::map<QueueRef, Rational> tight_delays(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                          DelayCalculator& calc);

// Copy of `model` whose loaded queues carry their tight delays as budgets.
NetworkModel provision_tight_budgets(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                     ShapingMode mode);

// Largest over all flows of the sum of per-hop delays along the path.
Rational max_path_delay(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                        const std::map<QueueRef, Rational>& delays);

}  // namespace cbs
