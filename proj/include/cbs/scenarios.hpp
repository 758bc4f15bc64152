#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cbs/simulator.hpp"

namespace cbs {

// A network with its reservation flows and adversarial traffic.
struct Scenario {
  NetworkModel network;
  std::vector<FlowSpec> flows;
  std::vector<Rational> phases;  // per flow; empty means all zero
  std::vector<BestEffortInjector> injectors;
  std::vector<MemorylessSource> memoryless;
  std::vector<BurstFilter> burst_filters;
  std::map<std::string, QueueRef> marks;  // named queues of interest

  // The returned config points into this scenario.
  SimConfig sim_config(const Rational& horizon, std::uint64_t seed = 1) const;
};

inline const Rational kMegabit = 1'000'000;
inline const Rational kBestEffortFrame = 12336;  // 1522-byte frame on the wire

struct FaninOptions {
  Rational capacity = 100 * kMegabit;
  Rational idle_fraction = ratio(3, 4);
  Rational cmi = micros(125);
  Rational best_effort_frame = kBestEffortFrame;
  int stages = 5;
  long min_frame_bytes = 84;  // smallest Ethernet frame on the wire
};

// Solved on-wire frame size in bytes; throws ParameterError when it falls
// below the Ethernet minimum.
long fanin_frame_bytes(int talkers, const FaninOptions& o = {});
// Largest talker count with a feasible frame size.
int fanin_max_talkers(const FaninOptions& o = {});

// Talkers each feed a chain of `stages` bridges that converge on one last
// switch toward a single listener. Mark "last" is the last switch's queue.
Scenario fanin_counterexample(int talkers, const FaninOptions& o = {});

struct CascadeTopologyOptions {
  Rational capacity = 100 * kMegabit;
  Rational idle_fraction = ratio(1, 2);
  Rational source_fraction = ratio(1, 4);
  Rational cmi = micros(125);
  Rational best_effort_frame = kBestEffortFrame;
  bool cross_traffic = true;
  // A nested flow of interest only carries its bursts into the next level.
  bool bursts_only = true;
};

// Recursive two-switch network. Marks "s1" and "s2" are the flow of
// interest's queues at the top level.
Scenario cascade_topology(int levels, const CascadeTopologyOptions& o = {});

struct ProfinetOptions {
  Rational capacity = 100 * kMegabit;
  Rational idle_fraction = ratio(1, 2);
  Rational frame = 880;  // 110 bytes on the wire
  Rational period = ratio(1, 1000);  // send period, used as the flows' CMI
  Rational best_effort_frame = kBestEffortFrame;
  bool nrt = true;
  Rational nrt_mean = micros(300);
  Rational phase_jitter = 0;  // talkers start uniformly in [0, phase_jitter); 0 aligns them
  std::uint64_t phase_seed = 1;
};

// `lines` chains of three I/O devices into a central switch toward a PLC.
// Marks "io1", "io2", "io3" (first line) and "central".
Scenario profinet(int lines, const ProfinetOptions& o = {});

struct LineOptions {
  int switches = 6;
  Rational capacity = 1000 * kMegabit;
  Rational idle_fraction = ratio(3, 4);
  Rational frame = 1024;  // 128 bytes on the wire
  Rational cmi = micros(125);
  Rational best_effort_frame = kBestEffortFrame;
  Rational budget = ratio(1, 1000);
};

// Switches S1..Sn in a chain, talker Tk on Sk and one listener on Sn.
Scenario line_topology(const LineOptions& o = {});
FlowSpec line_flow(const LineOptions& o, int talker, const std::string& id);

struct RandomTopologyOptions {
  int max_switches = 6;
  int max_flows = 30;
  Rational capacity = 100 * kMegabit;
};

// Random tree of bridges with end stations, random idleSlopes, budgets and
// frame sizes, plus candidate flows between end stations.
Scenario random_topology(std::mt19937_64& rng, const RandomTopologyOptions& o = {});

}  // namespace cbs
