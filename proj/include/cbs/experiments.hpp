#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cbs/reservation.hpp"
#include "cbs/scenarios.hpp"
#include "cbs/standards.hpp"

namespace cbs {

// Standard-formula inputs for one queue, taken from the admitted flows.
StdHopParams std_params_for_queue(const NetworkModel& net, const std::vector<FlowSpec>& flows, QueueRef q);

struct CompareRow {
  int talkers = 0;
  Rational sim_max;
  Rational ba, annex_l, plenary, ssrp;
  bool ba_negative = false;
  bool plenary_defined = true;
};

CompareRow compare_row(int talkers, const Rational& horizon, ShapingMode mode, const FaninOptions& o = {});
// `N,sim_max_ns,ba_ns,annexl_ns,plenary_ns,ssrp_ns`
std::string compare_csv_line(const CompareRow& r);

// One randomized run of the line experiment: e2e[n] is the largest path
// delay after n + 1 flows; stops before the first flow that makes a queue
// unstable.
std::vector<Rational> line_run(const Scenario& line, const LineOptions& o, std::uint64_t seed, DelayCalculator& calc);

struct SweepStats {
  Rational deadline;
  ShapingMode mode;
  double mean = 0;
  double stddev = 0;
};

// counts per deadline: number of flows whose e2e value fits.
int flows_within(const std::vector<Rational>& e2e, const Rational& deadline);

std::vector<SweepStats> admit_sweep(const LineOptions& o, int runs, std::uint64_t seed,
                                    const std::vector<Rational>& deadlines, const std::vector<ShapingMode>& modes);

struct ProfinetRow {
  std::string name;
  Rational bound;
  std::vector<Rational> measured;  // one per seed
};

std::vector<ProfinetRow> profinet_report(int lines, const std::vector<std::uint64_t>& seeds, const Rational& horizon,
                                         ShapingMode mode, const ProfinetOptions& o = {});

struct SafetyResult {
  int states = 0;    // admitted states that were simulated
  int admitted = 0;  // subscribe calls that succeeded
  int rejected = 0;
  double tightest = 0;  // largest measured / bound ratio over all queues
  std::vector<std::string> violations;  // empty when every bound held
};

// One randomized topology and subscribe/remove sequence. Every
// `check_every` subscribe attempts and at the end, the admitted set is
// simulated with aligned releases, and the final set once more with the
// generator's random phases.
SafetyResult safety_trial(std::uint64_t seed, const Rational& horizon, ShapingMode mode, int check_every = 10,
                          const RandomTopologyOptions& o = {});

struct CascadeSimRow {
  int level = 0;
  Rational s1_max, s2_max;
  int foi_burst = 0;  // longest run of flow-of-interest frames leaving S2 at idleSlope or faster
};

// Longest run of `flow` frames on `link` whose start times are at most
// frame / idle_slope apart.
int longest_burst(const SimTrace& t, size_t link, int flow, const Rational& frame, const Rational& idle_slope);

// Release offsets of the recursive topology. Entry k holds, for a level-k
// subnetwork, the phase of its own source and the offsets of its two
// subnetworks (for level 0: the phases of the two cross sources).
using CascadePhases = std::vector<std::array<Rational, 3>>;

void apply_cascade_phases(Scenario& s, int level, const CascadePhases& phases, const Rational& cmi);

// Coordinate search over the offsets of all levels. Level k starts from
// the best pattern of level k - 1 and maximizes the top-level S2 delay over
// `search_horizon`.
CascadePhases search_cascade_phases(int levels, const Rational& search_horizon, int grid,
                                    const CascadeTopologyOptions& o = {});

std::vector<CascadeSimRow> cascade_simulation(int levels, const Rational& horizon, const CascadePhases& phases,
                                              const CascadeTopologyOptions& o = {});

}  // namespace cbs
