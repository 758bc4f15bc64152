#include <random>

#include "cbs/experiments.hpp"
#include "cbs/scenarios.hpp"
#include "doctest.h"

using namespace cbs;

namespace {

Rational load_on(const Scenario& s, QueueRef q) {
  Rational load = 0;
  for (const FlowSpec& f : s.flows)
    for (QueueRef h : s.network.flow_queues(f))
      if (h == q) load += f.rate();
  return load;
}

}  // namespace

TEST_CASE("fan-in frame sizes and the talker cap") {
  // 75 Mbit/s * 125 us = 9375 bits per CMI shared by the talkers
  CHECK(fanin_frame_bytes(1) == 1171);
  CHECK(fanin_frame_bytes(2) == 585);
  CHECK(fanin_frame_bytes(13) == 90);
  CHECK_THROWS_AS(fanin_frame_bytes(14), ParameterError);
  CHECK_THROWS_AS(fanin_counterexample(14), ParameterError);
  CHECK(fanin_max_talkers() == 13);
  FaninOptions big;
  big.min_frame_bytes = 64;
  CHECK(fanin_max_talkers(big) == 18);
}

TEST_CASE("fan-in topology") {
  Scenario s = fanin_counterexample(4);
  s.network.validate();
  CHECK(s.flows.size() == 4);
  // talker, five stages, last switch and listener per talker
  for (const FlowSpec& f : s.flows) {
    CHECK(f.path.size() == 8);
    s.network.validate_flow(f);
  }
  CHECK(s.network.nodes().size() == 4 * 6 + 2);
  // injectors on stages 2..5, into the last switch, and toward the listener
  CHECK(s.injectors.size() == 4 * 5 + 1);
  Rational load = load_on(s, s.marks.at("last"));
  CHECK(load <= 75'000'000);
  CHECK(load > 74'000'000);
}

TEST_CASE("single talker stays below every bound") {
  CompareRow r = compare_row(1, ratio(1, 100), ShapingMode::LinkShaped);
  CHECK(r.sim_max <= r.ba);
  CHECK(r.sim_max <= r.annex_l);
  CHECK(r.sim_max <= r.ssrp);
  CHECK_FALSE(r.plenary_defined);
}

TEST_CASE("PROFINET topology") {
  Scenario s = profinet(7);
  s.network.validate();
  CHECK(s.flows.size() == 21);
  // 21 flows of 110 bytes every millisecond
  CHECK(load_on(s, s.marks.at("central")) == ratio(1848, 100) * kMegabit);
  CHECK(s.phases.empty());
  CHECK(s.memoryless.size() == 1);
  CHECK(s.memoryless[0].mean_interval == micros(300));

  ProfinetOptions o;
  o.phase_jitter = micros(125);
  o.phase_seed = 5;
  Scenario j = profinet(7, o);
  REQUIRE(j.phases.size() == 21);
  for (const Rational& p : j.phases) CHECK(p < micros(125));
  o.phase_jitter = ratio(1, 100);
  CHECK_THROWS_AS(profinet(7, o), ParameterError);
  CHECK_THROWS_AS(profinet(0), ParameterError);
}

TEST_CASE("PROFINET without NRT traffic") {
  ProfinetOptions with, without;
  without.nrt = false;
  Scenario busy = profinet(7, with), quiet = profinet(7, without);
  SimTrace a = run(busy.sim_config(ratio(1, 50), 3));
  SimTrace b = run(quiet.sim_config(ratio(1, 50), 3));
  CHECK(b.queue(quiet.marks.at("io1")).max_delay * 2 < a.queue(busy.marks.at("io1")).max_delay);
}

TEST_CASE("line topology") {
  Scenario s = line_topology();
  CHECK(s.network.nodes().size() == 13);
  CHECK(s.network.links().size() == 12);
  FlowSpec f = line_flow(LineOptions{}, 2, "f");
  CHECK(f.path.front() == "T2");
  CHECK(f.path.back() == "listener");
  CHECK(s.network.flow_queues(f).size() == 6);
  CHECK_THROWS_AS(line_flow(LineOptions{}, 7, "g"), ParameterError);
}

TEST_CASE("cascade topology structure") {
  Scenario zero = cascade_topology(0);
  zero.network.validate();
  CHECK(zero.flows.size() == 3);
  CHECK(zero.flows[0].id == "foi");
  CHECK(zero.burst_filters.empty());
  Scenario two = cascade_topology(2);
  two.network.validate();
  for (const FlowSpec& f : two.flows) two.network.validate_flow(f);
  CHECK(two.flows.size() > zero.flows.size());
  CHECK_FALSE(two.burst_filters.empty());
  // 25% sources on 50% idleSlopes
  CHECK(two.flows[0].rate() == 25 * kMegabit);
  CHECK_THROWS_AS(cascade_topology(-1), ParameterError);
}

TEST_CASE("cascade without cross traffic does not grow") {
  CascadeTopologyOptions o;
  o.cross_traffic = false;
  Rational delay0;
  int burst0 = 0;
  for (int level : {0, 3}) {
    Scenario s = cascade_topology(level, o);
    SimConfig c = s.sim_config(ratio(1, 100));
    c.record_transmissions = true;
    SimTrace t = run(c);
    Rational d = t.queue(s.marks.at("s2")).max_delay;
    int b = longest_burst(t, s.marks.at("s2").link, 0, s.flows[0].max_frame, 50 * kMegabit);
    if (level == 0) {
      delay0 = d;
      burst0 = b;
    } else {
      CHECK(d == delay0);
      CHECK(b == burst0);
    }
  }
}

TEST_CASE("random topologies are valid") {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 100; ++i) {
    Scenario s = random_topology(rng);
    s.network.validate();
    int bridges = 0;
    for (const Node& n : s.network.nodes()) bridges += n.kind == NodeKind::Bridge ? 1 : 0;
    CHECK(bridges >= 1);
    CHECK(bridges <= 6);
    // candidates may exceed an idleSlope, but their paths always exist
    for (const FlowSpec& f : s.flows) CHECK(s.network.flow_queues(f).size() + 1 == f.path.size());
  }
}
