#include <random>

#include "cbs/reservation.hpp"
#include "cbs/scenarios.hpp"
#include "doctest.h"

using namespace cbs;

namespace {

NetworkModel chain(const Rational& budget) {
  NetworkModel net;
  net.add_node("T", NodeKind::EndStation);
  net.add_node("S1", NodeKind::Bridge);
  net.add_node("S2", NodeKind::Bridge);
  net.add_node("L", NodeKind::EndStation);
  PortConfig port = single_class_port(100'000'000, 75'000'000, budget, 12336, 12336);
  net.add_link("T", "S1", port);
  net.add_link("S1", "S2", port);
  net.add_link("S2", "L", port);
  return net;
}

FlowSpec flow(const std::string& id, std::vector<std::string> path, long bits = 1184) {
  FlowSpec f;
  f.id = id;
  f.cmi = micros(125);
  f.max_frame = bits;
  f.min_frame = bits;
  f.path = std::move(path);
  return f;
}

NetworkModel relaxed(NetworkModel net) {
  for (QueueRef q : net.all_queues()) net.queue(q).budget_max_delay = micros(5000);
  return net;
}

}  // namespace

TEST_CASE("advertise accumulates budgets and frame times") {
  ReservationEngine e(chain(micros(100)));
  std::string before = e.snapshot();
  std::vector<FlowHop> hops = e.advertise(flow("f", {"T", "S1", "S2", "L"}));
  REQUIRE(hops.size() == 3);
  CHECK(hops[0].acc_max == 0);
  CHECK(hops[0].acc_min == 0);
  CHECK(hops[2].acc_max == micros(200));
  CHECK(hops[2].acc_min == 2 * ratio(1184, 100'000'000));
  CHECK(hops[1].acc_min == micros(1184) / 100);
  CHECK(e.snapshot() == before);

  std::vector<FlowHop> one = e.advertise(flow("g", {"S2", "L"}));
  REQUIRE(one.size() == 1);
  CHECK(one[0].acc_max == 0);
  CHECK(one[0].acc_min == 0);
}

TEST_CASE("advertise rejects broken paths and infeasible rates") {
  ReservationEngine e(chain(micros(100)));
  CHECK_THROWS_AS(e.advertise(flow("f", {"T", "S2", "L"})), ConfigError);
  FlowSpec fast = flow("f", {"T", "S1"}, 12336);
  fast.cmi = micros(100);  // 123 Mbit/s
  CHECK_THROWS_AS(e.advertise(fast), ConfigError);
}

TEST_CASE("empty queue and a single burst") {
  ReservationEngine e(chain(micros(500)));
  QueueRef q{0, 0};
  CHECK(e.worst_case_delay(q) == 0);
  CHECK(e.queue_arrival(q) == Curve());
  REQUIRE(e.subscribe(flow("f", {"T", "S1"})).admitted);
  Rational T = ratio(9252, 75'000'000);
  CHECK(e.worst_case_delay(q) <= T + Rational(1184) / 75'000'000);
  CHECK(e.worst_case_delay(q) > T);
  CHECK(e.current_delay(q) == e.worst_case_delay(q));
}

TEST_CASE("one flow from one link is clipped by the link") {
  ReservationEngine e(chain(micros(500)));
  REQUIRE(e.subscribe(flow("f", {"T", "S1", "S2"})).admitted);
  Curve a = e.queue_arrival({0, 0});
  Curve expect = minimum(staircase(1184, micros(125)), affine(12336, 100'000'000));
  for (long k = 0; k <= 2000; ++k) CHECK(a.eval(ratio(k, 1'000'000)) == expect.eval(ratio(k, 1'000'000)));
}

TEST_CASE("subscribe checks budgets, deadlines and stability") {
  ReservationEngine tight(chain(micros(100)));
  Decision d = tight.subscribe(flow("f", {"T", "S1"}));
  CHECK_FALSE(d.admitted);
  REQUIRE(d.violations.size() == 1);
  CHECK(d.violations[0].budget == micros(100));
  CHECK(d.violations[0].delay > micros(100));
  CHECK(tight.flows().empty());

  ReservationEngine e(chain(micros(500)));
  FlowSpec late = flow("late", {"T", "S1", "S2", "L"});
  late.deadline = micros(1000);
  CHECK_FALSE(e.subscribe(late).admitted);
  late.deadline = micros(1500);
  CHECK(e.subscribe(late).admitted);
  CHECK_FALSE(e.subscribe(late).admitted);  // duplicate id

  ReservationEngine full(relaxed(chain(1)));
  int admitted = 0;
  for (int i = 0; i < 20; ++i) {
    Decision x = full.subscribe(flow("f" + std::to_string(i), {"T", "S1"}));
    if (x.admitted) ++admitted;
    else CHECK_FALSE(x.reason.empty());
  }
  // 75 Mbit/s * 125 us / 1184 bits
  CHECK(admitted == 7);
}

TEST_CASE("reject leaves the state untouched and remove undoes admit") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    Scenario s = random_topology(rng);
    ReservationEngine e(s.network);
    for (const FlowSpec& f : s.flows) {
      std::string before = e.snapshot();
      auto flows_before = e.flows();
      Decision d = e.subscribe(f);
      if (!d.admitted) {
        CHECK(e.snapshot() == before);
        CHECK(e.flows().size() == flows_before.size());
      } else if (rng() % 4 == 0) {
        e.remove(f.id);
        CHECK(e.snapshot() == before);
      }
    }
    for (QueueRef q : e.model().all_queues()) CHECK(e.current_delay(q) <= e.model().queue(q).budget_max_delay);
  }
}

TEST_CASE("worst-case delay grows with the flow set") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Scenario s = random_topology(rng);
    ReservationEngine e(relaxed(s.network));
    std::vector<QueueRef> queues = e.model().all_queues();
    std::vector<Rational> last(queues.size(), 0);
    for (const FlowSpec& f : s.flows) {
      if (!e.subscribe(f).admitted) continue;
      for (size_t i = 0; i < queues.size(); ++i) {
        Rational d = e.worst_case_delay(queues[i]);
        CHECK(d >= last[i]);
        last[i] = d;
      }
    }
  }
}

TEST_CASE("neighbor shaping never loosens the bound") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    Scenario s = random_topology(rng);
    NetworkModel net = relaxed(s.network);
    ReservationEngine link(net, ShapingMode::LinkShaped), neighbor(net, ShapingMode::NeighborShaped);
    for (const FlowSpec& f : s.flows) {
      bool a = link.subscribe(f).admitted;
      bool b = neighbor.subscribe(f).admitted;
      if (a != b) {
        CHECK(b);  // only the link-shaped engine may refuse
        neighbor.remove(f.id);
      }
    }
    REQUIRE(link.flows().size() == neighbor.flows().size());
    for (QueueRef q : net.all_queues()) {
      CHECK(neighbor.worst_case_delay(q) <= link.worst_case_delay(q));
      Curve ln = link.queue_arrival(q), nb = neighbor.queue_arrival(q);
      for (long k = 1; k <= 1000; ++k) {
        Rational t = ratio(k, 1'000'000);
        CHECK(nb.eval(t) <= ln.eval(t));
      }
    }
  }
}

TEST_CASE("line topology admits exactly 91 flows") {
  LineOptions o;
  Scenario s = line_topology(o);
  std::vector<FlowSpec> flows;
  for (int i = 0; i < 92; ++i) flows.push_back(line_flow(o, i % 6 + 1, "f" + std::to_string(i + 1)));
  std::vector<FlowSpec> first(flows.begin(), flows.begin() + 91);
  for (ShapingMode mode : {ShapingMode::LinkShaped, ShapingMode::NeighborShaped}) {
    ReservationEngine e(provision_tight_budgets(s.network, first, ShapingMode::LinkShaped), mode);
    int admitted = 0;
    for (int i = 0; i < 91; ++i) admitted += e.subscribe(flows[static_cast<size_t>(i)]).admitted ? 1 : 0;
    CHECK(admitted == 91);
    Decision last = e.subscribe(flows[91]);
    CHECK_FALSE(last.admitted);
    CHECK(e.flows().size() == 91);
  }
  // 750 Mbit/s of 1024-bit frames every 125 us
  CHECK(floor(Rational(o.capacity * o.idle_fraction * o.cmi / o.frame)) == 91);
}

TEST_CASE("snapshot is deterministic") {
  ReservationEngine a(chain(micros(500))), b(chain(micros(500)));
  for (ReservationEngine* e : {&a, &b}) {
    e->subscribe(flow("y", {"T", "S1", "S2"}));
    e->subscribe(flow("x", {"S1", "S2", "L"}));
  }
  CHECK(a.snapshot() == b.snapshot());
}
