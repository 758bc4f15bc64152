#include <random>

#include "cbs/cbs_model.hpp"
#include "cbs/simulator.hpp"
#include "doctest.h"

using namespace cbs;

namespace {

QueueConfig queue(long idle, long max_frame, long min_frame = 672) {
  QueueConfig q;
  q.idle_slope = idle;
  q.budget_max_delay = micros(500);
  q.max_frame_same = max_frame;
  q.min_frame_same = std::min(min_frame, max_frame);
  return q;
}

PortConfig top_port() {
  PortConfig p;
  p.capacity = 100'000'000;
  p.queues = {queue(75'000'000, 12336)};
  p.priority_map[7] = 0;
  p.best_effort_max_frame = 12336;
  derive_lower_frames(p);
  return p;
}

PortConfig two_class_port() {
  PortConfig p;
  p.capacity = 100'000'000;
  p.queues = {queue(40'000'000, 4000), queue(30'000'000, 8000)};
  p.priority_map[7] = 0;
  p.priority_map[6] = 1;
  p.best_effort_max_frame = 12000;
  derive_lower_frames(p);
  return p;
}

PortConfig random_port(std::mt19937_64& rng) {
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  PortConfig p;
  p.capacity = pick(1, 10) * 100'000'000;
  long classes = pick(1, 3);
  long left = 90;
  for (long c = 0; c < classes && left > 5; ++c) {
    long share = pick(1, std::min(60L, left - 1));
    left -= share;
    p.queues.push_back(queue(0, pick(672, 12336)));
    p.queues.back().idle_slope = p.capacity * ratio(share, 100);
    p.priority_map[static_cast<size_t>(7 - c)] = static_cast<int>(c);
  }
  p.best_effort_max_frame = pick(0, 12336);
  derive_lower_frames(p);
  return p;
}

}  // namespace

TEST_CASE("credit bounds of a single class") {
  PortConfig p = top_port();
  CreditBounds b = credit_bounds(p, 0);
  // 0.75 * 12336
  CHECK(b.c_max == 9252);
  CHECK(b.c_min == -3084);
  p.best_effort_max_frame = 4000;
  derive_lower_frames(p);
  CHECK(credit_bounds(p, 0).c_max == 3000);
}

TEST_CASE("c_min for the documented frame") {
  // L = 12336 bits, idSl = 75 Mbit/s, C = 100 Mbit/s
  Rational c_min = (Rational(75'000'000) - 100'000'000) * 12336 / 100'000'000;
  CHECK(c_min == -3084);
  PortConfig p = top_port();
  p.queues[0].max_frame_same = 12336;
  CHECK(credit_bounds(p, 0).c_min == -3084);
  p.queues[0].max_frame_same = 0;
  p.queues[0].min_frame_same = 0;
  CHECK(credit_bounds(p, 0).c_min == 0);
}

TEST_CASE("credit bounds of a lower class use the higher queues") {
  PortConfig p = two_class_port();
  CHECK(p.queues[0].max_frame_lower == 12000);
  CHECK(p.queues[1].max_frame_lower == 12000);
  CreditBounds hi = credit_bounds(p, 0), lo = credit_bounds(p, 1);
  CHECK(hi.c_max == 4800);
  CHECK(hi.c_min == -2400);
  // 30 Mbit/s * (12000 + 2400) / (100 - 40) Mbit/s
  CHECK(lo.c_max == 7200);
  CHECK(lo.c_min == -5600);
}

TEST_CASE("service curve of the top queue") {
  PortConfig p = top_port();
  Rational T = service_latency(p, 0);
  CHECK(T == ratio(9252, 75'000'000));
  CHECK(format_us(T) == "123.360");
  Curve beta = cbs_service_curve(p, 0);
  CHECK(beta == rate_latency(75'000'000, T));
  CHECK(beta.long_run_rate() == 75'000'000);

  PortConfig z = p;
  z.best_effort_max_frame = 0;
  derive_lower_frames(z);
  CHECK(service_latency(z, 0) == 0);
  CHECK(cbs_service_curve(z, 0) == rate_latency(75'000'000, 0));
}

TEST_CASE("shaping curves") {
  PortConfig p = top_port();
  p.queues[0].max_frame_same = 12336;
  Curve s = cbs_shaping_curve(p, 0);
  CHECK(s == affine(9252 + 3084 + 12336, 75'000'000));
  CHECK(s.eval_right(0) == 24672);
  CHECK(s.long_run_rate() == 75'000'000);

  PortConfig z = p;
  z.best_effort_max_frame = 0;
  z.queues[0].max_frame_same = 0;
  z.queues[0].min_frame_same = 0;
  derive_lower_frames(z);
  CHECK(cbs_shaping_curve(z, 0) == affine(0, 75'000'000));

  Curve l = link_shaping_curve(100'000'000, 12336);
  CHECK(l == affine(12336, 100'000'000));
  CHECK(l.eval(0) == 0);
  CHECK(l.eval_right(0) == 12336);
  CHECK(link_shaping_curve(100'000'000, 0) == affine(0, 100'000'000));
}

TEST_CASE("port validation") {
  PortConfig p = two_class_port();
  p.validate();
  PortConfig over = p;
  over.queues[1].idle_slope = 60'000'000;
  CHECK_THROWS_AS(over.validate(), ConfigError);
  PortConfig bad = p;
  bad.queues[0].idle_slope = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  PortConfig map = p;
  map.priority_map[5] = 4;
  CHECK_THROWS_AS(map.validate(), ConfigError);
}

TEST_CASE("c_min <= 0 <= c_max on random ports") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10'000; ++i) {
    PortConfig p = random_port(rng);
    p.validate();
    for (size_t q = 0; q < p.queues.size(); ++q) {
      CreditBounds b = credit_bounds(p, q);
      CHECK(b.c_min <= 0);
      CHECK(b.c_max >= 0);
    }
  }
}

TEST_CASE("simulated credit and output stay within the model") {
  std::mt19937_64 rng(23);
  auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  for (int trial = 0; trial < 40; ++trial) {
    NetworkModel net;
    net.add_node("src", NodeKind::EndStation);
    net.add_node("dst", NodeKind::EndStation);
    PortConfig port = random_port(rng);
    net.add_link("src", "dst", port);
    SimConfig c;
    c.network = &net;
    for (size_t q = 0; q < port.queues.size(); ++q) {
      // load each class close to its idleSlope
      long flows = pick(1, 4);
      for (long f = 0; f < flows; ++f) {
        FlowSpec s;
        s.id = "q" + std::to_string(q) + "f" + std::to_string(f);
        s.priority = 7 - static_cast<int>(q);
        s.max_frame = pick(672, static_cast<long>(port.queues[q].max_frame_same.get_d()));
        s.min_frame = s.max_frame;
        s.cmi = s.max_frame * flows / port.queues[q].idle_slope * ratio(pick(101, 140), 100);
        s.path = {"src", "dst"};
        c.periodic.push_back({s, s.cmi * ratio(pick(0, 99), 100)});
      }
    }
    if (port.best_effort_max_frame > 0) c.injectors.push_back({"src", "dst", port.best_effort_max_frame});
    c.horizon = ratio(1, 100);
    c.validate_credit = true;
    c.record_transmissions = true;
    SimTrace t = run(c);
    CHECK(t.credit_violations == 0);
    for (size_t q = 0; q < port.queues.size(); ++q) {
      CreditBounds b = credit_bounds(port, q);
      const QueueTrace& qt = t.queue({0, q});
      CHECK(qt.credit_max <= b.c_max);
      CHECK(qt.credit_min >= b.c_min);

      // departures over any window [start_i, end_j] fit the shaping curve
      Curve sigma = cbs_shaping_curve(port, q);
      std::vector<const Transmission*> tx;
      for (const Transmission& x : t.transmissions)
        if (x.queue == static_cast<int>(q)) tx.push_back(&x);
      for (size_t i = 0; i < tx.size() && i < 200; ++i) {
        Rational bits = 0;
        for (size_t j = i; j < tx.size() && j < i + 60; ++j) {
          bits += (tx[j]->end - tx[j]->start) * port.capacity;
          CHECK(bits <= sigma.eval(Rational(tx[j]->end - tx[i]->start)));
        }
      }
    }
  }
}

TEST_CASE("backlogged queue receives at least its service curve") {
  NetworkModel net;
  net.add_node("src", NodeKind::EndStation);
  net.add_node("dst", NodeKind::EndStation);
  PortConfig port = top_port();
  port.queues[0].max_frame_same = 4000;
  net.add_link("src", "dst", port);
  SimConfig c;
  c.network = &net;
  c.one_shots.push_back({{"src", "dst"}, 12336, 0, -1});
  for (int k = 0; k < 200; ++k) c.one_shots.push_back({{"src", "dst"}, 4000, nanos(1), 7});
  c.horizon = ratio(1, 50);
  c.record_transmissions = true;
  SimTrace t = run(c);
  Curve beta = cbs_service_curve(port, 0);
  Rational done = 0;
  for (const Transmission& x : t.transmissions) {
    if (x.queue != 0) continue;
    done += 4000;
    CHECK(done >= beta.eval(Rational(x.end - nanos(1))));
  }
  CHECK(done == 200 * 4000);
}
