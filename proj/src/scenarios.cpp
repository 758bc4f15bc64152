#include "cbs/scenarios.hpp"

#include <algorithm>
#include <deque>

namespace cbs {

SimConfig Scenario::sim_config(const Rational& horizon, std::uint64_t seed) const {
  SimConfig c;
  c.network = &network;
  for (size_t i = 0; i < flows.size(); ++i) c.periodic.push_back({flows[i], phases.empty() ? Rational(0) : phases[i]});
  c.injectors = injectors;
  c.memoryless = memoryless;
  c.burst_filters = burst_filters;
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

namespace {

const Rational kBudget = ratio(1, 100);  // placeholder budget, generous

void connect(NetworkModel& net, const std::string& a, const std::string& b, const PortConfig& port) {
  net.add_link(a, b, port);
}

}  // namespace

long fanin_frame_bytes(int talkers, const FaninOptions& o) {
  if (talkers < 1) throw ParameterError("at least one talker is required");
  Rational bits = o.capacity * o.idle_fraction * o.cmi / talkers;
  long bytes = floor(Rational(bits / 8)).get_si();
  if (bytes < o.min_frame_bytes)
    throw ParameterError(std::to_string(talkers) + " talkers need " + std::to_string(bytes) +
                         "-byte frames, below the " + std::to_string(o.min_frame_bytes) + "-byte minimum");
  return bytes;
}

int fanin_max_talkers(const FaninOptions& o) {
  int n = 1;
  while (true) {
    try {
      fanin_frame_bytes(n + 1, o);
    } catch (const ParameterError&) {
      return n;
    }
    ++n;
  }
}

Scenario fanin_counterexample(int talkers, const FaninOptions& o) {
  Rational frame(fanin_frame_bytes(talkers, o) * 8);
  Scenario s;
  NetworkModel& net = s.network;
  PortConfig port = single_class_port(o.capacity, o.capacity * o.idle_fraction, kBudget, frame, o.best_effort_frame);
  net.add_node("last", NodeKind::Bridge);
  net.add_node("listener", NodeKind::EndStation);
  for (int t = 1; t <= talkers; ++t) {
    std::string talker = "T" + std::to_string(t);
    net.add_node(talker, NodeKind::EndStation);
    FlowSpec f;
    f.id = "f" + std::to_string(t);
    f.cmi = o.cmi;
    f.max_frame = frame;
    f.min_frame = frame;
    f.path.push_back(talker);
    for (int k = 1; k <= o.stages; ++k) {
      std::string b = "A" + std::to_string(t) + "." + std::to_string(k);
      net.add_node(b, NodeKind::Bridge);
      connect(net, f.path.back(), b, port);
      if (k > 1) s.injectors.push_back({f.path.back(), b, o.best_effort_frame});
      f.path.push_back(b);
    }
    connect(net, f.path.back(), "last", port);
    s.injectors.push_back({f.path.back(), "last", o.best_effort_frame});
    f.path.push_back("last");
    f.path.push_back("listener");
    s.flows.push_back(f);
  }
  connect(net, "last", "listener", port);
  s.injectors.push_back({"last", "listener", o.best_effort_frame});
  s.marks["last"] = {net.link_index("last", "listener"), 0};
  return s;
}

namespace {

struct CascadeBuild {
  std::vector<std::string> foi;                    // ends at this level's S2
  std::vector<std::vector<std::string>> pending;   // end at S2, need the next node
};

class CascadeBuilder {
 public:
  CascadeBuilder(const CascadeTopologyOptions& o, Scenario& s)
      : o_(o),
        s_(s),
        frame_(o.capacity * o.source_fraction * o.cmi),
        port_(single_class_port(o.capacity, o.capacity * o.idle_fraction, kBudget, frame_, o.best_effort_frame)) {}

  CascadeBuild build(int level, const std::string& p) {
    NetworkModel& net = s_.network;
    std::string s1 = p + "S1", s2 = p + "S2", src = p + "src";
    net.add_node(src, NodeKind::EndStation);
    net.add_node(s1, NodeKind::Bridge);
    net.add_node(s2, NodeKind::Bridge);
    net.add_link(src, s1, port_);
    net.add_link(s1, s2, port_);
    s_.injectors.push_back({s1, s2, o_.best_effort_frame});
    CascadeBuild out;
    out.foi = {src, s1, s2};
    if (!o_.cross_traffic) return out;

    std::string x1out = p + "x1out";
    net.add_node(x1out, NodeKind::EndStation);
    net.add_link(s2, x1out, port_);
    std::vector<std::string> x1, x2;
    if (level == 0) {
      x1 = {p + "x1"};
      x2 = {p + "x2"};
      net.add_node(x1[0], NodeKind::EndStation);
      net.add_node(x2[0], NodeKind::EndStation);
    } else {
      CascadeBuild a = build(level - 1, p + "a.");
      CascadeBuild b = build(level - 1, p + "b.");
      for (auto path : a.pending) add_flow(path, s1);
      for (auto path : b.pending) add_flow(path, s2);
      x1 = a.foi;
      x2 = b.foi;
    }
    net.add_link(x1.back(), s1, port_);
    net.add_link(x2.back(), s2, port_);
    if (level > 0) {
      s_.injectors.push_back({x1.back(), s1, o_.best_effort_frame});
      s_.injectors.push_back({x2.back(), s2, o_.best_effort_frame});
    }
    x1.push_back(s1);
    x1.push_back(s2);
    add_flow(x1, x1out);
    x2.push_back(s2);
    out.pending.push_back(x2);
    return out;
  }

  void add_flow(std::vector<std::string> path, const std::string& last) {
    path.push_back(last);
    FlowSpec f;
    f.id = "x" + std::to_string(s_.flows.size());
    f.cmi = o_.cmi;
    f.max_frame = frame_;
    f.min_frame = frame_;
    f.path = std::move(path);
    s_.flows.push_back(std::move(f));
  }

  const PortConfig& port() const { return port_; }
  const Rational& frame() const { return frame_; }

 private:
  const CascadeTopologyOptions& o_;
  Scenario& s_;
  Rational frame_;
  PortConfig port_;
};

}  // namespace

Scenario cascade_topology(int levels, const CascadeTopologyOptions& o) {
  if (levels < 0) throw ParameterError("levels must be non-negative");
  Scenario s;
  CascadeBuilder b(o, s);
  CascadeBuild top = b.build(levels, "");
  s.network.add_node("dst", NodeKind::EndStation);
  s.network.add_link("S2", "dst", b.port());
  s.injectors.push_back({"S2", "dst", o.best_effort_frame});
  for (auto path : top.pending) b.add_flow(path, "dst");
  FlowSpec foi;
  foi.id = "foi";
  foi.cmi = o.cmi;
  foi.max_frame = b.frame();
  foi.min_frame = b.frame();
  foi.path = top.foi;
  foi.path.push_back("dst");
  s.flows.insert(s.flows.begin(), foi);
  if (o.bursts_only)
    for (const FlowSpec& f : s.flows) {
      const std::string& head = f.path.front();
      if (head.size() > 3 && head.compare(head.size() - 3, 3, "src") == 0)
        s.burst_filters.push_back({f.id, f.path[2], f.path[3]});
    }
  s.marks["s1"] = {s.network.link_index("S1", "S2"), 0};
  s.marks["s2"] = {s.network.link_index("S2", "dst"), 0};
  return s;
}

Scenario profinet(int lines, const ProfinetOptions& o) {
  if (lines < 1) throw ParameterError("at least one line is required");
  Scenario s;
  NetworkModel& net = s.network;
  PortConfig port = single_class_port(o.capacity, o.capacity * o.idle_fraction, kBudget, o.frame, o.best_effort_frame);
  auto io = [](int l, int k) { return "IO" + std::to_string(l) + "." + std::to_string(k); };
  net.add_node("central", NodeKind::Bridge);
  net.add_node("PLC", NodeKind::EndStation);
  connect(net, "central", "PLC", port);
  for (int l = 1; l <= lines; ++l) {
    for (int k = 1; k <= 3; ++k) net.add_node(io(l, k), NodeKind::Bridge);
    for (int k = 1; k <= 3; ++k) {
      std::string next = k < 3 ? io(l, k + 1) : "central";
      connect(net, io(l, k), next, port);
      connect(net, next, io(l, k), port);
    }
    for (int k = 1; k <= 3; ++k) {
      FlowSpec f;
      f.id = "io" + std::to_string(l) + "." + std::to_string(k);
      f.cmi = o.period;
      f.max_frame = o.frame;
      f.min_frame = o.frame;
      for (int j = k; j <= 3; ++j) f.path.push_back(io(l, j));
      f.path.push_back("central");
      f.path.push_back("PLC");
      s.flows.push_back(f);
    }
  }
  if (o.phase_jitter < 0 || o.phase_jitter > o.period) throw ParameterError("phase jitter must lie in [0, period]");
  if (o.phase_jitter > 0) {
    std::mt19937_64 rng(o.phase_seed);
    long steps = floor(Rational(o.phase_jitter / nanos(1))).get_si();
    std::uniform_int_distribution<long> d(0, steps - 1);
    for (size_t i = 0; i < s.flows.size(); ++i) s.phases.push_back(nanos(d(rng)));
  }
  if (o.nrt) {
    net.add_node("camera", NodeKind::EndStation);
    net.add_node("monitor", NodeKind::EndStation);
    connect(net, "camera", io(1, 1), port);
    connect(net, io(lines, 1), "monitor", port);
    MemorylessSource m;
    m.id = "nrt";
    m.path.push_back("camera");
    for (int k = 1; k <= 3; ++k) m.path.push_back(io(1, k));
    m.path.push_back("central");
    for (int k = 3; k >= 1; --k) m.path.push_back(io(lines, k));
    m.path.push_back("monitor");
    m.frame = o.best_effort_frame;
    m.mean_interval = o.nrt_mean;
    s.memoryless.push_back(m);
  }
  s.marks["io1"] = {net.link_index(io(1, 1), io(1, 2)), 0};
  s.marks["io2"] = {net.link_index(io(1, 2), io(1, 3)), 0};
  s.marks["io3"] = {net.link_index(io(1, 3), "central"), 0};
  s.marks["central"] = {net.link_index("central", "PLC"), 0};
  return s;
}

Scenario line_topology(const LineOptions& o) {
  if (o.switches < 1) throw ParameterError("at least one switch is required");
  Scenario s;
  NetworkModel& net = s.network;
  PortConfig port = single_class_port(o.capacity, o.capacity * o.idle_fraction, o.budget, o.frame, o.best_effort_frame);
  for (int k = 1; k <= o.switches; ++k) {
    net.add_node("S" + std::to_string(k), NodeKind::Bridge);
    net.add_node("T" + std::to_string(k), NodeKind::EndStation);
  }
  net.add_node("listener", NodeKind::EndStation);
  for (int k = 1; k <= o.switches; ++k) {
    std::string sw = "S" + std::to_string(k);
    connect(net, "T" + std::to_string(k), sw, port);
    connect(net, sw, k < o.switches ? "S" + std::to_string(k + 1) : "listener", port);
  }
  return s;
}

FlowSpec line_flow(const LineOptions& o, int talker, const std::string& id) {
  if (talker < 1 || talker > o.switches) throw ParameterError("talker index out of range");
  FlowSpec f;
  f.id = id;
  f.cmi = o.cmi;
  f.max_frame = o.frame;
  f.min_frame = o.frame;
  f.path.push_back("T" + std::to_string(talker));
  for (int k = talker; k <= o.switches; ++k) f.path.push_back("S" + std::to_string(k));
  f.path.push_back("listener");
  return f;
}

Scenario random_topology(std::mt19937_64& rng, const RandomTopologyOptions& o) {
  auto uniform = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  Scenario s;
  NetworkModel& net = s.network;
  int switches = static_cast<int>(uniform(1, o.max_switches));
  Rational class_frame(uniform(84, 500) * 8);
  int classes = static_cast<int>(uniform(1, 2));

  auto random_port = [&]() {
    PortConfig p;
    p.capacity = o.capacity;
    p.best_effort_max_frame = Rational(uniform(84, 1542) * 8);
    long share7 = uniform(10, 60);
    long share6 = classes == 2 ? uniform(5, std::min<long>(30, 90 - share7)) : 0;
    for (int c = 0; c < classes; ++c) {
      QueueConfig q;
      q.idle_slope = o.capacity * ratio(c == 0 ? share7 : share6, 100);
      q.budget_max_delay = micros(uniform(50, 2000));
      q.max_frame_same = class_frame;
      q.min_frame_same = Rational(84 * 8);
      p.queues.push_back(q);
      p.priority_map[static_cast<size_t>(7 - c)] = c;
    }
    derive_lower_frames(p);
    return p;
  };

  std::vector<std::vector<int>> adj(static_cast<size_t>(switches));
  std::vector<std::string> ends;
  std::vector<int> end_switch;
  for (int i = 0; i < switches; ++i) net.add_node("S" + std::to_string(i), NodeKind::Bridge);
  for (int i = 1; i < switches; ++i) {
    int j = static_cast<int>(uniform(0, i - 1));
    adj[static_cast<size_t>(i)].push_back(j);
    adj[static_cast<size_t>(j)].push_back(i);
    net.add_link("S" + std::to_string(i), "S" + std::to_string(j), random_port());
    net.add_link("S" + std::to_string(j), "S" + std::to_string(i), random_port());
  }
  for (int i = 0; i < switches; ++i) {
    long n = uniform(1, 2);
    for (long k = 0; k < n; ++k) {
      std::string e = "E" + std::to_string(ends.size());
      net.add_node(e, NodeKind::EndStation);
      net.add_link(e, "S" + std::to_string(i), random_port());
      net.add_link("S" + std::to_string(i), e, random_port());
      ends.push_back(e);
      end_switch.push_back(i);
    }
  }
  if (ends.size() < 2) {
    std::string e = "E" + std::to_string(ends.size());
    net.add_node(e, NodeKind::EndStation);
    net.add_link(e, "S0", random_port());
    net.add_link("S0", e, random_port());
    ends.push_back(e);
    end_switch.push_back(0);
  }

  auto switch_path = [&](int from, int to) {
    std::vector<int> prev(static_cast<size_t>(switches), -1);
    std::deque<int> q{from};
    prev[static_cast<size_t>(from)] = from;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : adj[static_cast<size_t>(u)])
        if (prev[static_cast<size_t>(v)] < 0) {
          prev[static_cast<size_t>(v)] = u;
          q.push_back(v);
        }
    }
    std::vector<int> path{to};
    while (path.back() != from) path.push_back(prev[static_cast<size_t>(path.back())]);
    std::reverse(path.begin(), path.end());
    return path;
  };

  const Rational cmis[] = {micros(125), micros(250), micros(500), ratio(1, 1000)};
  long flows = uniform(1, o.max_flows);
  for (long i = 0; i < flows; ++i) {
    size_t a = static_cast<size_t>(uniform(0, static_cast<long>(ends.size()) - 1));
    size_t b = static_cast<size_t>(uniform(0, static_cast<long>(ends.size()) - 2));
    if (b >= a) ++b;
    FlowSpec f;
    f.id = "f" + std::to_string(i);
    f.priority = 7 - static_cast<int>(uniform(0, classes - 1));
    f.cmi = cmis[uniform(0, 3)];
    f.mif = uniform(1, 2);
    f.max_frame = Rational(uniform(84, floor(Rational(class_frame / 8)).get_si()) * 8);
    f.min_frame = min(Rational(84 * 8), f.max_frame);
    f.path.push_back(ends[a]);
    for (int sw : switch_path(end_switch[a], end_switch[b])) f.path.push_back("S" + std::to_string(sw));
    f.path.push_back(ends[b]);
    s.flows.push_back(f);
    s.phases.push_back(nanos(uniform(0, floor(Rational(f.cmi / nanos(1))).get_si() - 1)));
  }
  for (const Link& l : net.links()) s.injectors.push_back({l.from, l.to, l.port.best_effort_max_frame});
  return s;
}

}  // namespace cbs
