#include "cbs/simulator.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace cbs {

void SimConfig::validate() const {
  if (!network) throw ParameterError("simulation needs a network");
  if (horizon <= 0) throw ParameterError("horizon must be positive");
  for (const auto& s : periodic) {
    network->validate_flow(s.flow);
    if (s.phase < 0) throw ParameterError("flow '" + s.flow.id + "': negative phase");
  }
  for (const auto& i : injectors) {
    network->link_index(i.from, i.to);
    if (i.frame <= 0 || i.lead < 0) throw ParameterError("injector on " + i.from + "->" + i.to + ": bad parameters");
  }
  for (const auto& m : memoryless) {
    if (m.path.size() < 2) throw ParameterError("source '" + m.id + "': path too short");
    for (size_t k = 0; k + 1 < m.path.size(); ++k) network->link_index(m.path[k], m.path[k + 1]);
    if (m.frame <= 0 || m.mean_interval <= 0) throw ParameterError("source '" + m.id + "': bad parameters");
  }
  for (const auto& o : one_shots) {
    if (o.path.size() < 2) throw ParameterError("one-shot frame: path too short");
    for (size_t k = 0; k + 1 < o.path.size(); ++k) network->link_index(o.path[k], o.path[k + 1]);
    if (o.frame <= 0 || o.time < 0) throw ParameterError("one-shot frame: bad parameters");
  }
  for (const auto& b : burst_filters) {
    network->link_index(b.from, b.to);
    bool known = false;
    for (const auto& s : periodic) known = known || s.flow.id == b.flow;
    if (!known) throw ParameterError("burst filter names unknown flow '" + b.flow + "'");
  }
  for (const auto& p : probes) {
    if (p.queue.link >= network->links().size() ||
        p.queue.queue >= network->link(p.queue.link).port.queues.size())
      throw ParameterError("credit probe references a missing queue");
  }
}

const QueueTrace& SimTrace::queue(QueueRef q) const {
  for (const auto& t : queues)
    if (t.queue == q) return t;
  throw ParameterError("queue not traced");
}

std::string SimTrace::queue_csv(const NetworkModel& net) const {
  std::ostringstream out;
  for (const auto& t : queues) {
    const Link& l = net.link(t.queue.link);
    out << l.from << ',' << l.to << ',' << t.priority << ',' << format_ns(t.max_delay) << ','
        << to_decimal(t.credit_min, 3) << ',' << to_decimal(t.credit_max, 3) << '\n';
  }
  return out.str();
}

std::string SimTrace::flow_csv() const {
  std::ostringstream out;
  for (const auto& f : flows) out << f.id << ',' << format_ns(f.max_e2e) << '\n';
  return out.str();
}

std::vector<PeriodicSource> aligned_sources(const std::vector<FlowSpec>& flows) {
  std::vector<PeriodicSource> out;
  for (const auto& f : flows) out.push_back({f, 0});
  return out;
}

namespace {

constexpr int kIdle = -2;
constexpr int kBe = -1;

struct Frame {
  std::uint64_t id = 0;
  int flow = -1;
  int priority = -1;
  Rational bits;
  Rational release;
  Rational enqueued;
  size_t route = 0;
  size_t hop = 0;
  bool drop = false;
};

struct QueueRt {
  std::deque<Frame> frames;
  Rational idle_slope, send_slope;
  Rational credit = 0;
  CreditBounds bounds;
  QueueTrace trace;
};

struct PortRt {
  Rational capacity;
  std::vector<QueueRt> cbs;
  std::deque<Frame> be;
  Rational last = 0;
  int tx = kIdle;
  Frame in_flight;
  std::optional<Rational> wakeup;
  int injector = -1;
};

enum Cls { kComplete = 0, kRelease = 1, kInject = 2, kWakeup = 3, kProbe = 4 };
enum Type { kTComplete, kTPeriodic, kTMemoryless, kTOneShot, kTInject, kTWakeup, kTProbe };

struct Event {
  Rational time;
  int cls;
  std::uint64_t seq;
  Type type;
  size_t a;
  std::uint64_t b;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    if (x.time != y.time) return x.time > y.time;
    if (x.cls != y.cls) return x.cls > y.cls;
    return x.seq > y.seq;
  }
};

class Sim {
 public:
  explicit Sim(const SimConfig& c) : cfg_(c), net_(*c.network), rng_(c.seed) {}
  SimTrace run();

 private:
  void push(Rational t, int cls, Type type, size_t a, std::uint64_t b = 0) {
    events_.push(Event{std::move(t), cls, seq_++, type, a, b});
  }
  size_t route_of(const std::vector<std::string>& path) {
    std::vector<size_t> r;
    for (size_t k = 0; k + 1 < path.size(); ++k) r.push_back(net_.link_index(path[k], path[k + 1]));
    routes_.push_back(std::move(r));
    return routes_.size() - 1;
  }
  int queue_at(size_t link, int priority) const {
    if (priority < 0) return kBe;
    return net_.link(link).port.priority_map[static_cast<size_t>(priority)];
  }
  void log(const Rational& t, const char* what, size_t link, const Frame& f) {
    if (cfg_.event_log_limit == 0) return;
    const Link& l = net_.link(link);
    std::ostringstream s;
    s << format_ns(t) << ',' << what << ',' << l.from << ',' << l.to << ',';
    if (f.priority < 0)
      s << "be";
    else
      s << f.priority;
    s << ',' << f.id;
    trace_.log.push_back(s.str());
    if (trace_.log.size() > cfg_.event_log_limit) trace_.log.erase(trace_.log.begin());
  }

  void advance(PortRt& p, const Rational& t);
  void enqueue(size_t link, Frame f, const Rational& t);
  void dispatch(size_t link, const Rational& t);
  void start(size_t link, int q, const Rational& t);
  void complete(size_t link, const Rational& t);
  void schedule_periodic(size_t src, std::uint64_t k);
  void schedule_memoryless(size_t src, const Rational& after);
  void maybe_inject_before(size_t link, int priority, const Rational& arrival, const Rational& now);

  const SimConfig& cfg_;
  const NetworkModel& net_;
  std::mt19937_64 rng_;
  std::vector<PortRt> ports_;
  std::vector<std::vector<size_t>> routes_;
  std::vector<size_t> periodic_route_, memoryless_route_, oneshot_route_;
  std::vector<size_t> injector_route_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_frame_ = 1;
  std::set<size_t> dirty_;
  std::map<std::pair<size_t, int>, bool> filters_;  // (link, flow) -> inside a run
  SimTrace trace_;
};

void Sim::advance(PortRt& p, const Rational& t) {
  Rational dt = t - p.last;
  for (size_t i = 0; i < p.cbs.size(); ++i) {
    QueueRt& q = p.cbs[i];
    if (p.tx == static_cast<int>(i)) {
      if (dt != 0) q.credit += q.send_slope * dt;
    } else if (!q.frames.empty()) {
      if (dt != 0) q.credit += q.idle_slope * dt;
    } else if (q.credit < 0) {
      if (dt != 0) {
        q.credit += q.idle_slope * dt;
        if (q.credit > 0) q.credit = 0;
      }
    } else if (q.credit > 0) {
      q.credit = 0;
    }
    if (q.credit < q.trace.credit_min) q.trace.credit_min = q.credit;
    if (q.credit > q.trace.credit_max) q.trace.credit_max = q.credit;
    if (cfg_.validate_credit && (q.credit < q.bounds.c_min || q.credit > q.bounds.c_max)) ++trace_.credit_violations;
  }
  p.last = t;
}

void Sim::maybe_inject_before(size_t link, int priority, const Rational& arrival, const Rational& now) {
  const PortRt& p = ports_[link];
  if (p.injector < 0 || queue_at(link, priority) == kBe) return;
  Rational at = arrival - cfg_.injectors[static_cast<size_t>(p.injector)].lead;
  if (at < now) return;
  push(at, kInject, kTInject, link);
}

void Sim::enqueue(size_t link, Frame f, const Rational& t) {
  PortRt& p = ports_[link];
  int q = queue_at(link, f.priority);
  f.enqueued = t;
  log(t, "enqueue", link, f);
  if (q == kBe) {
    p.be.push_back(std::move(f));
  } else {
    advance(p, t);
    p.cbs[static_cast<size_t>(q)].frames.push_back(std::move(f));
  }
  dirty_.insert(link);
}

void Sim::start(size_t link, int q, const Rational& t) {
  PortRt& p = ports_[link];
  Frame f;
  if (q == kBe) {
    f = std::move(p.be.front());
    p.be.pop_front();
  } else {
    QueueRt& rt = p.cbs[static_cast<size_t>(q)];
    f = std::move(rt.frames.front());
    rt.frames.pop_front();
    auto filter = filters_.find({link, f.flow});
    if (filter != filters_.end()) {
      bool more = false;
      for (const Frame& g : rt.frames) more = more || g.flow == f.flow;
      f.drop = !more && !filter->second;
      filter->second = more;
    }
    Rational wait = t - f.enqueued;
    if (wait > rt.trace.max_delay) rt.trace.max_delay = wait;
    ++rt.trace.frames;
    rt.trace.bits += f.bits;
  }
  Rational end = t + f.bits / p.capacity;
  log(t, "tx_start", link, f);
  if (cfg_.record_transmissions) trace_.transmissions.push_back({link, q, f.id, f.flow, t, end});
  const auto& r = routes_[f.route];
  if (f.hop + 1 < r.size() && !f.drop) maybe_inject_before(r[f.hop + 1], f.priority, end, t);
  p.tx = q;
  p.in_flight = std::move(f);
  push(end, kComplete, kTComplete, link);
}

void Sim::dispatch(size_t link, const Rational& t) {
  PortRt& p = ports_[link];
  if (p.tx != kIdle) return;
  advance(p, t);
  for (size_t i = 0; i < p.cbs.size(); ++i) {
    if (!p.cbs[i].frames.empty() && p.cbs[i].credit >= 0) {
      start(link, static_cast<int>(i), t);
      return;
    }
  }
  if (!p.be.empty()) {
    start(link, kBe, t);
    return;
  }
  std::optional<Rational> wake;
  for (const QueueRt& q : p.cbs) {
    if (q.frames.empty()) continue;
    Rational w = t - q.credit / q.idle_slope;
    if (!wake || w < *wake) wake = w;
  }
  if (wake && (!p.wakeup || *wake < *p.wakeup)) {
    p.wakeup = wake;
    push(*wake, kWakeup, kTWakeup, link);
  }
}

void Sim::complete(size_t link, const Rational& t) {
  PortRt& p = ports_[link];
  advance(p, t);
  Frame f = std::move(p.in_flight);
  p.tx = kIdle;
  log(t, "tx_end", link, f);
  dirty_.insert(link);
  const auto& r = routes_[f.route];
  if (f.drop) return;
  if (f.hop + 1 < r.size()) {
    ++f.hop;
    enqueue(r[f.hop], std::move(f), t);
  } else if (f.flow >= 0) {
    FlowTrace& ft = trace_.flows[static_cast<size_t>(f.flow)];
    Rational e2e = t - f.release;
    if (e2e > ft.max_e2e) ft.max_e2e = e2e;
    ++ft.received;
  }
}

void Sim::schedule_periodic(size_t src, std::uint64_t k) {
  const PeriodicSource& s = cfg_.periodic[src];
  Rational t = s.phase + s.flow.cmi * Rational(static_cast<unsigned long>(k));
  if (t >= cfg_.horizon) return;
  push(t, kRelease, kTPeriodic, src, k);
  maybe_inject_before(routes_[periodic_route_[src]][0], s.flow.priority, t, 0);
}

void Sim::schedule_memoryless(size_t src, const Rational& after) {
  const MemorylessSource& s = cfg_.memoryless[src];
  std::exponential_distribution<double> dist(1.0);
  double ns = dist(rng_) * to_double(s.mean_interval) * 1e9;
  Rational t = after + nanos(static_cast<long long>(std::llround(ns)));
  if (t >= cfg_.horizon) return;
  push(t, kRelease, kTMemoryless, src);
}

SimTrace Sim::run() {
  cfg_.validate();
  ports_.resize(net_.links().size());
  for (size_t l = 0; l < ports_.size(); ++l) {
    const PortConfig& pc = net_.link(l).port;
    PortRt& p = ports_[l];
    p.capacity = pc.capacity;
    p.cbs.resize(pc.queues.size());
    for (size_t i = 0; i < pc.queues.size(); ++i) {
      QueueRt& q = p.cbs[i];
      q.idle_slope = pc.queues[i].idle_slope;
      q.send_slope = q.idle_slope - pc.capacity;
      q.bounds = credit_bounds(pc, i);
      q.trace.queue = {l, i};
      q.trace.priority = -1;
      for (int pr = kPriorities - 1; pr >= 0 && q.trace.priority < 0; --pr)
        if (pc.priority_map[static_cast<size_t>(pr)] == static_cast<int>(i)) q.trace.priority = pr;
    }
  }
  for (size_t i = 0; i < cfg_.injectors.size(); ++i) {
    const auto& inj = cfg_.injectors[i];
    size_t l = net_.link_index(inj.from, inj.to);
    ports_[l].injector = static_cast<int>(i);
    injector_route_.push_back(route_of({inj.from, inj.to}));
  }
  for (const auto& s : cfg_.periodic) {
    periodic_route_.push_back(route_of(s.flow.path));
    trace_.flows.push_back({s.flow.id, 0, 0});
  }
  for (const auto& b : cfg_.burst_filters)
    for (size_t i = 0; i < cfg_.periodic.size(); ++i)
      if (cfg_.periodic[i].flow.id == b.flow) filters_[{net_.link_index(b.from, b.to), static_cast<int>(i)}] = false;
  for (const auto& m : cfg_.memoryless) memoryless_route_.push_back(route_of(m.path));
  for (const auto& o : cfg_.one_shots) oneshot_route_.push_back(route_of(o.path));

  for (size_t i = 0; i < cfg_.periodic.size(); ++i) schedule_periodic(i, 0);
  for (size_t i = 0; i < cfg_.memoryless.size(); ++i) schedule_memoryless(i, cfg_.memoryless[i].start);
  for (size_t i = 0; i < cfg_.one_shots.size(); ++i)
    if (cfg_.one_shots[i].time < cfg_.horizon) push(cfg_.one_shots[i].time, kRelease, kTOneShot, i);
  for (size_t i = 0; i < cfg_.probes.size(); ++i) push(cfg_.probes[i].time, kProbe, kTProbe, i);
  trace_.probe_values.resize(cfg_.probes.size());

  std::vector<size_t> probes_now;
  while (!events_.empty() && events_.top().time <= cfg_.horizon) {
    const Rational now = events_.top().time;
    while (!events_.empty() && events_.top().time == now) {
      Event e = events_.top();
      events_.pop();
      ++trace_.events;
      switch (e.type) {
        case kTComplete:
          complete(e.a, now);
          break;
        case kTPeriodic: {
          const PeriodicSource& s = cfg_.periodic[e.a];
          for (long k = 0; k < s.flow.mif; ++k) {
            Frame f;
            f.id = next_frame_++;
            f.flow = static_cast<int>(e.a);
            f.priority = s.flow.priority;
            f.bits = s.flow.max_frame;
            f.release = now;
            f.route = periodic_route_[e.a];
            enqueue(routes_[f.route][0], std::move(f), now);
          }
          schedule_periodic(e.a, e.b + 1);
          break;
        }
        case kTMemoryless: {
          const MemorylessSource& s = cfg_.memoryless[e.a];
          Frame f;
          f.id = next_frame_++;
          f.bits = s.frame;
          f.release = now;
          f.route = memoryless_route_[e.a];
          enqueue(routes_[f.route][0], std::move(f), now);
          schedule_memoryless(e.a, now);
          break;
        }
        case kTOneShot: {
          const auto& o = cfg_.one_shots[e.a];
          Frame f;
          f.id = next_frame_++;
          f.priority = o.priority;
          f.bits = o.frame;
          f.release = now;
          f.route = oneshot_route_[e.a];
          enqueue(routes_[f.route][0], std::move(f), now);
          break;
        }
        case kTInject: {
          PortRt& p = ports_[e.a];
          if (!p.be.empty()) break;
          Frame f;
          f.id = next_frame_++;
          f.bits = cfg_.injectors[static_cast<size_t>(p.injector)].frame;
          f.release = now;
          f.route = injector_route_[static_cast<size_t>(p.injector)];
          log(now, "inject", e.a, f);
          enqueue(e.a, std::move(f), now);
          break;
        }
        case kTWakeup: {
          PortRt& p = ports_[e.a];
          if (p.wakeup && *p.wakeup <= now) p.wakeup.reset();
          dirty_.insert(e.a);
          break;
        }
        case kTProbe:
          probes_now.push_back(e.a);
          break;
      }
    }
    std::set<size_t> dirty;
    dirty.swap(dirty_);
    for (size_t l : dirty) dispatch(l, now);
    for (size_t i : probes_now) {
      const CreditProbe& pr = cfg_.probes[i];
      PortRt& p = ports_[pr.queue.link];
      advance(p, now);
      trace_.probe_values[i] = p.cbs[pr.queue.queue].credit;
    }
    probes_now.clear();
  }
  for (const PortRt& p : ports_)
    for (const QueueRt& q : p.cbs) trace_.queues.push_back(q.trace);
  return std::move(trace_);
}

}  // namespace

SimTrace run(const SimConfig& config) {
  Sim sim(config);
  return sim.run();
}

}  // namespace cbs
