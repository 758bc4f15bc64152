#include "cbs/reservation.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace cbs {

std::string to_string(ShapingMode mode) {
  return mode == ShapingMode::LinkShaped ? "link_shaped" : "neighbor_shaped";
}

ShapingMode parse_mode(const std::string& text) {
  if (text == "link_shaped") return ShapingMode::LinkShaped;
  if (text == "neighbor_shaped") return ShapingMode::NeighborShaped;
  throw ParameterError("unknown mode '" + text + "' (expected link_shaped or neighbor_shaped)");
}

UnstableQueueError::UnstableQueueError(const std::string& q, const Rational& arrival, const Rational& service)
    : Error("queue " + q + " is unstable: arrival rate " + to_decimal(arrival, 3) + " bit/s >= idleSlope " +
            to_decimal(service, 3) + " bit/s"),
      queue(q) {}

namespace {

bool term_less(const ArrivalTerm& a, const ArrivalTerm& b) {
  if (a.input_link != b.input_link) return a.input_link < b.input_link;
  if (a.upstream_queue != b.upstream_queue) return a.upstream_queue < b.upstream_queue;
  if (a.burst != b.burst) return a.burst < b.burst;
  if (a.period != b.period) return a.period < b.period;
  return a.jitter < b.jitter;
}

bool term_same(const ArrivalTerm& a, const ArrivalTerm& b) {
  return a.input_link == b.input_link && a.upstream_queue == b.upstream_queue && a.burst == b.burst &&
         a.period == b.period && a.jitter == b.jitter;
}

// Sorts and merges identical terms.
void canonicalize(std::vector<ArrivalTerm>& terms) {
  std::sort(terms.begin(), terms.end(), term_less);
  std::vector<ArrivalTerm> out;
  for (auto& t : terms) {
    if (!out.empty() && term_same(out.back(), t))
      out.back().count += t.count;
    else
      out.push_back(std::move(t));
  }
  terms = std::move(out);
}

}  // namespace

Curve DelayCalculator::arrival(QueueRef q, std::vector<ArrivalTerm> terms, long exact_periods) const {
  canonicalize(terms);
  const Rational& frame = model_.queue(q).max_frame_same;
  Curve total;
  size_t i = 0;
  while (i < terms.size()) {
    const std::optional<size_t> input = terms[i].input_link;
    bool shaped_upstream = false;
    if (input && mode_ == ShapingMode::NeighborShaped)
      shaped_upstream = model_.node(model_.link(*input).from).kind == NodeKind::Bridge;
    Curve link_sum;
    while (i < terms.size() && terms[i].input_link == input) {
      size_t upstream = terms[i].upstream_queue;
      Curve group;
      while (i < terms.size() && terms[i].input_link == input && terms[i].upstream_queue == upstream) {
        const ArrivalTerm& t = terms[i];
        Curve s = shifted_staircase(t.burst, t.period, t.jitter, exact_periods);
        group = sum(group, scale(s, Rational(t.count)));
        ++i;
      }
      if (shaped_upstream) {
        const PortConfig& port = model_.link(*input).port;
        if (upstream >= port.queues.size())
          throw ConfigError("no shaper information for upstream queue on " + model_.link(*input).from + "->" +
                            model_.link(*input).to);
        group = minimum(group, cbs_shaping_curve(port, upstream));
      }
      link_sum = sum(link_sum, group);
    }
    if (input) link_sum = minimum(link_sum, link_shaping_curve(model_.link(*input).capacity(), frame));
    total = sum(total, link_sum);
  }
  return total;
}

Rational DelayCalculator::delay(QueueRef q, std::vector<ArrivalTerm> terms) {
  if (terms.empty()) return 0;
  canonicalize(terms);
  std::ostringstream key;
  key << q.link << '.' << q.queue;
  for (const auto& t : terms)
    key << '|' << (t.input_link ? static_cast<long>(*t.input_link) : -1L) << ',' << t.upstream_queue << ','
        << t.burst << ',' << t.period << ',' << t.jitter << ',' << t.count;
  std::string k = key.str();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
  }
  Curve beta = cbs_service_curve(model_.link(q.link).port, q.queue);
  Rational result;
  for (long periods = 4;; periods *= 2) {
    Curve a = arrival(q, terms, periods);
    Deviation d;
    try {
      d = h_dev_detail(a, beta);
    } catch (const InstabilityError& e) {
      throw UnstableQueueError(model_.queue_name(q), e.arrival_rate, e.service_rate);
    }
    if (a.exact_at(d.at) || periods >= kMaxExactPeriods) {
      result = d.delay;
      break;
    }
  }
  std::lock_guard<std::mutex> lock(mutex_);
  if (cache_.size() >= kCacheLimit) cache_.clear();
  cache_.emplace(std::move(k), result);
  return result;
}

size_t DelayCalculator::cache_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

ArrivalTerm make_term(const FlowSpec& flow, const std::vector<QueueRef>& queues,
                      size_t hop, const Rational& jitter) {
  ArrivalTerm t;
  if (hop > 0) {
    t.input_link = queues[hop - 1].link;
    t.upstream_queue = queues[hop - 1].queue;
  }
  t.burst = flow.burst();
  t.period = flow.cmi;
  t.jitter = jitter;
  return t;
}

ReservationEngine::ReservationEngine(NetworkModel model, ShapingMode mode)
    : model_(std::move(model)), calc_(model_, mode) {
  model_.validate();
}

std::vector<FlowHop> ReservationEngine::advertise(const FlowSpec& flow) const {
  model_.validate_flow(flow);
  std::vector<QueueRef> queues = model_.flow_queues(flow);
  std::vector<FlowHop> hops;
  Rational acc_max = 0, acc_min = 0;
  for (QueueRef q : queues) {
    hops.push_back({q, acc_max, acc_min});
    acc_max += model_.queue(q).budget_max_delay;
    acc_min += flow.min_frame / model_.link(q.link).capacity();
  }
  return hops;
}

std::vector<ArrivalTerm> ReservationEngine::terms(const State& s, QueueRef q) const {
  std::vector<ArrivalTerm> out;
  auto it = s.queues.find(q);
  if (it == s.queues.end()) return out;
  for (const std::string& id : it->second.flows) {
    const AdmittedFlow& f = s.flows.at(id);
    std::vector<QueueRef> queues;
    for (const auto& h : f.hops) queues.push_back(h.queue);
    for (size_t i = 0; i < f.hops.size(); ++i)
      if (f.hops[i].queue == q) out.push_back(make_term(f.spec, queues, i, f.hops[i].acc_max - f.hops[i].acc_min));
  }
  return out;
}

Curve ReservationEngine::queue_arrival(QueueRef q) const {
  return calc_.arrival(q, terms(state_, q), kDefaultFoldPeriods);
}

Rational ReservationEngine::worst_case_delay(QueueRef q) { return calc_.delay(q, terms(state_, q)); }

Rational ReservationEngine::current_delay(QueueRef q) const {
  auto it = state_.queues.find(q);
  return it == state_.queues.end() ? Rational(0) : it->second.delay;
}

Decision ReservationEngine::subscribe(const FlowSpec& flow) {
  Decision d;
  if (state_.flows.count(flow.id)) {
    d.reason = "flow '" + flow.id + "' is already reserved";
    return d;
  }
  std::vector<FlowHop> hops;
  try {
    hops = advertise(flow);
  } catch (const ConfigError& e) {
    d.reason = e.what();
    return d;
  }
  for (const FlowHop& h : hops) {
    if (flow.max_frame > model_.queue(h.queue).max_frame_same) {
      d.reason = "flow '" + flow.id + "': frame exceeds the maximum frame size of " + model_.queue_name(h.queue);
      return d;
    }
  }
  if (flow.deadline) {
    Rational total = hops.back().acc_max + model_.queue(hops.back().queue).budget_max_delay;
    if (total > *flow.deadline) {
      d.reason = "flow '" + flow.id + "': accumulated budget " + format_us(total) + " us exceeds deadline " +
                 format_us(*flow.deadline) + " us";
      return d;
    }
  }

  State next = state_;
  next.flows[flow.id] = AdmittedFlow{flow, hops};
  std::set<QueueRef> touched;
  for (const FlowHop& h : hops) {
    auto& ids = next.queues[h.queue].flows;
    ids.insert(std::upper_bound(ids.begin(), ids.end(), flow.id), flow.id);
    touched.insert(h.queue);
  }
  for (QueueRef q : touched) {
    Rational delay;
    try {
      delay = calc_.delay(q, terms(next, q));
    } catch (const UnstableQueueError& e) {
      d.reason = e.what();
      return d;
    }
    const Rational& budget = model_.queue(q).budget_max_delay;
    if (delay > budget) d.violations.push_back({q, delay, budget});
    next.queues[q].delay = delay;
  }
  if (!d.violations.empty()) {
    std::ostringstream r;
    r << "flow '" << flow.id << "' violates";
    for (const auto& v : d.violations)
      r << ' ' << model_.queue_name(v.queue) << " (" << format_us(v.delay) << " us > " << format_us(v.budget)
        << " us)";
    d.reason = r.str();
    return d;
  }
  state_ = std::move(next);
  d.admitted = true;
  return d;
}

void ReservationEngine::remove(const std::string& flow_id) {
  auto it = state_.flows.find(flow_id);
  if (it == state_.flows.end()) throw ParameterError("no reserved flow '" + flow_id + "'");
  State next = state_;
  std::set<QueueRef> touched;
  for (const FlowHop& h : it->second.hops) {
    auto& ids = next.queues[h.queue].flows;
    ids.erase(std::remove(ids.begin(), ids.end(), flow_id), ids.end());
    touched.insert(h.queue);
  }
  next.flows.erase(flow_id);
  for (QueueRef q : touched) {
    if (next.queues[q].flows.empty())
      next.queues.erase(q);
    else
      next.queues[q].delay = calc_.delay(q, terms(next, q));
  }
  state_ = std::move(next);
}

std::vector<FlowSpec> ReservationEngine::flow_specs() const {
  std::vector<FlowSpec> out;
  for (const auto& [id, f] : state_.flows) out.push_back(f.spec);
  return out;
}

std::string ReservationEngine::snapshot() const {
  std::ostringstream out;
  out << "mode," << to_string(mode()) << '\n';
  for (const auto& [q, s] : state_.queues) {
    out << "queue," << model_.queue_name(q) << ",flows=" << s.flows.size() << ",delay_ns=" << format_ns(s.delay)
        << ",budget_ns=" << format_ns(model_.queue(q).budget_max_delay) << '\n';
  }
  for (const auto& [id, f] : state_.flows) {
    out << "flow," << id;
    for (const auto& h : f.hops)
      out << ',' << model_.queue_name(h.queue) << '@' << format_ns(h.acc_max) << '/' << format_ns(h.acc_min);
    out << '\n';
  }
  return out.str();
}

std::map<QueueRef, Rational> tight_delays(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                          DelayCalculator& calc) {
  struct Visit {
    size_t flow;
    size_t hop;
  };
  std::vector<std::vector<QueueRef>> paths;
  std::map<QueueRef, std::vector<Visit>> visits;
  std::map<QueueRef, std::set<QueueRef>> next;
  std::map<QueueRef, size_t> indegree;
  for (size_t f = 0; f < flows.size(); ++f) {
    paths.push_back(model.flow_queues(flows[f]));
    const auto& p = paths.back();
    for (size_t h = 0; h < p.size(); ++h) {
      visits[p[h]].push_back({f, h});
      indegree.emplace(p[h], 0);
      if (h > 0 && next[p[h - 1]].insert(p[h]).second) ++indegree[p[h]];
    }
  }
  std::deque<QueueRef> ready;
  for (const auto& [q, n] : indegree)
    if (n == 0) ready.push_back(q);

  std::map<QueueRef, Rational> delay;
  while (!ready.empty()) {
    QueueRef q = ready.front();
    ready.pop_front();
    std::vector<ArrivalTerm> terms;
    for (const Visit& v : visits[q]) {
      const FlowSpec& f = flows[v.flow];
      Rational jitter = 0;
      for (size_t h = 0; h < v.hop; ++h) {
        QueueRef up = paths[v.flow][h];
        jitter += delay.at(up) - f.min_frame / model.link(up.link).capacity();
      }
      if (jitter < 0) jitter = 0;
      terms.push_back(make_term(f, paths[v.flow], v.hop, jitter));
    }
    delay[q] = calc.delay(q, std::move(terms));
    for (QueueRef n : next[q])
      if (--indegree[n] == 0) ready.push_back(n);
  }
  if (delay.size() != indegree.size()) throw ConfigError("queue dependency graph has a cycle");
  return delay;
}

NetworkModel provision_tight_budgets(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                     ShapingMode mode) {
  std::map<QueueRef, Rational> delays;
  {
    DelayCalculator calc(model, mode);
    delays = tight_delays(model, flows, calc);
  }
  NetworkModel out = model;
  for (const auto& [q, d] : delays)
    if (d > 0) out.queue(q).budget_max_delay = d;
  return out;
}

Rational max_path_delay(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                        const std::map<QueueRef, Rational>& delays) {
  Rational worst = 0;
  for (const FlowSpec& f : flows) {
    Rational total = 0;
    for (QueueRef q : model.flow_queues(f)) total += delays.at(q);
    worst = max(worst, total);
  }
  return worst;
}

}  // namespace cbs
