#include "cbs/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace cbs {

StdHopParams std_params_for_queue(const NetworkModel& net, const std::vector<FlowSpec>& flows, QueueRef q) {
  const Link& link = net.link(q.link);
  const QueueConfig& qc = net.queue(q);
  StdHopParams p;
  p.capacity = link.capacity();
  p.idle_slope_p7 = qc.idle_slope;
  p.l_max = qc.max_frame_lower;
  std::set<std::string> inputs;
  bool any = false;
  for (const FlowSpec& f : flows) {
    auto queues = net.flow_queues(f);
    for (size_t h = 0; h < queues.size(); ++h) {
      if (queues[h] != q) continue;
      inputs.insert(h == 0 ? std::string() : f.path[h - 1]);
      if (!any || f.cmi < p.cmi) p.cmi = f.cmi;
      if (!any || f.max_frame > p.l_foi) p.l_foi = f.max_frame;
      if (!any || f.max_frame < p.l_min) p.l_min = f.max_frame;
      any = true;
    }
  }
  if (!any) throw ParameterError("queue " + net.queue_name(q) + " carries no flows");
  p.num_input_links = static_cast<long>(inputs.size());
  return p;
}

CompareRow compare_row(int talkers, const Rational& horizon, ShapingMode mode, const FaninOptions& o) {
  Scenario s = fanin_counterexample(talkers, o);
  QueueRef last = s.marks.at("last");
  CompareRow r;
  r.talkers = talkers;
  SimTrace t = run(s.sim_config(horizon));
  r.sim_max = t.queue(last).max_delay;
  StdHopParams p = std_params_for_queue(s.network, s.flows, last);
  StdBound ba = delay_ba(p);
  r.ba = ba.delay;
  r.ba_negative = ba.same_priority_negative;
  r.annex_l = delay_annex_l(p, 7);
  try {
    r.plenary = delay_plenary(p);
  } catch (const ParameterError&) {
    r.plenary_defined = false;
  }
  DelayCalculator calc(s.network, mode);
  r.ssrp = tight_delays(s.network, s.flows, calc).at(last);
  return r;
}

std::string compare_csv_line(const CompareRow& r) {
  std::ostringstream out;
  out << r.talkers << ',' << format_ns(r.sim_max) << ',' << format_ns(r.ba) << ',' << format_ns(r.annex_l) << ','
      << (r.plenary_defined ? format_ns(r.plenary) : std::string("nan")) << ',' << format_ns(r.ssrp);
  return out.str();
}

std::vector<Rational> line_run(const Scenario& line, const LineOptions& o, std::uint64_t seed, DelayCalculator& calc) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, o.switches);
  std::vector<FlowSpec> flows;
  std::vector<Rational> e2e;
  for (int n = 0;; ++n) {
    FlowSpec f = line_flow(o, pick(rng), "f" + std::to_string(n));
    flows.push_back(f);
    std::map<QueueRef, Rational> delays;
    try {
      delays = tight_delays(line.network, flows, calc);
    } catch (const UnstableQueueError&) {
      break;
    }
    e2e.push_back(max_path_delay(line.network, flows, delays));
  }
  return e2e;
}

int flows_within(const std::vector<Rational>& e2e, const Rational& deadline) {
  int n = 0;
  while (n < static_cast<int>(e2e.size()) && e2e[static_cast<size_t>(n)] <= deadline) ++n;
  return n;
}

std::vector<SweepStats> admit_sweep(const LineOptions& o, int runs, std::uint64_t seed,
                                    const std::vector<Rational>& deadlines, const std::vector<ShapingMode>& modes) {
  Scenario line = line_topology(o);
  std::vector<SweepStats> out;
  for (ShapingMode mode : modes) {
    DelayCalculator calc(line.network, mode);
    std::vector<std::vector<int>> counts(deadlines.size());
    for (int r = 0; r < runs; ++r) {
      std::vector<Rational> e2e = line_run(line, o, seed + static_cast<std::uint64_t>(r), calc);
      for (size_t d = 0; d < deadlines.size(); ++d) counts[d].push_back(flows_within(e2e, deadlines[d]));
    }
    for (size_t d = 0; d < deadlines.size(); ++d) {
      double sum = 0, sq = 0;
      for (int c : counts[d]) {
        sum += c;
        sq += static_cast<double>(c) * c;
      }
      double n = static_cast<double>(counts[d].size());
      SweepStats s;
      s.deadline = deadlines[d];
      s.mode = mode;
      s.mean = n > 0 ? sum / n : 0;
      s.stddev = n > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1))) : 0;
      out.push_back(s);
    }
  }
  return out;
}

std::vector<ProfinetRow> profinet_report(int lines, const std::vector<std::uint64_t>& seeds, const Rational& horizon,
                                         ShapingMode mode, const ProfinetOptions& o) {
  static const char* names[] = {"io1", "io2", "io3", "central"};
  std::vector<ProfinetRow> rows;
  {
    Scenario s = profinet(lines, o);
    DelayCalculator calc(s.network, mode);
    auto d = tight_delays(s.network, s.flows, calc);
    for (const char* n : names) rows.push_back({n, d.at(s.marks.at(n)), {}});
  }
  for (std::uint64_t seed : seeds) {
    ProfinetOptions po = o;
    po.phase_seed = seed;
    Scenario s = profinet(lines, po);
    SimTrace t = run(s.sim_config(horizon, seed));
    for (size_t i = 0; i < rows.size(); ++i) rows[i].measured.push_back(t.queue(s.marks.at(names[i])).max_delay);
  }
  return rows;
}

namespace {

void check_state(ReservationEngine& engine, const Scenario& s, const std::vector<Rational>& phases,
                 const Rational& horizon, SafetyResult& out) {
  std::vector<FlowSpec> flows = engine.flow_specs();
  if (flows.empty()) return;
  SimConfig c;
  c.network = &engine.model();
  for (const FlowSpec& f : flows) {
    Rational phase = 0;
    if (!phases.empty())
      for (size_t i = 0; i < s.flows.size(); ++i)
        if (s.flows[i].id == f.id) phase = phases[i];
    c.periodic.push_back({f, phase});
  }
  c.injectors = s.injectors;
  c.horizon = horizon;
  SimTrace t = run(c);
  ++out.states;
  for (const QueueTrace& q : t.queues) {
    if (q.frames == 0) continue;
    Rational bound = engine.worst_case_delay(q.queue);
    out.tightest = std::max(out.tightest, to_double(Rational(q.max_delay / bound)));
    if (q.max_delay > bound)
      out.violations.push_back("queue " + engine.model().queue_name(q.queue) + ": measured " +
                               format_ns(q.max_delay) + " ns > bound " + format_ns(bound) + " ns");
  }
  for (size_t i = 0; i < flows.size(); ++i) {
    Rational budget = 0;
    for (QueueRef q : engine.model().flow_queues(flows[i])) budget += engine.model().queue(q).budget_max_delay;
    if (t.flows[i].max_e2e > budget)
      out.violations.push_back("flow " + flows[i].id + ": measured " + format_ns(t.flows[i].max_e2e) +
                               " ns > path budget " + format_ns(budget) + " ns");
  }
}

}  // namespace

SafetyResult safety_trial(std::uint64_t seed, const Rational& horizon, ShapingMode mode, int check_every,
                          const RandomTopologyOptions& o) {
  std::mt19937_64 rng(seed);
  Scenario s = random_topology(rng, o);
  ReservationEngine engine(s.network, mode);
  std::vector<size_t> order(s.flows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution drop(0.15);
  SafetyResult out;
  for (size_t k = 0; k < order.size(); ++k) {
    Decision d = engine.subscribe(s.flows[order[k]]);
    if (d.admitted) {
      ++out.admitted;
      if (drop(rng)) {
        const auto& admitted = engine.flows();
        auto it = admitted.begin();
        std::advance(it, std::uniform_int_distribution<long>(0, static_cast<long>(admitted.size()) - 1)(rng));
        engine.remove(it->first);
      }
    } else {
      ++out.rejected;
    }
    if (check_every > 0 && (k + 1) % static_cast<size_t>(check_every) == 0 && k + 1 < order.size())
      check_state(engine, s, {}, horizon, out);
  }
  check_state(engine, s, {}, horizon, out);
  check_state(engine, s, s.phases, horizon, out);
  return out;
}

void apply_cascade_phases(Scenario& s, int level, const CascadePhases& phases, const Rational& cmi) {
  s.phases.clear();
  for (const FlowSpec& f : s.flows) {
    std::string name = f.path.front();
    int lv = level;
    Rational offset = 0;
    while (name.size() > 2 && (name.compare(0, 2, "a.") == 0 || name.compare(0, 2, "b.") == 0)) {
      offset += phases.at(static_cast<size_t>(lv))[name[0] == 'a' ? 1 : 2];
      name = name.substr(2);
      --lv;
    }
    if (name == "src")
      offset += phases.at(static_cast<size_t>(lv))[0];
    else if (name == "x1")
      offset += phases.at(0)[1];
    else if (name == "x2")
      offset += phases.at(0)[2];
    s.phases.push_back(offset - cmi * Rational(floor(Rational(offset / cmi))));
  }
}

namespace {

Rational cascade_s2(int level, const CascadePhases& phases, const Rational& horizon,
                    const CascadeTopologyOptions& o) {
  Scenario s = cascade_topology(level, o);
  apply_cascade_phases(s, level, phases, o.cmi);
  return run(s.sim_config(horizon)).queue(s.marks.at("s2")).max_delay;
}

}  // namespace

CascadePhases search_cascade_phases(int levels, const Rational& search_horizon, int grid,
                                    const CascadeTopologyOptions& o) {
  if (grid < 1) throw ParameterError("grid must be positive");
  CascadePhases phases;
  for (int n = 0; n <= levels; ++n) {
    phases.push_back({Rational(0), Rational(0), Rational(0)});
    Rational best = cascade_s2(n, phases, search_horizon, o);
    for (int round = 0; round < 3; ++round) {
      bool improved = false;
      for (size_t lv = phases.size(); lv-- > 0;) {
        for (size_t k = 0; k < 3; ++k) {
          for (int g = 0; g < grid; ++g) {
            CascadePhases trial = phases;
            trial[lv][k] = o.cmi * ratio(g, grid);
            if (trial[lv][k] == phases[lv][k]) continue;
            Rational d = cascade_s2(n, trial, search_horizon, o);
            if (d > best) {
              best = d;
              phases = trial;
              improved = true;
            }
          }
        }
      }
      if (!improved) break;
    }
  }
  return phases;
}

int longest_burst(const SimTrace& t, size_t link, int flow, const Rational& frame, const Rational& idle_slope) {
  Rational gap = frame / idle_slope;
  int best = 0, run = 0;
  std::optional<Rational> prev;
  for (const Transmission& x : t.transmissions) {
    if (x.link != link || x.flow != flow) continue;
    run = prev && x.start - *prev <= gap ? run + 1 : 1;
    best = std::max(best, run);
    prev = x.start;
  }
  return best;
}

std::vector<CascadeSimRow> cascade_simulation(int levels, const Rational& horizon, const CascadePhases& phases,
                                              const CascadeTopologyOptions& o) {
  std::vector<CascadeSimRow> out;
  for (int n = 0; n <= levels; ++n) {
    Scenario s = cascade_topology(n, o);
    apply_cascade_phases(s, n, phases, o.cmi);
    SimConfig c = s.sim_config(horizon);
    c.record_transmissions = true;
    SimTrace t = run(c);
    const FlowSpec& foi = s.flows.front();
    QueueRef s2 = s.marks.at("s2");
    int burst = longest_burst(t, s2.link, 0, foi.max_frame, s.network.queue(s2).idle_slope);
    out.push_back({n, t.queue(s.marks.at("s1")).max_delay, t.queue(s2).max_delay, burst});
  }
  return out;
}

}  // namespace cbs
