// cbslat: latency bounds, admission and simulation for CBS networks.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cbs/cascade.hpp"
#include "cbs/config_io.hpp"
#include "cbs/experiments.hpp"

using namespace cbs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRejected = 2;
constexpr int kExitInvariant = 3;

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string input;
  std::string mode = "link_shaped";
  std::string out;
  std::string horizon = "1";
  std::string single;
  int seeds = 1;
  int levels = 3;
  int talkers = 0;
  int lines = 7;
  int digits = 3;
  bool sweep = false;
  bool simulate = false;
};

std::string ns(const Rational& t, const Options& o) { return format_ns(t, o.digits); }

std::string units(const Options& o) {
  return "# times in ns rounded to " + std::to_string(o.digits) + " decimals, data in bits\n";
}

int queue_priority(const NetworkModel& net, QueueRef q) {
  const auto& map = net.link(q.link).port.priority_map;
  for (int p = kPriorities - 1; p >= 0; --p)
    if (map[static_cast<size_t>(p)] == static_cast<int>(q.queue)) return p;
  return -1;
}

template <class F>
std::string or_nan(F&& f) {
  try {
    return f();
  } catch (const ParameterError&) {
    return "nan";
  }
}

std::string cmd_bounds(const Options& o) {
  NetworkFile file = load_network(o.input);
  ReservationEngine engine(file.network, parse_mode(o.mode));
  std::ostringstream out;
  out << units(o);
  for (const FlowSpec& f : file.flows) {
    Decision d = engine.subscribe(f);
    if (!d.admitted) out << "# rejected " << f.id << ": " << d.reason << '\n';
  }
  std::vector<FlowSpec> flows = engine.flow_specs();
  const NetworkModel& net = engine.model();
  out << "# node,port,priority,flows,ssrp_ns,budget_ns,ba_ns,annexl_ns,plenary_ns\n";
  for (QueueRef q : net.all_queues()) {
    int n = 0;
    for (const FlowSpec& f : flows)
      for (QueueRef h : net.flow_queues(f)) n += h == q;
    if (n == 0) continue;
    const Link& l = net.link(q.link);
    int prio = queue_priority(net, q);
    StdHopParams p = std_params_for_queue(net, flows, q);
    out << l.from << ',' << l.to << ',' << prio << ',' << n << ',' << ns(engine.worst_case_delay(q), o) << ','
        << ns(net.queue(q).budget_max_delay, o) << ',' << or_nan([&] { return ns(delay_ba(p).delay, o); }) << ','
        << or_nan([&] { return ns(delay_annex_l(p, prio), o); }) << ','
        << or_nan([&] { return ns(delay_plenary(p), o); }) << '\n';
  }
  out << "# flow,hops,bound_ns,path_budget_ns\n";
  for (const FlowSpec& f : flows) {
    Rational bound = 0, budget = 0;
    auto queues = net.flow_queues(f);
    for (QueueRef q : queues) {
      bound += engine.worst_case_delay(q);
      budget += net.queue(q).budget_max_delay;
    }
    out << f.id << ',' << queues.size() << ',' << ns(bound, o) << ',' << ns(budget, o) << '\n';
  }
  return out.str();
}

std::string cmd_admit_sweep(const Options& o, const CLI::App& app) {
  std::vector<Rational> deadlines;
  for (long us = 0; us <= 1000; us += 25) deadlines.push_back(micros(us));
  std::vector<ShapingMode> modes{ShapingMode::LinkShaped, ShapingMode::NeighborShaped};
  if (app.count("--mode")) modes = {parse_mode(o.mode)};
  std::ostringstream out;
  out << units(o) << "# line topology, " << o.seeds << " seeded runs per mode\n"
      << "# deadline_ns,mode,mean_flows,stddev\n";
  for (const SweepStats& s : admit_sweep(LineOptions{}, o.seeds, 1, deadlines, modes))
    out << ns(s.deadline, o) << ',' << to_string(s.mode) << ',' << s.mean << ',' << s.stddev << '\n';
  return out.str();
}

// Subscribes the file's flows in order. With `single`, that flow goes last
// and its rejection is reported through the exit code.
std::string cmd_admit(const Options& o, int& code) {
  NetworkFile file = load_network(o.input);
  std::vector<FlowSpec> order;
  const FlowSpec* candidate = nullptr;
  for (const FlowSpec& f : file.flows) {
    if (!o.single.empty() && f.id == o.single)
      candidate = &f;
    else
      order.push_back(f);
  }
  if (!o.single.empty()) {
    if (!candidate) throw ConfigError("no flow '" + o.single + "' in " + o.input);
    order.push_back(*candidate);
  }
  ReservationEngine engine(file.network, parse_mode(o.mode));
  std::ostringstream out;
  out << units(o) << "# flow,decision,detail\n";
  int admitted = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    const FlowSpec& f = order[i];
    Decision d = engine.subscribe(f);
    admitted += d.admitted;
    out << f.id << ',' << (d.admitted ? "admit" : "reject") << ',';
    if (!d.violations.empty()) {
      for (size_t k = 0; k < d.violations.size(); ++k) {
        const Violation& v = d.violations[k];
        out << (k ? ";" : "") << engine.model().queue_name(v.queue) << " delay_ns=" << ns(v.delay, o)
            << " budget_ns=" << ns(v.budget, o);
      }
    } else {
      out << d.reason;
    }
    out << '\n';
    if (candidate && i + 1 == order.size() && !d.admitted) code = kExitRejected;
  }
  out << "# admitted " << admitted << " of " << order.size() << '\n';
  return out.str();
}

std::string cmd_simulate(const Options& o) {
  NetworkFile file = load_network(o.input);
  SimConfig c;
  c.network = &file.network;
  c.periodic = aligned_sources(file.flows);
  c.injectors = file.injectors;
  c.memoryless = file.memoryless;
  c.horizon = parse_rational(o.horizon);
  c.validate_credit = true;
  std::ostringstream out;
  out << units(o);
  for (int s = 1; s <= o.seeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    SimTrace t = run(c);
    if (t.credit_violations)
      throw InvariantViolation(std::to_string(t.credit_violations) + " credit values left their bounds");
    out << "# seed " << s << ", horizon " << o.horizon << " s, " << t.events << " events\n"
        << "# node,port,priority,max_queue_delay_ns,credit_min,credit_max\n"
        << t.queue_csv(file.network) << "# flow,max_e2e_ns\n"
        << t.flow_csv();
  }
  return out.str();
}

std::string cmd_compare(const Options& o) {
  int lo = o.talkers > 0 ? o.talkers : 1, hi = o.talkers > 0 ? o.talkers : fanin_max_talkers();
  Rational horizon = parse_rational(o.horizon);
  std::ostringstream out;
  out << units(o) << "# fan-in network, horizon " << o.horizon << " s, mode " << o.mode << '\n'
      << "# N,sim_max_ns,ba_ns,annexl_ns,plenary_ns,ssrp_ns\n";
  for (int n = lo; n <= hi; ++n) {
    CompareRow r = compare_row(n, horizon, parse_mode(o.mode));
    if (r.sim_max > r.ssrp) throw InvariantViolation("N=" + std::to_string(n) + ": simulated delay exceeds the bound");
    out << r.talkers << ',' << ns(r.sim_max, o) << ',' << ns(r.ba, o) << ',' << ns(r.annex_l, o) << ','
        << (r.plenary_defined ? ns(r.plenary, o) : std::string("nan")) << ',' << ns(r.ssrp, o) << '\n';
  }
  return out.str();
}

CascadeParams cascade_params(const CascadeTopologyOptions& t) {
  Rational frame = t.capacity * t.source_fraction * t.cmi;
  return {t.capacity, t.capacity * t.idle_fraction, t.cmi, frame, t.best_effort_frame, frame};
}

std::string cmd_cascade(const Options& o) {
  CascadeTopologyOptions t;
  std::ostringstream out;
  out << units(o) << "# level,cross_burst_bits,d1_ns,b2_bits,d2_ns\n";
  for (const CascadeLevel& l : burstiness_cascade(o.levels, cascade_params(t))) {
    out << l.level << ',' << l.cross_burst.get_str() << ',' << ns(l.d1, o) << ',';
    if (l.unbounded)
      out << "inf,inf\n";
    else
      out << l.b2.get_str() << ',' << ns(l.d2, o) << '\n';
  }
  if (o.simulate) {
    CascadePhases phases = search_cascade_phases(o.levels, ratio(1, 50), 25, t);
    out << "# simulated, horizon " << o.horizon << " s; phase offsets in ns per level: src,a,b\n";
    for (size_t k = 0; k < phases.size(); ++k)
      out << "# phases " << k << ": " << ns(phases[k][0], o) << ',' << ns(phases[k][1], o) << ','
          << ns(phases[k][2], o) << '\n';
    out << "# level,s1_max_ns,s2_max_ns,foi_burst_frames\n";
    for (const CascadeSimRow& r : cascade_simulation(o.levels, parse_rational(o.horizon), phases, t))
      out << r.level << ',' << ns(r.s1_max, o) << ',' << ns(r.s2_max, o) << ',' << r.foi_burst << '\n';
  }
  return out.str();
}

std::string cmd_profinet(const Options& o, bool aligned) {
  ProfinetOptions p;
  if (!aligned) p.phase_jitter = micros(125);
  std::vector<std::uint64_t> seeds;
  for (int s = 1; s <= o.seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  std::ostringstream out;
  out << units(o) << "# " << o.lines << " lines, horizon " << o.horizon << " s, phase jitter "
      << format_us(p.phase_jitter) << " us\n# switch,bound_ns";
  for (auto s : seeds) out << ",measured_ns_seed" << s;
  out << '\n';
  for (const ProfinetRow& r : profinet_report(o.lines, seeds, parse_rational(o.horizon), parse_mode(o.mode), p)) {
    out << r.name << ',' << ns(r.bound, o);
    for (const Rational& m : r.measured) {
      if (m > r.bound) throw InvariantViolation(r.name + ": measured delay exceeds the bound");
      out << ',' << ns(m, o);
    }
    out << '\n';
  }
  return out.str();
}

// The fan-in network as a loadable document.
std::string cmd_fanin(const Options& o) {
  int n = o.talkers > 0 ? o.talkers : fanin_max_talkers();
  Scenario s = fanin_counterexample(n);
  // budgets become each queue's own delay so the exported flows all fit
  NetworkFile file{provision_tight_budgets(s.network, s.flows, parse_mode(o.mode)), s.flows, s.injectors,
                   s.memoryless};
  return export_network(file);
}

void emit(const std::string& text, const Options& o) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw ConfigError("cannot write '" + o.out + "'");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case latency bounds, admission control and simulation for CBS networks"};
  app.require_subcommand(1);
  Options o;
  bool aligned = false;
  auto common = [&](CLI::App* c) {
    c->add_option("--mode", o.mode, "link_shaped or neighbor_shaped")
        ->check(CLI::IsMember({"link_shaped", "neighbor_shaped"}));
    c->add_option("--out", o.out, "write output to this file");
    c->add_option("--digits", o.digits, "decimals of ns values")->check(CLI::Range(0, 9));
  };

  auto* bounds = app.add_subcommand("bounds", "admit the file's flows and print per-queue bounds");
  bounds->add_option("file", o.input)->required()->check(CLI::ExistingFile);
  common(bounds);

  auto* admit = app.add_subcommand("admit", "subscribe flows in order, or run the line-topology sweep");
  admit->add_option("file", o.input)->check(CLI::ExistingFile);
  admit->add_option("--single", o.single, "subscribe this flow last; exit 2 if it is rejected");
  admit->add_flag("--sweep", o.sweep, "admitted flows per deadline on the line topology");
  admit->add_option("--seeds", o.seeds, "sweep runs per mode")->check(CLI::PositiveNumber);
  common(admit);

  auto* simulate = app.add_subcommand("simulate", "simulate the file's flows with aligned releases");
  simulate->add_option("file", o.input)->required()->check(CLI::ExistingFile);
  simulate->add_option("--horizon", o.horizon, "simulated seconds");
  simulate->add_option("--seeds", o.seeds, "seeds 1..n for memoryless sources")->check(CLI::PositiveNumber);
  common(simulate);

  auto* compare = app.add_subcommand("compare", "simulation vs. standards vs. SSRP on the fan-in network");
  compare->add_option("--talkers", o.talkers, "single talker count (default 1..13)")->check(CLI::Range(1, 13));
  compare->add_option("--horizon", o.horizon, "simulated seconds");
  common(compare);

  auto* cascade = app.add_subcommand("cascade", "burstiness cascade table, optionally simulated");
  cascade->add_option("--levels", o.levels, "recursion levels")->check(CLI::NonNegativeNumber);
  cascade->add_flag("--simulate", o.simulate, "also search release offsets and simulate every level");
  cascade->add_option("--horizon", o.horizon, "simulated seconds per level");
  common(cascade);

  auto* profinet = app.add_subcommand("profinet", "per-switch bounds and measured delays of the PROFINET lines");
  profinet->add_option("--lines", o.lines, "number of lines")->check(CLI::PositiveNumber);
  profinet->add_option("--seeds", o.seeds, "seeds 1..n")->check(CLI::PositiveNumber);
  profinet->add_option("--horizon", o.horizon, "simulated seconds");
  profinet->add_flag("--aligned", aligned, "release every talker at time zero");
  common(profinet);

  auto* fanin = app.add_subcommand("fanin", "export the fan-in network document");
  fanin->add_option("--talkers", o.talkers, "talker count (default 13)")->check(CLI::Range(1, 13));
  common(fanin);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  int code = kExitOk;
  try {
    std::string text;
    if (bounds->parsed()) {
      text = cmd_bounds(o);
    } else if (admit->parsed()) {
      if (o.sweep)
        text = cmd_admit_sweep(o, *admit);
      else if (o.input.empty())
        throw ConfigError("admit needs a network file or --sweep");
      else
        text = cmd_admit(o, code);
    } else if (simulate->parsed()) {
      text = cmd_simulate(o);
    } else if (compare->parsed()) {
      text = cmd_compare(o);
    } else if (cascade->parsed()) {
      if (!cascade->count("--levels")) o.levels = o.simulate ? 3 : 20;
      text = cmd_cascade(o);
    } else if (profinet->parsed()) {
      text = cmd_profinet(o, aligned);
    } else if (fanin->parsed()) {
      text = cmd_fanin(o);
    }
    emit(text, o);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return code;
}
