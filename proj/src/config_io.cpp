#include "cbs/config_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cbs {

using nlohmann::json;

bool NetworkFile::operator==(const NetworkFile& o) const {
  if (!(network == o.network && flows == o.flows)) return false;
  if (injectors.size() != o.injectors.size() || memoryless.size() != o.memoryless.size()) return false;
  for (size_t i = 0; i < injectors.size(); ++i) {
    const auto &a = injectors[i], &b = o.injectors[i];
    if (a.from != b.from || a.to != b.to || a.frame != b.frame || a.lead != b.lead) return false;
  }
  for (size_t i = 0; i < memoryless.size(); ++i) {
    const auto &a = memoryless[i], &b = o.memoryless[i];
    if (a.id != b.id || a.path != b.path || a.frame != b.frame || a.mean_interval != b.mean_interval ||
        a.start != b.start)
      return false;
  }
  return true;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

const json& field(const json& obj, const std::string& where, const char* key) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

Rational to_rational(const json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(v.dump());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  fail(where, "expected an integer or a decimal string");
}

Rational rational_field(const json& obj, const std::string& where, const char* key) {
  return to_rational(field(obj, where, key), where + "." + key);
}

std::string string_field(const json& obj, const std::string& where, const char* key) {
  const json& v = field(obj, where, key);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

long integer_field(const json& obj, const std::string& where, const char* key, long fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) fail(where + "." + key, "expected an integer");
  return it->get<long>();
}

// Size given either as on-wire bits (`<stem>_bits`) or as frame bytes
// without preamble, SFD and IPG (`<stem>_bytes`).
Rational frame_field(const json& obj, const std::string& where, const std::string& stem) {
  auto bits = obj.find(stem + "_bits");
  auto bytes = obj.find(stem + "_bytes");
  if (bits != obj.end() && bytes != obj.end()) fail(where, "give either " + stem + "_bits or " + stem + "_bytes");
  if (bits != obj.end()) return to_rational(*bits, where + "." + stem + "_bits");
  if (bytes != obj.end()) {
    if (!bytes->is_number_integer()) fail(where + "." + stem + "_bytes", "expected an integer");
    return on_wire_bits(bytes->get<long>());
  }
  fail(where, "missing field '" + stem + "_bits'");
}

std::vector<std::string> path_field(const json& obj, const std::string& where) {
  const json& p = field(obj, where, "path");
  if (!p.is_array()) fail(where + ".path", "expected an array of node ids");
  std::vector<std::string> out;
  for (const auto& n : p) {
    if (!n.is_string()) fail(where + ".path", "expected node ids");
    out.push_back(n.get<std::string>());
  }
  return out;
}

std::string text(const Rational& r) { return r.get_str(); }

}  // namespace

NetworkFile parse_network(const std::string& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed document: ") + e.what());
  }
  if (string_field(doc, "document", "schema") != kSchema)
    fail("document.schema", std::string("expected \"") + kSchema + "\"");

  NetworkFile out;
  const json& nodes = field(doc, "document", "nodes");
  if (!nodes.is_array()) fail("nodes", "expected an array");
  for (size_t i = 0; i < nodes.size(); ++i) {
    std::string where = "nodes[" + std::to_string(i) + "]";
    std::string kind = string_field(nodes[i], where, "kind");
    NodeKind k;
    if (kind == "bridge")
      k = NodeKind::Bridge;
    else if (kind == "end_station")
      k = NodeKind::EndStation;
    else
      fail(where + ".kind", "expected bridge or end_station");
    try {
      out.network.add_node(string_field(nodes[i], where, "id"), k);
    } catch (const ConfigError& e) {
      fail(where, e.what());
    }
  }

  const json& links = field(doc, "document", "links");
  if (!links.is_array()) fail("links", "expected an array");
  for (size_t i = 0; i < links.size(); ++i) {
    const json& l = links[i];
    std::string where = "links[" + std::to_string(i) + "]";
    std::string from = string_field(l, where, "from"), to = string_field(l, where, "to");
    where += " (" + from + "->" + to + ")";
    PortConfig port;
    port.capacity = rational_field(l, where, "capacity");
    port.best_effort_max_frame = frame_field(l, where, "best_effort_max_frame");
    const json& queues = field(l, where, "queues");
    if (!queues.is_array()) fail(where + ".queues", "expected an array");
    for (size_t q = 0; q < queues.size(); ++q) {
      std::string qw = where + ".queues[" + std::to_string(q) + "]";
      QueueConfig c;
      c.idle_slope = rational_field(queues[q], qw, "idle_slope");
      c.budget_max_delay = rational_field(queues[q], qw, "budget");
      c.max_frame_same = frame_field(queues[q], qw, "max_frame");
      c.min_frame_same = frame_field(queues[q], qw, "min_frame");
      port.queues.push_back(c);
    }
    const json& map = field(l, where, "priority_map");
    if (!map.is_object()) fail(where + ".priority_map", "expected an object of priority -> queue index");
    for (const auto& [key, value] : map.items()) {
      int prio = -1;
      try {
        prio = std::stoi(key);
      } catch (const std::exception&) {
      }
      if (prio < 0 || prio >= kPriorities || std::to_string(prio) != key)
        fail(where + ".priority_map", "bad priority '" + key + "'");
      if (!value.is_number_integer()) fail(where + ".priority_map." + key, "expected a queue index");
      port.priority_map[static_cast<size_t>(prio)] = value.get<int>();
    }
    derive_lower_frames(port);
    try {
      out.network.add_link(from, to, port);
    } catch (const ConfigError& e) {
      fail("links[" + std::to_string(i) + "]", e.what());
    }
  }

  if (doc.contains("flows")) {
    const json& flows = doc["flows"];
    if (!flows.is_array()) fail("flows", "expected an array");
    for (size_t i = 0; i < flows.size(); ++i) {
      const json& f = flows[i];
      std::string where = "flows[" + std::to_string(i) + "]";
      FlowSpec s;
      s.id = string_field(f, where, "id");
      where += " (" + s.id + ")";
      s.priority = static_cast<int>(integer_field(f, where, "priority", 7));
      s.cmi = rational_field(f, where, "cmi");
      s.max_frame = frame_field(f, where, "max_frame");
      s.mif = integer_field(f, where, "mif", 1);
      s.min_frame = frame_field(f, where, "min_frame");
      s.path = path_field(f, where);
      if (f.contains("deadline")) s.deadline = to_rational(f["deadline"], where + ".deadline");
      try {
        out.network.validate_flow(s);
      } catch (const ConfigError& e) {
        fail(where, e.what());
      }
      for (const auto& other : out.flows)
        if (other.id == s.id) fail(where, "duplicate flow id");
      out.flows.push_back(std::move(s));
    }
  }

  if (doc.contains("best_effort")) {
    const json& be = doc["best_effort"];
    if (be.contains("injectors")) {
      for (size_t i = 0; i < be["injectors"].size(); ++i) {
        const json& j = be["injectors"][i];
        std::string where = "best_effort.injectors[" + std::to_string(i) + "]";
        BestEffortInjector inj;
        inj.from = string_field(j, where, "from");
        inj.to = string_field(j, where, "to");
        inj.frame = frame_field(j, where, "frame");
        if (j.contains("lead")) inj.lead = to_rational(j["lead"], where + ".lead");
        if (!out.network.find_link(inj.from, inj.to)) fail(where, "no link " + inj.from + "->" + inj.to);
        out.injectors.push_back(inj);
      }
    }
    if (be.contains("memoryless")) {
      for (size_t i = 0; i < be["memoryless"].size(); ++i) {
        const json& j = be["memoryless"][i];
        std::string where = "best_effort.memoryless[" + std::to_string(i) + "]";
        MemorylessSource m;
        m.id = string_field(j, where, "id");
        m.path = path_field(j, where);
        m.frame = frame_field(j, where, "frame");
        m.mean_interval = rational_field(j, where, "mean_interval");
        if (j.contains("start")) m.start = to_rational(j["start"], where + ".start");
        for (size_t k = 0; k + 1 < m.path.size(); ++k)
          if (!out.network.find_link(m.path[k], m.path[k + 1]))
            fail(where, "no link " + m.path[k] + "->" + m.path[k + 1]);
        out.memoryless.push_back(m);
      }
    }
  }
  return out;
}

NetworkFile load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string export_network(const NetworkFile& file) {
  json doc = json::object();
  doc["schema"] = kSchema;
  json nodes = json::array();
  for (const Node& n : file.network.nodes())
    nodes.push_back({{"id", n.id}, {"kind", n.kind == NodeKind::Bridge ? "bridge" : "end_station"}});
  doc["nodes"] = nodes;
  json links = json::array();
  for (const Link& l : file.network.links()) {
    json queues = json::array();
    for (const QueueConfig& q : l.port.queues)
      queues.push_back({{"idle_slope", text(q.idle_slope)},
                        {"budget", text(q.budget_max_delay)},
                        {"max_frame_bits", text(q.max_frame_same)},
                        {"min_frame_bits", text(q.min_frame_same)}});
    json map = json::object();
    for (int p = 0; p < kPriorities; ++p)
      if (l.port.priority_map[static_cast<size_t>(p)] != kBestEffort)
        map[std::to_string(p)] = l.port.priority_map[static_cast<size_t>(p)];
    links.push_back({{"from", l.from},
                     {"to", l.to},
                     {"capacity", text(l.port.capacity)},
                     {"best_effort_max_frame_bits", text(l.port.best_effort_max_frame)},
                     {"queues", queues},
                     {"priority_map", map}});
  }
  doc["links"] = links;
  json flows = json::array();
  for (const FlowSpec& f : file.flows) {
    json j = {{"id", f.id},
              {"priority", f.priority},
              {"cmi", text(f.cmi)},
              {"max_frame_bits", text(f.max_frame)},
              {"mif", f.mif},
              {"min_frame_bits", text(f.min_frame)},
              {"path", f.path}};
    if (f.deadline) j["deadline"] = text(*f.deadline);
    flows.push_back(j);
  }
  doc["flows"] = flows;
  if (!file.injectors.empty() || !file.memoryless.empty()) {
    json be = json::object();
    json inj = json::array();
    for (const auto& i : file.injectors)
      inj.push_back({{"from", i.from}, {"to", i.to}, {"frame_bits", text(i.frame)}, {"lead", text(i.lead)}});
    json mem = json::array();
    for (const auto& m : file.memoryless)
      mem.push_back({{"id", m.id},
                     {"path", m.path},
                     {"frame_bits", text(m.frame)},
                     {"mean_interval", text(m.mean_interval)},
                     {"start", text(m.start)}});
    be["injectors"] = inj;
    be["memoryless"] = mem;
    doc["best_effort"] = be;
  }
  return doc.dump(2) + "\n";
}

}  // namespace cbs
