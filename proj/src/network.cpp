#include "cbs/network.hpp"

namespace cbs {

size_t NetworkModel::add_node(std::string id, NodeKind kind) {
  if (id.empty()) throw ConfigError("node id must not be empty");
  if (node_index_.count(id)) throw ConfigError("duplicate node '" + id + "'");
  node_index_[id] = nodes_.size();
  nodes_.push_back(Node{std::move(id), kind});
  return nodes_.size() - 1;
}

size_t NetworkModel::add_link(const std::string& from, const std::string& to, PortConfig port) {
  std::string name = "link " + from + "->" + to;
  if (!find_node(from)) throw ConfigError(name + ": unknown node '" + from + "'");
  if (!find_node(to)) throw ConfigError(name + ": unknown node '" + to + "'");
  if (from == to) throw ConfigError(name + ": self loop");
  if (link_index_.count({from, to})) throw ConfigError(name + ": duplicate link");
  try {
    port.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  }
  link_index_[{from, to}] = links_.size();
  links_.push_back(Link{from, to, std::move(port)});
  return links_.size() - 1;
}

std::optional<size_t> NetworkModel::find_node(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

size_t NetworkModel::node_index(const std::string& id) const {
  auto i = find_node(id);
  if (!i) throw ConfigError("unknown node '" + id + "'");
  return *i;
}

std::optional<size_t> NetworkModel::find_link(const std::string& from, const std::string& to) const {
  auto it = link_index_.find({from, to});
  if (it == link_index_.end()) return std::nullopt;
  return it->second;
}

size_t NetworkModel::link_index(const std::string& from, const std::string& to) const {
  auto i = find_link(from, to);
  if (!i) throw ConfigError("no link " + from + "->" + to);
  return *i;
}

std::string NetworkModel::queue_name(QueueRef q) const {
  const Link& l = links_.at(q.link);
  return l.from + "->" + l.to + "#" + std::to_string(q.queue);
}

std::vector<QueueRef> NetworkModel::all_queues() const {
  std::vector<QueueRef> out;
  for (size_t l = 0; l < links_.size(); ++l)
    for (size_t q = 0; q < links_[l].port.queues.size(); ++q) out.push_back({l, q});
  return out;
}

void NetworkModel::validate() const {
  for (const Link& l : links_) {
    try {
      l.port.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("link " + l.from + "->" + l.to + ": " + e.what());
    }
  }
}

std::vector<QueueRef> NetworkModel::flow_queues(const FlowSpec& flow) const {
  std::string name = "flow '" + flow.id + "'";
  if (flow.path.size() < 2) throw ConfigError(name + ": path needs a talker and a listener");
  if (flow.priority < 0 || flow.priority >= kPriorities) throw ConfigError(name + ": priority out of range");
  std::vector<QueueRef> out;
  for (size_t i = 0; i + 1 < flow.path.size(); ++i) {
    auto l = find_link(flow.path[i], flow.path[i + 1]);
    if (!l) throw ConfigError(name + ": no link " + flow.path[i] + "->" + flow.path[i + 1]);
    int q = links_[*l].port.priority_map[static_cast<size_t>(flow.priority)];
    if (q == kBestEffort)
      throw ConfigError(name + ": priority " + std::to_string(flow.priority) + " is not reserved on " +
                        flow.path[i] + "->" + flow.path[i + 1]);
    out.push_back({*l, static_cast<size_t>(q)});
  }
  return out;
}

void NetworkModel::validate_flow(const FlowSpec& flow) const {
  std::string name = "flow '" + flow.id + "'";
  if (flow.cmi <= 0) throw ConfigError(name + ": CMI must be positive");
  if (flow.mif < 1) throw ConfigError(name + ": MIF must be at least 1");
  if (flow.min_frame <= 0 || flow.max_frame < flow.min_frame)
    throw ConfigError(name + ": frame sizes must satisfy max >= min > 0");
  for (QueueRef q : flow_queues(flow)) {
    if (flow.rate() > queue(q).idle_slope)
      throw ConfigError(name + ": rate " + to_decimal(flow.rate(), 3) + " bit/s exceeds idleSlope at " +
                        queue_name(q));
  }
}

PortConfig single_class_port(const Rational& capacity, const Rational& idle_slope, const Rational& budget,
                             const Rational& max_frame, const Rational& best_effort_frame) {
  PortConfig p;
  p.capacity = capacity;
  p.best_effort_max_frame = best_effort_frame;
  QueueConfig q;
  q.idle_slope = idle_slope;
  q.budget_max_delay = budget;
  q.max_frame_same = max_frame;
  q.min_frame_same = min(Rational(84 * 8), max_frame);
  p.queues.push_back(q);
  p.priority_map[7] = 0;
  derive_lower_frames(p);
  return p;
}

}  // namespace cbs
