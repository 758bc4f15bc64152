#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbs/cbs_model.hpp"

namespace cbs {

enum class NodeKind { EndStation, Bridge };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Bridge;

  bool operator==(const Node&) const = default;
};

// Directed physical link; the port sits on `from` and feeds `to`.
struct Link {
  std::string from;
  std::string to;
  PortConfig port;

  const Rational& capacity() const { return port.capacity; }
  bool operator==(const Link&) const = default;
};

// One CBS queue: link index plus queue index on that link's port.
struct QueueRef {
  size_t link = 0;
  size_t queue = 0;

  auto operator<=>(const QueueRef&) const = default;
};

struct FlowSpec {
  std::string id;
  int priority = 7;
  Rational cmi;          // s
  Rational max_frame;    // on-wire bits
  long mif = 1;          // frames per CMI
  Rational min_frame;    // on-wire bits
  std::vector<std::string> path;  // talker ... listener
  std::optional<Rational> deadline;

  Rational burst() const { return max_frame * mif; }
  Rational rate() const { return burst() / cmi; }
  bool operator==(const FlowSpec&) const = default;
};

class NetworkModel {
 public:
  size_t add_node(std::string id, NodeKind kind);
  size_t add_link(const std::string& from, const std::string& to, PortConfig port);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(size_t i) const { return links_.at(i); }
  Link& link(size_t i) { return links_.at(i); }
  const Node& node(const std::string& id) const { return nodes_[node_index(id)]; }

  std::optional<size_t> find_node(const std::string& id) const;
  size_t node_index(const std::string& id) const;  // throws ConfigError
  std::optional<size_t> find_link(const std::string& from, const std::string& to) const;
  size_t link_index(const std::string& from, const std::string& to) const;  // throws ConfigError

  const QueueConfig& queue(QueueRef q) const { return links_.at(q.link).port.queues.at(q.queue); }
  QueueConfig& queue(QueueRef q) { return links_.at(q.link).port.queues.at(q.queue); }
  std::string queue_name(QueueRef q) const;
  std::vector<QueueRef> all_queues() const;

  // Throws ConfigError naming the offending link.
  void validate() const;

  // Queues traversed by the flow, one per hop. Throws ConfigError if the
  // path is broken or a hop maps the priority to best effort.
  std::vector<QueueRef> flow_queues(const FlowSpec& flow) const;
  // flow_queues plus TSpec sanity and rate feasibility at every hop.
  void validate_flow(const FlowSpec& flow) const;

  bool operator==(const NetworkModel& other) const { return nodes_ == other.nodes_ && links_ == other.links_; }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::map<std::string, size_t> node_index_;
  std::map<std::pair<std::string, std::string>, size_t> link_index_;
};

// One priority-7 queue per port plus best effort: the common case of all
// bundled scenarios.
PortConfig single_class_port(const Rational& capacity, const Rational& idle_slope, const Rational& budget,
                             const Rational& max_frame, const Rational& best_effort_frame);

}  // namespace cbs
