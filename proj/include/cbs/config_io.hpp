#pragma once

#include <string>
#include <vector>

#include "cbs/simulator.hpp"

namespace cbs {

inline constexpr const char* kSchema = "cbs-network/1";

// Everything a network document describes.
struct NetworkFile {
  NetworkModel network;
  std::vector<FlowSpec> flows;
  std::vector<BestEffortInjector> injectors;
  std::vector<MemorylessSource> memoryless;

  bool operator==(const NetworkFile& o) const;
};

// Throws ConfigError naming the offending entity and field.
NetworkFile parse_network(const std::string& text);
NetworkFile load_network(const std::string& path);

// Canonical form: parse_network(export_network(x)) == x.
std::string export_network(const NetworkFile& file);

}  // namespace cbs
