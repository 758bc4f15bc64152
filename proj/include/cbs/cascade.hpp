#pragma once

#include <optional>
#include <vector>

#include "cbs/rational.hpp"

namespace cbs {

// Two-hop recursion in which the cross traffic of level n is the flow of
// interest of level n - 1. Frame sizes in on-wire bits.
struct CascadeParams {
  Rational capacity;    // C
  Rational idle_slope;  // idSl, same on every port
  Rational cmi;
  Rational burst;       // m, FoI data per CMI
  Rational l_max;       // largest lower-priority frame
  Rational frame;       // L, one frame of the FoI and of the cross flows
  // Iteration stops and the level is reported unbounded beyond this burst.
  Rational burst_cap = Rational(1'000'000'000);

  void validate() const;
};

struct CascadeLevel {
  int level = 0;
  Rational cross_burst;  // h^n, burst of each cross flow
  Rational d1;           // delay at the first hop
  Rational b2;           // FoI burst entering the second hop, bits
  Rational d2;           // delay at the second hop
  bool unbounded = false;
};

// Levels 0..levels. Stops after the first unbounded level.
std::vector<CascadeLevel> burstiness_cascade(int levels, const CascadeParams& p);

// Least b with b = m * ceil((dd + b / idSl) / CMI), or nullopt if the
// iteration exceeds the cap.
std::optional<Rational> cascade_burst(const Rational& dd, const CascadeParams& p);

}  // namespace cbs
