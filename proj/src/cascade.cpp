#include "cbs/cascade.hpp"

namespace cbs {

void CascadeParams::validate() const {
  if (capacity <= 0) throw ParameterError("capacity must be positive");
  if (idle_slope <= 0 || idle_slope >= capacity) throw ParameterError("idleSlope must lie in (0, C)");
  if (cmi <= 0) throw ParameterError("CMI must be positive");
  if (burst < 0 || l_max < 0 || frame <= 0) throw ParameterError("invalid frame or burst size");
}

std::optional<Rational> cascade_burst(const Rational& dd, const CascadeParams& p) {
  if (p.burst == 0) return Rational(0);
  Rational b = p.burst * Rational(ceil(Rational(dd / p.cmi)));
  while (b <= p.burst_cap) {
    Rational next = p.burst * Rational(ceil(Rational((dd + b / p.idle_slope) / p.cmi)));
    if (next == b) return b;
    b = next;
  }
  return std::nullopt;
}

std::vector<CascadeLevel> burstiness_cascade(int levels, const CascadeParams& p) {
  p.validate();
  if (levels < 0) throw ParameterError("levels must be non-negative");
  const Rational other = (p.l_max + p.frame) / p.capacity;
  std::vector<CascadeLevel> out;
  Rational cross = p.frame;
  for (int n = 0; n <= levels; ++n) {
    CascadeLevel lv;
    lv.level = n;
    lv.cross_burst = cross;
    lv.d1 = cross / p.idle_slope + other;
    auto b2 = cascade_burst(lv.d1 - p.frame / p.capacity, p);
    if (!b2) {
      lv.unbounded = true;
      out.push_back(lv);
      break;
    }
    lv.b2 = *b2;
    lv.d2 = (lv.b2 + cross) / p.idle_slope + other;
    out.push_back(lv);
    cross = max(lv.b2, p.frame);
  }
  return out;
}

}  // namespace cbs
