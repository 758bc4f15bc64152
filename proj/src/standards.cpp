#include "cbs/standards.hpp"

#include <algorithm>

#include "cbs/cbs_model.hpp"

namespace cbs {

void StdHopParams::validate() const {
  if (capacity <= 0) throw ParameterError("capacity must be positive");
  if (idle_slope_p7 <= 0 || idle_slope_p7 >= capacity)
    throw ParameterError("idleSlope must lie strictly between 0 and the capacity");
  if (cmi <= 0) throw ParameterError("CMI must be positive");
  if (l_max <= 0 || l_foi <= 0 || l_min <= 0) throw ParameterError("frame sizes must be positive");
  if (num_input_links < 1) throw ParameterError("at least one input link is required");
  if (t_proc < 0 || t_prop < 0 || t_in_queue < 0 || t_sf < 0 || t_perm < 0)
    throw ParameterError("hardware delays must be non-negative");
}

StdBound delay_ba(const StdHopParams& p) {
  p.validate();
  const Rational& c = p.capacity;
  Rational same = (p.idle_slope_p7 / c * p.cmi - p.l_foi / c) * (c / p.idle_slope_p7);
  StdBound b;
  b.same_priority_negative = same < 0;
  b.delay = p.t_proc + p.l_max / c + same + (p.l_foi - kIpgBits) / c;
  return b;
}

long default_fanin_frames(const StdHopParams& p) {
  Rational same = p.l_same_p7 > 0 ? p.l_same_p7 : p.l_foi;
  mpz_class reservable = floor(Rational(p.idle_slope_p7 * p.cmi / same));
  long frames = std::min<long>(p.num_input_links, reservable.get_si());
  return std::max<long>(frames - 1, 0);
}

Rational delay_annex_l(const StdHopParams& p, int priority, std::optional<long> fanin_frames) {
  p.validate();
  if (priority != 7 && priority != 6) throw ParameterError("Annex L bound is only available for priorities 7 and 6");
  const Rational& c = p.capacity;
  Rational l7 = p.l_same_p7 > 0 ? p.l_same_p7 : p.l_foi;
  Rational t_queue;
  Rational drain;  // rate at which fan-in frames of this class leave the port
  if (priority == 7) {
    t_queue = p.l_max / c;
    drain = p.idle_slope_p7;
  } else {
    t_queue = (p.l_max + l7) / (c - p.idle_slope_p7);
    drain = c - p.idle_slope_p7;
  }
  long frames = fanin_frames ? *fanin_frames : default_fanin_frames(p);
  if (frames < 0) throw ParameterError("fan-in frame count must be non-negative");
  Rational same = priority == 7 ? l7 : p.l_foi;
  Rational t_fanin = Rational(frames) * same / drain;
  Rational t_int = t_queue + max(t_fanin, p.t_perm);
  return p.t_in_queue + t_int + p.l_foi / c + p.t_prop + p.t_sf;
}

PlenaryTerms plenary_terms(const StdHopParams& p) {
  p.validate();
  if (p.capacity != 100'000'000)
    throw ParameterError("plenary formula is only validated for 100 Mbit/s links");
  Rational t_oct = Rational(8) / p.capacity;
  PlenaryTerms t;
  t.r_max = floor(Rational(p.cmi / t_oct * (p.idle_slope_p7 / p.capacity)));
  Rational foi = p.l_foi / 8, lmin = p.l_min / 8;
  Rational spare = Rational(t.r_max) - foi;
  if (spare <= 0) throw ParameterError("reserved octets do not exceed the frame of interest");
  mpz_class by_size = floor(Rational(spare / lmin));
  t.n = std::min<mpz_class>(mpz_class(p.num_input_links), by_size);
  if (t.n == 0) throw ParameterError("plenary fan-in count is zero");
  return t;
}

Rational delay_plenary(const StdHopParams& p) {
  PlenaryTerms t = plenary_terms(p);
  Rational t_oct = Rational(8) / p.capacity;
  Rational foi = p.l_foi / 8;
  Rational spare = Rational(t.r_max) - foi;
  Rational octets = p.l_max / 8 + 2 * spare - Rational(ceil(Rational(spare / Rational(t.n)))) + foi;
  return octets * t_oct;
}

}  // namespace cbs
